use crate::error::{check_shape, Result};
use crate::tensor::Tensor2;

/// Mean squared error over all entries.
pub fn mse(prediction: &Tensor2, target: &Tensor2) -> Result<f64> {
    check_shape("mse", prediction.shape(), target.shape())?;
    let n = prediction.data().len().max(1) as f64;
    Ok(prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

/// Gradient of [`mse`] with respect to `prediction`.
pub fn mse_grad(prediction: &Tensor2, target: &Tensor2) -> Result<Tensor2> {
    check_shape("mse_grad", prediction.shape(), target.shape())?;
    let n = prediction.data().len().max(1) as f64;
    let data = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect();
    Tensor2::from_vec(prediction.rows(), prediction.cols(), data)
}
