use crate::error::{check_shape, Result};
use crate::tensor::Tensor2;

/// Uniform access to a model's trainable tensors.
///
/// `params`, `params_mut` and `param_names` must enumerate tensors in the
/// same order; gradients produced by the model's backward pass follow that
/// order as well.
pub trait Parameters {
    fn params(&self) -> Vec<&Tensor2>;
    fn params_mut(&mut self) -> Vec<&mut Tensor2>;
    fn param_names(&self) -> Vec<String>;

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.data().len()).sum()
    }

    /// Copies every parameter from `other`, which must have identical shapes.
    fn copy_params_from(&mut self, other: &Self) -> Result<()>
    where
        Self: Sized,
    {
        let src = other.params();
        let dst = self.params_mut();
        check_shape("copy_params_from", (src.len(), 1), (dst.len(), 1))?;
        for (d, s) in dst.into_iter().zip(src) {
            check_shape("copy_params_from", d.shape(), s.shape())?;
            d.data_mut().copy_from_slice(s.data());
        }
        Ok(())
    }

    /// Flattened copy of all parameters in declaration order.
    fn flat_params(&self) -> Vec<f64> {
        self.params()
            .iter()
            .flat_map(|p| p.data().iter().copied())
            .collect()
    }
}

/// Largest elementwise absolute difference between two parameter sets.
pub fn params_max_abs_diff<P: Parameters>(a: &P, b: &P) -> f64 {
    a.params()
        .iter()
        .zip(b.params())
        .flat_map(|(x, y)| x.data().iter().zip(y.data()).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
