use crate::error::{EvalError, Result};

/// Exponential moving average: `s_0 = x_0`, `s_k = w s_{k-1} + (1 - w) x_k`.
pub fn ema_smooth(series: &[f64], weight: f64) -> Result<Vec<f64>> {
    let (&first, rest) = series.split_first().ok_or(EvalError::EmptySeries)?;
    let mut out = Vec::with_capacity(series.len());
    out.push(first);
    let mut s = first;
    for &x in rest {
        s = weight * s + (1.0 - weight) * x;
        out.push(s);
    }
    Ok(out)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
