use serde::{Deserialize, Serialize};

use crate::error::{check_shape, NnError, Result};

/// Dense row-major matrix of `f64`.
///
/// Batches are stored one sample per row; biases are `1 x n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NnError::ShapeMismatch {
                context: "Tensor2::from_vec",
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            check_shape("Tensor2::from_rows", (1, cols), (1, r.len()))?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A single-row matrix.
    pub fn row_vector(values: &[f64]) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += other`, elementwise.
    pub fn add_assign(&mut self, other: &Tensor2) -> Result<()> {
        check_shape("Tensor2::add_assign", self.shape(), other.shape())?;
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Sum over rows, giving a `1 x cols` matrix.
    pub fn column_sums(&self) -> Tensor2 {
        let mut out = Tensor2::zeros(1, self.cols);
        for r in 0..self.rows {
            for (o, v) in out.data.iter_mut().zip(self.row(r)) {
                *o += v;
            }
        }
        out
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Tensor2) -> Result<Tensor2> {
        check_shape(
            "Tensor2::hcat",
            (self.rows, other.cols),
            (other.rows, other.cols),
        )?;
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Tensor2 {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Columns `start..end` as a new matrix.
    pub fn slice_cols(&self, start: usize, end: usize) -> Tensor2 {
        assert!(start <= end && end <= self.cols, "column slice out of range");
        let cols = end - start;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[start..end]);
        }
        Tensor2 {
            rows: self.rows,
            cols,
            data,
        }
    }

    /// `self = (1 - tau) * self + tau * other`.
    pub fn blend_toward(&mut self, other: &Tensor2, tau: f64) -> Result<()> {
        check_shape("Tensor2::blend_toward", self.shape(), other.shape())?;
        for (t, l) in self.data.iter_mut().zip(&other.data) {
            *t = tau * l + (1.0 - tau) * *t;
        }
        Ok(())
    }
}

/// `c = alpha * op(a) * op(b) + beta * c`, where `op` optionally transposes.
pub(crate) fn gemm(
    alpha: f64,
    a: &Tensor2,
    trans_a: bool,
    b: &Tensor2,
    trans_b: bool,
    beta: f64,
    c: &mut Tensor2,
) -> Result<()> {
    let (m, k) = if trans_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    let (kb, n) = if trans_b {
        (b.cols, b.rows)
    } else {
        (b.rows, b.cols)
    };
    check_shape("gemm inner dimension", (m, k), (m, kb))?;
    check_shape("gemm output", (m, n), c.shape())?;
    if m == 0 || n == 0 {
        return Ok(());
    }
    if k == 0 {
        c.scale(beta);
        return Ok(());
    }
    let (rsa, csa) = if trans_a {
        (1, a.cols as isize)
    } else {
        (a.cols as isize, 1)
    };
    let (rsb, csb) = if trans_b {
        (1, b.cols as isize)
    } else {
        (b.cols as isize, 1)
    };
    // SAFETY: strides and dimensions are derived from the owning buffers and
    // were validated above; `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
    Ok(())
}

/// `x * w^T` with `w` stored `out x in`.
pub(crate) fn matmul_transposed(x: &Tensor2, w: &Tensor2) -> Result<Tensor2> {
    let mut out = Tensor2::zeros(x.rows, w.rows);
    gemm(1.0, x, false, w, true, 0.0, &mut out)?;
    Ok(out)
}
