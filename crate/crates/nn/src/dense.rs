use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{check_shape, NnError, Result};
use crate::params::Parameters;
use crate::tensor::{gemm, matmul_transposed, Tensor2};

/// Fully connected layer, `y = activation(x W^T + b)`.
///
/// `weight` is `out x in`, `bias` is `1 x out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Tensor2,
    pub bias: Tensor2,
    pub activation: Activation,
}

/// Intermediates kept from a forward pass.
#[derive(Clone, Debug)]
pub struct DenseCache {
    input: Tensor2,
    output: Tensor2,
}

impl DenseCache {
    pub fn output(&self) -> &Tensor2 {
        &self.output
    }
}

impl DenseLayer {
    /// Fan-in uniform initialization in `[-1/sqrt(in), 1/sqrt(in)]`.
    pub fn new<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let mut sample = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        let weight = Tensor2::from_vec(out_dim, in_dim, sample(out_dim * in_dim))
            .expect("sized by construction");
        let bias = Tensor2::from_vec(1, out_dim, sample(out_dim)).expect("sized by construction");
        Self {
            weight,
            bias,
            activation,
        }
    }

    pub fn from_parts(weight: Tensor2, bias: Tensor2, activation: Activation) -> Result<Self> {
        check_shape("DenseLayer bias", (1, weight.rows()), bias.shape())?;
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, input: &Tensor2) -> Result<Tensor2> {
        check_shape(
            "DenseLayer::forward input",
            (input.rows(), self.in_dim()),
            input.shape(),
        )?;
        let mut z = matmul_transposed(input, &self.weight)?;
        let act = self.activation;
        let bias = self.bias.data();
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(bias) {
                *v = act.apply(*v + b);
            }
        }
        Ok(z)
    }

    pub fn forward_cached(&self, input: &Tensor2) -> Result<(Tensor2, DenseCache)> {
        let output = self.forward(input)?;
        let cache = DenseCache {
            input: input.clone(),
            output: output.clone(),
        };
        Ok((output, cache))
    }

    /// Gradients `[dW, db]` and the input gradient for upstream `d_output`.
    pub fn backward(&self, cache: &DenseCache, d_output: &Tensor2) -> Result<(Vec<Tensor2>, Tensor2)> {
        let (grads, dx) = self.backward_inner(cache, d_output, true)?;
        Ok((grads.expect("requested"), dx))
    }

    /// Input gradient only; skips the weight-gradient product.
    pub fn backward_input(&self, cache: &DenseCache, d_output: &Tensor2) -> Result<Tensor2> {
        Ok(self.backward_inner(cache, d_output, false)?.1)
    }

    fn backward_inner(
        &self,
        cache: &DenseCache,
        d_output: &Tensor2,
        want_params: bool,
    ) -> Result<(Option<Vec<Tensor2>>, Tensor2)> {
        check_shape("DenseLayer::backward", cache.output.shape(), d_output.shape())?;
        let act = self.activation;
        let mut dz = d_output.clone();
        if act != Activation::Identity {
            for (g, y) in dz.data_mut().iter_mut().zip(cache.output.data()) {
                *g *= act.derivative_from_output(*y);
            }
        }
        let grads = if want_params {
            let mut dw = Tensor2::zeros(self.out_dim(), self.in_dim());
            gemm(1.0, &dz, true, &cache.input, false, 0.0, &mut dw)?;
            Some(vec![dw, dz.column_sums()])
        } else {
            None
        };
        let mut dx = Tensor2::zeros(dz.rows(), self.in_dim());
        gemm(1.0, &dz, false, &self.weight, false, 0.0, &mut dx)?;
        if !dx.is_finite() {
            return Err(NnError::NonFinite("DenseLayer::backward"));
        }
        Ok((grads, dx))
    }
}

impl Parameters for DenseLayer {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.weight, &mut self.bias]
    }

    fn param_names(&self) -> Vec<String> {
        vec!["weight".into(), "bias".into()]
    }
}
