use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::activation::sigmoid;
use crate::error::{check_shape, NnError, Result};
use crate::params::Parameters;
use crate::tensor::{gemm, matmul_transposed, Tensor2};

/// Gated recurrent unit.
///
/// Gate convention, with `H` the hidden size:
///
/// ```text
/// z  = sigmoid(Wz x + Uz h + bz)          update gate
/// r  = sigmoid(Wr x + Ur h + br)          reset gate
/// c  = tanh(Wc x + Uc (r * h) + bc)       candidate
/// h' = (1 - z) * h + z * c
/// ```
///
/// `w_input` stacks `[Wz; Wr; Wc]` (`3H x in`), `w_hidden_gates` stacks
/// `[Uz; Ur]` (`2H x H`), `w_hidden_candidate` is `Uc` (`H x H`) and `bias`
/// is `[bz, br, bc]` (`1 x 3H`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GruCell {
    pub w_input: Tensor2,
    pub w_hidden_gates: Tensor2,
    pub w_hidden_candidate: Tensor2,
    pub bias: Tensor2,
}

/// Intermediates of a single batched step.
#[derive(Clone, Debug)]
pub struct GruCache {
    input: Tensor2,
    hidden: Tensor2,
    update: Tensor2,
    reset: Tensor2,
    reset_hidden: Tensor2,
    candidate: Tensor2,
}

/// Intermediates of a whole sequence unrolled from a zero hidden state.
#[derive(Clone, Debug)]
pub struct GruSeqCache {
    steps: Vec<GruCache>,
}

impl GruCell {
    pub fn new<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        // Every gate row sees `input_size + hidden_size` inputs.
        let bound = 1.0 / ((input_size + hidden_size).max(1) as f64).sqrt();
        let mut t = |r: usize, c: usize| {
            Tensor2::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-bound..=bound)).collect())
                .expect("sized by construction")
        };
        Self {
            w_input: t(3 * hidden_size, input_size),
            w_hidden_gates: t(2 * hidden_size, hidden_size),
            w_hidden_candidate: t(hidden_size, hidden_size),
            bias: t(1, 3 * hidden_size),
        }
    }

    pub fn zeroed(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Tensor2::zeros(3 * hidden_size, input_size),
            w_hidden_gates: Tensor2::zeros(2 * hidden_size, hidden_size),
            w_hidden_candidate: Tensor2::zeros(hidden_size, hidden_size),
            bias: Tensor2::zeros(1, 3 * hidden_size),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hidden_candidate.rows()
    }

    /// One recurrence step without caching.
    pub fn step(&self, input: &Tensor2, hidden: &Tensor2) -> Result<Tensor2> {
        Ok(self.step_cached(input, hidden)?.0)
    }

    pub fn step_cached(&self, input: &Tensor2, hidden: &Tensor2) -> Result<(Tensor2, GruCache)> {
        let h = self.hidden_size();
        let n = input.rows();
        check_shape("GruCell input", (n, self.input_size()), input.shape())?;
        check_shape("GruCell hidden", (n, h), hidden.shape())?;

        let gx = matmul_transposed(input, &self.w_input)?;
        let gh = matmul_transposed(hidden, &self.w_hidden_gates)?;
        let bias = self.bias.data();

        let mut update = Tensor2::zeros(n, h);
        let mut reset = Tensor2::zeros(n, h);
        let mut reset_hidden = Tensor2::zeros(n, h);
        for row in 0..n {
            let gx_row = gx.row(row);
            let gh_row = gh.row(row);
            let h_row = hidden.row(row);
            let z_row = update.row_mut(row);
            for j in 0..h {
                z_row[j] = sigmoid(gx_row[j] + gh_row[j] + bias[j]);
            }
            let r_row = reset.row_mut(row);
            for j in 0..h {
                r_row[j] = sigmoid(gx_row[h + j] + gh_row[h + j] + bias[h + j]);
            }
            let rh_row = reset_hidden.row_mut(row);
            for j in 0..h {
                rh_row[j] = r_row[j] * h_row[j];
            }
        }
        let gc = matmul_transposed(&reset_hidden, &self.w_hidden_candidate)?;
        let mut candidate = Tensor2::zeros(n, h);
        let mut next = Tensor2::zeros(n, h);
        for row in 0..n {
            let gx_row = gx.row(row);
            let gc_row = gc.row(row);
            let c_row = candidate.row_mut(row);
            for j in 0..h {
                c_row[j] = (gx_row[2 * h + j] + gc_row[j] + bias[2 * h + j]).tanh();
            }
            let z_row = update.row(row);
            let h_row = hidden.row(row);
            let out = next.row_mut(row);
            for j in 0..h {
                out[j] = (1.0 - z_row[j]) * h_row[j] + z_row[j] * c_row[j];
            }
        }
        let cache = GruCache {
            input: input.clone(),
            hidden: hidden.clone(),
            update,
            reset,
            reset_hidden,
            candidate,
        };
        Ok((next, cache))
    }

    /// Backward through one step. Accumulates parameter gradients into
    /// `grads` (ordered as [`Parameters::params`]) and returns
    /// `(d_input, d_hidden)`.
    pub fn step_backward(
        &self,
        cache: &GruCache,
        d_next: &Tensor2,
        grads: Option<&mut [Tensor2]>,
    ) -> Result<(Tensor2, Tensor2)> {
        let h = self.hidden_size();
        let n = cache.input.rows();
        check_shape("GruCell::step_backward", (n, h), d_next.shape())?;

        // d_gates = [dz_pre, dr_pre, dc_pre]
        let mut d_gates = Tensor2::zeros(n, 3 * h);
        let mut d_hidden = Tensor2::zeros(n, h);
        for row in 0..n {
            let dn = d_next.row(row);
            let z = cache.update.row(row);
            let c = cache.candidate.row(row);
            let hp = cache.hidden.row(row);
            let dg = d_gates.row_mut(row);
            let dh = d_hidden.row_mut(row);
            for j in 0..h {
                let dz = dn[j] * (c[j] - hp[j]);
                dg[j] = dz * z[j] * (1.0 - z[j]);
                dg[2 * h + j] = dn[j] * z[j] * (1.0 - c[j] * c[j]);
                dh[j] = dn[j] * (1.0 - z[j]);
            }
        }
        let dc_pre = d_gates.slice_cols(2 * h, 3 * h);
        let mut d_reset_hidden = Tensor2::zeros(n, h);
        gemm(1.0, &dc_pre, false, &self.w_hidden_candidate, false, 0.0, &mut d_reset_hidden)?;
        for row in 0..n {
            let drh = d_reset_hidden.row(row);
            let r = cache.reset.row(row);
            let hp = cache.hidden.row(row);
            let dh = d_hidden.row_mut(row);
            let dg = d_gates.row_mut(row);
            for j in 0..h {
                dh[j] += drh[j] * r[j];
                let dr = drh[j] * hp[j];
                dg[h + j] = dr * r[j] * (1.0 - r[j]);
            }
        }
        let d_gates_zr = d_gates.slice_cols(0, 2 * h);

        if let Some(grads) = grads {
            check_shape("GruCell grads", (4, 1), (grads.len(), 1))?;
            gemm(1.0, &d_gates, true, &cache.input, false, 1.0, &mut grads[0])?;
            gemm(1.0, &d_gates_zr, true, &cache.hidden, false, 1.0, &mut grads[1])?;
            gemm(1.0, &dc_pre, true, &cache.reset_hidden, false, 1.0, &mut grads[2])?;
            grads[3].add_assign(&d_gates.column_sums())?;
        }

        gemm(1.0, &d_gates_zr, false, &self.w_hidden_gates, false, 1.0, &mut d_hidden)?;
        let mut d_input = Tensor2::zeros(n, self.input_size());
        gemm(1.0, &d_gates, false, &self.w_input, false, 0.0, &mut d_input)?;
        if !d_input.is_finite() || !d_hidden.is_finite() {
            return Err(NnError::NonFinite("GruCell::step_backward"));
        }
        Ok((d_input, d_hidden))
    }

    /// Runs the cell over `inputs` (one `N x in` matrix per time step, in
    /// temporal order) from a zero hidden state and returns the final hidden
    /// state.
    pub fn forward_sequence(&self, inputs: &[Tensor2]) -> Result<Tensor2> {
        let n = inputs.first().map_or(0, Tensor2::rows);
        let mut hidden = Tensor2::zeros(n, self.hidden_size());
        for x in inputs {
            hidden = self.step(x, &hidden)?;
        }
        Ok(hidden)
    }

    pub fn forward_sequence_cached(&self, inputs: &[Tensor2]) -> Result<(Tensor2, GruSeqCache)> {
        let n = inputs.first().map_or(0, Tensor2::rows);
        let mut hidden = Tensor2::zeros(n, self.hidden_size());
        let mut steps = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (next, cache) = self.step_cached(x, &hidden)?;
            steps.push(cache);
            hidden = next;
        }
        Ok((hidden, GruSeqCache { steps }))
    }

    /// Backpropagation through time from a gradient on the final hidden
    /// state. Returns parameter gradients (when requested) and the gradient
    /// with respect to each input step.
    pub fn sequence_backward(
        &self,
        cache: &GruSeqCache,
        d_final: &Tensor2,
        want_params: bool,
    ) -> Result<(Option<Vec<Tensor2>>, Vec<Tensor2>)> {
        let mut grads = want_params.then(|| self.zero_grads());
        let mut d_hidden = d_final.clone();
        let mut d_inputs = vec![Tensor2::zeros(0, 0); cache.steps.len()];
        for (t, step) in cache.steps.iter().enumerate().rev() {
            let (dx, dh) = self.step_backward(step, &d_hidden, grads.as_deref_mut())?;
            d_inputs[t] = dx;
            d_hidden = dh;
        }
        Ok((grads, d_inputs))
    }

    pub fn zero_grads(&self) -> Vec<Tensor2> {
        self.params()
            .iter()
            .map(|p| Tensor2::zeros(p.rows(), p.cols()))
            .collect()
    }
}

impl Parameters for GruCell {
    fn params(&self) -> Vec<&Tensor2> {
        vec![
            &self.w_input,
            &self.w_hidden_gates,
            &self.w_hidden_candidate,
            &self.bias,
        ]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![
            &mut self.w_input,
            &mut self.w_hidden_gates,
            &mut self.w_hidden_candidate,
            &mut self.bias,
        ]
    }

    fn param_names(&self) -> Vec<String> {
        ["w_input", "w_hidden_gates", "w_hidden_candidate", "bias"]
            .map(String::from)
            .to_vec()
    }
}
