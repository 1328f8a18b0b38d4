//! JSON checkpoints: named tensors (shape plus flat `f64` data) and a
//! metadata block. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces every parameter bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_shape, NnError, Result};
use crate::params::Parameters;
use crate::tensor::Tensor2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl From<&Tensor2> for TensorRecord {
    fn from(t: &Tensor2) -> Self {
        Self {
            shape: [t.rows(), t.cols()],
            data: t.data().to_vec(),
        }
    }
}

impl TryFrom<&TensorRecord> for Tensor2 {
    type Error = NnError;

    fn try_from(r: &TensorRecord) -> Result<Self> {
        Tensor2::from_vec(r.shape[0], r.shape[1], r.data.clone())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    /// Network layout (layer widths, variant, input sizes).
    pub architecture: serde_json::Value,
    pub hyperparams: serde_json::Value,
    pub seed: u64,
    pub step: u64,
    /// Anything else needed for exact resume, e.g. optimizer counters and
    /// RNG states.
    #[serde(default)]
    pub extra: serde_json::Value,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub metadata: CheckpointMeta,
    pub tensors: BTreeMap<String, TensorRecord>,
}

impl Checkpoint {
    pub fn new(metadata: CheckpointMeta) -> Self {
        Self {
            metadata,
            tensors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: &Tensor2) -> Result<()> {
        if !tensor.is_finite() {
            return Err(NnError::NonFinite("Checkpoint::insert"));
        }
        self.tensors.insert(name.into(), tensor.into());
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Result<Tensor2> {
        let record = self
            .tensors
            .get(name)
            .ok_or_else(|| NnError::Checkpoint(format!("missing tensor `{name}`")))?;
        Tensor2::try_from(record)
    }

    /// Stores every parameter of `model` under `prefix.<name>`.
    pub fn insert_params<P: Parameters + ?Sized>(&mut self, prefix: &str, model: &P) -> Result<()> {
        for (name, t) in model.param_names().into_iter().zip(model.params()) {
            self.insert(format!("{prefix}.{name}"), t)?;
        }
        Ok(())
    }

    /// Loads parameters stored by [`Checkpoint::insert_params`], checking
    /// that every shape matches the receiving model.
    pub fn load_params<P: Parameters + ?Sized>(&self, prefix: &str, model: &mut P) -> Result<()> {
        let names = model.param_names();
        for (name, dst) in names.into_iter().zip(model.params_mut()) {
            let key = format!("{prefix}.{name}");
            let src = self.tensor(&key)?;
            check_shape("Checkpoint::load_params", dst.shape(), src.shape())
                .map_err(|e| NnError::Checkpoint(format!("`{key}`: {e}")))?;
            dst.data_mut().copy_from_slice(src.data());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        for (name, r) in &ckpt.tensors {
            if r.data.len() != r.shape[0] * r.shape[1] {
                return Err(NnError::Checkpoint(format!(
                    "tensor `{name}` has {} values for shape {:?}",
                    r.data.len(),
                    r.shape
                )));
            }
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Activation, DenseLayer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layer_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer = DenseLayer::new(5, 4, Activation::Relu, &mut rng);
        let mut ckpt = Checkpoint::new(CheckpointMeta {
            seed: 3,
            step: 17,
            ..Default::default()
        });
        ckpt.insert_params("critic.l1", &layer).unwrap();
        let text = ckpt.to_json().unwrap();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, ckpt);

        let mut other = DenseLayer::new(5, 4, Activation::Relu, &mut rng);
        back.load_params("critic.l1", &mut other).unwrap();
        for (a, b) in layer.flat_params().iter().zip(other.flat_params()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn shape_mismatch_on_load_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layer = DenseLayer::new(3, 2, Activation::Tanh, &mut rng);
        let mut ckpt = Checkpoint::default();
        ckpt.insert_params("a", &layer).unwrap();
        let mut wrong = DenseLayer::new(4, 2, Activation::Tanh, &mut rng);
        assert!(ckpt.load_params("a", &mut wrong).is_err());
        assert!(ckpt.load_params("b", &mut wrong).is_err());
    }

    #[test]
    fn inconsistent_record_is_rejected() {
        let text = r#"{"metadata":{"architecture":null,"hyperparams":null,"seed":0,"step":0},
                       "tensors":{"x":{"shape":[2,2],"data":[1.0]}}}"#;
        assert!(Checkpoint::from_json(text).is_err());
    }
}
