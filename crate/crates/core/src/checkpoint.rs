//! Parameter checkpoints: one JSON document holding a header (kind,
//! architecture, feature dimension, seed, parameter layout) and the flat
//! parameter array in declaration order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::nn::ParamStore;

pub const FORMAT: &str = "usib-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub architecture: Value,
    pub feature_dim: usize,
    pub seed: u64,
    pub layout: Vec<(String, Vec<usize>)>,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(
        kind: &str,
        architecture: Value,
        feature_dim: usize,
        seed: u64,
        store: &ParamStore,
    ) -> Self {
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            kind: kind.into(),
            architecture,
            feature_dim,
            seed,
            layout: store.layout(),
            params: store.flatten(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)
            .map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
        if ck.format != FORMAT {
            return Err(Error::Checkpoint(format!("unknown format `{}`", ck.format)));
        }
        if ck.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (expected {VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks kind and layout, then copies the values into `store`.
    pub fn restore_into(&self, kind: &str, store: &mut ParamStore) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds a `{}`, expected `{kind}`",
                self.kind
            )));
        }
        if self.layout != store.layout() {
            return Err(Error::Checkpoint(
                "parameter layout does not match the architecture".into(),
            ));
        }
        store.load_flat(&self.params)
    }
}
