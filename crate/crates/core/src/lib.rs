pub mod autodiff;
pub mod baselines;
pub mod checkpoint;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod explainer;
pub mod graph;
pub mod info_theory;
pub mod nn;
pub mod synthetic;

pub use error::{Error, Result};
