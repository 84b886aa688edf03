//! Recurrent networks trained from scratch: GRU and LSTM layers, dense
//! layers, losses, Adam, dropout, learning-rate scheduling and early
//! stopping. Every layer has a hand-written backward pass; [`gradcheck`]
//! verifies them against central finite differences.
//!
//! Sequences are laid out time-major as `(T, B, features)`. All arithmetic is
//! `f64` and single-threaded, so training is bitwise reproducible for a fixed
//! seed.

pub mod checkpoint;
mod config;
mod dense;
mod dropout;
pub mod gradcheck;
mod gru;
mod loss;
mod lstm;
mod model;
mod optim;
mod params;

use thiserror::Error;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use config::TrainConfig;
pub use dense::{Activation, Dense, DenseCache};
pub use dropout::{dropout_apply, dropout_mask};
pub use gru::{Gru, GruCache};
pub use loss::{mae_loss, softmax, softmax_rows, weighted_cross_entropy};
pub use lstm::{Lstm, LstmCache};
pub use model::{GruClassifier, LstmRegressor};
pub use optim::{Adam, EarlyStopping, PlateauScheduler, StopDecision};
pub use params::Params;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("target class {target} out of range for {classes} classes")]
    TargetOutOfRange { target: usize, classes: usize },
    #[error("class weights must be positive")]
    BadWeights,
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn shape_err<T>(what: impl Into<String>) -> Result<T, NnError> {
    Err(NnError::Shape(what.into()))
}
