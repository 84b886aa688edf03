//! End-to-end tasks on a gait dataset: loading and synchronizing trials,
//! assembling classification windows and stride samples, training the
//! two-stream activity classifier and the per-activity knee adduction moment
//! regressors, and scoring both.

mod batch;
pub mod io;
pub mod classifier;
pub mod data;
pub mod ensemble;
pub mod grid;
pub mod kam;
pub mod metrics;
pub mod sampler;
mod standardize;
pub mod tasks;
pub mod windows;

use thiserror::Error;

pub use classifier::{train_classifier, ClassifierConfig, TrainedClassifier};
pub use data::{load_dataset, sync_trial, Dataset, SyncedTrial};
pub use ensemble::{average_probs, ensemble_predict, pair_windows, ClassifierEnsemble};
pub use grid::{grid_search, GridResult};
pub use kam::{evaluate_kam, extract_kam_samples, train_kam, KamConfig, KamModel, StrideSample};
pub use metrics::{pearson_r, ClassMetrics, KamMetrics, MeanStd, StrideRow};
pub use sampler::{class_weights, sampler_weights, WeightedSampler};
pub use standardize::Standardizer;
pub use windows::{build_class_windows, ClassWindow, Modality, WindowSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] gaitforge_core::CoreError),
    #[error(transparent)]
    Format(#[from] gaitforge_core::formats::FormatError),
    #[error("{context}: {source}")]
    Dsp {
        context: String,
        #[source]
        source: gaitforge_dsp::DspError,
    },
    #[error(transparent)]
    Nn(#[from] gaitforge_nn::NnError),
    #[error("{0}")]
    Data(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl PipelineError {
    pub(crate) fn dsp(context: impl Into<String>, source: gaitforge_dsp::DspError) -> Self {
        PipelineError::Dsp {
            context: context.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than by the caller.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, PipelineError::Config(_))
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
