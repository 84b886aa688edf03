//! Synthetic gait oracle.
//!
//! Generates insole, pose and motion-capture streams for walking, running,
//! sit-to-stand, stand-to-sit and quiet standing from a continuous-time
//! signal model, together with a closed-form knee adduction moment. Because
//! the ground truth is an explicit function of the emitted signals, every
//! downstream stage can be checked against it.

mod dataset;
mod model;
mod oracle;
mod params;
mod pose;
mod subject;
mod trial;

use thiserror::Error;

pub use dataset::{dataset_digest, gen_dataset, read_offsets, trial_seed, GeneratedDataset, OFFSETS_FILE};
pub use model::{TrialModel, STANCE_SHAPE_MEAN};
pub use oracle::{kam_oracle, KAM_ANGLE_COEF, KAM_LEVER_ARM_M, KAM_SCALE};
pub use params::{GenParams, NoiseParams, TrialCounts};
pub use subject::gen_subject;
pub use trial::{gen_trial, GeneratedTrial, INSOLE_RATE_HZ, MAX_OFFSET_US, MOCAP_RATE_HZ, POSE_RATE_HZ};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Core(#[from] gaitforge_core::CoreError),
    #[error(transparent)]
    Format(#[from] gaitforge_core::formats::FormatError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("offsets file: {0}")]
    Offsets(#[from] serde_json::Error),
}
