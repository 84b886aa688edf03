//! Shared domain model for the gaitforge pipeline.
//!
//! Holds the sensor/pose/mocap stream types, the dataset manifest, subject-level
//! splitting, physical normalization of joint moments, and the on-disk formats
//! (`formats`) used to exchange all of the above.

pub mod error;
pub mod formats;
pub mod manifest;
pub mod split;
pub mod stream;
pub mod subject;
pub mod trial;
pub mod units;
pub mod validate;

pub use error::CoreError;
pub use manifest::{Manifest, StreamRef, TrialEntry};
pub use split::{make_split, Split, SplitMember, SplitRatios};
pub use stream::{
    channel_index, Axis, InsoleFrame, InsoleStream, Keypoint, KeypointId, MocapFrame, MocapStream,
    PoseFrame, PoseStream, Sensor, N_AXES, N_CHANNELS, N_KEYPOINTS, N_SENSORS,
};
pub use subject::{Activity, Sex, Subject};
pub use trial::Trial;
pub use units::{kam_to_pct_bwht, STANDARD_GRAVITY};
pub use validate::{validate_trial, Violation};
