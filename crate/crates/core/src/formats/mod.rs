//! On-disk formats: the VSIN insole binary, pose and mocap CSV, and the
//! dataset manifest. Readers are pure functions of their input.

mod dataset;
mod delimited;
mod insole;
mod manifest;

use thiserror::Error;

pub use dataset::{load_manifest_file, load_trial};
pub use delimited::{
    read_mocap_csv, read_pose_csv, write_mocap_csv, write_pose_csv, MOCAP_COLUMNS, POSE_COLUMNS,
};
pub use insole::{read_insole, write_insole, VSIN_FRAME_BYTES, VSIN_HEADER_BYTES, VSIN_MAGIC};
pub use manifest::{read_manifest, write_manifest};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not an insole file")]
    NotInsole,
    #[error("truncated header")]
    TruncatedHeader,
    #[error("unsupported VSIN version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported layout: {sensors} sensors × {channels} channels")]
    BadLayout { sensors: u8, channels: u8 },
    #[error("invalid sample rate {0}")]
    InvalidSampleRate(f32),
    #[error("truncated at frame {frame}")]
    Truncated { frame: u32 },
    #[error("timestamp order violation at frame {frame}")]
    TimestampOrder { frame: usize },
    #[error("{extra} trailing bytes after last frame")]
    TrailingBytes { extra: usize },
    #[error("expected 30 channels, found {found}")]
    ChannelCount { found: usize },
    #[error("too many frames for a VSIN file: {0}")]
    TooManyFrames(usize),
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: bad header column {column}: expected {expected:?}, found {found:?}")]
    BadHeader {
        row: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("row {row}, column {column}: cannot parse {text:?} as a number")]
    Number {
        row: usize,
        column: usize,
        text: String,
    },
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("empty file")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown subject in trial {trial}: {subject}")]
    UnknownSubject { trial: String, subject: String },
    #[error("duplicate {kind} id {id:?}")]
    Duplicate { kind: &'static str, id: String },
    #[error(transparent)]
    Core(#[from] crate::CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<FormatError>,
    },
}

impl FormatError {
    /// Attach the offending file's path to an error.
    pub fn in_file(self, path: impl Into<String>) -> Self {
        FormatError::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
