use serde::{Deserialize, Serialize};

use crate::{Activity, Subject};

/// Relative file path of a stream plus its nominal sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRef {
    pub path: String,
    pub rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub id: String,
    pub subject_id: String,
    pub activity: Activity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insole: Option<StreamRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<StreamRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mocap: Option<StreamRef>,
}

impl TrialEntry {
    pub fn stream_refs(&self) -> impl Iterator<Item = &StreamRef> {
        self.insole
            .iter()
            .chain(self.pose.iter())
            .chain(self.mocap.iter())
    }
}

/// Dataset index: who was recorded and which files hold each trial.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: Vec<Subject>,
    pub trials: Vec<TrialEntry>,
}

impl Manifest {
    pub fn subject(&self, id: &str) -> Option<&Subject> {
        self.subjects.iter().find(|s| s.id == id)
    }

    pub fn trial(&self, id: &str) -> Option<&TrialEntry> {
        self.trials.iter().find(|t| t.id == id)
    }

    pub fn subject_ids(&self) -> Vec<String> {
        self.subjects.iter().map(|s| s.id.clone()).collect()
    }
}
