use crate::{Activity, InsoleStream, MocapStream, PoseStream};

/// One recorded trial: a labeled activity with whichever streams were captured.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: String,
    pub subject_id: String,
    pub activity: Activity,
    pub insole: Option<InsoleStream>,
    pub pose: Option<PoseStream>,
    pub mocap: Option<MocapStream>,
}

impl Trial {
    pub fn stream_count(&self) -> usize {
        self.insole.is_some() as usize + self.pose.is_some() as usize + self.mocap.is_some() as usize
    }

    /// (name, first, last) for each present, non-empty stream.
    pub fn spans(&self) -> Vec<(&'static str, u64, u64)> {
        let mut out = Vec::new();
        if let Some((a, b)) = self.insole.as_ref().and_then(|s| s.span_us()) {
            out.push(("insole", a, b));
        }
        if let Some((a, b)) = self.pose.as_ref().and_then(|s| s.span_us()) {
            out.push(("pose", a, b));
        }
        if let Some((a, b)) = self.mocap.as_ref().and_then(|s| s.span_us()) {
            out.push(("mocap", a, b));
        }
        out
    }
}
