//! Timestamped sensor, pose and motion-capture streams.
//!
//! All timestamps are integer microseconds in the recording device's own
//! clock. Streams are validated on construction and immutable afterwards.

use crate::CoreError;

pub const N_SENSORS: usize = 5;
pub const N_AXES: usize = 6;
pub const N_CHANNELS: usize = N_SENSORS * N_AXES;
pub const N_KEYPOINTS: usize = 14;

/// Insole sensor sites, in canonical storage order (toe to heel).
///
/// The order follows the insole layout drawing (toe, medial ball, central
/// ball, lateral ball, heel); some descriptions of the hardware list the
/// lateral and central ball sensors the other way around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sensor {
    Toe,
    MedialBall,
    CentralBall,
    LateralBall,
    Heel,
}

impl Sensor {
    pub const ALL: [Sensor; N_SENSORS] = [
        Sensor::Toe,
        Sensor::MedialBall,
        Sensor::CentralBall,
        Sensor::LateralBall,
        Sensor::Heel,
    ];
}

/// Per-sensor channel. Forces in N, moments in N·mm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Fx,
    Fy,
    Fz,
    Mx,
    My,
    Mz,
}

impl Axis {
    pub const ALL: [Axis; N_AXES] = [Axis::Fx, Axis::Fy, Axis::Fz, Axis::Mx, Axis::My, Axis::Mz];
    pub const FORCES: [Axis; 3] = [Axis::Fx, Axis::Fy, Axis::Fz];

    /// Calibrated range of the transducer for this axis. The sensors keep
    /// measuring outside it, so this is metadata and never enforced.
    pub fn calibrated_range(self) -> (f64, f64) {
        match self {
            Axis::Fx | Axis::Fy => (-20.0, 20.0),
            Axis::Fz => (-100.0, 100.0),
            Axis::Mx | Axis::My | Axis::Mz => (-350.0, 350.0),
        }
    }
}

pub fn channel_index(sensor: Sensor, axis: Axis) -> usize {
    sensor as usize * N_AXES + axis as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsoleFrame {
    pub t_us: u64,
    pub channels: [f32; N_CHANNELS],
}

impl InsoleFrame {
    pub fn from_slice(t_us: u64, channels: &[f32]) -> Result<Self, CoreError> {
        let channels: [f32; N_CHANNELS] = channels.try_into().map_err(|_| {
            CoreError::InvalidStream(format!(
                "expected {N_CHANNELS} channels, found {}",
                channels.len()
            ))
        })?;
        Ok(Self { t_us, channels })
    }

    pub fn get(&self, sensor: Sensor, axis: Axis) -> f32 {
        self.channels[channel_index(sensor, axis)]
    }

    /// Sum of the five vertical forces.
    pub fn total_vertical_force(&self) -> f64 {
        Sensor::ALL
            .iter()
            .map(|&s| self.get(s, Axis::Fz) as f64)
            .sum()
    }
}

fn check_increasing(times: impl Iterator<Item = u64>) -> Result<(), CoreError> {
    let mut prev: Option<u64> = None;
    for (k, t) in times.enumerate() {
        if let Some(p) = prev {
            if t <= p {
                return Err(CoreError::InvalidStream(format!(
                    "timestamp order violation at frame {k}"
                )));
            }
        }
        prev = Some(t);
    }
    Ok(())
}

fn span(first: Option<u64>, last: Option<u64>) -> Option<(u64, u64)> {
    Some((first?, last?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsoleStream {
    sample_rate: f32,
    frames: Vec<InsoleFrame>,
}

impl InsoleStream {
    pub fn new(sample_rate: f32, frames: Vec<InsoleFrame>) -> Result<Self, CoreError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(CoreError::InvalidStream(format!(
                "invalid sample rate {sample_rate}"
            )));
        }
        check_increasing(frames.iter().map(|f| f.t_us))?;
        Ok(Self {
            sample_rate,
            frames,
        })
    }

    pub fn sample_rate(&self) -> f32 {
        self.sample_rate
    }

    pub fn frames(&self) -> &[InsoleFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times_us(&self) -> Vec<u64> {
        self.frames.iter().map(|f| f.t_us).collect()
    }

    pub fn channel(&self, sensor: Sensor, axis: Axis) -> Vec<f64> {
        let idx = channel_index(sensor, axis);
        self.frames.iter().map(|f| f.channels[idx] as f64).collect()
    }

    pub fn total_vertical_force(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.total_vertical_force()).collect()
    }

    pub fn span_us(&self) -> Option<(u64, u64)> {
        span(self.frames.first().map(|f| f.t_us), self.frames.last().map(|f| f.t_us))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeypointId {
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
    LeftFootIndex,
    RightFootIndex,
}

impl KeypointId {
    pub const ALL: [KeypointId; N_KEYPOINTS] = [
        KeypointId::LeftShoulder,
        KeypointId::RightShoulder,
        KeypointId::LeftElbow,
        KeypointId::RightElbow,
        KeypointId::LeftWrist,
        KeypointId::RightWrist,
        KeypointId::LeftHip,
        KeypointId::RightHip,
        KeypointId::LeftKnee,
        KeypointId::RightKnee,
        KeypointId::LeftAnkle,
        KeypointId::RightAnkle,
        KeypointId::LeftFootIndex,
        KeypointId::RightFootIndex,
    ];
}

/// Normalized image coordinates plus visibility in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub t_us: u64,
    pub keypoints: [Keypoint; N_KEYPOINTS],
}

impl PoseFrame {
    pub fn get(&self, id: KeypointId) -> Keypoint {
        self.keypoints[id as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseStream {
    frames: Vec<PoseFrame>,
}

impl PoseStream {
    pub fn new(frames: Vec<PoseFrame>) -> Result<Self, CoreError> {
        check_increasing(frames.iter().map(|f| f.t_us))?;
        for (k, f) in frames.iter().enumerate() {
            if f.keypoints.iter().any(|kp| !(0.0..=1.0).contains(&kp.v)) {
                return Err(CoreError::InvalidStream(format!(
                    "visibility outside [0, 1] at frame {k}"
                )));
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[PoseFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times_us(&self) -> Vec<u64> {
        self.frames.iter().map(|f| f.t_us).collect()
    }

    pub fn span_us(&self) -> Option<(u64, u64)> {
        span(self.frames.first().map(|f| f.t_us), self.frames.last().map(|f| f.t_us))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MocapFrame {
    pub t_us: u64,
    /// Knee adduction moment, N·m.
    pub kam: f64,
    /// Knee flexion, degrees.
    pub knee_angle: f64,
    /// Vertical ground reaction force, N.
    pub grf_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MocapStream {
    frames: Vec<MocapFrame>,
}

impl MocapStream {
    pub fn new(frames: Vec<MocapFrame>) -> Result<Self, CoreError> {
        check_increasing(frames.iter().map(|f| f.t_us))?;
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[MocapFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times_us(&self) -> Vec<u64> {
        self.frames.iter().map(|f| f.t_us).collect()
    }

    pub fn kam(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.kam).collect()
    }

    pub fn knee_angle(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.knee_angle).collect()
    }

    pub fn grf_z(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.grf_z).collect()
    }

    pub fn span_us(&self) -> Option<(u64, u64)> {
        span(self.frames.first().map(|f| f.t_us), self.frames.last().map(|f| f.t_us))
    }
}
