use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

/// A study participant. Height and mass feed the %BW*ht normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub id: String,
    pub sex: Sex,
    /// Years.
    pub age: f64,
    /// Meters.
    pub height: f64,
    /// Kilograms.
    pub mass: f64,
}

impl Subject {
    pub const HEIGHT_RANGE: (f64, f64) = (0.5, 2.5);
    pub const MASS_RANGE: (f64, f64) = (20.0, 200.0);

    pub fn new(
        id: impl Into<String>,
        sex: Sex,
        age: f64,
        height: f64,
        mass: f64,
    ) -> Result<Self, CoreError> {
        let subject = Self {
            id: id.into(),
            sex,
            age,
            height,
            mass,
        };
        subject.check()?;
        Ok(subject)
    }

    pub fn check(&self) -> Result<(), CoreError> {
        let invalid = |reason: String| CoreError::InvalidSubject {
            id: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        let (hlo, hhi) = Self::HEIGHT_RANGE;
        if !(self.height > hlo && self.height < hhi) {
            return Err(invalid(format!("height {} m outside ({hlo}, {hhi})", self.height)));
        }
        let (mlo, mhi) = Self::MASS_RANGE;
        if !(self.mass > mlo && self.mass < mhi) {
            return Err(invalid(format!("mass {} kg outside ({mlo}, {mhi})", self.mass)));
        }
        if !(self.age.is_finite() && self.age >= 0.0) {
            return Err(invalid(format!("age {} is not a valid age", self.age)));
        }
        Ok(())
    }

    /// Body weight in newtons.
    pub fn body_weight(&self) -> f64 {
        self.mass * crate::STANDARD_GRAVITY
    }
}

/// Activity label. `Null` is the reject class for unlabeled motion
/// (standing, swaying and anything else outside the four activities).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Activity {
    Walk,
    Run,
    SitToStand,
    StandToSit,
    Null,
}

impl Activity {
    pub const COUNT: usize = 5;
    pub const ALL: [Activity; 5] = [
        Activity::Walk,
        Activity::Run,
        Activity::SitToStand,
        Activity::StandToSit,
        Activity::Null,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    /// Short name used on the command line and in file names.
    pub fn short_name(self) -> &'static str {
        match self {
            Activity::Walk => "walk",
            Activity::Run => "run",
            Activity::SitToStand => "sts",
            Activity::StandToSit => "stst",
            Activity::Null => "null",
        }
    }

    /// Locomotion activities are segmented by foot contact; sit/stand by knee angle.
    pub fn is_locomotion(self) -> bool {
        matches!(self, Activity::Walk | Activity::Run)
    }

    pub fn is_sit_stand(self) -> bool {
        matches!(self, Activity::SitToStand | Activity::StandToSit)
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Activity {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let act = match lower.as_str() {
            "walk" | "walking" => Activity::Walk,
            "run" | "running" => Activity::Run,
            "sts" | "sittostand" | "sit-to-stand" => Activity::SitToStand,
            "stst" | "standtosit" | "stand-to-sit" => Activity::StandToSit,
            "null" | "none" => Activity::Null,
            _ => return Err(CoreError::UnknownActivity(s.to_string())),
        };
        Ok(act)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_ranges_enforced() {
        assert!(Subject::new("a", Sex::F, 23.0, 1.689, 65.6).is_ok());
        assert!(Subject::new("a", Sex::F, 23.0, 0.5, 65.6).is_err());
        assert!(Subject::new("a", Sex::F, 23.0, 1.7, 200.0).is_err());
        assert!(Subject::new("", Sex::M, 23.0, 1.7, 70.0).is_err());
    }

    #[test]
    fn activity_round_trips_names() {
        for act in Activity::ALL {
            assert_eq!(act.short_name().parse::<Activity>().unwrap(), act);
            assert_eq!(Activity::from_index(act.index()), Some(act));
        }
        assert!("hop".parse::<Activity>().is_err());
        assert_eq!(Activity::from_index(5), None);
    }
}
