//! Subject-level train/validation/test partitioning.
//!
//! Trials never carry their own split assignment; membership is always looked
//! up through the subject id so a participant cannot leak across sets.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CoreError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.13,
            test: 0.17,
        }
    }
}

impl SplitRatios {
    fn check(&self) -> Result<(), CoreError> {
        let parts = [self.train, self.val, self.test];
        let ok = parts.iter().all(|r| r.is_finite() && *r >= 0.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(CoreError::BadRatios(self.train, self.val, self.test))
        }
    }

    /// (train, val, test) sizes for `n` subjects: validation rounds to the
    /// nearest integer, test rounds down, each non-empty holdout gets at
    /// least one subject, and train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let nf = n as f64;
        let mut val = if self.val > 0.0 {
            ((nf * self.val).round() as usize).max(1)
        } else {
            0
        };
        let mut test = if self.test > 0.0 {
            ((nf * self.test + 1e-9).floor() as usize).max(1)
        } else {
            0
        };
        while val + test >= n && val + test > 0 {
            if test >= val {
                test -= 1;
            } else {
                val -= 1;
            }
        }
        (n - val - test, val, test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitMember {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: BTreeSet<String>,
    pub val: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl Split {
    pub fn member(&self, subject_id: &str) -> Option<SplitMember> {
        if self.train.contains(subject_id) {
            Some(SplitMember::Train)
        } else if self.val.contains(subject_id) {
            Some(SplitMember::Val)
        } else if self.test.contains(subject_id) {
            Some(SplitMember::Test)
        } else {
            None
        }
    }

    pub fn subjects(&self, member: SplitMember) -> &BTreeSet<String> {
        match member {
            SplitMember::Train => &self.train,
            SplitMember::Val => &self.val,
            SplitMember::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shuffle subjects with a seeded RNG and cut them into train/val/test.
pub fn make_split(
    subject_ids: &[String],
    ratios: SplitRatios,
    seed: u64,
) -> Result<Split, CoreError> {
    ratios.check()?;
    let mut ids: Vec<String> = subject_ids.to_vec();
    ids.sort();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            return Err(CoreError::DuplicateSubject(pair[0].clone()));
        }
    }
    if ids.len() < 3 {
        return Err(CoreError::InsufficientSubjects(ids.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let (n_train, n_val, _) = ratios.sizes(ids.len());
    let mut it = ids.into_iter();
    let train = it.by_ref().take(n_train).collect();
    let val = it.by_ref().take(n_val).collect();
    let test = it.collect();
    Ok(Split { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("S{i:03}")).collect()
    }

    #[test]
    fn cohort_of_52() {
        let split = make_split(&ids(52), SplitRatios::default(), 7).unwrap();
        assert_eq!(
            (split.train.len(), split.val.len(), split.test.len()),
            (37, 7, 8)
        );
        assert!(split.train.is_disjoint(&split.val));
        assert!(split.train.is_disjoint(&split.test));
        assert!(split.val.is_disjoint(&split.test));
    }

    #[test]
    fn minimum_case() {
        let split = make_split(&ids(3), SplitRatios::default(), 0).unwrap();
        assert_eq!((split.train.len(), split.val.len(), split.test.len()), (1, 1, 1));
    }

    #[test]
    fn seeds_change_membership_not_sizes() {
        let a = make_split(&ids(20), SplitRatios::default(), 1).unwrap();
        let b = make_split(&ids(20), SplitRatios::default(), 2).unwrap();
        assert_eq!((a.train.len(), a.val.len(), a.test.len()), (14, 3, 3));
        assert_eq!((b.train.len(), b.val.len(), b.test.len()), (14, 3, 3));
        assert_ne!(a, b);
        assert_eq!(a, make_split(&ids(20), SplitRatios::default(), 1).unwrap());
    }

    #[test]
    fn errors() {
        assert_eq!(
            make_split(&ids(2), SplitRatios::default(), 0),
            Err(CoreError::InsufficientSubjects(2))
        );
        let bad = SplitRatios {
            train: 0.5,
            val: 0.2,
            test: 0.2,
        };
        assert!(matches!(
            make_split(&ids(10), bad, 0),
            Err(CoreError::BadRatios(..))
        ));
        let mut dup = ids(5);
        dup.push("S001".into());
        assert!(matches!(
            make_split(&dup, SplitRatios::default(), 0),
            Err(CoreError::DuplicateSubject(_))
        ));
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 3usize..200, seed in any::<u64>()) {
            let all = ids(n);
            let split = make_split(&all, SplitRatios::default(), seed).unwrap();
            prop_assert!(split.train.is_disjoint(&split.val));
            prop_assert!(split.train.is_disjoint(&split.test));
            prop_assert!(split.val.is_disjoint(&split.test));
            let union: BTreeSet<_> = split
                .train
                .iter()
                .chain(&split.val)
                .chain(&split.test)
                .cloned()
                .collect();
            prop_assert_eq!(union, all.into_iter().collect::<BTreeSet<_>>());
            prop_assert!(!split.train.is_empty() && !split.val.is_empty() && !split.test.is_empty());
            for id in &split.train {
                prop_assert_eq!(split.member(id), Some(SplitMember::Train));
            }
        }
    }
}
