/// Half-open sample range `[start, end)` of one stride or transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrideBounds {
    pub start: usize,
    pub end: usize,
}

impl StrideBounds {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Foot-contact detection settings. Forces in N, durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideConfig {
    pub threshold: f64,
    pub rearm: f64,
    pub min_duration: f64,
    pub max_duration: f64,
}

impl Default for StrideConfig {
    fn default() -> Self {
        Self {
            threshold: 20.0,
            rearm: 10.0,
            min_duration: 0.3,
            max_duration: 3.0,
        }
    }
}

/// Force onsets: samples where force rises above `threshold` after having
/// dropped below `rearm`. A trace that starts loaded has no onset until the
/// foot has first unloaded.
fn onsets(force: &[f64], cfg: &StrideConfig) -> Vec<usize> {
    let mut armed = false;
    let mut out = Vec::new();
    for (i, &f) in force.iter().enumerate() {
        if f < cfg.rearm {
            armed = true;
        } else if armed && f > cfg.threshold {
            out.push(i);
            armed = false;
        }
    }
    out
}

/// Strides between consecutive force onsets of a vertical-force trace sampled
/// at `rate` Hz. Strides outside the configured duration range are dropped,
/// as is any trace shorter than one second.
pub fn detect_strides(force: &[f64], rate: f64, cfg: &StrideConfig) -> Vec<StrideBounds> {
    if (force.len() as f64) < rate {
        return Vec::new();
    }
    onsets(force, cfg)
        .windows(2)
        .map(|w| StrideBounds {
            start: w[0],
            end: w[1],
        })
        .filter(|s| {
            let secs = s.len() as f64 / rate;
            secs >= cfg.min_duration && secs <= cfg.max_duration
        })
        .collect()
}

const PLATEAU_S: f64 = 0.25;
const MIN_RANGE_DEG: f64 = 20.0;
const LOW: f64 = 0.05;
const HIGH: f64 = 0.95;

/// Transition window of a sit-to-stand or stand-to-sit knee-angle trace.
///
/// The initial and final postures are the mean angles over the first and
/// last 0.25 s. The transition runs from the first sample that has covered
/// 5 % of the change to the first sample that has covered 95 % (inclusive).
/// Returns `None` when the trace changes by less than 20°.
pub fn detect_sit_stand(knee_angle: &[f64], rate: f64) -> Option<StrideBounds> {
    let plateau = ((PLATEAU_S * rate).round() as usize).max(1);
    if knee_angle.len() < 2 * plateau + 2 {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let from = mean(&knee_angle[..plateau]);
    let to = mean(&knee_angle[knee_angle.len() - plateau..]);
    let range = to - from;
    if range.abs() < MIN_RANGE_DEG {
        return None;
    }
    let progress = |v: f64| (v - from) / range;
    let start = knee_angle.iter().position(|&v| progress(v) >= LOW)?;
    let last = start + knee_angle[start..].iter().position(|&v| progress(v) >= HIGH)?;
    let end = (last + 1).max(start + 2).min(knee_angle.len());
    (end > start + 1).then_some(StrideBounds { start, end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn stance_train(rate: f64, period: f64, stance: f64, cycles: usize, lead: f64) -> (Vec<f64>, Vec<usize>) {
        let n = ((lead + period * cycles as f64 + 0.2) * rate) as usize;
        let mut f = vec![0.0; n];
        let mut onsets = Vec::new();
        for c in 0..cycles {
            let t0 = lead + c as f64 * period;
            onsets.push((t0 * rate).ceil() as usize);
            for (i, v) in f.iter_mut().enumerate() {
                let u = (i as f64 / rate - t0) / stance;
                if u > 0.0 && u < 1.0 {
                    *v = 700.0 * (1.1 * (PI * u).sin() + 0.25 * (3.0 * PI * u).sin());
                }
            }
        }
        (f, onsets)
    }

    #[test]
    fn five_walking_cycles() {
        let rate = 82.0;
        let (f, truth) = stance_train(rate, 1.1, 0.66, 5, 0.3);
        let strides = detect_strides(&f, rate, &StrideConfig::default());
        assert_eq!(strides.len(), 4);
        for (s, w) in strides.iter().zip(truth.windows(2)) {
            assert!(s.start.abs_diff(w[0]) <= 2, "{s:?} vs {w:?}");
            assert!(s.end.abs_diff(w[1]) <= 2);
        }
        for pair in strides.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
    }

    #[test]
    fn zero_force() {
        assert!(detect_strides(&[0.0; 500], 100.0, &StrideConfig::default()).is_empty());
    }

    #[test]
    fn running_with_flight() {
        let rate = 200.0;
        let (f, truth) = stance_train(rate, 0.7, 0.25, 7, 0.2);
        assert!(f.contains(&0.0));
        assert_eq!(detect_strides(&f, rate, &StrideConfig::default()).len(), truth.len() - 1);
    }

    #[test]
    fn duration_gate() {
        let rate = 200.0;
        let mut f = vec![0.0; 1000];
        for &s in &[100usize, 120, 500] {
            f[s] = 100.0;
        }
        let strides = detect_strides(&f, rate, &StrideConfig::default());
        assert_eq!(strides, vec![StrideBounds { start: 120, end: 500 }]);
    }

    #[test]
    fn hysteresis_ignores_chatter() {
        let rate = 100.0;
        let mut f = vec![0.0; 300];
        f[50..80].fill(30.0);
        f[80] = 15.0;
        f[81..100].fill(30.0);
        f[200..230].fill(30.0);
        let strides = detect_strides(&f, rate, &StrideConfig::default());
        assert_eq!(strides, vec![StrideBounds { start: 50, end: 200 }]);
    }

    #[test]
    fn sit_stand_ramp_found() {
        let rate = 200.0;
        let n = 600;
        let angle: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                5.0 + 85.0 / (1.0 + (8.0 * (t - 1.5)).exp())
            })
            .collect();
        let b = detect_sit_stand(&angle, rate).unwrap();
        assert!(b.start > 50 && b.start < 300, "{b:?}");
        assert!(b.end > 300 && b.end < 550, "{b:?}");
        let rev: Vec<f64> = angle.iter().rev().copied().collect();
        let r = detect_sit_stand(&rev, rate).unwrap();
        assert!(r.start.abs_diff(n - b.end) <= 2 && r.end.abs_diff(n - b.start) <= 2, "{r:?} {b:?}");
        assert!(detect_sit_stand(&[40.0; 600], rate).is_none());
    }

    proptest! {
        #[test]
        fn translation_equivariant(
            levels in proptest::collection::vec(0.0f64..60.0, 200..600),
            k in 0usize..300,
        ) {
            let rate = 100.0;
            // Blocky trace so strides of plausible length appear.
            let f: Vec<f64> = levels.iter().flat_map(|&v| std::iter::repeat_n(v, 3)).collect();
            let mut shifted = vec![f[0]; k];
            shifted.extend_from_slice(&f);
            let a = detect_strides(&f, rate, &StrideConfig::default());
            let b = detect_strides(&shifted, rate, &StrideConfig::default());
            let moved: Vec<StrideBounds> = a.iter().map(|s| StrideBounds { start: s.start + k, end: s.end + k }).collect();
            prop_assert_eq!(moved, b);
        }
    }
}
