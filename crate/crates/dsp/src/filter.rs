//! Butterworth lowpass design as a cascade of biquads, and zero-phase
//! (forward-backward) application.

use std::f64::consts::PI;

use crate::DspError;

/// One direct-form-II-transposed section with a0 normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Poles strictly inside the unit circle (Jury conditions for a 2nd-order
    /// polynomial).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// State that holds the section at steady state for a constant input `u`.
    fn steady_state(&self, u: f64) -> [f64; 2] {
        let s2 = (self.b2 - self.a2) * u;
        let s1 = (self.b1 - self.a1) * u + s2;
        [s1, s2]
    }

    fn run(&self, x: &mut [f64], state: [f64; 2]) {
        let [mut s1, mut s2] = state;
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b0 * input + s1;
            s1 = self.b1 * input - self.a1 * y + s2;
            s2 = self.b2 * input - self.a2 * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    sections: Vec<Biquad>,
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
}

impl BiquadCascade {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn dc_gain(&self) -> f64 {
        self.sections.iter().map(Biquad::dc_gain).product()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// |H(e^{jω})| at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        self.sections
            .iter()
            .map(|s| {
                let nr = s.b0 + s.b1 * c1 + s.b2 * c2;
                let ni = s.b1 * s1 + s.b2 * s2;
                let dr = 1.0 + s.a1 * c1 + s.a2 * c2;
                let di = s.a1 * s1 + s.a2 * s2;
                ((nr * nr + ni * ni) / (dr * dr + di * di)).sqrt()
            })
            .product()
    }

    /// Single causal pass from rest.
    pub fn filter(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        for s in &self.sections {
            s.run(&mut out, [0.0, 0.0]);
        }
        out
    }

    /// Causal pass starting from the steady state for the first sample, so a
    /// constant input produces no transient.
    fn filter_settled(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else { return };
        for s in &self.sections {
            // Every section has unity DC gain, so each sees `first` at rest.
            s.run(x, s.steady_state(first));
        }
    }
}

/// Digital Butterworth lowpass: analog prototype poles, bilinear transform
/// with the cutoff prewarped so the −3 dB point lands exactly at `cutoff_hz`.
pub fn butterworth_lowpass(
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
) -> Result<BiquadCascade, DspError> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(DspError::BadOrder(order));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(DspError::BadRate);
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(DspError::CutoffAboveNyquist {
            cutoff: cutoff_hz,
            nyquist,
        });
    }
    let k = (PI * cutoff_hz / sample_rate_hz).tan();
    let k2 = k * k;
    let sections = (0..order / 2)
        .map(|i| {
            // Conjugate pole pair i: s² + 2 sin(θ) s + 1 on the unit circle.
            let theta = PI * (2 * i + 1) as f64 / (2 * order) as f64;
            let damping = 2.0 * theta.sin();
            let norm = 1.0 / (1.0 + damping * k + k2);
            let b0 = k2 * norm;
            Biquad {
                b0,
                b1: 2.0 * b0,
                b2: b0,
                a1: 2.0 * (k2 - 1.0) * norm,
                a2: (1.0 - damping * k + k2) * norm,
            }
        })
        .collect();
    Ok(BiquadCascade {
        sections,
        order,
        cutoff_hz,
        sample_rate_hz,
    })
}

/// Zero-phase filtering: forward pass, then a pass over the reversed result.
/// The signal is extended at both ends by odd reflection (3 × order samples)
/// and each pass starts from steady state.
pub fn filtfilt(signal: &[f64], filt: &BiquadCascade) -> Result<Vec<f64>, DspError> {
    let pad = 3 * filt.order();
    let n = signal.len();
    if n <= pad {
        return Err(DspError::TooShort {
            needed: pad,
            got: n,
        });
    }
    let (first, last) = (signal[0], signal[n - 1]);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
    ext.extend_from_slice(signal);
    ext.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

    filt.filter_settled(&mut ext);
    ext.reverse();
    filt.filter_settled(&mut ext);
    ext.reverse();
    Ok(ext[pad..pad + n].to_vec())
}
