use std::f64::consts::PI;

use gaitforge_dsp::{butterworth_lowpass, filtfilt, DspError};
use proptest::prelude::*;

/// Bilinear-transformed Butterworth power response:
/// |H|² = 1 / (1 + (tan(πf/fs) / tan(πfc/fs))^(2N)).
fn oracle_gain(order: usize, fc: f64, fs: f64, f: f64) -> f64 {
    let ratio = (PI * f / fs).tan() / (PI * fc / fs).tan();
    1.0 / (1.0 + ratio.powi(2 * order as i32)).sqrt()
}

fn sine(freq: f64, rate: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect()
}

/// Steady-state amplitude from the middle half, by projection onto sin/cos.
fn amplitude(x: &[f64], freq: f64, rate: f64) -> f64 {
    let (lo, hi) = (x.len() / 4, 3 * x.len() / 4);
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate().take(hi).skip(lo) {
        let w = 2.0 * PI * freq * i as f64 / rate;
        s += v * w.sin();
        c += v * w.cos();
    }
    2.0 * (s * s + c * c).sqrt() / (hi - lo) as f64
}

#[test]
fn magnitude_matches_closed_form() {
    for (order, fc, fs) in [(2, 6.0, 60.0), (4, 10.0, 100.0), (4, 45.0, 1000.0), (6, 20.0, 200.0)] {
        let filt = butterworth_lowpass(order, fc, fs).unwrap();
        for k in 1..40 {
            let f = fs / 2.0 * k as f64 / 41.0;
            let got = filt.magnitude_at(f);
            let want = oracle_gain(order, fc, fs, f);
            assert!((got - want).abs() < 1e-9, "order {order} f {f}: {got} vs {want}");
        }
        assert!((filt.dc_gain() - 1.0).abs() < 1e-12);
        assert!(filt.is_stable());
    }
}

#[test]
fn dual_pass_squares_the_response() {
    let (fs, n) = (200.0, 8000);
    let filt = butterworth_lowpass(4, 12.0, fs).unwrap();
    // Frequencies on exact bins of the projection window.
    for f in [2.0, 8.0, 12.0, 15.0, 20.0] {
        let out = filtfilt(&sine(f, fs, n), &filt).unwrap();
        let want = oracle_gain(4, 12.0, fs, f).powi(2);
        let got = amplitude(&out, f, fs);
        assert!((got - want).abs() < 2e-3, "f {f}: {got} vs {want}");
    }
}

#[test]
fn zero_phase_on_pulse() {
    let filt = butterworth_lowpass(4, 10.0, 100.0).unwrap();
    let n = 801;
    let pulse: Vec<f64> = (0..n).map(|i| if (395..=405).contains(&i) { 1.0 } else { 0.0 }).collect();
    let out = filtfilt(&pulse, &filt).unwrap();
    let peak = out.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    assert_eq!(peak.0, 400);
    for i in 0..n {
        assert!((out[i] - out[n - 1 - i]).abs() < 1e-9);
    }
}

#[test]
fn parameter_errors() {
    assert_eq!(butterworth_lowpass(3, 6.0, 60.0).unwrap_err(), DspError::BadOrder(3));
    assert_eq!(butterworth_lowpass(0, 6.0, 60.0).unwrap_err(), DspError::BadOrder(0));
    assert!(matches!(butterworth_lowpass(4, 30.0, 60.0), Err(DspError::CutoffAboveNyquist { .. })));
    assert!(matches!(butterworth_lowpass(4, -1.0, 60.0), Err(DspError::CutoffAboveNyquist { .. })));
    assert_eq!(butterworth_lowpass(4, 6.0, 0.0).unwrap_err(), DspError::BadRate);
    let filt = butterworth_lowpass(4, 6.0, 60.0).unwrap();
    assert!(matches!(filtfilt(&[1.0; 12], &filt), Err(DspError::TooShort { needed: 12, got: 12 })));
    assert!(filtfilt(&[1.0; 13], &filt).is_ok());
}

proptest! {
    #[test]
    fn constants_pass_unchanged(c in -1e3f64..1e3, n in 30usize..400, fc in 1.0f64..40.0) {
        let filt = butterworth_lowpass(4, fc, 100.0).unwrap();
        let out = filtfilt(&vec![c; n], &filt).unwrap();
        for v in out {
            prop_assert!((v - c).abs() <= 1e-9 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn linear(
        x in prop::collection::vec(-10.0f64..10.0, 40..200),
        y_seed in any::<u64>(),
        a in -3.0f64..3.0,
    ) {
        let filt = butterworth_lowpass(2, 8.0, 50.0).unwrap();
        let y: Vec<f64> = (0..x.len()).map(|i| ((i as u64 ^ y_seed) % 17) as f64 - 8.0).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let fx = filtfilt(&x, &filt).unwrap();
        let fy = filtfilt(&y, &filt).unwrap();
        let fm = filtfilt(&mix, &filt).unwrap();
        for i in 0..x.len() {
            prop_assert!((fm[i] - (a * fx[i] + fy[i])).abs() < 1e-8);
        }
    }
}
