//! Regime classifier for population-mean time series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::{Error, Result};

pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;
pub const DEFAULT_AMPLITUDE_THRESHOLD: f64 = 0.05;
const MIN_SAMPLES: usize = 64;
const PEAK_TO_MEDIAN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub oscillatory: bool,
    /// Half the peak-to-peak range over the analysis window.
    pub amplitude: f64,
    /// Frequency of the spectral peak (cycles per time unit); `None` for a
    /// flat series.
    pub frequency: Option<f64>,
}

/// Classifies the part of `series` after the first `transient_fraction` of
/// samples. Oscillatory means amplitude above `amp_threshold` and a spectral
/// peak above five times the median spectral magnitude (zero bin excluded).
pub fn detect_oscillation(series: &[f64], dt: f64, transient_fraction: f64, amp_threshold: f64) -> Result<Oscillation> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::config(format!("transient fraction must be in [0, 1), got {transient_fraction}")));
    }
    if !(dt > 0.0) {
        return Err(Error::config("sampling step must be > 0"));
    }
    let start = (series.len() as f64 * transient_fraction).floor() as usize;
    let window = &series[start.min(series.len())..];
    if window.len() < MIN_SAMPLES {
        return Err(Error::config(format!(
            "need at least {MIN_SAMPLES} samples after the transient, got {}",
            window.len()
        )));
    }
    if window.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("series contains non-finite values".into()));
    }
    let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let amplitude = 0.5 * (hi - lo);
    if amplitude == 0.0 {
        return Ok(Oscillation { oscillatory: false, amplitude, frequency: None });
    }

    let n = window.len();
    let mean = window.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = window.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm()).collect();
    let (peak_bin, peak) =
        mags.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best });
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let frequency = (peak_bin + 1) as f64 / (n as f64 * dt);
    Ok(Oscillation {
        oscillatory: amplitude > amp_threshold && peak > PEAK_TO_MEDIAN * median,
        amplitude,
        frequency: Some(frequency),
    })
}

/// Amplitude threshold for the mean of a finite network, whose stationary
/// state carries quasi-cycles of size `O(√(v*/N))`: the larger of `base` and
/// fifteen standard deviations of that fluctuation.
pub fn finite_size_threshold(base: f64, stationary_variance: f64, n: usize) -> f64 {
    base.max(15.0 * (stationary_variance / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_series() {
        let r = detect_oscillation(&[0.4; 200], 0.1, 0.5, 0.05).unwrap();
        assert_eq!(r, Oscillation { oscillatory: false, amplitude: 0.0, frequency: None });
    }

    #[test]
    fn sinusoid() {
        let dt = 0.01;
        let xs: Vec<f64> = (0..4000).map(|k| 0.3 * (2.0 * PI * 0.5 * k as f64 * dt).sin()).collect();
        let r = detect_oscillation(&xs, dt, 0.5, 0.05).unwrap();
        assert!(r.oscillatory);
        assert!((r.amplitude - 0.3).abs() < 0.015);
        let bin = 1.0 / (2000.0 * dt);
        assert!((r.frequency.unwrap() - 0.5).abs() <= bin);
    }

    #[test]
    fn small_sinusoid_is_below_threshold() {
        let xs: Vec<f64> = (0..1000).map(|k| 0.01 * (0.3 * k as f64).sin()).collect();
        assert!(!detect_oscillation(&xs, 0.1, 0.5, 0.05).unwrap().oscillatory);
    }

    #[test]
    fn white_noise_has_no_peak() {
        use rand::Rng;
        let mut rng = crate::rng::sequential(5);
        let xs: Vec<f64> = (0..4096).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(!detect_oscillation(&xs, 0.1, 0.0, 0.05).unwrap().oscillatory);
    }

    #[test]
    fn too_short() {
        assert!(matches!(detect_oscillation(&[0.0; 100], 0.1, 0.5, 0.05), Err(Error::Config(_))));
    }

    #[test]
    fn threshold_scaling() {
        assert_eq!(finite_size_threshold(0.05, 1.5, 1_000_000), 0.05);
        assert!((finite_size_threshold(0.05, 1.5, 5000) - 15.0 * (1.5f64 / 5000.0).sqrt()).abs() < 1e-15);
    }
}
