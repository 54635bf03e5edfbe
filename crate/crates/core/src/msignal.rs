//! Marginalized DWT (mDWT) features from raw channel signals.
//!
//! Each channel is band-pass filtered with an FFT brick-wall mask, decomposed
//! with a periodic Daubechies-2 pyramid, and reduced to the per-band sums of
//! absolute coefficients normalized onto the simplex.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Lower bound applied to every mDWT coordinate before renormalization.
pub const EPS_FLOOR: f64 = 1e-10;

/// Sum-to-one tolerance accepted by [`MdwtVector::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Orthonormal db2 low-pass analysis filter.
pub const DB2_LOWPASS: [f64; 4] = {
    const S3: f64 = 1.732_050_807_568_877_2;
    const NORM: f64 = 5.656_854_249_492_381; // 4√2
    [
        (1.0 + S3) / NORM,
        (3.0 + S3) / NORM,
        (3.0 - S3) / NORM,
        (1.0 - S3) / NORM,
    ]
};

/// Quadrature mirror of [`DB2_LOWPASS`]: g[k] = (-1)^k h[3-k].
pub const DB2_HIGHPASS: [f64; 4] = [
    DB2_LOWPASS[3],
    -DB2_LOWPASS[2],
    DB2_LOWPASS[1],
    -DB2_LOWPASS[0],
];

/// A single channel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A labelled multichannel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: String,
    pub label: Label,
    pub channels: Vec<Signal>,
}

/// Detail bands for levels 1..=K plus the level-K approximation band.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
}

impl WaveletDecomposition {
    pub fn level(&self) -> usize {
        self.details.len()
    }
}

/// A point strictly inside the probability simplex (an mDWT vector or any
/// Dirichlet draw).
#[derive(Debug, Clone, PartialEq)]
pub struct MdwtVector(Vec<f64>);

impl MdwtVector {
    /// Validates length ≥ 2, coordinates in (0, 1] and a unit sum within
    /// [`SIMPLEX_TOLERANCE`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "simplex vector needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some((i, c)) = coords
            .iter()
            .enumerate()
            .find(|(_, c)| !(**c > 0.0 && **c <= 1.0))
        {
            return Err(Error::invalid(format!("coordinate {} = {c} is outside (0, 1]", i + 1)));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("coordinates sum to {sum}, expected 1")));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for MdwtVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Feature extraction settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub level: usize,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            level: 4,
            low_hz: 7.0,
            high_hz: 30.0,
        }
    }
}

/// Zeroes every FFT bin whose frequency magnitude lies outside `[low_hz, high_hz]`.
pub fn bandpass(signal: &Signal, low_hz: f64, high_hz: f64) -> Result<Signal> {
    let nyquist = signal.sample_rate_hz / 2.0;
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
        return Err(Error::invalid(format!(
            "band [{low_hz}, {high_hz}] Hz must satisfy 0 < low < high < {nyquist}"
        )));
    }
    let n = signal.len();
    if n == 0 {
        return Ok(signal.clone());
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex<f64>> = signal
        .samples
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    forward.process(&mut buf);
    let bin_hz = signal.sample_rate_hz / n as f64;
    for (k, z) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * bin_hz;
        let f = f.abs();
        if f < low_hz || f > high_hz {
            *z = Complex::new(0.0, 0.0);
        }
    }
    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    Signal::new(
        buf.iter().map(|z| z.re * scale).collect(),
        signal.sample_rate_hz,
    )
}

/// One analysis step with periodic extension. Odd-length input drops its final
/// sample so both outputs have `len / 2` coefficients.
fn analysis_step(input: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = input.len() & !1;
    let half = n / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for k in 0..4 {
            // a[i] = Σ h[k] x[(2i + k - 1) mod n]
            let idx = (2 * i + k + n - 1) % n;
            a += DB2_LOWPASS[k] * input[idx];
            d += DB2_HIGHPASS[k] * input[idx];
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// Multilevel db2 decomposition.
pub fn dwt(signal: &Signal, level: usize) -> Result<WaveletDecomposition> {
    dwt_samples(signal.samples(), level)
}

pub fn dwt_samples(samples: &[f64], level: usize) -> Result<WaveletDecomposition> {
    if level == 0 {
        return Err(Error::invalid("decomposition level must be at least 1"));
    }
    let min_len = 1usize
        .checked_shl(level as u32)
        .ok_or_else(|| Error::invalid(format!("level {level} is too deep")))?;
    if samples.len() < min_len {
        return Err(Error::invalid(format!(
            "signal of length {} is too short for level {level} (needs {min_len})",
            samples.len()
        )));
    }
    let mut details = Vec::with_capacity(level);
    let mut current = samples.to_vec();
    for _ in 0..level {
        let (approx, detail) = analysis_step(&current);
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition {
        details,
        approx: current,
    })
}

/// Per-band absolute sums normalized to the simplex, then floored at
/// [`EPS_FLOOR`].
pub fn marginalize(decomp: &WaveletDecomposition) -> Result<MdwtVector> {
    let abs_sum = |band: &[f64]| band.iter().map(|w| w.abs()).sum::<f64>();
    let mut sums: Vec<f64> = decomp.details.iter().map(|b| abs_sum(b)).collect();
    sums.push(abs_sum(&decomp.approx));
    marginalize_sums(&sums)
}

/// Normalizes nonnegative band sums `c_1..c_{K+1}` onto the simplex.
pub fn marginalize_sums(sums: &[f64]) -> Result<MdwtVector> {
    if let Some(c) = sums.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
        return Err(Error::invalid(format!("band sums must be finite and nonnegative, got {c}")));
    }
    let total: f64 = sums.iter().sum();
    if !(total > 0.0) {
        return Err(Error::degenerate("all wavelet coefficients are zero"));
    }
    let raw: Vec<f64> = sums.iter().map(|c| c / total).collect();
    MdwtVector::new(floor_and_renormalize(&raw, EPS_FLOOR))
}

/// Raises coordinates below `floor` to exactly `floor` and rescales the rest so
/// the total stays 1. Rescaling can push further coordinates under the floor, so
/// the floored set is grown until it is stable.
fn floor_and_renormalize(raw: &[f64], floor: f64) -> Vec<f64> {
    let mut floored = vec![false; raw.len()];
    loop {
        let n_floored = floored.iter().filter(|f| **f).count();
        let free_sum: f64 = raw
            .iter()
            .zip(&floored)
            .filter(|(_, f)| !**f)
            .map(|(x, _)| x)
            .sum();
        let scale = (1.0 - n_floored as f64 * floor) / free_sum;
        let mut grew = false;
        for (x, f) in raw.iter().zip(floored.iter_mut()) {
            if !*f && x * scale < floor {
                *f = true;
                grew = true;
            }
        }
        if !grew {
            return raw
                .iter()
                .zip(&floored)
                .map(|(x, f)| if *f { floor } else { x * scale })
                .collect();
        }
    }
}

/// Band-pass, decompose and marginalize every channel of a trial.
pub fn extract_features(trial: &Trial, config: &FeatureConfig) -> Result<Vec<MdwtVector>> {
    if trial.channels.is_empty() {
        return Err(Error::invalid(format!("trial {} has no channels", trial.id)));
    }
    trial
        .channels
        .iter()
        .enumerate()
        .map(|(c, signal)| {
            bandpass(signal, config.low_hz, config.high_hz)
                .and_then(|s| dwt(&s, config.level))
                .and_then(|d| marginalize(&d))
                .map_err(|e| e.in_channel(c + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, fs: f64, n: usize) -> Signal {
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
            .collect();
        Signal::new(samples, fs).unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    /// Synthesis step inverse to `analysis_step` for even lengths (test oracle only).
    fn synthesis_step(approx: &[f64], detail: &[f64]) -> Vec<f64> {
        let n = approx.len() * 2;
        let mut out = vec![0.0; n];
        for i in 0..approx.len() {
            for k in 0..4 {
                let idx = (2 * i + k + n - 1) % n;
                out[idx] += DB2_LOWPASS[k] * approx[i] + DB2_HIGHPASS[k] * detail[i];
            }
        }
        out
    }

    fn inverse(decomp: &WaveletDecomposition) -> Vec<f64> {
        let mut current = decomp.approx.clone();
        for detail in decomp.details.iter().rev() {
            current = synthesis_step(&current, detail);
        }
        current
    }

    #[test]
    fn filter_taps_are_orthonormal() {
        let h = DB2_LOWPASS;
        assert_abs_diff_eq!(h.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h.iter().sum::<f64>(), std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(h[0] * h[2] + h[1] * h[3], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn stop_band_tone_is_removed() {
        let s = sine(50.0, 1000.0, 1000);
        let out = bandpass(&s, 7.0, 30.0).unwrap();
        assert_eq!(out.len(), s.len());
        assert!(rms(out.samples()) < 1e-6 * rms(s.samples()));
    }

    #[test]
    fn pass_band_tone_is_kept() {
        let s = sine(15.0, 1000.0, 1000);
        let out = bandpass(&s, 7.0, 30.0).unwrap();
        for (a, b) in out.samples().iter().zip(s.samples()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
        let peak = out.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_abs_diff_eq!(peak, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn white_noise_energy_stays_in_band() {
        let fs = 1000.0;
        let n = 2000;
        let s = Signal::new(noise(n, 5), fs).unwrap();
        let out = bandpass(&s, 7.0, 30.0).unwrap();
        let mut buf: Vec<Complex<f64>> =
            out.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let (mut inside, mut outside) = (0.0, 0.0);
        for (k, z) in buf.iter().enumerate() {
            let f = (if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * fs / n as f64).abs();
            if (7.0..=30.0).contains(&f) {
                inside += z.norm_sqr();
            } else {
                outside += z.norm_sqr();
            }
        }
        assert!(outside < 1e-10 * (inside + outside));
    }

    #[test]
    fn bandpass_is_idempotent() {
        let s = Signal::new(noise(777, 9), 500.0).unwrap();
        let once = bandpass(&s, 7.0, 30.0).unwrap();
        let twice = bandpass(&once, 7.0, 30.0).unwrap();
        for (a, b) in once.samples().iter().zip(twice.samples()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn bandpass_rejects_bad_edges() {
        let s = sine(10.0, 100.0, 64);
        assert!(bandpass(&s, 0.0, 30.0).is_err());
        assert!(bandpass(&s, 30.0, 7.0).is_err());
        assert!(bandpass(&s, 7.0, 50.0).is_err());
    }

    #[test]
    fn constant_signal_has_no_detail() {
        let s = Signal::new(vec![3.25; 128], 100.0).unwrap();
        let d = dwt(&s, 4).unwrap();
        assert_eq!(d.level(), 4);
        for band in &d.details {
            for w in band {
                assert_abs_diff_eq!(*w, 0.0, epsilon = 1e-12);
            }
        }
        let energy: f64 = d.approx.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(energy, 128.0 * 3.25 * 3.25, epsilon = 1e-9);
    }

    #[test]
    fn linear_ramp_has_no_interior_level_one_detail() {
        let s = Signal::new((0..64).map(|i| 0.5 + 0.25 * i as f64).collect(), 100.0).unwrap();
        let d = dwt(&s, 1).unwrap();
        // the first and last coefficients read across the periodic wrap
        for w in &d.details[0][1..31] {
            assert_abs_diff_eq!(*w, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn band_lengths_halve() {
        let d = dwt_samples(&noise(3000, 1), 4).unwrap();
        let lens: Vec<usize> = d.details.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![1500, 750, 375, 187]);
        assert_eq!(d.approx.len(), 187);
    }

    #[test]
    fn energy_is_preserved_and_inverse_reconstructs() {
        let x = noise(256, 3);
        let d = dwt_samples(&x, 5).unwrap();
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = d
            .details
            .iter()
            .flatten()
            .chain(&d.approx)
            .map(|v| v * v)
            .sum();
        assert!((e_in - e_out).abs() < 1e-8 * e_in);
        let back = inverse(&d);
        let norm = e_in.sqrt();
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-8 * norm);
    }

    #[test]
    fn dwt_rejects_short_signals() {
        assert!(dwt_samples(&[1.0; 15], 4).is_err());
        assert!(dwt_samples(&[1.0; 16], 4).is_ok());
        assert!(dwt_samples(&[1.0; 16], 0).is_err());
    }

    #[test]
    fn uniform_band_sums() {
        let x = marginalize_sums(&[1.0; 5]).unwrap();
        for c in x.coords() {
            assert_abs_diff_eq!(*c, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_bands_are_floored() {
        let x = marginalize_sums(&[2.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let c = x.coords();
        assert_eq!(&c[1..4], &[EPS_FLOOR; 3]);
        assert_abs_diff_eq!(c[0], 0.5 - 1.5 * EPS_FLOOR, epsilon = 1e-16);
        assert_abs_diff_eq!(c[4], 0.5 - 1.5 * EPS_FLOOR, epsilon = 1e-16);
        assert_abs_diff_eq!(c.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_zero_bands_are_degenerate() {
        assert!(matches!(
            marginalize_sums(&[0.0; 5]),
            Err(Error::DegenerateInput(_))
        ));
        let d = WaveletDecomposition {
            details: vec![vec![0.0; 4]; 2],
            approx: vec![0.0; 2],
        };
        assert!(marginalize(&d).is_err());
    }

    #[test]
    fn flooring_keeps_every_coordinate_above_floor() {
        let raw = [1.0 - 3.0e-10, 1.5e-10, 0.5e-10, 0.5e-10, 0.5e-10];
        let out = floor_and_renormalize(&raw, EPS_FLOOR);
        assert!(out.iter().all(|c| *c >= EPS_FLOOR));
        assert_abs_diff_eq!(out.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn extraction_shapes() {
        let fs = 1000.0;
        let channels: Vec<Signal> = (0..64)
            .map(|c| Signal::new(noise(3000, c as u64), fs).unwrap())
            .collect();
        let trial = Trial {
            id: "t1".into(),
            label: Label::Positive,
            channels,
        };
        let feats = extract_features(&trial, &FeatureConfig::default()).unwrap();
        assert_eq!(feats.len(), 64);
        for f in &feats {
            assert_eq!(f.len(), 5);
            assert_abs_diff_eq!(f.coords().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(f.coords().iter().all(|c| *c >= EPS_FLOOR && *c <= 1.0));
        }

        let single = Trial {
            id: "t2".into(),
            label: Label::Negative,
            channels: vec![Signal::new(noise(512, 77), fs).unwrap()],
        };
        let a = extract_features(&single, &FeatureConfig::default()).unwrap();
        let b = extract_features(&single, &FeatureConfig::default()).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn extraction_reports_failing_channel() {
        let trial = Trial {
            id: "short".into(),
            label: Label::Positive,
            channels: vec![
                Signal::new(noise(64, 1), 1000.0).unwrap(),
                Signal::new(noise(8, 2), 1000.0).unwrap(),
            ],
        };
        match extract_features(&trial, &FeatureConfig::default()) {
            Err(Error::Channel { channel, .. }) => assert_eq!(channel, 2),
            other => panic!("unexpected {other:?}"),
        }
        let empty = Trial {
            id: "empty".into(),
            label: Label::Positive,
            channels: vec![],
        };
        assert!(extract_features(&empty, &FeatureConfig::default()).is_err());
    }

    #[test]
    fn simplex_vector_validation() {
        assert!(MdwtVector::new(vec![0.5, 0.5]).is_ok());
        assert!(MdwtVector::new(vec![1.0]).is_err());
        assert!(MdwtVector::new(vec![0.0, 1.0]).is_err());
        assert!(MdwtVector::new(vec![0.5, 0.6]).is_err());
        assert!(MdwtVector::new(vec![f64::NAN, 0.5]).is_err());
    }

    #[test]
    fn random_sums_give_valid_simplex_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let sums: Vec<f64> = (0..5)
                .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() * 10.0 })
                .collect();
            if sums.iter().all(|s| *s == 0.0) {
                continue;
            }
            let x = marginalize_sums(&sums).unwrap();
            assert!((x.coords().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(x.coords().iter().all(|c| *c >= EPS_FLOOR));
        }
    }
}
