//! Synthetic datasets with known generating distributions.
//!
//! Feature mode draws each channel's mDWT vector from a class-specific
//! Dirichlet. Signal mode writes raw multichannel recordings whose 7-30 Hz
//! rhythms are attenuated in the positive class on the informative channels,
//! so the files exercise the full extraction pipeline.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mvbeta::dirstat::DirichletParams;
use mvbeta::{FeatureTrial, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};

use crate::config::SynthConfig;
use crate::manifest::{write_manifest, write_trial_rows, Dataset, Split, TrialRecord};

/// Per-channel generating Dirichlets of both classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub positive: Vec<DirichletParams>,
    pub negative: Vec<DirichletParams>,
}

impl GroundTruth {
    pub fn channels(&self) -> usize {
        self.positive.len()
    }

    pub fn new(positive: Vec<DirichletParams>, negative: Vec<DirichletParams>) -> Result<Self> {
        if positive.is_empty() || positive.len() != negative.len() {
            bail!("ground truth needs the same nonzero channel count for both classes");
        }
        let d = positive[0].len();
        if positive.iter().chain(&negative).any(|p| p.len() != d) {
            bail!("every channel must have {d} coordinates");
        }
        Ok(Self { positive, negative })
    }

    pub fn params(&self, label: Label, channel0: usize) -> &DirichletParams {
        match label {
            Label::Positive => &self.positive[channel0],
            Label::Negative => &self.negative[channel0],
        }
    }
}

fn check(cfg: &SynthConfig) -> Result<()> {
    if cfg.channels == 0 || cfg.dims < 2 {
        bail!("synth needs at least one channel and two coordinates");
    }
    if cfg.informative > cfg.channels {
        bail!("informative channels ({}) exceed channels ({})", cfg.informative, cfg.channels);
    }
    if cfg.train_per_class < 2 || cfg.test_per_class < 1 {
        bail!("synth needs at least two training and one test trial per class");
    }
    if !(cfg.separation >= 0.0 && cfg.separation.is_finite()) {
        bail!("separation must be finite and nonnegative");
    }
    Ok(())
}

/// Random ground truth: base parameters uniform on `[1.5, 8]`; informative
/// channels scale the negative class by `exp(separation * z)`, `z ~ N(0, 1)`.
pub fn random_ground_truth(cfg: &SynthConfig, seed: u64) -> Result<GroundTruth> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positive = Vec::with_capacity(cfg.channels);
    let mut negative = Vec::with_capacity(cfg.channels);
    for c in 0..cfg.channels {
        let base: Vec<f64> = (0..cfg.dims).map(|_| rng.random_range(1.5..8.0)).collect();
        let other: Vec<f64> = if c < cfg.informative {
            base.iter()
                .map(|a| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    a * (cfg.separation * z).exp()
                })
                .collect()
        } else {
            base.clone()
        };
        positive.push(DirichletParams::new(base)?);
        negative.push(DirichletParams::new(other)?);
    }
    GroundTruth::new(positive, negative)
}

fn label_of(i: usize) -> Label {
    if i.is_multiple_of(2) {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Draws `per_class` trials of each class, alternating labels.
pub fn sample_trials(truth: &GroundTruth, per_class: usize, prefix: &str, rng: &mut ChaCha8Rng) -> Vec<FeatureTrial> {
    (0..2 * per_class)
        .map(|i| {
            let label = label_of(i);
            let channels = (0..truth.channels())
                .map(|c| truth.params(label, c).sample_with(rng, 1).remove(0))
                .collect();
            FeatureTrial::new(format!("{prefix}{:05}", i + 1), label, channels)
        })
        .collect()
}

/// Train and test trials drawn from `truth` with one seeded stream.
pub fn sample_dataset(truth: &GroundTruth, train_per_class: usize, test_per_class: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = sample_trials(truth, train_per_class, "tr", &mut rng);
    let test = sample_trials(truth, test_per_class, "te", &mut rng);
    Dataset {
        train,
        test,
        channels: truth.channels(),
    }
}

/// Writes `class,channel,alpha_1..alpha_D`.
pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let d = truth.positive[0].len();
    let mut out = String::from("class,channel");
    for k in 1..=d {
        out.push_str(&format!(",alpha_{k}"));
    }
    out.push('\n');
    for (label, set) in [(Label::Positive, &truth.positive), (Label::Negative, &truth.negative)] {
        for (c, p) in set.iter().enumerate() {
            out.push_str(&format!("{label},{}", c + 1));
            for a in p.alpha() {
                out.push_str(&format!(",{a}"));
            }
            out.push('\n');
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn write_dataset_files<R: AsRef<[f64]>>(
    out_dir: &Path,
    trials: impl IntoIterator<Item = (String, Label, Split, Vec<R>)>,
) -> Result<PathBuf> {
    let trial_dir = out_dir.join("trials");
    fs::create_dir_all(&trial_dir).with_context(|| format!("creating {}", trial_dir.display()))?;
    let mut records = Vec::new();
    for (id, label, split, rows) in trials {
        let path = trial_dir.join(format!("{id}.csv"));
        write_trial_rows(&path, &rows)?;
        records.push(TrialRecord {
            trial_id: id,
            path,
            label,
            split,
        });
    }
    let manifest = out_dir.join("manifest.csv");
    write_manifest(&manifest, &records)?;
    Ok(manifest)
}

/// Writes a feature-space dataset (manifest, trial files, ground truth).
pub fn write_feature_dataset(out_dir: &Path, ds: &Dataset, truth: &GroundTruth) -> Result<PathBuf> {
    let rows = ds
        .train
        .iter()
        .map(|t| (t, Split::Train))
        .chain(ds.test.iter().map(|t| (t, Split::Test)))
        .map(|(t, split)| {
            let rows: Vec<Vec<f64>> = t.channels.iter().map(|v| v.coords().to_vec()).collect();
            (t.id.clone(), t.label, split, rows)
        });
    let manifest = write_dataset_files(out_dir, rows)?;
    write_ground_truth(&out_dir.join("ground_truth.csv"), truth)?;
    Ok(manifest)
}

/// One synthetic recording: mu (~10 Hz) and beta (~22 Hz) rhythms plus white
/// noise. On informative channels the positive class attenuates both rhythms
/// by the factor `exp(-separation)`.
fn signal_channel(cfg: &SynthConfig, informative: bool, label: Label, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let jitter = LogNormal::new(0.0, 0.25).expect("valid lognormal");
    let damp = if informative && label == Label::Positive {
        (-cfg.separation).exp()
    } else {
        1.0
    };
    let mu_amp = 2.0 * damp * jitter.sample(rng);
    let beta_amp = 1.0 * damp * jitter.sample(rng);
    let mu_f = 10.0 + rng.random_range(-1.0..1.0);
    let beta_f = 22.0 + rng.random_range(-2.0..2.0);
    let (p1, p2) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
    (0..cfg.samples)
        .map(|i| {
            let t = i as f64 / cfg.sample_rate_hz;
            let noise: f64 = StandardNormal.sample(rng);
            mu_amp * (2.0 * PI * mu_f * t + p1).sin() + beta_amp * (2.0 * PI * beta_f * t + p2).sin() + noise
        })
        .collect()
}

/// Writes a raw-signal dataset and returns the manifest path.
pub fn write_signal_dataset(out_dir: &Path, cfg: &SynthConfig, seed: u64) -> Result<PathBuf> {
    check(cfg)?;
    if cfg.samples < 16 || cfg.sample_rate_hz <= 60.0 {
        bail!("signal synthesis needs at least 16 samples and a rate above 60 Hz");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::new();
    for (split, per_class, prefix) in [(Split::Train, cfg.train_per_class, "tr"), (Split::Test, cfg.test_per_class, "te")] {
        for i in 0..2 * per_class {
            let label = label_of(i);
            let rows: Vec<Vec<f64>> = (0..cfg.channels)
                .map(|c| signal_channel(cfg, c < cfg.informative, label, &mut rng))
                .collect();
            trials.push((format!("{prefix}{:05}", i + 1), label, split, rows));
        }
    }
    let manifest = write_dataset_files(out_dir, trials)?;
    let mut truth = String::from("channel,informative\n");
    for c in 0..cfg.channels {
        truth.push_str(&format!("{},{}\n", c + 1, c < cfg.informative));
    }
    fs::write(out_dir.join("ground_truth.csv"), truth)?;
    Ok(manifest)
}

/// Generates and writes a dataset per `cfg`; returns the manifest path.
pub fn synth(cfg: &SynthConfig, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    if cfg.signals {
        return write_signal_dataset(out_dir, cfg, seed);
    }
    let truth = random_ground_truth(cfg, seed)?;
    let ds = sample_dataset(&truth, cfg.train_per_class, cfg.test_per_class, seed.wrapping_add(1));
    write_feature_dataset(out_dir, &ds, &truth)
}
