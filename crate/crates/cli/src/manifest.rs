//! Dataset manifests and trial files.
//!
//! A manifest is a CSV with header `trial_id,path,label,split`. `path` is
//! relative to the manifest's directory, `label` is `+1` or `-1` and `split`
//! is `train` or `test`. Each trial file is a header-less CSV with one row per
//! channel: raw samples for signal input or the mDWT vector for feature input.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mvbeta::msignal::{extract_features, FeatureConfig, Signal, Trial};
use mvbeta::{FeatureTrial, Label, MdwtVector};
use rayon::prelude::*;

use crate::config::{DataConfig, InputKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => bail!("split must be `train` or `test`, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    /// Resolved path of the trial file.
    pub path: PathBuf,
    pub label: Label,
    pub split: Split,
}

/// Reads and validates a manifest. Every referenced file must exist.
pub fn read_manifest(path: &Path) -> Result<Vec<TrialRecord>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening manifest {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let want = ["trial_id", "path", "label", "split"];
    if headers.iter().collect::<Vec<_>>() != want {
        bail!(
            "manifest {} must have header {}, found {}",
            path.display(),
            want.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("manifest {} row {}", path.display(), i + 2))?;
        let id = row[0].to_string();
        let ctx = || format!("manifest {}: trial {id}", path.display());
        if id.is_empty() {
            bail!("manifest {} row {}: empty trial_id", path.display(), i + 2);
        }
        if !seen.insert(id.clone()) {
            bail!("{}: duplicate trial_id", ctx());
        }
        let label: Label = row[2].parse().map_err(|e| anyhow!("{e}")).with_context(ctx)?;
        let split: Split = row[3].parse().with_context(ctx)?;
        let file = base.join(&row[1]);
        if !file.is_file() {
            bail!("{}: trial file {} does not exist", ctx(), file.display());
        }
        records.push(TrialRecord {
            trial_id: id,
            path: file,
            label,
            split,
        });
    }
    if records.is_empty() {
        bail!("manifest {} lists no trials", path.display());
    }
    Ok(records)
}

/// Writes a manifest whose paths are relative to `path`'s directory.
pub fn write_manifest(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["trial_id", "path", "label", "split"])?;
    for r in records {
        let rel = r.path.strip_prefix(base).unwrap_or(&r.path);
        w.write_record([
            r.trial_id.as_str(),
            &rel.to_string_lossy(),
            &r.label.to_string(),
            &r.split.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of reals per channel.
pub fn read_trial_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| anyhow!("{} line {}: bad value {v:?}", path.display(), i + 1))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        bail!("{} holds no channels", path.display());
    }
    Ok(rows)
}

pub fn write_trial_rows<R: AsRef<[f64]>>(path: &Path, rows: &[R]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.as_ref().iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Trials in feature space, split as the manifest says.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<FeatureTrial>,
    pub test: Vec<FeatureTrial>,
    pub channels: usize,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[FeatureTrial] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

/// Loads a raw-signal trial and extracts its features.
pub fn load_signal_trial(record: &TrialRecord, rate: f64, features: &FeatureConfig) -> Result<FeatureTrial> {
    let rows = read_trial_rows(&record.path)?;
    let channels = rows
        .into_iter()
        .map(|s| Signal::new(s, rate))
        .collect::<mvbeta::Result<Vec<_>>>()?;
    let trial = Trial {
        id: record.trial_id.clone(),
        label: record.label,
        channels,
    };
    let feats = extract_features(&trial, features)?;
    Ok(FeatureTrial::new(trial.id, trial.label, feats))
}

fn load_feature_trial(record: &TrialRecord) -> Result<FeatureTrial> {
    let rows = read_trial_rows(&record.path)?;
    let channels = rows
        .into_iter()
        .enumerate()
        .map(|(c, v)| MdwtVector::new(v).with_context(|| format!("channel {}", c + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTrial::new(record.trial_id.clone(), record.label, channels))
}

/// Loads every trial of a manifest (in parallel, manifest order kept).
pub fn ingest(manifest: &Path, data: &DataConfig) -> Result<Dataset> {
    let records = read_manifest(manifest)?;
    let rate = match data.input {
        InputKind::Signals => Some(
            data.sample_rate_hz
                .ok_or_else(|| anyhow!("signal input needs data.sample_rate_hz"))?,
        ),
        InputKind::Features => None,
    };
    let trials = records
        .par_iter()
        .map(|r| {
            let t = match rate {
                Some(rate) => load_signal_trial(r, rate, &data.features),
                None => load_feature_trial(r),
            };
            t.with_context(|| format!("trial {} ({})", r.trial_id, r.path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    check_uniform(&trials)?;
    let channels = trials[0].channels.len();
    let mut ds = Dataset {
        train: Vec::new(),
        test: Vec::new(),
        channels,
    };
    for (r, t) in records.iter().zip(trials) {
        match r.split {
            Split::Train => ds.train.push(t),
            Split::Test => ds.test.push(t),
        }
    }
    Ok(ds)
}

fn check_uniform(trials: &[FeatureTrial]) -> Result<()> {
    let first = &trials[0];
    let channels = first.channels.len();
    let dims = first.channels[0].len();
    for t in trials {
        if t.channels.len() != channels {
            bail!("trial {} has {} channels, trial {} has {channels}", t.id, t.channels.len(), first.id);
        }
        if let Some((c, v)) = t.channels.iter().enumerate().find(|(_, v)| v.len() != dims) {
            bail!("trial {} channel {} has {} coordinates, expected {dims}", t.id, c + 1, v.len());
        }
    }
    Ok(())
}
