//! Experiment configuration files.
//!
//! ```text
//! # comment
//! seed = 7
//!
//! [data]
//! manifest = data/manifest.csv
//! input = features
//!
//! [experiment]
//! ranking = fisher_ratio, classification_rate
//! m = 1-64
//! r = 2, 3, 4
//! ```
//!
//! Grammar: one `key = value` per line, `[section]` headers, `#` or `;`
//! comments. Keys before the first header belong to the top level. Lists are
//! comma separated; integer ranges are written `a-b` (inclusive). Relative
//! paths resolve against the config file's directory. Unknown sections or keys
//! are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mvbeta::classify::ClassifierKind;
use mvbeta::msignal::FeatureConfig;
use mvbeta::selection::{Criterion, RankingMethod};

#[derive(Debug, Clone, Default)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw `section -> key -> value` map.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    base_dir: PathBuf,
}

impl ConfigFile {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        sections.insert(String::new(), BTreeMap::new());
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {line_no}: unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    bail!("line {line_no}: empty section name");
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                bail!("line {line_no}: empty key");
            }
            let section = sections.entry(current.clone()).or_default();
            let entry = Entry {
                value: value.trim().to_string(),
                line: line_no,
            };
            if let Some(prev) = section.insert(key.to_string(), entry) {
                bail!("line {line_no}: `{key}` already set on line {}", prev.line);
            }
        }
        Ok(Self {
            sections,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("parsing config {}", path.display()))
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn err(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> anyhow::Error {
        let line = self.entry(section, key).map_or(0, |e| e.line);
        let name = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        anyhow!("line {line}: `{name}`: {msg}")
    }

    pub fn parse_value<T>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .map(|v| v.parse::<T>().map_err(|e| self.err(section, key, e)))
            .transpose()
    }

    pub fn parse_list<T>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .map(|v| {
                split_list(v)
                    .map(|item| item.parse::<T>().map_err(|e| self.err(section, key, e)))
                    .collect()
            })
            .transpose()
    }

    pub fn int_set(&self, section: &str, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(section, key)
            .map(|v| parse_int_set(v).map_err(|e| self.err(section, key, e)))
            .transpose()
    }

    pub fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.get(section, key).map(|v| self.base_dir.join(v))
    }

    /// Rejects sections and keys outside `schema`.
    pub fn check_schema(&self, schema: &[(&str, &[&str])]) -> Result<()> {
        for (section, keys) in &self.sections {
            let allowed = schema
                .iter()
                .find(|(s, _)| s == section)
                .map(|(_, k)| *k)
                .ok_or_else(|| anyhow!("unknown section [{section}]"))?;
            for (key, entry) in keys {
                if !allowed.contains(&key.as_str()) {
                    let name = if section.is_empty() {
                        key.clone()
                    } else {
                        format!("{section}.{key}")
                    };
                    bail!("line {}: unknown key `{name}`", entry.line);
                }
            }
        }
        Ok(())
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses `1-5, 8, 10-12` into a sorted, deduplicated list.
pub fn parse_int_set(v: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in split_list(v) {
        if let Some((a, b)) = item.split_once('-') {
            let a: usize = a.trim().parse().with_context(|| format!("bad range start in {item:?}"))?;
            let b: usize = b.trim().parse().with_context(|| format!("bad range end in {item:?}"))?;
            if a > b {
                bail!("empty range {item:?}");
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().with_context(|| format!("bad integer {item:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("empty list");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// What the trial files in a manifest hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// One row of raw samples per channel.
    Signals,
    /// One mDWT vector per channel.
    Features,
}

impl FromStr for InputKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "signals" => Ok(InputKind::Signals),
            "features" => Ok(InputKind::Features),
            other => bail!("input must be `signals` or `features`, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub manifest: Option<PathBuf>,
    pub input: InputKind,
    pub sample_rate_hz: Option<f64>,
    pub features: FeatureConfig,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            input: InputKind::Features,
            sample_rate_hz: None,
            features: FeatureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rankings: Vec<RankingMethod>,
    /// `channel,score` file for the external ranking.
    pub ranking_file: Option<PathBuf>,
    /// Channel counts to sweep; `None` sweeps 1..=channel count.
    pub m: Option<Vec<usize>>,
    pub r: Vec<usize>,
    pub criterion: Criterion,
    pub classifiers: Vec<ClassifierKind>,
    pub gmm_components: usize,
    pub prior_positive: f64,
    /// `m,trial_id,predicted` predictions of an outside classifier.
    pub external_predictions: Option<PathBuf>,
    pub external_name: String,
    pub save_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rankings: vec![RankingMethod::FisherRatio, RankingMethod::ClassificationRate],
            ranking_file: None,
            m: None,
            r: vec![2, 3, 4],
            criterion: Criterion::Variance,
            classifiers: vec![
                ClassifierKind::MvBeta,
                ClassifierKind::SuperDirichlet,
                ClassifierKind::PcaGauss,
            ],
            gmm_components: 1,
            prior_positive: 0.5,
            external_predictions: None,
            external_name: "svm".into(),
            save_models: false,
        }
    }
}

/// Generator settings for `synth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub channels: usize,
    /// Length of each mDWT vector (`K + 1`).
    pub dims: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Channels whose class distributions differ; the rest are shared.
    pub informative: usize,
    /// Log-scale spread between class parameters on informative channels.
    pub separation: f64,
    /// Write raw signals instead of feature vectors.
    pub signals: bool,
    pub sample_rate_hz: f64,
    pub samples: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            channels: 8,
            dims: 5,
            train_per_class: 100,
            test_per_class: 100,
            informative: 3,
            separation: 0.4,
            signals: false,
            sample_rate_hz: 256.0,
            samples: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AppConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub experiment: ExperimentConfig,
    pub synth: SynthConfig,
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["seed"]),
    ("data", &["manifest", "input", "sample_rate_hz", "low_hz", "high_hz", "level"]),
    (
        "experiment",
        &[
            "ranking",
            "ranking_file",
            "m",
            "r",
            "criterion",
            "classifiers",
            "gmm_components",
            "prior_positive",
            "external_predictions",
            "external_name",
            "save_models",
        ],
    ),
    (
        "synth",
        &[
            "channels",
            "dims",
            "train_per_class",
            "test_per_class",
            "informative",
            "separation",
            "signals",
            "sample_rate_hz",
            "samples",
        ],
    ),
];

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(&ConfigFile::load(path)?).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_file(f: &ConfigFile) -> Result<Self> {
        f.check_schema(SCHEMA)?;
        let mut c = AppConfig::default();
        if let Some(seed) = f.parse_value("", "seed")? {
            c.seed = seed;
        }

        let d = &mut c.data;
        d.manifest = f.path("data", "manifest");
        if let Some(v) = f.parse_value("data", "input")? {
            d.input = v;
        }
        d.sample_rate_hz = f.parse_value("data", "sample_rate_hz")?;
        if let Some(v) = f.parse_value("data", "low_hz")? {
            d.features.low_hz = v;
        }
        if let Some(v) = f.parse_value("data", "high_hz")? {
            d.features.high_hz = v;
        }
        if let Some(v) = f.parse_value("data", "level")? {
            d.features.level = v;
        }
        if d.features.level == 0 {
            bail!("data.level must be at least 1");
        }
        if !(d.features.low_hz > 0.0 && d.features.low_hz < d.features.high_hz) {
            bail!("data.low_hz must be positive and below data.high_hz");
        }

        let e = &mut c.experiment;
        if let Some(v) = f.parse_list("experiment", "ranking")? {
            e.rankings = v;
        }
        e.ranking_file = f.path("experiment", "ranking_file");
        e.m = f.int_set("experiment", "m")?;
        if let Some(v) = f.int_set("experiment", "r")? {
            e.r = v;
        }
        if let Some(v) = f.parse_value("experiment", "criterion")? {
            e.criterion = v;
        }
        if let Some(v) = f.parse_list("experiment", "classifiers")? {
            e.classifiers = v;
        }
        if let Some(v) = f.parse_value("experiment", "gmm_components")? {
            e.gmm_components = v;
        }
        if let Some(v) = f.parse_value("experiment", "prior_positive")? {
            e.prior_positive = v;
        }
        e.external_predictions = f.path("experiment", "external_predictions");
        if let Some(v) = f.get("experiment", "external_name") {
            e.external_name = v.to_string();
        }
        if let Some(v) = f.parse_value("experiment", "save_models")? {
            e.save_models = v;
        }
        c.experiment.validate()?;

        let s = &mut c.synth;
        macro_rules! synth_key {
            ($($field:ident),*) => {
                $(if let Some(v) = f.parse_value("synth", stringify!($field))? {
                    s.$field = v;
                })*
            };
        }
        synth_key!(
            channels,
            dims,
            train_per_class,
            test_per_class,
            informative,
            separation,
            signals,
            sample_rate_hz,
            samples
        );
        Ok(c)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rankings.is_empty() {
            bail!("experiment.ranking lists no methods");
        }
        if self.rankings.contains(&RankingMethod::External) && self.ranking_file.is_none() {
            bail!("the external ranking needs experiment.ranking_file");
        }
        if self.classifiers.is_empty() && self.external_predictions.is_none() {
            bail!("experiment.classifiers lists no classifiers");
        }
        if self.r.contains(&0) {
            bail!("experiment.r values must be at least 1");
        }
        if self.m.as_ref().is_some_and(|m| m.contains(&0)) {
            bail!("experiment.m values must be at least 1");
        }
        if self.gmm_components == 0 {
            bail!("experiment.gmm_components must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.prior_positive) {
            bail!("experiment.prior_positive must lie in [0, 1]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_lists_and_ranges() {
        let text = "seed = 9\n# note\n[data]\nmanifest = d/m.csv\ninput = signals\nsample_rate_hz = 250\n\
                    [experiment]\nranking = fr, external\nranking_file = t1.csv\nm = 1-3, 7\nr = 3\n\
                    classifiers = mvbeta, pca_gauss\ncriterion = entropy\n";
        let f = ConfigFile::parse(text, Path::new("/base")).unwrap();
        let c = AppConfig::from_file(&f).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.data.manifest, Some(PathBuf::from("/base/d/m.csv")));
        assert_eq!(c.data.input, InputKind::Signals);
        assert_eq!(c.data.sample_rate_hz, Some(250.0));
        assert_eq!(c.experiment.rankings, vec![RankingMethod::FisherRatio, RankingMethod::External]);
        assert_eq!(c.experiment.m, Some(vec![1, 2, 3, 7]));
        assert_eq!(c.experiment.r, vec![3]);
        assert_eq!(c.experiment.criterion, Criterion::Entropy);
        assert_eq!(c.experiment.classifiers, vec![ClassifierKind::MvBeta, ClassifierKind::PcaGauss]);
    }

    #[test]
    fn readme_example_parses() {
        let readme = include_str!("../../../README.md");
        let start = readme.find("```ini\n").unwrap() + 7;
        let len = readme[start..].find("```").unwrap();
        let f = ConfigFile::parse(&readme[start..start + len], Path::new("/base")).unwrap();
        let c = AppConfig::from_file(&f).unwrap();
        assert_eq!(c.seed, 2024);
        assert_eq!(c.data.manifest, Some(PathBuf::from("/base/data/manifest.csv")));
        assert_eq!(c.experiment.m, Some((1..=64).collect()));
        assert_eq!(c.experiment.r, vec![2, 3, 4]);
        assert_eq!(c.synth.channels, 8);
    }

    #[test]
    fn defaults_without_keys() {
        let c = AppConfig::from_file(&ConfigFile::parse("", Path::new(".")).unwrap()).unwrap();
        assert_eq!(c, AppConfig::default());
        assert_eq!(c.experiment.r, vec![2, 3, 4]);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = ConfigFile::parse("[experiment]\nr = 2, x\n", Path::new(".")).unwrap();
        let msg = format!("{:#}", AppConfig::from_file(&bad).unwrap_err());
        assert!(msg.contains("line 2"), "{msg}");

        let unknown = ConfigFile::parse("[experiment]\nbogus = 1\n", Path::new(".")).unwrap();
        assert!(AppConfig::from_file(&unknown).is_err());
        assert!(ConfigFile::parse("[data\n", Path::new(".")).is_err());
        assert!(ConfigFile::parse("just words\n", Path::new(".")).is_err());
        assert!(ConfigFile::parse("a = 1\na = 2\n", Path::new(".")).is_err());
        let external = ConfigFile::parse("[experiment]\nranking = external\n", Path::new(".")).unwrap();
        assert!(AppConfig::from_file(&external).is_err());
    }

    #[test]
    fn int_sets() {
        assert_eq!(parse_int_set("3, 1-2, 2").unwrap(), vec![1, 2, 3]);
        assert!(parse_int_set("5-1").is_err());
        assert!(parse_int_set("").is_err());
    }
}
