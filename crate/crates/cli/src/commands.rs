//! Command-line surface of the `mvbeta` binary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mvbeta::classify::{
    evaluate, train_mvbeta, train_pca_gauss, train_super_dirichlet, Classifier, ClassifierKind, Model, Priors,
    TrainConfig,
};
use mvbeta::dirstat::DirichletParams;
use mvbeta::selection::{Criterion, RankingMethod};

use crate::config::{AppConfig, InputKind};
use crate::demo::decorrelate_demo;
use crate::experiment::{compute_ranking, run_experiment, summary_text, write_ranking_csv, write_report};
use crate::manifest::{ingest, write_manifest, write_trial_rows, Split, TrialRecord};

#[derive(Debug, Parser)]
#[command(name = "mvbeta", version, about = "Multivariate beta classification of wavelet features")]
pub struct Cli {
    /// Seed for every random draw; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a raw-signal manifest into a feature manifest.
    Extract(DataArgs),
    /// Rank channels on the train split.
    Rank {
        #[command(flatten)]
        data: DataArgs,
        /// fisher_ratio, classification_rate or external_csv.
        #[arg(long, default_value = "fisher_ratio")]
        method: RankingMethod,
        /// `channel,score` file for the external method.
        #[arg(long)]
        ranking_file: Option<PathBuf>,
    },
    /// Train one model on the train split and save it.
    Train(TrainArgs),
    /// Classify a split with a saved model.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Sweep channel counts, dimensions and classifiers.
    Experiment(DataArgs),
    /// Write a synthetic dataset with known generating parameters.
    Synth {
        #[arg(long)]
        channels: Option<usize>,
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long)]
        train_per_class: Option<usize>,
        #[arg(long)]
        test_per_class: Option<usize>,
        #[arg(long)]
        informative: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
        /// Write raw signals instead of feature vectors.
        #[arg(long)]
        signals: bool,
    },
    /// Correlations of Dirichlet draws before and after the transform.
    DecorrelateDemo {
        #[arg(long, value_delimiter = ',', default_value = "2,5,6,3,7")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Manifest CSV (`trial_id,path,label,split`); overrides the config file.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// `signals` or `features`.
    #[arg(long)]
    pub input: Option<InputKind>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "mvbeta")]
    pub classifier: ClassifierKind,
    /// Number of top-ranked channels.
    #[arg(long)]
    pub m: usize,
    /// Dimensions kept per channel (ignored by sdir).
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value = "fisher_ratio")]
    pub ranking: RankingMethod,
    #[arg(long)]
    pub ranking_file: Option<PathBuf>,
    #[arg(long)]
    pub criterion: Option<Criterion>,
    /// Prior probability of the positive class.
    #[arg(long)]
    pub prior_positive: Option<f64>,
    /// Output path; defaults to `<out-dir>/model.txt`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl Cli {
    fn app_config(&self) -> Result<AppConfig> {
        let mut cfg = match &self.config {
            Some(p) => AppConfig::load(p)?,
            None => AppConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

impl DataArgs {
    fn apply(&self, cfg: &mut AppConfig) -> Result<PathBuf> {
        if let Some(m) = &self.manifest {
            cfg.data.manifest = Some(m.clone());
        }
        if let Some(i) = self.input {
            cfg.data.input = i;
        }
        if let Some(r) = self.sample_rate {
            cfg.data.sample_rate_hz = Some(r);
        }
        cfg.data
            .manifest
            .clone()
            .ok_or_else(|| anyhow!("no manifest: pass --manifest or set data.manifest"))
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = cli.app_config()?;
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Extract(data) => extract(&mut cfg, data, out),
        Command::Rank {
            data,
            method,
            ranking_file,
        } => {
            let manifest = data.apply(&mut cfg)?;
            let ds = ingest(&manifest, &cfg.data)?;
            let scores = compute_ranking(*method, &ds.train, ds.channels, ranking_file.as_deref())?;
            fs::create_dir_all(out)?;
            let path = out.join(format!("ranking_{method}.csv"));
            write_ranking_csv(&path, &scores)?;
            for s in &scores {
                println!("{}\t{}", s.channel, s.score);
            }
            Ok(())
        }
        Command::Train(args) => train(&mut cfg, args, out),
        Command::Predict { data, model, split } => predict(&mut cfg, data, model, *split, out),
        Command::Experiment(data) => {
            let manifest = data.apply(&mut cfg)?;
            let ds = ingest(&manifest, &cfg.data)?;
            let models = cfg.experiment.save_models.then(|| out.join("models"));
            let report = run_experiment(&cfg.experiment, &ds, models.as_deref())?;
            write_report(&report, out)?;
            print!("{}", summary_text(&report));
            Ok(())
        }
        Command::Synth {
            channels,
            dims,
            train_per_class,
            test_per_class,
            informative,
            separation,
            signals,
        } => {
            let s = &mut cfg.synth;
            macro_rules! set {
                ($($f:ident),*) => { $(if let Some(v) = $f { s.$f = *v; })* };
            }
            set!(channels, dims, train_per_class, test_per_class, informative, separation);
            s.signals |= *signals;
            let manifest = crate::synth::synth(&cfg.synth, cfg.seed, out)?;
            println!("{}", manifest.display());
            Ok(())
        }
        Command::DecorrelateDemo { alpha, n } => {
            let alpha = DirichletParams::new(alpha.clone())?;
            let report = decorrelate_demo(&alpha, *n, cfg.seed)?;
            report.write(out)?;
            print!("{}", report.summary_text());
            Ok(())
        }
    }
}

fn extract(cfg: &mut AppConfig, data: &DataArgs, out: &Path) -> Result<()> {
    let manifest = data.apply(cfg)?;
    if cfg.data.input != InputKind::Signals {
        cfg.data.input = InputKind::Signals;
    }
    let ds = ingest(&manifest, &cfg.data)?;
    let dir = out.join("features");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut records = Vec::new();
    for (split, trials) in [(Split::Train, &ds.train), (Split::Test, &ds.test)] {
        for t in trials {
            let path = dir.join(format!("{}.csv", t.id));
            write_trial_rows(&path, &t.channels)?;
            records.push(TrialRecord {
                trial_id: t.id.clone(),
                path,
                label: t.label,
                split,
            });
        }
    }
    let path = out.join("manifest.csv");
    write_manifest(&path, &records)?;
    println!("{}", path.display());
    Ok(())
}

fn train(cfg: &mut AppConfig, args: &TrainArgs, out: &Path) -> Result<()> {
    let manifest = args.data.apply(cfg)?;
    let ds = ingest(&manifest, &cfg.data)?;
    let ranking = compute_ranking(args.ranking, &ds.train, ds.channels, args.ranking_file.as_deref())?;
    let tc = TrainConfig {
        channels: args.m,
        dims: args.r,
        criterion: args.criterion.unwrap_or(cfg.experiment.criterion),
        priors: Priors::new(args.prior_positive.unwrap_or(cfg.experiment.prior_positive))?,
        gmm_components: cfg.experiment.gmm_components,
    };
    let model: Model = match args.classifier {
        ClassifierKind::MvBeta => train_mvbeta(&ds.train, &ranking, &tc)?.into(),
        ClassifierKind::SuperDirichlet => train_super_dirichlet(&ds.train, &ranking, &tc)?.into(),
        ClassifierKind::PcaGauss => train_pca_gauss(&ds.train, &ranking, &tc)?.into(),
    };
    let path = args.model.clone().unwrap_or_else(|| out.join("model.txt"));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, model.to_text()).with_context(|| format!("writing {}", path.display()))?;
    let chans: Vec<String> = model.channel_list().iter().map(usize::to_string).collect();
    println!("{} model on channels {} -> {}", model.kind(), chans.join(","), path.display());
    Ok(())
}

fn predict(cfg: &mut AppConfig, data: &DataArgs, model: &Path, split: Split, out: &Path) -> Result<()> {
    let manifest = data.apply(cfg)?;
    let ds = ingest(&manifest, &cfg.data)?;
    let text = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let model = Model::from_text(&text).with_context(|| format!("parsing {}", model.display()))?;
    if let Some(&c) = model.channel_list().iter().max() {
        if c > ds.channels {
            bail!("model uses channel {c} but the data has {} channels", ds.channels);
        }
    }
    let result = evaluate(&model, ds.split(split))?;
    fs::create_dir_all(out)?;
    let mut csv = String::from("trial_id,predicted,actual\n");
    for p in &result.predictions {
        csv.push_str(&format!("{},{},{}\n", p.trial_id, p.predicted, p.actual));
    }
    let path = out.join("predictions.csv");
    fs::write(&path, csv)?;
    println!(
        "accuracy {:.4} ({} of {})",
        result.accuracy,
        result.confusion.correct(),
        result.confusion.total()
    );
    Ok(())
}
