//! Channel-count / dimension sweeps and their reports.
//!
//! For every ranking and every method the top-`m` channels are used to train on
//! the train split and score the test split. Channel fits are computed once and
//! reused by every grid cell.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mvbeta::classify::{
    evaluate, fit_pca_channel, welch_t_test, ChannelFit, ClassifierKind, Model, MvBetaModel, PcaChannel,
    PcaGaussModel, Priors, SuperDirichletModel,
};
use mvbeta::selection::{rank_channels_cr, rank_channels_fr, sort_scores, ChannelScore, RankingMethod};
use mvbeta::{FeatureTrial, Label};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::manifest::Dataset;

/// One row of the method axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Method {
    MvBeta { r: usize },
    SuperDirichlet,
    PcaGauss { r: usize },
    External(String),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::MvBeta { r } => write!(f, "mvbeta(R={r})"),
            Method::SuperDirichlet => f.write_str("sdir"),
            Method::PcaGauss { r } => write!(f, "pca_gauss(R={r})"),
            Method::External(name) => f.write_str(name),
        }
    }
}

impl Method {
    fn slug(&self) -> String {
        match self {
            Method::MvBeta { r } => format!("mvbeta_r{r}"),
            Method::SuperDirichlet => "sdir".into(),
            Method::PcaGauss { r } => format!("pca_gauss_r{r}"),
            Method::External(name) => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub ranking: RankingMethod,
    pub method: Method,
    pub m: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// One row of the best / mean / spread summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub ranking: RankingMethod,
    pub method: Method,
    pub best: f64,
    pub best_m: Vec<usize>,
    pub mean: f64,
    /// Sample standard deviation over the swept `m` values.
    pub std_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTestRow {
    pub ranking: RankingMethod,
    pub a: Method,
    pub b: Method,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rankings: Vec<(RankingMethod, Vec<ChannelScore>)>,
    pub m_values: Vec<usize>,
    pub cells: Vec<GridCell>,
    pub summary: Vec<SummaryRow>,
    pub ttests: Vec<TTestRow>,
}

impl ExperimentReport {
    /// Accuracy series over `m` for one ranking and method.
    pub fn series(&self, ranking: RankingMethod, method: &Method) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.ranking == ranking && &c.method == method)
            .map(|c| c.accuracy)
            .collect()
    }
}

/// Reads a `channel,score` ranking and sorts it descending.
pub fn read_ranking_csv(path: &Path, channels: usize) -> Result<Vec<ChannelScore>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening ranking {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["channel", "score"] {
        bail!("ranking {} must have header channel,score", path.display());
    }
    let mut scores = Vec::new();
    let mut seen = vec![false; channels + 1];
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let ctx = || format!("ranking {} row {}", path.display(), i + 2);
        let channel: usize = row[0].parse().with_context(ctx)?;
        let score: f64 = row[1].parse().with_context(ctx)?;
        if channel == 0 || channel > channels {
            bail!("{}: channel {channel} outside 1..={channels}", ctx());
        }
        if std::mem::replace(&mut seen[channel], true) {
            bail!("{}: channel {channel} listed twice", ctx());
        }
        scores.push(ChannelScore {
            channel,
            score,
            method: RankingMethod::External,
        });
    }
    sort_scores(&mut scores);
    Ok(scores)
}

pub fn write_ranking_csv(path: &Path, scores: &[ChannelScore]) -> Result<()> {
    let mut out = String::from("channel,score\n");
    for s in scores {
        out.push_str(&format!("{},{}\n", s.channel, s.score));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn compute_ranking(
    method: RankingMethod,
    train: &[FeatureTrial],
    channels: usize,
    ranking_file: Option<&Path>,
) -> Result<Vec<ChannelScore>> {
    match method {
        RankingMethod::FisherRatio => Ok(rank_channels_fr(train)?),
        RankingMethod::ClassificationRate => Ok(rank_channels_cr(train)?),
        RankingMethod::External => {
            let path = ranking_file.ok_or_else(|| anyhow!("external ranking needs a ranking file"))?;
            read_ranking_csv(path, channels)
        }
    }
}

/// One external prediction: optional ranking, m, trial id, predicted label.
type ExternalRow = (Option<RankingMethod>, usize, String, Label);

/// External predictions: `m,trial_id,predicted` with an optional leading
/// `ranking` column. Without it the predictions apply to every ranking.
fn read_external_predictions(path: &Path) -> Result<Vec<ExternalRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening predictions {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let with_ranking = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["m", "trial_id", "predicted"] => false,
        ["ranking", "m", "trial_id", "predicted"] => true,
        _ => bail!(
            "predictions {} must have header m,trial_id,predicted (optionally preceded by ranking)",
            path.display()
        ),
    };
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let ctx = || format!("predictions {} row {}", path.display(), i + 2);
        let off = usize::from(with_ranking);
        let ranking = if with_ranking {
            Some(row[0].parse::<RankingMethod>().map_err(|e| anyhow!("{e}")).with_context(ctx)?)
        } else {
            None
        };
        let m: usize = row[off].parse().with_context(ctx)?;
        let label: Label = row[off + 2].parse().map_err(|e| anyhow!("{e}")).with_context(ctx)?;
        out.push((ranking, m, row[off + 1].to_string(), label));
    }
    Ok(out)
}

fn external_cells(
    cfg: &ExperimentConfig,
    path: &Path,
    rankings: &[RankingMethod],
    m_values: &[usize],
    test: &[FeatureTrial],
) -> Result<Vec<GridCell>> {
    let rows = read_external_predictions(path)?;
    let actual: HashMap<&str, Label> = test.iter().map(|t| (t.id.as_str(), t.label)).collect();
    let mut cells = Vec::new();
    for &ranking in rankings {
        for &m in m_values {
            let mut preds: BTreeMap<&str, Label> = BTreeMap::new();
            for (r, row_m, id, label) in &rows {
                if *row_m == m && r.is_none_or(|r| r == ranking) {
                    if !actual.contains_key(id.as_str()) {
                        bail!("predictions {}: trial {id} is not in the test split", path.display());
                    }
                    if preds.insert(id, *label).is_some() {
                        bail!("predictions {}: trial {id} repeated for m = {m}", path.display());
                    }
                }
            }
            if preds.is_empty() {
                continue;
            }
            if preds.len() != test.len() {
                bail!(
                    "predictions {}: m = {m} ({ranking}) covers {} of {} test trials",
                    path.display(),
                    preds.len(),
                    test.len()
                );
            }
            let correct = preds.iter().filter(|(id, l)| actual[*id] == **l).count();
            cells.push(GridCell {
                ranking,
                method: Method::External(cfg.external_name.clone()),
                m,
                correct,
                total: test.len(),
                accuracy: correct as f64 / test.len() as f64,
            });
        }
    }
    Ok(cells)
}

fn methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut out = Vec::new();
    for kind in &cfg.classifiers {
        match kind {
            ClassifierKind::MvBeta => out.extend(cfg.r.iter().map(|&r| Method::MvBeta { r })),
            ClassifierKind::SuperDirichlet => out.push(Method::SuperDirichlet),
            ClassifierKind::PcaGauss => out.extend(cfg.r.iter().map(|&r| Method::PcaGauss { r })),
        }
    }
    out.dedup();
    out
}

/// Per-channel fits shared by every grid cell.
struct FitCache {
    dirichlet: Vec<ChannelFit>,
    /// `pca[&r][c]` for 0-based channel `c`.
    pca: BTreeMap<usize, Vec<PcaChannel>>,
}

impl FitCache {
    fn build(cfg: &ExperimentConfig, train: &[FeatureTrial], channels: usize, methods: &[Method]) -> Result<Self> {
        let needs_dirichlet = methods
            .iter()
            .any(|m| matches!(m, Method::MvBeta { .. } | Method::SuperDirichlet));
        let dirichlet = if needs_dirichlet {
            (1..=channels)
                .into_par_iter()
                .map(|c| ChannelFit::new(train, c))
                .collect::<mvbeta::Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let mut pca = BTreeMap::new();
        for m in methods {
            if let Method::PcaGauss { r } = *m {
                let fits = (1..=channels)
                    .into_par_iter()
                    .map(|c| fit_pca_channel(train, c, r, cfg.gmm_components))
                    .collect::<mvbeta::Result<Vec<_>>>()
                    .with_context(|| format!("PCA fits with R = {r}"))?;
                pca.insert(r, fits);
            }
        }
        Ok(Self { dirichlet, pca })
    }

    fn model(&self, cfg: &ExperimentConfig, method: &Method, chosen: &[usize], priors: Priors) -> Result<Model> {
        Ok(match method {
            Method::MvBeta { r } => Model::MvBeta(MvBetaModel {
                channels: chosen
                    .iter()
                    .map(|&c| self.dirichlet[c - 1].mvbeta(*r, cfg.criterion).map_err(|e| e.in_channel(c)))
                    .collect::<mvbeta::Result<Vec<_>>>()?,
                priors,
            }),
            Method::SuperDirichlet => Model::SuperDirichlet(SuperDirichletModel::from_fits(
                chosen.iter().map(|&c| {
                    let f = &self.dirichlet[c - 1];
                    (c, f.positive.clone(), f.negative.clone())
                }),
                priors,
            )),
            Method::PcaGauss { r } => Model::PcaGauss(PcaGaussModel {
                channels: chosen.iter().map(|&c| self.pca[r][c - 1].clone()).collect(),
                priors,
            }),
            Method::External(_) => unreachable!("external methods are not trained"),
        })
    }
}

fn model_file_name(ranking: RankingMethod, method: &Method, m: usize) -> String {
    format!("{ranking}_{}_m{m:03}.model", method.slug())
}

/// Runs the sweep. With `models_dir`, every trained model is also written there.
pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset, models_dir: Option<&Path>) -> Result<ExperimentReport> {
    cfg.validate()?;
    if data.train.is_empty() || data.test.is_empty() {
        bail!("the experiment needs nonempty train and test splits");
    }
    let channels = data.channels;
    let k = data.train[0].channels[0].len() - 1;
    if let Some(&r) = cfg.r.iter().find(|&&r| r > k) {
        bail!("R = {r} exceeds the {k} transformed dimensions");
    }
    let m_values: Vec<usize> = cfg.m.clone().unwrap_or_else(|| (1..=channels).collect());
    if let Some(&m) = m_values.iter().find(|&&m| m > channels) {
        bail!("m = {m} exceeds the {channels} available channels");
    }
    let priors = Priors::new(cfg.prior_positive)?;
    let methods = methods(cfg);

    let rankings = cfg
        .rankings
        .iter()
        .map(|&r| {
            compute_ranking(r, &data.train, channels, cfg.ranking_file.as_deref())
                .with_context(|| format!("{r} ranking"))
                .map(|s| (r, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let cache = FitCache::build(cfg, &data.train, channels, &methods)?;
    if let Some(dir) = models_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut jobs: Vec<(usize, &Method, usize)> = Vec::new();
    for ri in 0..rankings.len() {
        for meth in &methods {
            jobs.extend(m_values.iter().map(|&m| (ri, meth, m)));
        }
    }
    let mut cells = jobs
        .par_iter()
        .map(|&(ri, method, m)| {
            let (ranking, scores) = &rankings[ri];
            let chosen: Vec<usize> = scores[..m].iter().map(|s| s.channel).collect();
            let run = || -> Result<GridCell> {
                let model = cache.model(cfg, method, &chosen, priors)?;
                let eval = evaluate(&model, &data.test)?;
                if let Some(dir) = models_dir {
                    let path = dir.join(model_file_name(*ranking, method, m));
                    fs::write(&path, model.to_text()).with_context(|| format!("writing {}", path.display()))?;
                }
                Ok(GridCell {
                    ranking: *ranking,
                    method: method.clone(),
                    m,
                    correct: eval.confusion.correct(),
                    total: eval.confusion.total(),
                    accuracy: eval.accuracy,
                })
            };
            run().with_context(|| format!("{ranking}, {method}, m = {m}"))
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(path) = &cfg.external_predictions {
        cells.extend(external_cells(cfg, path, &cfg.rankings, &m_values, &data.test)?);
    }

    let mut all_methods = methods.clone();
    if cells.iter().any(|c| matches!(c.method, Method::External(_))) {
        all_methods.push(Method::External(cfg.external_name.clone()));
    }
    let mut report = ExperimentReport {
        rankings,
        m_values,
        cells,
        summary: Vec::new(),
        ttests: Vec::new(),
    };
    for &ranking in &cfg.rankings {
        let mut present = Vec::new();
        for method in &all_methods {
            let cells: Vec<&GridCell> = report
                .cells
                .iter()
                .filter(|c| c.ranking == ranking && &c.method == method)
                .collect();
            if cells.is_empty() {
                continue;
            }
            present.push(method.clone());
            report.summary.push(summarize(ranking, method, &cells));
        }
        for (i, a) in present.iter().enumerate() {
            for b in &present[i + 1..] {
                let sa = report.series(ranking, a);
                let sb = report.series(ranking, b);
                if sa.len() < 2 || sb.len() < 2 {
                    continue;
                }
                let t = welch_t_test(&sa, &sb)?;
                report.ttests.push(TTestRow {
                    ranking,
                    a: a.clone(),
                    b: b.clone(),
                    t: t.t,
                    df: t.df,
                    p_value: t.p_value,
                });
            }
        }
    }
    Ok(report)
}

fn summarize(ranking: RankingMethod, method: &Method, cells: &[&GridCell]) -> SummaryRow {
    let best = cells.iter().map(|c| c.accuracy).fold(f64::NEG_INFINITY, f64::max);
    let best_m = cells.iter().filter(|c| c.accuracy == best).map(|c| c.m).collect();
    let n = cells.len() as f64;
    let mean = cells.iter().map(|c| c.accuracy).sum::<f64>() / n;
    let std_dev = if cells.len() > 1 {
        (cells.iter().map(|c| (c.accuracy - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        ranking,
        method: method.clone(),
        best,
        best_m,
        mean,
        std_dev,
    }
}

fn ranking_title(r: RankingMethod) -> &'static str {
    match r {
        RankingMethod::FisherRatio => "Fisher ratio",
        RankingMethod::ClassificationRate => "Classification rate",
        RankingMethod::External => "External ranking",
    }
}

/// Plain-text table: selection, classifier, best performance, mean, std. dev.
pub fn summary_text(report: &ExperimentReport) -> String {
    let mut rows = vec![[
        "Channel selection".to_string(),
        "Classifier".to_string(),
        "Best performance".to_string(),
        "Mean acc.".to_string(),
        "Std. dev.".to_string(),
    ]];
    for s in &report.summary {
        let ms: Vec<String> = s.best_m.iter().map(usize::to_string).collect();
        rows.push([
            ranking_title(s.ranking).to_string(),
            s.method.to_string(),
            format!("{:.2}% (m={})", 100.0 * s.best, ms.join(",")),
            format!("{:.2}%", 100.0 * s.mean),
            format!("{:.4}", s.std_dev),
        ]);
    }
    let widths: Vec<usize> = (0..5).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out.push_str(&format!(
        "\nMean and standard deviation are taken over m in {{{}}}.\n",
        compact_range(&report.m_values)
    ));
    out
}

fn compact_range(v: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[j] + 1 {
            j += 1;
        }
        parts.push(if j > i { format!("{}-{}", v[i], v[j]) } else { v[i].to_string() });
        i = j + 1;
    }
    parts.join(",")
}

/// Writes `grid.csv`, `summary.txt`, `summary.csv`, `ttests.csv` and one
/// `ranking_<method>.csv` per ranking.
pub fn write_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut grid = String::from("ranking,method,m,correct,total,accuracy\n");
    for c in &report.cells {
        grid.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.ranking, c.method, c.m, c.correct, c.total, c.accuracy
        ));
    }
    fs::write(out_dir.join("grid.csv"), grid)?;

    let mut summary = String::from("ranking,method,best,best_m,mean,std_dev\n");
    for s in &report.summary {
        let ms: Vec<String> = s.best_m.iter().map(usize::to_string).collect();
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.ranking,
            s.method,
            s.best,
            ms.join(" "),
            s.mean,
            s.std_dev
        ));
    }
    fs::write(out_dir.join("summary.csv"), summary)?;
    fs::write(out_dir.join("summary.txt"), summary_text(report))?;

    let mut tt = String::from("ranking,method_a,method_b,t,df,p_value\n");
    for t in &report.ttests {
        tt.push_str(&format!("{},{},{},{},{},{}\n", t.ranking, t.a, t.b, t.t, t.df, t.p_value));
    }
    fs::write(out_dir.join("ttests.csv"), tt)?;

    for (r, scores) in &report.rankings {
        write_ranking_csv(&out_dir.join(format!("ranking_{r}.csv")), scores)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SynthConfig;
    use crate::synth::{random_ground_truth, sample_dataset};
    use tempfile::tempdir;

    fn data() -> Dataset {
        let cfg = SynthConfig {
            channels: 5,
            informative: 2,
            separation: 0.5,
            ..SynthConfig::default()
        };
        let truth = random_ground_truth(&cfg, 11).unwrap();
        sample_dataset(&truth, 60, 40, 12)
    }

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            rankings: vec![RankingMethod::FisherRatio],
            r: vec![2, 4],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn full_dimension_grid_equals_super_dirichlet_grid() {
        let report = run_experiment(&quick_config(), &data(), None).unwrap();
        let full = report.series(RankingMethod::FisherRatio, &Method::MvBeta { r: 4 });
        let sdir = report.series(RankingMethod::FisherRatio, &Method::SuperDirichlet);
        assert_eq!(full.len(), 5);
        assert_eq!(full, sdir);
    }

    #[test]
    fn single_cell_report() {
        let cfg = ExperimentConfig {
            m: Some(vec![3]),
            r: vec![3],
            classifiers: vec![ClassifierKind::MvBeta],
            ..quick_config()
        };
        let report = run_experiment(&cfg, &data(), None).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.summary.len(), 1);
        assert!(report.ttests.is_empty());
        assert_eq!(report.summary[0].best_m, vec![3]);
        assert_eq!(report.summary[0].std_dev, 0.0);
    }

    #[test]
    fn cells_follow_ranking_method_and_m_order() {
        let report = run_experiment(&quick_config(), &data(), None).unwrap();
        let keys: Vec<(String, usize)> = report.cells.iter().map(|c| (c.method.to_string(), c.m)).collect();
        let methods = ["mvbeta(R=2)", "mvbeta(R=4)", "sdir", "pca_gauss(R=2)", "pca_gauss(R=4)"];
        let want: Vec<(String, usize)> = methods
            .iter()
            .flat_map(|m| (1..=5).map(move |k| (m.to_string(), k)))
            .collect();
        assert_eq!(keys, want);
        // 5 methods, all pairs
        assert_eq!(report.ttests.len(), 10);
    }

    #[test]
    fn external_predictions_and_ranking_file() {
        let ds = data();
        let dir = tempdir().unwrap();
        let ranking = dir.path().join("ranking.csv");
        fs::write(&ranking, "channel,score\n1,0.2\n2,0.9\n3,0.5\n4,0.1\n5,0.3\n").unwrap();
        let preds = dir.path().join("svm.csv");
        let mut text = String::from("m,trial_id,predicted\n");
        for m in 1..=2 {
            for (i, t) in ds.test.iter().enumerate() {
                let p = if i < 10 { t.label.flipped() } else { t.label };
                text.push_str(&format!("{m},{},{}\n", t.id, p));
            }
        }
        fs::write(&preds, text).unwrap();
        let cfg = ExperimentConfig {
            rankings: vec![RankingMethod::External],
            ranking_file: Some(ranking),
            m: Some(vec![1, 2]),
            r: vec![3],
            classifiers: vec![ClassifierKind::MvBeta],
            external_predictions: Some(preds),
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&cfg, &ds, None).unwrap();
        assert_eq!(
            report.rankings[0].1.iter().map(|s| s.channel).collect::<Vec<_>>(),
            vec![2, 3, 5, 1, 4]
        );
        let svm = report.series(RankingMethod::External, &Method::External("svm".into()));
        let want = 1.0 - 10.0 / ds.test.len() as f64;
        assert_eq!(svm, vec![want, want]);
        assert_eq!(report.ttests.len(), 1);
    }

    #[test]
    fn incomplete_external_predictions_are_rejected() {
        let ds = data();
        let dir = tempdir().unwrap();
        let preds = dir.path().join("svm.csv");
        fs::write(&preds, format!("m,trial_id,predicted\n1,{},+1\n", ds.test[0].id)).unwrap();
        let cfg = ExperimentConfig {
            m: Some(vec![1]),
            external_predictions: Some(preds),
            ..quick_config()
        };
        assert!(run_experiment(&cfg, &ds, None).is_err());
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        let ds = data();
        let too_many = ExperimentConfig {
            m: Some(vec![9]),
            ..quick_config()
        };
        assert!(run_experiment(&too_many, &ds, None).is_err());
        let big_r = ExperimentConfig {
            r: vec![5],
            ..quick_config()
        };
        assert!(run_experiment(&big_r, &ds, None).is_err());
    }

    #[test]
    fn summary_text_layout() {
        let cfg = ExperimentConfig {
            m: Some(vec![1, 2, 3, 5]),
            ..quick_config()
        };
        let report = run_experiment(&cfg, &data(), None).unwrap();
        let text = summary_text(&report);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("Channel selection | Classifier"));
        assert!(text.contains("Fisher ratio"));
        assert!(text.contains("m in {1-3,5}"));
        assert_eq!(text.lines().filter(|l| l.starts_with("Fisher ratio")).count(), 5);
    }
}
