//! Two-class MAP classifiers over per-channel mDWT features.
//!
//! * [`MvBetaModel`]: independent beta marginals of the PNT-transformed features,
//!   restricted to the selected dimensions of each channel.
//! * [`SuperDirichletModel`]: a Dirichlet per class and channel on the raw
//!   features (the no-selection reference rule).
//! * [`PcaGaussModel`]: PCA projection per channel followed by a Gaussian (or
//!   Gaussian mixture) per class.
//!
//! All models decide `+1` when the positive log-posterior is at least the
//! negative one.

mod mvbeta;
mod pca;
mod sdir;
mod serialize;
mod ttest;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dataset::{FeatureTrial, Label};
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;
use crate::selection::{ChannelScore, Criterion, RankingMethod};

pub use mvbeta::{train_mvbeta, ChannelFit, MvBetaChannel, MvBetaModel};
pub use pca::{fit_pca_channel, train_pca_gauss, GaussianComponent, PcaChannel, PcaGaussModel};
pub use sdir::{train_super_dirichlet, SuperDirichletModel};
pub use serialize::{Model, MODEL_FORMAT_VERSION};
pub use ttest::{t_test_accuracies, welch_t_test, welch_t_test_summary, TTest};

/// Class priors `p(C = +1)` and `p(C = -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    positive: f64,
}

impl Priors {
    pub fn new(positive: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&positive) {
            return Err(Error::invalid(format!("prior {positive} is outside [0, 1]")));
        }
        Ok(Self { positive })
    }

    pub fn uniform() -> Self {
        Self { positive: 0.5 }
    }

    pub fn positive(&self) -> f64 {
        self.positive
    }

    pub fn negative(&self) -> f64 {
        1.0 - self.positive
    }

    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative(),
        }
    }

    pub(crate) fn log(&self) -> (f64, f64) {
        (self.positive().ln(), self.negative().ln())
    }
}

impl Default for Priors {
    fn default() -> Self {
        Self::uniform()
    }
}

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    MvBeta,
    SuperDirichlet,
    PcaGauss,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::MvBeta => "mvbeta",
            ClassifierKind::SuperDirichlet => "sdir",
            ClassifierKind::PcaGauss => "pca_gauss",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mvbeta" => Ok(ClassifierKind::MvBeta),
            "sdir" | "super_dirichlet" => Ok(ClassifierKind::SuperDirichlet),
            "pca_gauss" | "pca" => Ok(ClassifierKind::PcaGauss),
            other => Err(Error::invalid(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Shared training settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Number of top-ranked channels used (`m`).
    pub channels: usize,
    /// Dimensions kept per channel (`R`).
    pub dims: usize,
    pub criterion: Criterion,
    pub priors: Priors,
    /// Mixture components per class for the PCA baseline.
    pub gmm_components: usize,
}

impl TrainConfig {
    pub fn new(channels: usize, dims: usize) -> Self {
        Self {
            channels,
            dims,
            criterion: Criterion::Variance,
            priors: Priors::uniform(),
            gmm_components: 1,
        }
    }
}

/// Top-`m` channel numbers of a ranking, validated against the channel count.
pub(crate) fn top_channels(ranking: &[ChannelScore], m: usize, available: usize) -> Result<Vec<usize>> {
    if m == 0 || m > available {
        return Err(Error::invalid(format!("m = {m} must lie in 1..={available}")));
    }
    if ranking.len() < m {
        return Err(Error::invalid(format!(
            "ranking lists {} channels, {m} requested",
            ranking.len()
        )));
    }
    let chosen: Vec<usize> = ranking[..m].iter().map(|s| s.channel).collect();
    if let Some(c) = chosen.iter().find(|&&c| c == 0 || c > available) {
        return Err(Error::invalid(format!("ranked channel {c} does not exist")));
    }
    Ok(chosen)
}

/// Checks that both classes are present.
pub(crate) fn require_both_classes(trials: &[FeatureTrial]) -> Result<()> {
    let pos = trials.iter().any(|t| t.label == Label::Positive);
    let neg = trials.iter().any(|t| t.label == Label::Negative);
    if pos && neg {
        Ok(())
    } else {
        Err(Error::invalid("training data must contain both classes"))
    }
}

pub(crate) fn channel_vector(channels: &[MdwtVector], channel: usize) -> Result<&MdwtVector> {
    channels.get(channel - 1).ok_or_else(|| {
        Error::invalid(format!(
            "trial has {} channels, model needs channel {channel}",
            channels.len()
        ))
    })
}

/// A trained two-class model.
pub trait Classifier: Sync {
    /// Unnormalized log-posteriors `(ln f(x|+1) p(+1), ln f(x|-1) p(-1))`.
    fn log_posteriors(&self, channels: &[MdwtVector]) -> Result<(f64, f64)>;

    /// 1-based channel numbers the model reads.
    fn channel_list(&self) -> Vec<usize>;

    /// MAP decision; ties go to `+1`.
    fn predict(&self, channels: &[MdwtVector]) -> Result<Label> {
        let (pos, neg) = self.log_posteriors(channels)?;
        if pos.is_nan() || neg.is_nan() {
            return Err(Error::Numeric("log-posterior is NaN".into()));
        }
        Ok(if pos >= neg {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub trial_id: String,
    pub predicted: Label,
    pub actual: Label,
}

/// Counts keyed by (actual, predicted).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_negative + self.false_positive + self.true_negative
    }

    pub fn correct(&self) -> usize {
        self.true_positive + self.true_negative
    }
}

/// Settings a result was produced under.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvaluationMeta {
    pub m: usize,
    pub r: Option<usize>,
    pub ranking: Option<RankingMethod>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub accuracy: f64,
    pub predictions: Vec<Prediction>,
    pub confusion: Confusion,
    pub meta: EvaluationMeta,
}

impl EvaluationResult {
    pub fn from_predictions(predictions: Vec<Prediction>) -> Result<Self> {
        if predictions.is_empty() {
            return Err(Error::invalid("evaluation needs at least one trial"));
        }
        let mut confusion = Confusion::default();
        for p in &predictions {
            match (p.actual, p.predicted) {
                (Label::Positive, Label::Positive) => confusion.true_positive += 1,
                (Label::Positive, Label::Negative) => confusion.false_negative += 1,
                (Label::Negative, Label::Positive) => confusion.false_positive += 1,
                (Label::Negative, Label::Negative) => confusion.true_negative += 1,
            }
        }
        Ok(Self {
            accuracy: confusion.correct() as f64 / confusion.total() as f64,
            predictions,
            confusion,
            meta: EvaluationMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: EvaluationMeta) -> Self {
        self.meta = meta;
        self
    }
}

/// Predicts every trial (in parallel, results kept in input order) and scores
/// the predictions against the trial labels.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, test_set: &[FeatureTrial]) -> Result<EvaluationResult> {
    let predictions = test_set
        .par_iter()
        .map(|t| {
            model.predict(&t.channels).map(|predicted| Prediction {
                trial_id: t.id.clone(),
                predicted,
                actual: t.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = EvaluationMeta {
        m: model.channel_list().len(),
        ..EvaluationMeta::default()
    };
    Ok(EvaluationResult::from_predictions(predictions)?.with_meta(meta))
}
