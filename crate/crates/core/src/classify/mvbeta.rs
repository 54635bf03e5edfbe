use rayon::prelude::*;

use super::{channel_vector, require_both_classes, top_channels, Classifier, Priors, TrainConfig};
use crate::dataset::{channel_by_class, channel_count, FeatureTrial};
use crate::dirstat::{dirichlet_mle, DirichletParams};
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;
use crate::neutral::{beta_params_from_dirichlet, pnt_forward, BetaParamVector};
use crate::selection::{select_features, ChannelScore, Criterion, FeatureSelection};

/// Per-channel parameters of the mvBeta model.
#[derive(Debug, Clone, PartialEq)]
pub struct MvBetaChannel {
    /// 1-based channel number.
    pub channel: usize,
    pub selection: FeatureSelection,
    pub positive: BetaParamVector,
    pub negative: BetaParamVector,
}

impl MvBetaChannel {
    fn log_likelihoods(&self, x: &MdwtVector) -> Result<(f64, f64)> {
        let u = pnt_forward(x)?;
        if u.len() != self.positive.len() {
            return Err(Error::invalid(format!(
                "channel {} has {} coordinates, model expects {}",
                self.channel,
                x.len(),
                self.positive.len() + 1
            )));
        }
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &k in &self.selection.kept {
            let uk = u.coords()[k];
            pos += self.positive.get(k).ln_pdf(uk)?;
            neg += self.negative.get(k).ln_pdf(uk)?;
        }
        Ok((pos, neg))
    }
}

/// Product of class-conditional beta densities over the kept transformed
/// dimensions of the chosen channels.
///
/// The kept dimensions of a channel are ranked on a fit of both classes
/// pooled, so both classes read the same coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MvBetaModel {
    pub channels: Vec<MvBetaChannel>,
    pub priors: Priors,
}

impl MvBetaModel {
    /// Fits the listed channels (1-based, in the given order).
    pub fn fit_channels(
        trials: &[FeatureTrial],
        channels: &[usize],
        dims: usize,
        criterion: Criterion,
        priors: Priors,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::invalid("no channels selected"));
        }
        let fitted = channels
            .par_iter()
            .map(|&c| {
                ChannelFit::new(trials, c)?
                    .mvbeta(dims, criterion)
                    .map_err(|e| e.in_channel(c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channels: fitted,
            priors,
        })
    }
}

/// Dirichlet fits of one channel: per class and with both classes pooled.
///
/// Everything the mvBeta and super-Dirichlet models need for any `R`, so a
/// sweep over `(m, R)` fits each channel once.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFit {
    /// 1-based channel number.
    pub channel: usize,
    pub positive: DirichletParams,
    pub negative: DirichletParams,
    pub pooled: DirichletParams,
}

impl ChannelFit {
    /// Errors are annotated with the channel number.
    pub fn new(trials: &[FeatureTrial], channel: usize) -> Result<Self> {
        require_both_classes(trials)?;
        let available = channel_count(trials)?;
        if channel == 0 || channel > available {
            return Err(Error::invalid(format!("channel {channel} does not exist")));
        }
        let fit = || {
            let (pos, neg) = channel_by_class(trials, channel - 1);
            let positive = dirichlet_mle(&pos)?;
            let negative = dirichlet_mle(&neg)?;
            let pooled: Vec<MdwtVector> = pos.into_iter().chain(neg).collect();
            Ok(Self {
                channel,
                positive,
                negative,
                pooled: dirichlet_mle(&pooled)?,
            })
        };
        fit().map_err(|e: Error| e.in_channel(channel))
    }

    /// Class betas plus the `dims` coordinates ranked highest on the pooled fit.
    pub fn mvbeta(&self, dims: usize, criterion: Criterion) -> Result<MvBetaChannel> {
        let pooled = beta_params_from_dirichlet(&self.pooled)?;
        Ok(MvBetaChannel {
            channel: self.channel,
            selection: select_features(&pooled, dims, criterion)?,
            positive: beta_params_from_dirichlet(&self.positive)?,
            negative: beta_params_from_dirichlet(&self.negative)?,
        })
    }
}

/// Trains mvBeta on the top `config.channels` channels of `ranking`.
pub fn train_mvbeta(trials: &[FeatureTrial], ranking: &[ChannelScore], config: &TrainConfig) -> Result<MvBetaModel> {
    let available = channel_count(trials)?;
    let chosen = top_channels(ranking, config.channels, available)?;
    MvBetaModel::fit_channels(trials, &chosen, config.dims, config.criterion, config.priors)
}

impl Classifier for MvBetaModel {
    fn log_posteriors(&self, channels: &[MdwtVector]) -> Result<(f64, f64)> {
        let (mut pos, mut neg) = self.priors.log();
        for ch in &self.channels {
            let x = channel_vector(channels, ch.channel)?;
            let (p, n) = ch.log_likelihoods(x).map_err(|e| e.in_channel(ch.channel))?;
            pos += p;
            neg += n;
        }
        Ok((pos, neg))
    }

    fn channel_list(&self) -> Vec<usize> {
        self.channels.iter().map(|c| c.channel).collect()
    }
}
