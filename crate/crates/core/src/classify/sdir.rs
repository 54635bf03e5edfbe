use rayon::prelude::*;

use super::{channel_vector, require_both_classes, top_channels, Classifier, Priors, TrainConfig};
use crate::dataset::{channel_by_class, channel_count, FeatureTrial};
use crate::dirstat::{dirichlet_mle, dirichlet_pdf_log, DirichletParams};
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;
use crate::selection::ChannelScore;

/// MAP rule with a Dirichlet per class and channel on the untransformed
/// features. Equivalent to mvBeta with every dimension kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDirichletModel {
    /// 1-based channel numbers, parallel to `positive` and `negative`.
    pub channels: Vec<usize>,
    pub positive: Vec<DirichletParams>,
    pub negative: Vec<DirichletParams>,
    pub priors: Priors,
}

impl SuperDirichletModel {
    pub fn fit_channels(trials: &[FeatureTrial], channels: &[usize], priors: Priors) -> Result<Self> {
        require_both_classes(trials)?;
        let available = channel_count(trials)?;
        if channels.is_empty() {
            return Err(Error::invalid("no channels selected"));
        }
        let fits = channels
            .par_iter()
            .map(|&c| {
                if c == 0 || c > available {
                    return Err(Error::invalid(format!("channel {c} does not exist")));
                }
                let (pos, neg) = channel_by_class(trials, c - 1);
                let fit = || Ok::<_, Error>((dirichlet_mle(&pos)?, dirichlet_mle(&neg)?));
                fit().map_err(|e| e.in_channel(c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_fits(fits.into_iter().zip(channels.iter().copied()).map(|((p, n), c)| (c, p, n)), priors))
    }

    /// Assembles a model from `(channel, positive, negative)` fits.
    pub fn from_fits(
        fits: impl IntoIterator<Item = (usize, DirichletParams, DirichletParams)>,
        priors: Priors,
    ) -> Self {
        let mut model = Self {
            channels: Vec::new(),
            positive: Vec::new(),
            negative: Vec::new(),
            priors,
        };
        for (c, p, n) in fits {
            model.channels.push(c);
            model.positive.push(p);
            model.negative.push(n);
        }
        model
    }
}

/// Trains the reference rule on the top `config.channels` channels of `ranking`.
/// `config.dims` is ignored.
pub fn train_super_dirichlet(
    trials: &[FeatureTrial],
    ranking: &[ChannelScore],
    config: &TrainConfig,
) -> Result<SuperDirichletModel> {
    let available = channel_count(trials)?;
    let chosen = top_channels(ranking, config.channels, available)?;
    SuperDirichletModel::fit_channels(trials, &chosen, config.priors)
}

impl Classifier for SuperDirichletModel {
    fn log_posteriors(&self, channels: &[MdwtVector]) -> Result<(f64, f64)> {
        let (mut pos, mut neg) = self.priors.log();
        for (i, &c) in self.channels.iter().enumerate() {
            let x = channel_vector(channels, c)?;
            let lp = || {
                Ok::<_, Error>((
                    dirichlet_pdf_log(x, &self.positive[i])?,
                    dirichlet_pdf_log(x, &self.negative[i])?,
                ))
            };
            let (p, n) = lp().map_err(|e| e.in_channel(c))?;
            pos += p;
            neg += n;
        }
        Ok((pos, neg))
    }

    fn channel_list(&self) -> Vec<usize> {
        self.channels.clone()
    }
}
