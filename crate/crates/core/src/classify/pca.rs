use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::{channel_vector, require_both_classes, top_channels, Classifier, Priors, TrainConfig};
use crate::dataset::{channel_by_class, channel_count, FeatureTrial};
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;
use crate::selection::ChannelScore;

const COV_RIDGE: f64 = 1e-9;
const EM_MAX_ITER: usize = 500;
const EM_TOLERANCE: f64 = 1e-10;

/// One weighted Gaussian in the projected space.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `R x R`, already regularized.
    pub cov: Vec<f64>,
}

impl GaussianComponent {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn cholesky(&self) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        let r = self.dim();
        Cholesky::new(DMatrix::from_row_slice(r, r, &self.cov))
            .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))
    }

    fn ln_pdf(&self, y: &[f64]) -> Result<f64> {
        let chol = self.cholesky()?;
        let diff = DVector::from_iterator(y.len(), y.iter().zip(&self.mean).map(|(a, b)| a - b));
        let z = chol
            .l()
            .solve_lower_triangular(&diff)
            .ok_or_else(|| Error::Numeric("singular covariance factor".into()))?;
        let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        Ok(-0.5 * (y.len() as f64 * (2.0 * PI).ln() + log_det + z.norm_squared()))
    }
}

fn mixture_ln_pdf(components: &[GaussianComponent], y: &[f64]) -> Result<f64> {
    let terms = components
        .iter()
        .map(|c| Ok(c.weight.ln() + c.ln_pdf(y)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(&terms))
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Projection and class densities for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaChannel {
    /// 1-based channel number.
    pub channel: usize,
    /// Pooled training mean.
    pub center: Vec<f64>,
    /// `R` orthonormal directions, by descending eigenvalue.
    pub basis: Vec<Vec<f64>>,
    pub positive: Vec<GaussianComponent>,
    pub negative: Vec<GaussianComponent>,
}

impl PcaChannel {
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.center.len() {
            return Err(Error::invalid(format!(
                "channel {} has {} coordinates, model expects {}",
                self.channel,
                x.len(),
                self.center.len()
            )));
        }
        Ok(self
            .basis
            .iter()
            .map(|dir| dir.iter().zip(x.iter().zip(&self.center)).map(|(d, (v, c))| d * (v - c)).sum())
            .collect())
    }
}

/// PCA per channel followed by a Gaussian (mixture) per class.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaGaussModel {
    pub channels: Vec<PcaChannel>,
    pub priors: Priors,
}

impl PcaGaussModel {
    pub fn fit_channels(
        trials: &[FeatureTrial],
        channels: &[usize],
        dims: usize,
        components: usize,
        priors: Priors,
    ) -> Result<Self> {
        require_both_classes(trials)?;
        let available = channel_count(trials)?;
        if channels.is_empty() {
            return Err(Error::invalid("no channels selected"));
        }
        if components == 0 {
            return Err(Error::invalid("at least one mixture component is required"));
        }
        let fitted = channels
            .par_iter()
            .map(|&c| {
                if c == 0 || c > available {
                    return Err(Error::invalid(format!("channel {c} does not exist")));
                }
                fit_pca_channel(trials, c, dims, components)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channels: fitted,
            priors,
        })
    }
}

pub fn train_pca_gauss(
    trials: &[FeatureTrial],
    ranking: &[ChannelScore],
    config: &TrainConfig,
) -> Result<PcaGaussModel> {
    let available = channel_count(trials)?;
    let chosen = top_channels(ranking, config.channels, available)?;
    PcaGaussModel::fit_channels(trials, &chosen, config.dims, config.gmm_components, config.priors)
}

/// Fits the projection and class densities of one channel. Errors are
/// annotated with the channel number.
pub fn fit_pca_channel(trials: &[FeatureTrial], channel: usize, dims: usize, components: usize) -> Result<PcaChannel> {
    fit_channel(trials, channel, dims, components).map_err(|e| e.in_channel(channel))
}

fn fit_channel(trials: &[FeatureTrial], channel: usize, dims: usize, components: usize) -> Result<PcaChannel> {
    if components == 0 {
        return Err(Error::invalid("at least one mixture component is required"));
    }
    let (pos, neg) = channel_by_class(trials, channel - 1);
    let d = pos[0].len();
    if dims == 0 || dims >= d {
        return Err(Error::invalid(format!("R = {dims} must lie in 1..={}", d - 1)));
    }
    let all: Vec<&[f64]> = pos.iter().chain(&neg).map(MdwtVector::coords).collect();
    let n = all.len() as f64;
    let mut center = vec![0.0; d];
    for x in &all {
        for (c, v) in center.iter_mut().zip(x.iter()) {
            *c += v;
        }
    }
    center.iter_mut().for_each(|c| *c /= n);

    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for x in &all {
        let diff = DVector::from_iterator(d, x.iter().zip(&center).map(|(v, c)| v - c));
        scatter += &diff * diff.transpose();
    }
    scatter /= n - 1.0;
    let eig = SymmetricEigen::try_new(scatter, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("covariance eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let basis: Vec<Vec<f64>> = order[..dims]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            // Sign convention: largest-magnitude entry positive.
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();

    let mut ch = PcaChannel {
        channel,
        center,
        basis,
        positive: Vec::new(),
        negative: Vec::new(),
    };
    let project = |set: &[MdwtVector]| set.iter().map(|x| ch.project(x.coords())).collect::<Result<Vec<_>>>();
    let yp = project(&pos)?;
    let yn = project(&neg)?;
    ch.positive = fit_mixture(&yp, components)?;
    ch.negative = fit_mixture(&yn, components)?;
    Ok(ch)
}

fn weighted_gaussian(points: &[Vec<f64>], resp: &[f64]) -> Result<GaussianComponent> {
    let r = points[0].len();
    let total: f64 = resp.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("mixture component lost all its points"));
    }
    let mut mean = vec![0.0; r];
    for (y, w) in points.iter().zip(resp) {
        for (m, v) in mean.iter_mut().zip(y) {
            *m += w * v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut cov = DMatrix::<f64>::zeros(r, r);
    for (y, w) in points.iter().zip(resp) {
        let diff = DVector::from_iterator(r, y.iter().zip(&mean).map(|(v, m)| v - m));
        cov += (&diff * diff.transpose()) * *w;
    }
    // Unbiased for the single-Gaussian case.
    let denom = if resp.iter().all(|&w| w == 1.0) && total > 1.0 {
        total - 1.0
    } else {
        total
    };
    cov /= denom;
    let ridge = COV_RIDGE * cov.trace() / r as f64;
    for i in 0..r {
        cov[(i, i)] += ridge;
    }
    Ok(GaussianComponent {
        weight: total / points.len() as f64,
        mean,
        cov: cov.transpose().as_slice().to_vec(),
    })
}

/// One Gaussian, or a `k`-component mixture fitted by EM from a split along
/// the first principal coordinate.
fn fit_mixture(points: &[Vec<f64>], k: usize) -> Result<Vec<GaussianComponent>> {
    let n = points.len();
    let r = points.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::invalid("each class needs at least two trials"));
    }
    if k == 1 {
        let g = weighted_gaussian(points, &vec![1.0; n])?;
        g.cholesky()?;
        return Ok(vec![g]);
    }
    if n < k * (r + 1) {
        return Err(Error::invalid(format!(
            "{n} trials are too few for {k} components in {r} dimensions"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| points[i][0].partial_cmp(&points[j][0]).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
    let mut comps = (0..k)
        .map(|j| {
            let mut resp = vec![0.0; n];
            for &i in &order[j * n / k..(j + 1) * n / k] {
                resp[i] = 1.0;
            }
            let mut g = weighted_gaussian(points, &resp)?;
            g.weight = 1.0 / k as f64;
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut prev = f64::NEG_INFINITY;
    for _ in 0..EM_MAX_ITER {
        let mut resp = vec![vec![0.0; n]; k];
        let mut ll = 0.0;
        for (i, y) in points.iter().enumerate() {
            let terms = comps
                .iter()
                .map(|c| Ok(c.weight.ln() + c.ln_pdf(y)?))
                .collect::<Result<Vec<f64>>>()?;
            let lse = log_sum_exp(&terms);
            ll += lse;
            for j in 0..k {
                resp[j][i] = (terms[j] - lse).exp();
            }
        }
        comps = resp
            .iter()
            .map(|rj| weighted_gaussian(points, rj))
            .collect::<Result<Vec<_>>>()?;
        for c in &comps {
            c.cholesky()?;
        }
        if (ll - prev).abs() <= EM_TOLERANCE * ll.abs().max(1.0) {
            break;
        }
        prev = ll;
    }
    Ok(comps)
}

impl Classifier for PcaGaussModel {
    fn log_posteriors(&self, channels: &[MdwtVector]) -> Result<(f64, f64)> {
        let (mut pos, mut neg) = self.priors.log();
        for ch in &self.channels {
            let x = channel_vector(channels, ch.channel)?;
            let lp = || {
                let y = ch.project(x.coords())?;
                Ok::<_, Error>((mixture_ln_pdf(&ch.positive, &y)?, mixture_ln_pdf(&ch.negative, &y)?))
            };
            let (p, n) = lp().map_err(|e| e.in_channel(ch.channel))?;
            pos += p;
            neg += n;
        }
        Ok((pos, neg))
    }

    fn channel_list(&self) -> Vec<usize> {
        self.channels.iter().map(|c| c.channel).collect()
    }
}
