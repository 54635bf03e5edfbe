//! Channel ranking and within-channel feature selection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::classify::{evaluate, MvBetaModel, Priors};
use crate::dataset::{channel_by_class, channel_count, FeatureTrial};
use crate::dirstat::BetaParams;
use crate::error::{Error, Result};
use crate::neutral::BetaParamVector;

/// How a channel score was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankingMethod {
    FisherRatio,
    ClassificationRate,
    /// Scores read from a user-supplied `channel,score` file.
    External,
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankingMethod::FisherRatio => "fisher_ratio",
            RankingMethod::ClassificationRate => "classification_rate",
            RankingMethod::External => "external_csv",
        })
    }
}

impl FromStr for RankingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fisher_ratio" | "fr" => Ok(RankingMethod::FisherRatio),
            "classification_rate" | "cr" => Ok(RankingMethod::ClassificationRate),
            "external_csv" | "external" => Ok(RankingMethod::External),
            other => Err(Error::invalid(format!("unknown ranking method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelScore {
    /// 1-based channel number.
    pub channel: usize,
    pub score: f64,
    pub method: RankingMethod,
}

/// Sorts scores descending, ties by ascending channel number.
pub fn sort_scores(scores: &mut [ChannelScore]) {
    scores.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap_or(Ordering::Equal)
            .then(x.channel.cmp(&y.channel))
    });
}

/// Within-channel selection criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Variance,
    Entropy,
}

impl Criterion {
    pub fn value(self, p: &BetaParams) -> f64 {
        match self {
            Criterion::Variance => beta_variance(p),
            Criterion::Entropy => beta_entropy(p),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Variance => "variance",
            Criterion::Entropy => "entropy",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "variance" => Ok(Criterion::Variance),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(Error::invalid(format!("unknown selection criterion {other:?}"))),
        }
    }
}

/// Kept transformed dimensions of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelection {
    /// 0-based indices into the transformed vector, by descending criterion value.
    pub kept: Vec<usize>,
    pub criterion: Criterion,
}

/// `ab / ((a+b)² (a+b+1))`
pub fn beta_variance(p: &BetaParams) -> f64 {
    p.variance()
}

/// Differential entropy of `Beta(a, b)` in nats.
pub fn beta_entropy(p: &BetaParams) -> f64 {
    p.entropy()
}

/// Keeps the `r` dimensions with the largest criterion values.
pub fn select_features(
    params: &BetaParamVector,
    r: usize,
    criterion: Criterion,
) -> Result<FeatureSelection> {
    let k = params.len();
    if r == 0 || r > k {
        return Err(Error::invalid(format!("R = {r} must lie in 1..={k}")));
    }
    let values: Vec<f64> = params.iter().map(|p| criterion.value(&p)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // stable sort: equal values keep ascending index order
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(Ordering::Equal));
    order.truncate(r);
    Ok(FeatureSelection {
        kept: order,
        criterion,
    })
}

fn mean_and_scatter<V: AsRef<[f64]>>(rows: &[V], dim: usize) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.len() as f64;
    let mut mean = DVector::zeros(dim);
    for r in rows {
        mean += DVector::from_column_slice(r.as_ref());
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for r in rows {
        let d = DVector::from_column_slice(r.as_ref()) - &mean;
        cov += &d * d.transpose();
    }
    cov /= n - 1.0;
    (mean, cov)
}

// Eigenvalues below this fraction of the largest are treated as a null direction.
const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

/// Fisher ratio max_d (dᵀΔμ)² / dᵀ(Σ₊ + Σ₋)d = Δμᵀ (Σ₊ + Σ₋)⁺ Δμ.
///
/// Simplex-valued features make the pooled covariance rank deficient along the
/// all-ones direction, where Δμ also vanishes; that direction is dropped through
/// a spectral pseudo-inverse.
pub fn fisher_ratio<V: AsRef<[f64]>>(class_pos: &[V], class_neg: &[V]) -> Result<f64> {
    if class_pos.len() < 2 || class_neg.len() < 2 {
        return Err(Error::invalid("Fisher ratio needs at least 2 vectors per class"));
    }
    let dim = class_pos[0].as_ref().len();
    if dim == 0
        || class_pos
            .iter()
            .chain(class_neg)
            .any(|r| r.as_ref().len() != dim)
    {
        return Err(Error::invalid("Fisher ratio inputs must share one nonzero dimension"));
    }
    let (mu_p, cov_p) = mean_and_scatter(class_pos, dim);
    let (mu_n, cov_n) = mean_and_scatter(class_neg, dim);
    let delta = mu_p - mu_n;
    let pooled = cov_p + cov_n;
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("pooled covariance is not finite".into()));
    }
    let eig = SymmetricEigen::new(pooled);
    let largest = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if !(largest > 0.0) {
        return Err(Error::Numeric("pooled covariance is zero".into()));
    }
    let cutoff = PINV_RELATIVE_CUTOFF * largest;
    let mut ratio = 0.0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let proj = eig.eigenvectors.column(i).dot(&delta);
            ratio += proj * proj / lambda;
        }
    }
    Ok(ratio)
}

/// Fisher ratio per channel, sorted descending.
pub fn rank_channels_fr(trials: &[FeatureTrial]) -> Result<Vec<ChannelScore>> {
    let channels = channel_count(trials)?;
    let mut scores = (0..channels)
        .into_par_iter()
        .map(|c| {
            let (pos, neg) = channel_by_class(trials, c);
            fisher_ratio(&pos, &neg)
                .map(|score| ChannelScore {
                    channel: c + 1,
                    score,
                    method: RankingMethod::FisherRatio,
                })
                .map_err(|e| e.in_channel(c + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_scores(&mut scores);
    Ok(scores)
}

/// Resubstitution accuracy of a single-channel mvBeta classifier (no feature
/// selection) per channel, sorted descending.
pub fn rank_channels_cr(trials: &[FeatureTrial]) -> Result<Vec<ChannelScore>> {
    let channels = channel_count(trials)?;
    let mut scores = (0..channels)
        .into_par_iter()
        .map(|c| {
            let dims = trials[0].channels[c].len() - 1;
            let model = MvBetaModel::fit_channels(
                trials,
                &[c + 1],
                dims,
                Criterion::Variance,
                Priors::uniform(),
            )?;
            let result = evaluate(&model, trials)?;
            Ok(ChannelScore {
                channel: c + 1,
                score: result.accuracy,
                method: RankingMethod::ClassificationRate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_scores(&mut scores);
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::dirstat::{dirichlet_sample, DirichletParams};
    use crate::msignal::MdwtVector;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta, Distribution, StandardNormal};

    fn bp(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn variance_values() {
        assert_abs_diff_eq!(beta_variance(&bp(1.0, 1.0)), 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_variance(&bp(2.0, 5.0)), 10.0 / (49.0 * 8.0), epsilon = 1e-15);
        for a in [0.5, 1.0, 3.0, 17.0] {
            assert_abs_diff_eq!(
                beta_variance(&bp(a, a)),
                1.0 / (4.0 * (2.0 * a + 1.0)),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn variance_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 1_000_000;
        let dist = Beta::new(2.0, 5.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((s2 - beta_variance(&bp(2.0, 5.0))).abs() < 5e-4);
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(beta_entropy(&bp(1.0, 1.0)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(beta_entropy(&bp(2.0, 2.0)), -0.125_093, epsilon = 1e-4);
        for (a, b) in [(0.7, 3.0), (2.0, 9.5), (12.0, 1.5)] {
            assert_eq!(beta_entropy(&bp(a, b)), beta_entropy(&bp(b, a)));
        }
    }

    #[test]
    fn entropy_matches_monte_carlo() {
        // -E[ln f(X)] with X ~ Beta(2, 2)
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dist = Beta::new(2.0, 2.0).unwrap();
        let p = bp(2.0, 2.0);
        let n = 2_000_000;
        let mc = -(0..n)
            .map(|_| p.ln_pdf(dist.sample(&mut rng)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mc - beta_entropy(&p)).abs() < 1e-3, "{mc}");
    }

    #[test]
    fn selection_by_variance() {
        let params = BetaParamVector::new(vec![2.0, 6.0, 7.0, 16.0], vec![5.0, 3.0, 9.0, 7.0]).unwrap();
        let vars: Vec<f64> = params.iter().map(|p| beta_variance(&p)).collect();
        let expected = [0.025_510_2, 0.022_222_2, 0.014_476_1, 0.008_821_7];
        for (v, e) in vars.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-7);
        }
        let sel = select_features(&params, 3, Criterion::Variance).unwrap();
        assert_eq!(sel.kept, vec![0, 1, 2]);
        let all = select_features(&params, 4, Criterion::Variance).unwrap();
        assert_eq!(all.kept, vec![0, 1, 2, 3]);
        assert!(select_features(&params, 0, Criterion::Variance).is_err());
        assert!(select_features(&params, 5, Criterion::Entropy).is_err());
    }

    #[test]
    fn selection_ties_fall_back_to_index() {
        let params = BetaParamVector::new(vec![3.0; 4], vec![3.0; 4]).unwrap();
        for c in [Criterion::Variance, Criterion::Entropy] {
            assert_eq!(select_features(&params, 2, c).unwrap().kept, vec![0, 1]);
        }
    }

    #[test]
    fn selection_orders_are_descending() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a: Vec<f64> = (0..6).map(|_| rng.random_range(0.5..20.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.random_range(0.5..20.0)).collect();
            let params = BetaParamVector::new(a, b).unwrap();
            for c in [Criterion::Variance, Criterion::Entropy] {
                let sel = select_features(&params, 6, c).unwrap();
                let vals: Vec<f64> = sel.kept.iter().map(|&k| c.value(&params.get(k))).collect();
                assert!(vals.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, mean: &[f64]) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                mean.iter()
                    .map(|m| m + rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn fisher_ratio_identity_covariance() {
        // ±s·e_i around each mean gives a sample covariance of exactly I.
        let design = |mu: [f64; 2]| -> Vec<Vec<f64>> {
            let s = (1.5f64).sqrt(); // 4 points, n-1 = 3 → var = 2 s² / 3 = 1
            vec![
                vec![mu[0] + s, mu[1]],
                vec![mu[0] - s, mu[1]],
                vec![mu[0], mu[1] + s],
                vec![mu[0], mu[1] - s],
            ]
        };
        let pos = design([1.0, 0.0]);
        let neg = design([0.0, 0.0]);
        assert_abs_diff_eq!(fisher_ratio(&pos, &neg).unwrap(), 0.5, epsilon = 1e-10);

        // grid search over unit directions agrees with the closed form
        let mut best = 0.0f64;
        for i in 0..100_000 {
            let t = std::f64::consts::PI * i as f64 / 100_000.0;
            let d = [t.cos(), t.sin()];
            let num = d[0].powi(2); // (dᵀΔμ)² with Δμ = e₁
            let den = 2.0 * (d[0] * d[0] + d[1] * d[1]);
            best = best.max(num / den);
        }
        assert_abs_diff_eq!(best, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn fisher_ratio_zero_for_equal_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pos = gaussian_rows(&mut rng, 30, &[0.0, 0.0, 0.0]);
        let mean: Vec<f64> = (0..3)
            .map(|j| pos.iter().map(|r| r[j]).sum::<f64>() / 30.0)
            .collect();
        // reflect through the mean: identical mean, different points
        let neg: Vec<Vec<f64>> = pos
            .iter()
            .map(|r| r.iter().zip(&mean).map(|(x, m)| 2.0 * m - x).collect())
            .collect();
        assert!(fisher_ratio(&pos, &neg).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fisher_ratio_is_affine_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pos = gaussian_rows(&mut rng, 60, &[0.5, -0.2, 0.1, 0.0]);
        let neg = gaussian_rows(&mut rng, 50, &[0.0, 0.3, -0.4, 0.2]);
        let base = fisher_ratio(&pos, &neg).unwrap();
        for _ in 0..50 {
            let a = DMatrix::<f64>::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            if a.determinant().abs() < 0.05 {
                continue;
            }
            let shift = DVector::from_fn(4, |_, _| rng.random_range(-5.0..5.0));
            let map = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
                rows.iter()
                    .map(|r| (&a * DVector::from_column_slice(r) + &shift).as_slice().to_vec())
                    .collect()
            };
            let moved = fisher_ratio(&map(&pos), &map(&neg)).unwrap();
            assert!((moved - base).abs() < 1e-8 * base.max(1.0), "{moved} vs {base}");
        }
    }

    #[test]
    fn fisher_ratio_on_simplex_data() {
        let informative = DirichletParams::new(vec![2.0, 5.0, 6.0, 3.0, 7.0]).unwrap();
        let swapped = DirichletParams::new(vec![5.0, 2.0, 3.0, 6.0, 7.0]).unwrap();
        let a = dirichlet_sample(&informative, 5000, 1).unwrap();
        let b = dirichlet_sample(&swapped, 5000, 2).unwrap();
        let c = dirichlet_sample(&informative, 5000, 3).unwrap();
        let strong = fisher_ratio(&a, &b).unwrap();
        let weak = fisher_ratio(&a, &c).unwrap();
        assert!(strong > 10.0 * weak, "{strong} vs {weak}");
        assert!(strong.is_finite() && weak >= 0.0);
    }

    #[test]
    fn fisher_ratio_input_checks() {
        let one = vec![vec![0.5, 0.5]];
        let two = vec![vec![0.5, 0.5], vec![0.4, 0.6]];
        assert!(fisher_ratio(&one, &two).is_err());
        let ragged = vec![vec![0.5, 0.5], vec![0.4, 0.3, 0.3]];
        assert!(fisher_ratio(&ragged, &two).is_err());
        assert!(matches!(fisher_ratio(&two, &two), Ok(v) if v == 0.0));
    }

    fn trials_from(channels: &[(DirichletParams, DirichletParams)], n: usize, seed: u64) -> Vec<FeatureTrial> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for (label, idx) in [(Label::Positive, 0), (Label::Negative, 1)] {
            for i in 0..n {
                let feats: Vec<MdwtVector> = channels
                    .iter()
                    .map(|pair| {
                        let p = if idx == 0 { &pair.0 } else { &pair.1 };
                        p.sample_with(&mut rng, 1).remove(0)
                    })
                    .collect();
                out.push(FeatureTrial::new(format!("{label}-{i}"), label, feats));
            }
        }
        out
    }

    #[test]
    fn fr_ranking_puts_noise_last_and_follows_channels() {
        let informative = (
            DirichletParams::new(vec![2.0, 5.0, 6.0, 3.0, 7.0]).unwrap(),
            DirichletParams::new(vec![5.0, 2.0, 3.0, 6.0, 7.0]).unwrap(),
        );
        let noise = (informative.0.clone(), informative.0.clone());
        let trials = trials_from(&[noise.clone(), informative.clone()], 400, 5);
        let ranking = rank_channels_fr(&trials).unwrap();
        assert_eq!(ranking.iter().map(|s| s.channel).collect::<Vec<_>>(), vec![2, 1]);

        let swapped: Vec<FeatureTrial> = trials
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.channels.swap(0, 1);
                t
            })
            .collect();
        let again = rank_channels_fr(&swapped).unwrap();
        assert_eq!(again[0].channel, 1);
        assert_eq!(again[0].score, ranking[0].score);
        assert_eq!(again[1].score, ranking[1].score);

        let single: Vec<FeatureTrial> = trials
            .iter()
            .map(|t| FeatureTrial::new(t.id.clone(), t.label, vec![t.channels[0].clone()]))
            .collect();
        assert_eq!(rank_channels_fr(&single).unwrap().len(), 1);
    }

    #[test]
    fn cr_ranking_chance_and_separable() {
        let shared = DirichletParams::new(vec![2.0, 5.0, 6.0, 3.0, 7.0]).unwrap();
        let sep = (
            DirichletParams::new(vec![20.0, 2.0, 2.0, 2.0, 2.0]).unwrap(),
            DirichletParams::new(vec![2.0, 2.0, 2.0, 2.0, 20.0]).unwrap(),
        );
        let trials = trials_from(&[(shared.clone(), shared), sep], 1000, 8);
        let ranking = rank_channels_cr(&trials).unwrap();
        assert_eq!(ranking[0].channel, 2);
        assert!(ranking[0].score > 0.95);
        assert!((ranking[1].score - 0.5).abs() < 0.03, "{}", ranking[1].score);
        assert_eq!(ranking, rank_channels_cr(&trials).unwrap());
        assert!(ranking.iter().all(|s| s.method == RankingMethod::ClassificationRate));
    }

    #[test]
    fn score_sorting_breaks_ties_by_channel() {
        let mut s = vec![
            ChannelScore { channel: 3, score: 0.1, method: RankingMethod::External },
            ChannelScore { channel: 1, score: 0.1, method: RankingMethod::External },
            ChannelScore { channel: 2, score: 0.4, method: RankingMethod::External },
        ];
        sort_scores(&mut s);
        assert_eq!(s.iter().map(|c| c.channel).collect::<Vec<_>>(), vec![2, 1, 3]);
    }
}
