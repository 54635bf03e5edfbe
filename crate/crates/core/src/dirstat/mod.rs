//! Beta and Dirichlet distributions: densities, sampling and estimation.
//!
//! All densities are evaluated in the log domain; a super-Dirichlet density over
//! `m` channels is a sum of `m` Dirichlet log-densities.

mod mle;
pub mod special;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::msignal::MdwtVector;

pub use mle::{dirichlet_mle, dirichlet_mle_traced, DirichletFit, MLE_MAX_ITER, MLE_TOLERANCE};
pub use special::{digamma, inv_digamma, log_gamma, regularized_incomplete_beta, trigamma};

use special::{digamma_unchecked, ln_gamma_unchecked};

/// Parameters of a Dirichlet distribution over the `(K+1)`-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::invalid(format!(
                "Dirichlet needs at least 2 parameters, got {}",
                alpha.len()
            )));
        }
        if let Some((i, a)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0) || !a.is_finite())
        {
            return Err(Error::invalid(format!("alpha[{i}] = {a} must be positive and finite")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn concentration(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Mean of each coordinate, `α_k / α_0`.
    pub fn mean(&self) -> Vec<f64> {
        let total = self.concentration();
        self.alpha.iter().map(|a| a / total).collect()
    }

    /// Variance of each coordinate, `α_k (α_0 - α_k) / (α_0² (α_0 + 1))`.
    pub fn variance(&self) -> Vec<f64> {
        let a0 = self.concentration();
        self.alpha
            .iter()
            .map(|a| a * (a0 - a) / (a0 * a0 * (a0 + 1.0)))
            .collect()
    }

    /// Analytic correlation between coordinates `i` and `j` (`i != j`).
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let a0 = self.concentration();
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        -(ai * aj / ((a0 - ai) * (a0 - aj))).sqrt()
    }

    /// ln Γ(α_0) - Σ ln Γ(α_k)
    fn log_normalizer(&self) -> f64 {
        ln_gamma_unchecked(self.concentration())
            - self.alpha.iter().map(|&a| ln_gamma_unchecked(a)).sum::<f64>()
    }

    /// Mean log-likelihood given the sufficient statistics `mean(ln x_k)`.
    pub(crate) fn mean_log_likelihood(&self, mean_log_x: &[f64]) -> f64 {
        self.log_normalizer()
            + self
                .alpha
                .iter()
                .zip(mean_log_x)
                .map(|(a, l)| (a - 1.0) * l)
                .sum::<f64>()
    }

    /// Draws `n` vectors using the supplied generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<MdwtVector> {
        let gammas: Vec<Gamma<f64>> = self
            .alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("validated shape"))
            .collect();
        let mut out = Vec::with_capacity(n);
        let mut draw = vec![0.0; self.alpha.len()];
        while out.len() < n {
            for (slot, g) in draw.iter_mut().zip(&gammas) {
                *slot = g.sample(rng);
            }
            let total: f64 = draw.iter().sum();
            // Very small shapes can underflow a coordinate to zero; redraw those.
            if !(total > 0.0) || draw.iter().any(|&g| !(g > 0.0)) {
                continue;
            }
            let coords: Vec<f64> = draw.iter().map(|g| g / total).collect();
            if let Ok(v) = MdwtVector::new(coords) {
                out.push(v);
            }
        }
        out
    }
}

/// Draws `n` i.i.d. Dirichlet vectors from a ChaCha8 generator seeded with `seed`.
pub fn dirichlet_sample(p: &DirichletParams, n: usize, seed: u64) -> Result<Vec<MdwtVector>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(p.sample_with(&mut rng, n))
}

/// Parameters of a beta distribution on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("beta parameters must be positive, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    /// `ab / ((a+b)² (a+b+1))`
    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    /// Differential entropy `ln B(a,b) - (a-1)ψ(a) - (b-1)ψ(b) + (a+b-2)ψ(a+b)`.
    pub fn entropy(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
            - (a - 1.0) * digamma_unchecked(a)
            - (b - 1.0) * digamma_unchecked(b)
            + (a + b - 2.0) * digamma_unchecked(a + b)
    }

    /// Log density; `x` must lie in the open unit interval.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid(format!("beta density needs x in (0, 1), got {x}")));
        }
        Ok(self.ln_pdf_unchecked(x))
    }

    pub(crate) fn ln_pdf_unchecked(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        ln_gamma_unchecked(a + b) - ln_gamma_unchecked(a) - ln_gamma_unchecked(b)
            + (a - 1.0) * x.ln()
            + (b - 1.0) * (1.0 - x).ln()
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            regularized_incomplete_beta(x, self.a, self.b).expect("validated parameters")
        }
    }
}

/// ln Beta(x; a, b).
pub fn beta_pdf_log(x: f64, p: &BetaParams) -> Result<f64> {
    p.ln_pdf(x)
}

/// ln Dir(x; α).
pub fn dirichlet_pdf_log(x: &MdwtVector, p: &DirichletParams) -> Result<f64> {
    if x.len() != p.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: vector has {} coordinates, parameters {}",
            x.len(),
            p.len()
        )));
    }
    let kernel: f64 = x
        .coords()
        .iter()
        .zip(p.alpha())
        .map(|(xi, a)| (a - 1.0) * xi.ln())
        .sum();
    Ok(p.log_normalizer() + kernel)
}

/// Product of independent Dirichlet blocks, one per selected channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDirichletParams {
    blocks: Vec<DirichletParams>,
}

impl SuperDirichletParams {
    pub fn new(blocks: Vec<DirichletParams>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("super-Dirichlet needs at least one block"));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[DirichletParams] {
        &self.blocks
    }
}

/// ln sDir(x_sup; α) = Σ_t ln Dir(x_t; α_t).
pub fn super_dirichlet_pdf_log(xsup: &[MdwtVector], p: &SuperDirichletParams) -> Result<f64> {
    if xsup.len() != p.blocks.len() {
        return Err(Error::invalid(format!(
            "block count mismatch: {} vectors, {} parameter blocks",
            xsup.len(),
            p.blocks.len()
        )));
    }
    xsup.iter()
        .zip(&p.blocks)
        .map(|(x, block)| dirichlet_pdf_log(x, block))
        .sum()
}
