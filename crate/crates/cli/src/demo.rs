//! Decorrelation demo: Dirichlet draws before and after the parallel transform.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mvbeta::dirstat::{dirichlet_sample, DirichletParams};
use mvbeta::neutral::{
    beta_params_from_dirichlet, ks_test_beta, max_abs_off_diagonal, pnt_forward, sample_correlation_matrix, KsResult,
};

/// Threshold the after-transform correlations are compared against.
pub const DECORRELATION_THRESHOLD: f64 = 0.02;
pub const MIN_DEMO_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelationReport {
    pub alpha: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub before: Vec<Vec<f64>>,
    pub after: Vec<Vec<f64>>,
    pub max_off_diagonal_before: f64,
    pub max_off_diagonal_after: f64,
    pub corr12_sample: f64,
    pub corr12_analytic: f64,
    /// KS test of each transformed coordinate against its beta marginal.
    pub ks: Vec<KsResult>,
    /// Set when `n` is too small for the threshold to be meaningful.
    pub note: Option<String>,
}

pub fn decorrelate_demo(alpha: &DirichletParams, n: usize, seed: u64) -> Result<DecorrelationReport> {
    if n < MIN_DEMO_SAMPLES {
        bail!("the demo needs at least {MIN_DEMO_SAMPLES} samples, got {n}");
    }
    if alpha.len() < 3 {
        bail!("the demo needs at least 3 Dirichlet components");
    }
    let x = dirichlet_sample(alpha, n, seed)?;
    let u = x.iter().map(pnt_forward).collect::<mvbeta::Result<Vec<_>>>()?;
    let before = sample_correlation_matrix(&x)?;
    let u_coords: Vec<&[f64]> = u.iter().map(|v| v.coords()).collect();
    let after = sample_correlation_matrix(&u_coords)?;
    let marginals = beta_params_from_dirichlet(alpha)?;
    let ks = marginals
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let col: Vec<f64> = u.iter().map(|v| v.coords()[k]).collect();
            ks_test_beta(&col, &p)
        })
        .collect::<mvbeta::Result<Vec<_>>>()?;

    // Sampling error of a correlation near zero is about 1/sqrt(n).
    let spread = 3.0 / (n as f64).sqrt();
    let note = (spread > DECORRELATION_THRESHOLD).then(|| {
        format!(
            "n = {n} is small: sample correlations fluctuate by about +/-{spread:.3} (3/sqrt(n)), \
             so the {DECORRELATION_THRESHOLD} threshold is not a meaningful check at this size"
        )
    });
    Ok(DecorrelationReport {
        alpha: alpha.alpha().to_vec(),
        n,
        seed,
        max_off_diagonal_before: max_abs_off_diagonal(&before),
        max_off_diagonal_after: max_abs_off_diagonal(&after),
        corr12_sample: before[0][1],
        corr12_analytic: alpha.correlation(0, 1),
        before,
        after,
        ks,
        note,
    })
}

fn matrix_csv(prefix: &str, m: &[Vec<f64>]) -> String {
    let names: Vec<String> = (1..=m.len()).map(|i| format!("{prefix}{i}")).collect();
    let mut out = format!(",{}\n", names.join(","));
    for (name, row) in names.iter().zip(m) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    out
}

impl DecorrelationReport {
    pub fn passes(&self) -> bool {
        self.max_off_diagonal_after < DECORRELATION_THRESHOLD
    }

    pub fn summary_text(&self) -> String {
        let alpha: Vec<String> = self.alpha.iter().map(|a| a.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "alpha = [{}], n = {}, seed = {}", alpha.join(", "), self.n, self.seed);
        let _ = writeln!(out, "max |off-diagonal| before: {:.6}", self.max_off_diagonal_before);
        let _ = writeln!(
            out,
            "max |off-diagonal| after:  {:.6} ({} {DECORRELATION_THRESHOLD})",
            self.max_off_diagonal_after,
            if self.passes() { "<" } else { ">=" }
        );
        let _ = writeln!(
            out,
            "corr(x1, x2): sample {:.6}, analytic {:.6}",
            self.corr12_sample, self.corr12_analytic
        );
        for (k, ks) in self.ks.iter().enumerate() {
            let _ = writeln!(out, "KS u{}: D = {:.6}, p = {:.4}", k + 1, ks.statistic, ks.p_value);
        }
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    /// Writes `corr_before.csv`, `corr_after.csv` and `decorrelation.txt`.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        fs::write(out_dir.join("corr_before.csv"), matrix_csv("x", &self.before))?;
        fs::write(out_dir.join("corr_after.csv"), matrix_csv("u", &self.after))?;
        fs::write(out_dir.join("decorrelation.txt"), self.summary_text())?;
        Ok(())
    }
}
