use crate::dirstat::regularized_incomplete_beta;
use crate::error::{Error, Result};

/// Two-sided Welch t-test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch t-test from sample summaries (means, sample standard deviations, sizes).
pub fn welch_t_test_summary(mean_a: f64, sd_a: f64, n_a: usize, mean_b: f64, sd_b: f64, n_b: usize) -> Result<TTest> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::invalid("each sample needs at least two values"));
    }
    if !(sd_a >= 0.0 && sd_b >= 0.0) || !mean_a.is_finite() || !mean_b.is_finite() {
        return Err(Error::invalid("means must be finite and deviations nonnegative"));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let (sa, sb) = (sd_a * sd_a / na, sd_b * sd_b / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        return Ok(if mean_a == mean_b {
            TTest { t: 0.0, df, p_value: 1.0 }
        } else {
            let t = if mean_a > mean_b { f64::INFINITY } else { f64::NEG_INFINITY };
            TTest { t, df, p_value: 0.0 }
        });
    }
    let t = (mean_a - mean_b) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    // Two-sided tail of Student's t: I_{df/(df+t²)}(df/2, 1/2).
    let p = regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)?;
    Ok(TTest {
        t,
        df,
        p_value: p.clamp(0.0, 1.0),
    })
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("each sample needs at least two values"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("samples must be finite"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    welch_t_test_summary(ma, va.sqrt(), a.len(), mb, vb.sqrt(), b.len())
}

/// Two-sided p-value for equal mean accuracy of two methods.
pub fn t_test_accuracies(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    welch_t_test(sample_a, sample_b).map(|t| t.p_value)
}
