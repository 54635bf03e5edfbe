//! Parallel non-linear transformation (PNT) of neutral vectors.
//!
//! A completely neutral vector on the `(K+1)`-simplex is mapped to `K` scalars by
//! repeatedly pairing adjacent coordinates. Each pair `(l, r)` emits the ratio
//! `l / (l + r)` and is replaced by its sum; when a level has an odd number of
//! coordinates the last one is carried unchanged, and when it has an even number
//! the leading `n/2 - 1` pairs are merged and the last two are carried. Once two
//! coordinates remain the first one is emitted as is.
//!
//! For `x ~ Dir(α)` the emitted scalars are mutually independent and each is
//! beta distributed with parameters obtained by running the same pairing tree on
//! `α` (see [`beta_params_from_dirichlet`]).

use crate::dirstat::{BetaParams, DirichletParams};
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;

/// Output of [`pnt_forward`]: `K` coordinates in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedVector(Vec<f64>);

impl TransformedVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("transformed vector must not be empty"));
        }
        if let Some((i, u)) = coords
            .iter()
            .enumerate()
            .find(|(_, u)| !(**u > 0.0 && **u <= 1.0))
        {
            return Err(Error::invalid(format!("coordinate {} = {u} is outside (0, 1]", i + 1)));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Beta marginals of the transformed coordinates, index-aligned with
/// [`pnt_forward`]'s output.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParamVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl BetaParamVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::invalid(format!(
                "beta parameter vectors must be nonempty and equal length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        for (x, y) in a.iter().zip(&b) {
            BetaParams::new(*x, *y)?;
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Parameters of coordinate `k` (0-based).
    pub fn get(&self, k: usize) -> BetaParams {
        BetaParams {
            a: self.a[k],
            b: self.b[k],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BetaParams> + '_ {
        self.a.iter().zip(&self.b).map(|(&a, &b)| BetaParams { a, b })
    }
}

/// Number of merged pairs at one level of the pairing tree for a state of length `n > 2`.
fn pairs_at(n: usize) -> usize {
    if n % 2 == 1 {
        (n - 1) / 2
    } else {
        n / 2 - 1
    }
}

/// Walks the pairing tree over `items`, calling `visit(left, right, terminal)` for
/// every emitted coordinate in output order.
fn walk_pairs<T: Clone>(
    items: &[T],
    merge: impl Fn(&T, &T) -> T,
    mut visit: impl FnMut(&T, &T, bool),
) {
    debug_assert!(items.len() >= 2);
    let mut state = items.to_vec();
    while state.len() > 2 {
        let pairs = pairs_at(state.len());
        let mut next = Vec::with_capacity(state.len() - pairs);
        for l in 0..pairs {
            let (left, right) = (&state[2 * l], &state[2 * l + 1]);
            visit(left, right, false);
            next.push(merge(left, right));
        }
        next.extend_from_slice(&state[2 * pairs..]);
        state = next;
    }
    visit(&state[0], &state[1], true);
}

/// For each output coordinate, the (0-based) input indices aggregated on the
/// left and on the right of its pair.
pub fn pairing_tree(len: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if len < 2 {
        return Err(Error::invalid(format!("pairing needs at least 2 coordinates, got {len}")));
    }
    let leaves: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
    let mut out = Vec::with_capacity(len - 1);
    walk_pairs(
        &leaves,
        |l, r| l.iter().chain(r).copied().collect(),
        |l, r, _| out.push((l.clone(), r.clone())),
    );
    Ok(out)
}

/// Forward PNT.
pub fn pnt_forward(x: &MdwtVector) -> Result<TransformedVector> {
    pnt_forward_slice(x.coords())
}

/// Forward PNT on a raw slice; every coordinate must be positive.
pub fn pnt_forward_slice(x: &[f64]) -> Result<TransformedVector> {
    if x.len() < 2 {
        return Err(Error::invalid(format!("PNT needs at least 2 coordinates, got {}", x.len())));
    }
    if let Some((i, c)) = x.iter().enumerate().find(|(_, c)| !(**c > 0.0) || !c.is_finite()) {
        return Err(Error::invalid(format!("coordinate {} = {c} is not strictly positive", i + 1)));
    }
    let mut u = Vec::with_capacity(x.len() - 1);
    walk_pairs(
        x,
        |l, r| l + r,
        |l, r, terminal| u.push(if terminal { *l } else { l / (l + r) }),
    );
    Ok(TransformedVector(u))
}

/// Inverse PNT: rebuilds the simplex point top-down by splitting every merged
/// sum `s` into `u s` and `(1 - u) s`, then renormalizes the result to sum 1.
pub fn pnt_inverse(u: &TransformedVector) -> Result<MdwtVector> {
    let u = u.coords();
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::invalid(format!("coordinate {} = {v} is outside (0, 1)", i + 1)));
    }
    let len = u.len() + 1;
    // pairs merged at each level, bottom-up
    let mut levels = Vec::new();
    let mut n = len;
    while n > 2 {
        let p = pairs_at(n);
        levels.push(p);
        n -= p;
    }
    let terminal = u[len - 2];
    let mut state = vec![terminal, 1.0 - terminal];
    let mut offset = len - 2;
    for &p in levels.iter().rev() {
        offset -= p;
        let ratios = &u[offset..offset + p];
        let mut prev = Vec::with_capacity(state.len() + p);
        for (s, r) in state[..p].iter().zip(ratios) {
            prev.push(r * s);
            prev.push((1.0 - r) * s);
        }
        prev.extend_from_slice(&state[p..]);
        state = prev;
    }
    let total: f64 = state.iter().sum();
    MdwtVector::new(state.into_iter().map(|c| c / total).collect())
}

/// Beta parameters of each transformed coordinate when the input is `Dir(α)`.
pub fn beta_params_from_dirichlet(alpha: &DirichletParams) -> Result<BetaParamVector> {
    let mut a = Vec::with_capacity(alpha.len() - 1);
    let mut b = Vec::with_capacity(alpha.len() - 1);
    walk_pairs(
        alpha.alpha(),
        |l, r| l + r,
        |l, r, _| {
            a.push(*l);
            b.push(*r);
        },
    );
    BetaParamVector::new(a, b)
}

/// Pearson correlation matrix of the rows of `data` (observations × variables).
pub fn sample_correlation_matrix<V: AsRef<[f64]>>(data: &[V]) -> Result<Vec<Vec<f64>>> {
    if data.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 observations"));
    }
    let dim = data[0].as_ref().len();
    if data.iter().any(|row| row.as_ref().len() != dim) {
        return Err(Error::invalid("observations have different lengths"));
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in data {
        for (m, v) in mean.iter_mut().zip(row.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = vec![vec![0.0; dim]; dim];
    let mut centered = vec![0.0; dim];
    for row in data {
        for ((c, v), m) in centered.iter_mut().zip(row.as_ref()).zip(&mean) {
            *c = v - m;
        }
        for i in 0..dim {
            for j in i..dim {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    if let Some(i) = (0..dim).find(|&i| !(cov[i][i] > 0.0)) {
        return Err(Error::degenerate(format!("variable {} has zero variance", i + 1)));
    }
    let mut corr = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        corr[i][i] = 1.0;
        for j in i + 1..dim {
            let r = cov[i][j] / (cov[i][i] * cov[j][j]).sqrt();
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    Ok(corr)
}

/// Largest absolute off-diagonal entry of a square matrix.
pub fn max_abs_off_diagonal(m: &[Vec<f64>]) -> f64 {
    let mut max = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                max = max.max(v.abs());
            }
        }
    }
    max
}

/// One-sample Kolmogorov–Smirnov test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov–Smirnov test of `samples` against `Beta(a, b)`.
pub fn ks_test_beta(samples: &[f64], p: &BetaParams) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::invalid("KS test needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = p.cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    })
}

/// Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²).
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = sign * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirstat::dirichlet_sample;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> MdwtVector {
        MdwtVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn forward_five_coordinates() {
        let u = pnt_forward(&v(&[0.1, 0.2, 0.3, 0.25, 0.15])).unwrap();
        let expected = [1.0 / 3.0, 6.0 / 11.0, 6.0 / 17.0, 0.85];
        for (a, b) in u.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn forward_two_coordinates_never_enters_loop() {
        assert_eq!(pnt_forward(&v(&[0.5, 0.5])).unwrap().coords(), &[0.5]);
        assert_eq!(pnt_forward(&v(&[0.3, 0.7])).unwrap().coords(), &[0.3]);
    }

    #[test]
    fn forward_uniform_four_carries_two_trailing() {
        let u = pnt_forward(&v(&[0.25; 4])).unwrap();
        let expected = [0.5, 2.0 / 3.0, 0.75];
        for (a, b) in u.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn forward_rejects_bad_input() {
        assert!(pnt_forward_slice(&[1.0]).is_err());
        assert!(pnt_forward_slice(&[0.0, 1.0]).is_err());
        assert!(pnt_forward_slice(&[-0.1, 0.6, 0.5]).is_err());
    }

    #[test]
    fn inverse_examples() {
        let u = TransformedVector::new(vec![1.0 / 3.0, 6.0 / 11.0, 6.0 / 17.0, 0.85]).unwrap();
        let x = pnt_inverse(&u).unwrap();
        for (a, b) in x.coords().iter().zip([0.1, 0.2, 0.3, 0.25, 0.15]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let x = pnt_inverse(&TransformedVector::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(x.coords(), &[0.5, 0.5]);
        assert!(pnt_inverse(&TransformedVector::new(vec![1.0]).unwrap()).is_err());
        assert!(TransformedVector::new(vec![0.0]).is_err());
    }

    #[test]
    fn beta_params_match_closed_form() {
        let alpha = DirichletParams::new(vec![2.0, 5.0, 6.0, 3.0, 7.0]).unwrap();
        let p = beta_params_from_dirichlet(&alpha).unwrap();
        assert_eq!(p.a, vec![2.0, 6.0, 7.0, 16.0]);
        assert_eq!(p.b, vec![5.0, 3.0, 9.0, 7.0]);

        let p = beta_params_from_dirichlet(&DirichletParams::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!((p.a, p.b), (vec![1.0], vec![1.0]));

        let p = beta_params_from_dirichlet(&DirichletParams::new(vec![1.0; 4]).unwrap()).unwrap();
        assert_eq!(p.a, vec![1.0, 2.0, 3.0]);
        assert_eq!(p.b, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pairing_tree_five() {
        let tree = pairing_tree(5).unwrap();
        assert_eq!(
            tree,
            vec![
                (vec![0], vec![1]),
                (vec![2], vec![3]),
                (vec![0, 1], vec![2, 3]),
                (vec![0, 1, 2, 3], vec![4]),
            ]
        );
    }

    #[test]
    fn forward_and_beta_params_share_the_pairing_tree() {
        // Powers of two make every aggregated α decode to a unique index set.
        for len in 2..=12 {
            let tree = pairing_tree(len).unwrap();
            let alpha: Vec<f64> = (0..len).map(|i| (1u64 << i) as f64).collect();
            let beta = beta_params_from_dirichlet(&DirichletParams::new(alpha).unwrap()).unwrap();
            let decode = |s: f64| -> Vec<usize> {
                (0..len).filter(|i| (s as u64) & (1 << i) != 0).collect()
            };
            let x = dirichlet_sample(&DirichletParams::new(vec![2.0; len]).unwrap(), 1, len as u64)
                .unwrap()
                .remove(0);
            let u = pnt_forward(&x).unwrap();
            assert_eq!(u.len(), len - 1);
            for (k, (left, right)) in tree.iter().enumerate() {
                assert_eq!(&decode(beta.a[k]), left);
                assert_eq!(&decode(beta.b[k]), right);
                let l: f64 = left.iter().map(|&i| x.coords()[i]).sum();
                let r: f64 = right.iter().map(|&i| x.coords()[i]).sum();
                assert_abs_diff_eq!(u.coords()[k], l / (l + r), epsilon = 1e-12);
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn correlation_matrix_properties() {
        let rows = vec![vec![1.0, 2.0, 0.5], vec![2.0, 1.0, 0.7], vec![3.0, 5.0, 0.1], vec![
            4.0, 3.0, 0.9,
        ]];
        let c = sample_correlation_matrix(&rows).unwrap();
        for i in 0..3 {
            assert_eq!(c[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(c[i][j], c[j][i]);
                assert!(c[i][j].abs() <= 1.0 + 1e-12);
            }
        }
        let flat = vec![vec![1.0, 2.0], vec![1.0, 3.0]];
        assert!(matches!(sample_correlation_matrix(&flat), Err(Error::DegenerateInput(_))));
        assert!(sample_correlation_matrix(&rows[..1]).is_err());
    }

    #[test]
    fn independent_draws_are_uncorrelated() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 50_000;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let c = sample_correlation_matrix(&rows).unwrap();
        assert!(max_abs_off_diagonal(&c) < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn ks_detects_wrong_distribution() {
        let alpha = DirichletParams::new(vec![2.0, 5.0]).unwrap();
        let draws = dirichlet_sample(&alpha, 5000, 3).unwrap();
        let u: Vec<f64> = draws.iter().map(|x| x.coords()[0]).collect();
        let right = ks_test_beta(&u, &BetaParams::new(2.0, 5.0).unwrap()).unwrap();
        let wrong = ks_test_beta(&u, &BetaParams::new(2.5, 5.0).unwrap()).unwrap();
        assert!(right.p_value > 0.01);
        assert!(wrong.p_value < 1e-6);
    }

    fn simplex_point() -> impl Strategy<Value = Vec<f64>> {
        (2usize..=12).prop_flat_map(|len| {
            prop::collection::vec(1e-3f64..1.0, len).prop_map(|raw| {
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|r| r / s).collect()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_is_identity(x in simplex_point()) {
            let x = MdwtVector::new(x).unwrap();
            let u = pnt_forward(&x).unwrap();
            prop_assert_eq!(u.len(), x.len() - 1);
            prop_assert!(u.coords().iter().all(|c| *c > 0.0 && *c <= 1.0));
            let back = pnt_inverse(&u).unwrap();
            for (a, b) in back.coords().iter().zip(x.coords()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
