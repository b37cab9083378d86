//! Rank statistics: the covariance rank (Spearman) test, higher criticism on
//! rank differences, and the exact small-`n` null enumerator used as an
//! oracle.
//!
//! Ranks run from 1 to `n` everywhere.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::SampleView;

/// Coordinate-wise ranks of a paired sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPair {
    r: Vec<u32>,
    s: Vec<u32>,
}

impl RankPair {
    /// Validates that `r` and `s` are permutations of `1..=n`.
    pub fn new(r: Vec<u32>, s: Vec<u32>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::InvalidSample(format!(
                "rank vectors differ in length: {} vs {}",
                r.len(),
                s.len()
            )));
        }
        check_permutation(&r, "r")?;
        check_permutation(&s, "s")?;
        Ok(Self { r, s })
    }

    pub(crate) fn new_unchecked(r: Vec<u32>, s: Vec<u32>) -> Self {
        Self { r, s }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn s(&self) -> &[u32] {
        &self.s
    }

    pub(crate) fn s_mut(&mut self) -> &mut [u32] {
        &mut self.s
    }
}

fn check_permutation(ranks: &[u32], name: &str) -> Result<()> {
    let n = ranks.len();
    let mut seen = vec![false; n];
    for &v in ranks {
        let v = v as usize;
        if v == 0 || v > n || std::mem::replace(&mut seen[v - 1], true) {
            return Err(Error::InvalidSample(format!(
                "{name} is not a permutation of 1..={n}"
            )));
        }
    }
    Ok(())
}

fn ranks_of(values: &[f64], coordinate: &'static str) -> Result<Vec<u32>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u32; values.len()];
    for (k, w) in order.windows(2).enumerate() {
        if values[w[0]] == values[w[1]] {
            return Err(Error::Tie {
                coordinate,
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
                value: values[w[0]],
            });
        }
        ranks[w[0]] = k as u32 + 1;
    }
    if let Some(&last) = order.last() {
        ranks[last] = values.len() as u32;
    }
    Ok(ranks)
}

/// `r_i = #{j : x_j <= x_i}`, likewise `s_i`. Exact ties are an error.
pub fn compute_ranks(sample: SampleView<'_>) -> Result<RankPair> {
    Ok(RankPair {
        r: ranks_of(sample.x(), "x")?,
        s: ranks_of(sample.y(), "y")?,
    })
}

/// `T_n = Σ r_i s_i`, exactly.
pub fn spearman_sum(ranks: &RankPair) -> u128 {
    ranks
        .r
        .iter()
        .zip(&ranks.s)
        .map(|(&a, &b)| a as u128 * b as u128)
        .sum()
}

pub fn spearman_cov_statistic(ranks: &RankPair) -> f64 {
    spearman_sum(ranks) as f64
}

/// Null mean `n(n+1)^2/4` of `Σ r_i s_i`.
pub fn spearman_null_mean(n: u64) -> Ratio<i128> {
    let n = n as i128;
    Ratio::new(n * (n + 1) * (n + 1), 4)
}

/// Null variance `n^2(n-1)(n+1)^2/144` of `Σ r_i s_i`.
pub fn spearman_null_variance(n: u64) -> Ratio<i128> {
    let n = n as i128;
    Ratio::new(n * n * (n - 1) * (n + 1) * (n + 1), 144)
}

/// `(T_n - E_0 T_n) / sqrt(Var_0 T_n)`; the difference is taken in exact
/// integer arithmetic.
pub fn spearman_standardized(ranks: &RankPair) -> Result<f64> {
    let n = ranks.len() as i128;
    if n < 2 {
        return Err(Error::InvalidSample("standardized Spearman needs n >= 2".into()));
    }
    let diff4 = 4 * spearman_sum(ranks) as i128 - n * (n + 1) * (n + 1);
    let var = (n * n * (n - 1) * (n + 1) * (n + 1)) as f64 / 144.0;
    Ok(diff4 as f64 / 4.0 / var.sqrt())
}

/// Positive-quadrant probability of a standard bivariate normal with
/// correlation `rho`: `1/4 + asin(rho) / (2π)`.
pub fn lambda_orthant(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    Ok(0.25 + rho.asin() / (2.0 * std::f64::consts::PI))
}

/// `n^2 u(t) = n(2t+1) - t(t+1)`: the number of pairs `(r, s) ∈ [n]^2` with
/// `|r - s| <= t`.
pub fn rank_hc_null_count(t: u64, n: u64) -> Result<u128> {
    if n == 0 || 2 * t > n {
        return Err(Error::Domain(format!("need 0 <= t <= n/2, got t = {t}, n = {n}")));
    }
    let (t, n) = (t as u128, n as u128);
    Ok(n * (2 * t + 1) - t * (t + 1))
}

/// `u(t) = P_0(|R_i - S_i| <= t) = (n(2t+1) - t(t+1)) / n^2`.
pub fn rank_hc_null_prob(t: u64, n: u64) -> Result<f64> {
    let count = rank_hc_null_count(t, n)?;
    Ok(count as f64 / (n as u128 * n as u128) as f64)
}

/// `max_{0 <= t <= n/2} (#{d_i <= t} - n u(t)) / sqrt(n u(t) (1 - u(t)))` with
/// `d_i = |r_i - s_i|`. Thresholds where `u(t) = 1` (only possible for
/// `n = 2`) are skipped.
pub fn rank_hc_statistic(ranks: &RankPair) -> f64 {
    rank_hc_from_pairs(&ranks.r, &ranks.s)
}

pub(crate) fn rank_hc_from_pairs(r: &[u32], s: &[u32]) -> f64 {
    let n = r.len();
    let half = n / 2;
    let mut hist = vec![0u32; half + 1];
    for (&a, &b) in r.iter().zip(s) {
        let d = a.abs_diff(b) as usize;
        if d <= half {
            hist[d] += 1;
        }
    }
    rank_hc_from_histogram(&hist, n)
}

fn rank_hc_from_histogram(hist: &[u32], n: usize) -> f64 {
    let nf = n as f64;
    let n_u = n as u64;
    let mut best = f64::NEG_INFINITY;
    let mut cumulative = 0u64;
    for (t, &h) in hist.iter().enumerate() {
        cumulative += h as u64;
        let t = t as u64;
        // n^2 u(t), exact.
        let pairs = n_u * (2 * t + 1) - t * (t + 1);
        if pairs >= n_u * n_u {
            continue;
        }
        let u = pairs as f64 / (nf * nf);
        let expected = pairs as f64 / nf;
        let ratio = (cumulative as f64 - expected) / (nf * u * (1.0 - u)).sqrt();
        if ratio > best {
            best = ratio;
        }
    }
    best
}

/// Exact null distribution of `Σ r_i s_i` for small `n`, by enumerating all
/// `n!` permutations against the identity ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpearmanNull {
    n: u32,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl SpearmanNull {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of permutations giving each value of `T_n`.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn pmf(&self, value: u64) -> Ratio<i128> {
        let c = self.counts.get(&value).copied().unwrap_or(0);
        Ratio::new(c as i128, self.total as i128)
    }

    pub fn mean(&self) -> Ratio<i128> {
        let sum: i128 = self.counts.iter().map(|(&v, &c)| v as i128 * c as i128).sum();
        Ratio::new(sum, self.total as i128)
    }

    pub fn variance(&self) -> Ratio<i128> {
        let mean = self.mean();
        let second: i128 = self
            .counts
            .iter()
            .map(|(&v, &c)| v as i128 * v as i128 * c as i128)
            .sum();
        Ratio::new(second, self.total as i128) - mean * mean
    }
}

pub const SPEARMAN_BRUTE_MAX_N: u32 = 8;

/// Enumerates the exact null law of `Σ r_i s_i` for `1 <= n <= 8`.
pub fn spearman_brute_null(n: u32) -> Result<SpearmanNull> {
    if n == 0 || n > SPEARMAN_BRUTE_MAX_N {
        return Err(Error::Domain(format!(
            "exact enumeration supports 1 <= n <= {SPEARMAN_BRUTE_MAX_N}, got {n}"
        )));
    }
    let mut perm: Vec<u64> = (1..=n as u64).collect();
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    let value = |p: &[u64]| -> u64 { p.iter().enumerate().map(|(i, &s)| (i as u64 + 1) * s).sum() };

    // Heap's algorithm, iterative form.
    let len = perm.len();
    let mut c = vec![0usize; len];
    *counts.entry(value(&perm)).or_insert(0) += 1;
    total += 1;
    let mut i = 0;
    while i < len {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            *counts.entry(value(&perm)).or_insert(0) += 1;
            total += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(SpearmanNull { n, counts, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairedSample;

    fn ranks(r: &[u32], s: &[u32]) -> RankPair {
        RankPair::new(r.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn rank_examples() {
        let s = PairedSample::new(vec![0.3, 0.1, 0.2], vec![1.0, 2.0, 3.0]).unwrap();
        let rp = compute_ranks(s.view()).unwrap();
        assert_eq!(rp.r(), &[3, 1, 2]);
        assert_eq!(rp.s(), &[1, 2, 3]);

        let sorted = PairedSample::new((0..6).map(f64::from).collect(), vec![0.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(compute_ranks(sorted.view()).unwrap().r(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn ties_are_reported_with_indices() {
        let s = PairedSample::new(vec![1.0, 1.0], vec![0.0, 1.0]).unwrap();
        match compute_ranks(s.view()) {
            Err(Error::Tie { coordinate, first, second, .. }) => {
                assert_eq!((coordinate, first, second), ("x", 0, 1));
            }
            other => panic!("expected a tie error, got {other:?}"),
        }
        let s = PairedSample::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 4.0]).unwrap();
        assert!(matches!(compute_ranks(s.view()), Err(Error::Tie { coordinate: "y", first: 0, second: 2, .. })));
    }

    #[test]
    fn rank_pair_validation() {
        assert!(RankPair::new(vec![1, 2], vec![2, 2]).is_err());
        assert!(RankPair::new(vec![0, 1], vec![1, 2]).is_err());
        assert!(RankPair::new(vec![1, 2, 3], vec![1, 2]).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_cov_statistic(&ranks(&[1, 2, 3], &[1, 2, 3])), 14.0);
        assert_eq!(spearman_null_mean(3), Ratio::from_integer(12));
        assert_eq!(spearman_null_variance(3), Ratio::from_integer(2));
        let z = spearman_standardized(&ranks(&[1, 2, 3], &[1, 2, 3])).unwrap();
        assert!((z - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brute_null_small_cases() {
        let two = spearman_brute_null(2).unwrap();
        assert_eq!(two.pmf(5), Ratio::new(1, 2));
        assert_eq!(two.pmf(4), Ratio::new(1, 2));

        let three = spearman_brute_null(3).unwrap();
        let values: Vec<(u64, u64)> = three.counts().iter().map(|(&v, &c)| (v, c)).collect();
        assert_eq!(values, vec![(10, 1), (11, 2), (13, 2), (14, 1)]);
        assert_eq!(three.mean(), Ratio::from_integer(12));
        assert_eq!(three.variance(), Ratio::from_integer(2));

        let four = spearman_brute_null(4).unwrap();
        assert_eq!(four.total(), 24);
        assert_eq!(four.mean(), Ratio::from_integer(25));
        assert_eq!(four.variance(), Ratio::new(25, 3));

        assert!(spearman_brute_null(9).is_err());
        assert!(spearman_brute_null(0).is_err());
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_orthant(0.0).unwrap(), 0.25);
        assert_eq!(lambda_orthant(1.0).unwrap(), 0.5);
        assert!((lambda_orthant(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(lambda_orthant(1.5).is_err());
    }

    #[test]
    fn null_prob_examples() {
        for n in 1..20 {
            assert_eq!(rank_hc_null_prob(0, n).unwrap(), 1.0 / n as f64);
        }
        assert_eq!(rank_hc_null_count(1, 3).unwrap(), 7);
        assert!((rank_hc_null_prob(1, 3).unwrap() - 7.0 / 9.0).abs() < 1e-15);
        assert_eq!(rank_hc_null_count(25, 50).unwrap(), 1900);
        assert_eq!(rank_hc_null_prob(25, 50).unwrap(), 0.76);
        assert!(rank_hc_null_prob(3, 5).is_err());
    }

    #[test]
    fn rank_hc_examples() {
        let identical = |n: u32| {
            let r: Vec<u32> = (1..=n).collect();
            rank_hc_statistic(&ranks(&r, &r))
        };
        for n in [3u32, 10, 101] {
            let expected = (n as f64 * (n as f64 - 1.0)).sqrt();
            assert!((identical(n) - expected).abs() < 1e-9 * expected);
        }
        let hc = rank_hc_statistic(&ranks(&[1, 2, 3, 4, 5], &[2, 1, 3, 4, 5]));
        assert!((hc - 2.0 / 0.8f64.sqrt()).abs() < 1e-12, "{hc}");
        assert!((hc - 2.2360).abs() < 1e-4);
    }

    #[test]
    fn rank_hc_n_two_skips_degenerate_threshold() {
        let v = rank_hc_statistic(&ranks(&[1, 2], &[1, 2]));
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        assert!(rank_hc_statistic(&ranks(&[1, 2], &[2, 1])).is_finite());
    }
}
