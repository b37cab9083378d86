//! Parametric statistics for the Gaussian mixture: the oracle likelihood
//! ratio, covariance and Pearson correlation, the extremes statistic and
//! higher criticism on `|u_i|`.

use crate::error::{Error, Result};
use crate::model::{ModelParams, SampleView};
use crate::normal::{psi_complement, psi_unchecked};

/// Alternative parameters known to the oracle likelihood ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtParams {
    eps: f64,
    rho: f64,
    one_minus_rho: f64,
}

impl LrtParams {
    pub fn new(eps: f64, rho: f64) -> Result<Self> {
        Self::from_model(&ModelParams::new(eps, rho)?)
    }

    /// Keeps the exact `1 - rho` carried by regime-derived parameters.
    pub fn from_model(params: &ModelParams) -> Result<Self> {
        if params.one_minus_rho() <= 0.0 {
            return Err(Error::InvalidParams(
                "likelihood ratio is undefined at rho = 1".into(),
            ));
        }
        Ok(Self {
            eps: params.eps(),
            rho: params.rho(),
            one_minus_rho: params.one_minus_rho(),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn one_minus_rho(&self) -> f64 {
        self.one_minus_rho
    }
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log L = Σ log L_i` with
/// `L_i = 1 - eps + eps (1 - rho^2)^(-1/2) exp(-rho u_i^2 / (2(1 - rho)) + rho v_i^2 / (2(1 + rho)))`.
///
/// Each term is a two-way log-sum-exp, so nothing overflows however close
/// `rho` is to one.
pub fn lrt_statistic(sample: SampleView<'_>, params: &LrtParams) -> f64 {
    if params.eps == 0.0 || params.rho == 0.0 {
        return 0.0;
    }
    let log_null = (-params.eps).ln_1p();
    let log_one_minus_rho_sq = params.one_minus_rho.ln() + params.rho.ln_1p();
    let log_weight = params.eps.ln() - 0.5 * log_one_minus_rho_sq;
    // u^2/2 and v^2/2 absorb the 1/2 from the rotation, so the coefficients
    // apply to (x - y)^2 and (x + y)^2 directly.
    let cu = params.rho / (4.0 * params.one_minus_rho);
    let cv = params.rho / (4.0 * (1.0 + params.rho));
    sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(x, y)| {
            let d = x - y;
            let s = x + y;
            log_add_exp(log_null, log_weight - cu * d * d + cv * s * s)
        })
        .sum()
}

/// Single-observation likelihood ratio `L_i` evaluated at `(u, v)`.
pub fn lrt_term(u: f64, v: f64, params: &LrtParams) -> f64 {
    let one_minus_rho_sq = params.one_minus_rho * (1.0 + params.rho);
    let exponent = -params.rho / (2.0 * params.one_minus_rho) * u * u
        + params.rho / (2.0 * (1.0 + params.rho)) * v * v;
    1.0 - params.eps + params.eps / one_minus_rho_sq.sqrt() * exponent.exp()
}

/// `T_n = Σ x_i y_i`.
pub fn covariance_statistic(sample: SampleView<'_>) -> f64 {
    sample.x().iter().zip(sample.y()).map(|(a, b)| a * b).sum()
}

/// `T_n / sqrt(n)`, asymptotically standard normal under the null.
pub fn covariance_standardized(sample: SampleView<'_>) -> f64 {
    covariance_statistic(sample) / (sample.len() as f64).sqrt()
}

fn mean_and_ss(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss)
}

/// Sample correlation coefficient.
pub fn pearson_statistic(sample: SampleView<'_>) -> Result<f64> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::InvalidSample(format!("pearson needs n >= 3, got {n}")));
    }
    let (mx, sxx) = mean_and_ss(sample.x());
    let (my, syy) = mean_and_ss(sample.y());
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidSample("zero variance in one coordinate".into()));
    }
    let sxy: f64 = sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(a, b)| (a - mx) * (b - my))
        .sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `min_i |u_i|`. Small values favor the alternative.
pub fn extremes_statistic(sample: SampleView<'_>) -> f64 {
    sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(a, b)| ((a - b) * std::f64::consts::FRAC_1_SQRT_2).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Exact null probability that the minimum of `n` values of `|N(0,1)|` is at
/// most `m`: `1 - (1 - Ψ(m))^n`.
pub fn extremes_pvalue(m: f64, n: u64) -> Result<f64> {
    if m.is_nan() || m < 0.0 {
        return Err(Error::Domain(format!("extremes p-value needs m >= 0, got {m}")));
    }
    if n == 0 {
        return Err(Error::Domain("extremes p-value needs n >= 1".into()));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let p = psi_unchecked(m);
    // log(1 - Ψ) without cancellation on either side of 1/2.
    let log_survival = if p < 0.5 { (-p).ln_1p() } else { psi_complement(m).ln() };
    Ok((-(n as f64 * log_survival).exp_m1()).clamp(0.0, 1.0))
}

/// Higher criticism of `|u_1|, ..., |u_n|` against `Ψ`.
///
/// The supremum is taken over the order statistics with
/// `Ψ(u_(i)) ∈ [1/n, 1 - 1/n]`, using `F_n` at the top of each tie group. If
/// no order statistic is admissible, the ratio is evaluated at the nearer
/// edge of the admissible band instead.
pub fn hc_statistic(sample: SampleView<'_>) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidSample(format!("higher criticism needs n >= 2, got {n}")));
    }
    let abs_u: Vec<f64> = sample.u_values().into_iter().map(f64::abs).collect();
    Ok(hc_from_abs(abs_u))
}

/// Higher criticism on precomputed `|u_i|` values (consumed and sorted).
pub(crate) fn hc_from_abs(abs_u: Vec<f64>) -> f64 {
    let n = abs_u.len();
    // Non-negative floats order the same as their bit patterns.
    let mut bits: Vec<u64> = abs_u.into_iter().map(f64::to_bits).collect();
    bits.sort_unstable();

    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let lo = 1.0 / nf;
    let hi = 1.0 - lo;
    let mut best = f64::NEG_INFINITY;
    // Distance in Ψ-scale from the band, for the fallback.
    let mut nearest: Option<(f64, f64)> = None;

    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && bits[j + 1] == bits[i] {
            j += 1;
        }
        let t = f64::from_bits(bits[i]);
        let count = j + 1;
        let tail = psi_complement(t);
        let psi = if tail < 0.5 { 1.0 - tail } else { psi_unchecked(t) };
        if (lo..=hi).contains(&psi) {
            let excess = if psi < 0.5 {
                count as f64 / nf - psi
            } else {
                tail - (n - count) as f64 / nf
            };
            let ratio = sqrt_n * excess / (psi * tail).sqrt();
            if ratio > best {
                best = ratio;
            }
        } else if best == f64::NEG_INFINITY {
            let gap = if psi < lo { lo - psi } else { psi - hi };
            if nearest.map_or(true, |(g, _)| gap < g) {
                nearest = Some((gap, psi));
            }
        }
        i = j + 1;
    }

    if best > f64::NEG_INFINITY {
        return best;
    }
    // Every order statistic fell outside the band: evaluate F_n at the band
    // edge closest to the data.
    let edge = match nearest {
        Some((_, psi)) if psi > hi => hi,
        _ => lo,
    };
    let edge_u = psi_inverse(edge);
    let count = bits.partition_point(|&b| f64::from_bits(b) <= edge_u);
    sqrt_n * (count as f64 / nf - edge) / (edge * (1.0 - edge)).sqrt()
}

/// Inverse of `Ψ` on `(0, 1)`.
fn psi_inverse(p: f64) -> f64 {
    crate::normal::quantile(0.5 + 0.5 * p).unwrap_or(f64::INFINITY)
}

/// Higher criticism after standardizing each coordinate by its sample mean
/// and unbiased sample standard deviation.
pub fn hc_plugin_statistic(sample: SampleView<'_>) -> Result<f64> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::InvalidSample(format!("plug-in higher criticism needs n >= 3, got {n}")));
    }
    let (x, y) = standardize_pair(sample)?;
    hc_statistic(SampleView::new_unchecked(&x, &y))
}

pub(crate) fn standardize_pair(sample: SampleView<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    let denom = (sample.len() - 1) as f64;
    let standardize = |values: &[f64]| -> Result<Vec<f64>> {
        let (mean, ss) = mean_and_ss(values);
        if ss == 0.0 {
            return Err(Error::InvalidSample("zero variance in one coordinate".into()));
        }
        let sd = (ss / denom).sqrt();
        Ok(values.iter().map(|v| (v - mean) / sd).collect())
    };
    Ok((standardize(sample.x())?, standardize(sample.y())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_gmm, PairedSample};
    use crate::rng::stream;

    fn sample(x: &[f64], y: &[f64]) -> PairedSample {
        PairedSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn lrt_vanishes_without_contamination_or_correlation() {
        let s = sample_gmm(&ModelParams::new(0.2, 0.7).unwrap(), 500, &mut stream(1, &[])).unwrap();
        assert_eq!(lrt_statistic(s.view(), &LrtParams::new(0.0, 0.7).unwrap()), 0.0);
        assert_eq!(lrt_statistic(s.view(), &LrtParams::new(0.3, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn lrt_single_observation_at_origin() {
        let params = LrtParams::new(0.1, 0.5).unwrap();
        let expected = 0.9 + 0.1 / 0.75f64.sqrt();
        assert!((lrt_term(0.0, 0.0, &params) - expected).abs() < 1e-15);
        assert!((expected - 1.015_470).abs() < 1e-6);
        // A pair whose (u, v) is (0, 0) is x = y = 0.
        let s = sample(&[0.0, 0.0], &[0.0, 0.0]);
        assert!((lrt_statistic(s.view(), &params) - 2.0 * expected.ln()).abs() < 1e-14);
    }

    #[test]
    fn lrt_matches_direct_product_on_moderate_data() {
        let params = LrtParams::new(0.2, 0.6).unwrap();
        let s = sample_gmm(&ModelParams::new(0.2, 0.6).unwrap(), 50, &mut stream(2, &[])).unwrap();
        let direct: f64 = s
            .x()
            .iter()
            .zip(s.y())
            .map(|(x, y)| {
                let u = (x - y) / 2f64.sqrt();
                let v = (x + y) / 2f64.sqrt();
                lrt_term(u, v, &params).ln()
            })
            .sum();
        assert!((lrt_statistic(s.view(), &params) - direct).abs() < 1e-10);
    }

    #[test]
    fn lrt_finite_near_rho_one() {
        let params = LrtParams::from_model(&ModelParams::from_gap(1e-3, 1e-12).unwrap()).unwrap();
        let s = sample(&[5.0, -4.0, 0.3], &[-5.0, 4.0, 0.3]);
        let value = lrt_statistic(s.view(), &params);
        assert!(value.is_finite(), "{value}");
        assert!(LrtParams::new(0.1, 1.0).is_err());
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(covariance_statistic(sample(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]).view()), 3.0);
        assert_eq!(covariance_statistic(sample(&[1.0, -1.0], &[1.0, 1.0]).view()), 0.0);
        let s = sample(&[2.0, 2.0], &[1.0, 1.0]);
        assert!((covariance_standardized(s.view()) - 4.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pearson_examples() {
        let x = [0.3, -1.2, 2.5, 0.7];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_statistic(sample(&x, &x).view()).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_statistic(sample(&x, &neg).view()).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson_statistic(sample(&x, &[1.0; 4]).view()).is_err());
        assert!(pearson_statistic(sample(&[1.0, 2.0], &[2.0, 1.0]).view()).is_err());
    }

    #[test]
    fn extremes_examples() {
        assert_eq!(extremes_statistic(sample(&[1.0, 3.0], &[2.0, 3.0]).view()), 0.0);
        let m = extremes_statistic(sample(&[2.0, 4.0], &[0.0, 1.0]).view());
        assert!((m - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn extremes_pvalue_examples() {
        assert_eq!(extremes_pvalue(0.0, 10).unwrap(), 0.0);
        let median = 0.674_489_750_196_081_7;
        assert!((extremes_pvalue(median, 1).unwrap() - 0.5).abs() < 1e-15);
        // 40-digit evaluation of 1 - (1 - erf(0.1/sqrt 2))^10.
        let expected = 0.563_983_033_196_476_978_297_712_148_898_347_9;
        assert!((extremes_pvalue(0.1, 10).unwrap() - expected).abs() < 1e-13);
        assert!(extremes_pvalue(-0.1, 10).is_err());
        assert!(extremes_pvalue(0.1, 0).is_err());
        // Far tail and tiny minima stay in range without cancellation.
        assert_eq!(extremes_pvalue(40.0, 1_000_000).unwrap(), 1.0);
        let tiny = extremes_pvalue(1e-12, 1).unwrap();
        assert!((tiny - 1e-12 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-24);
    }

    #[test]
    fn extremes_pvalue_monotone() {
        let mut prev = 0.0;
        for i in 1..200 {
            let p = extremes_pvalue(i as f64 * 0.01, 25).unwrap();
            assert!(p > prev || (p >= prev && p > 1.0 - 1e-12));
            prev = p;
        }
        for n in 1..50u64 {
            assert!(extremes_pvalue(0.05, n + 1).unwrap() > extremes_pvalue(0.05, n).unwrap());
        }
    }

    #[test]
    fn hc_hand_evaluation_at_median() {
        // All |u| equal the null median, so F_n = 1 where Ψ = 1/2.
        let m = 0.674_489_750_196_081_7 * 2f64.sqrt();
        let s = sample(&[m, -m, m, 0.0], &[0.0, 0.0, 0.0, m]);
        let hc = hc_statistic(s.view()).unwrap();
        assert!((hc - 2.0).abs() < 1e-12, "{hc}");
    }

    #[test]
    fn hc_falls_back_to_band_edge() {
        // n = 3: band is [1/3, 2/3]; all |u| tiny, so F_n = 1 at the lower edge.
        let s = sample(&[1e-9, 2e-9, 3e-9], &[0.0, 0.0, 0.0]);
        let hc = hc_statistic(s.view()).unwrap();
        let expected = 3f64.sqrt() * (1.0 - 1.0 / 3.0) / (1.0f64 / 3.0 * (2.0 / 3.0)).sqrt();
        assert!((hc - expected).abs() < 1e-12, "{hc}");
        assert!(hc_statistic(sample(&[50.0, 60.0], &[0.0, 0.0]).view()).unwrap().is_finite());
    }

    #[test]
    fn hc_invariant_to_order_and_sign() {
        let s = sample_gmm(&ModelParams::new(0.1, 0.9).unwrap(), 300, &mut stream(4, &[])).unwrap();
        let base = hc_statistic(s.view()).unwrap();
        let mut x = s.x().to_vec();
        let mut y = s.y().to_vec();
        x.reverse();
        y.reverse();
        // Swapping coordinates flips the sign of every u.
        assert_eq!(hc_statistic(sample(&y, &x).view()).unwrap(), base);
        assert_eq!(hc_statistic(sample(&x, &y).view()).unwrap(), base);
    }

    #[test]
    fn plugin_is_affine_invariant() {
        let s = sample_gmm(&ModelParams::new(0.1, 0.8).unwrap(), 400, &mut stream(6, &[])).unwrap();
        let base = hc_plugin_statistic(s.view()).unwrap();
        let x: Vec<f64> = s.x().iter().map(|v| v + 5.0).collect();
        let y: Vec<f64> = s.y().iter().map(|v| 3.0 * v - 2.0).collect();
        let shifted = hc_plugin_statistic(sample(&x, &y).view()).unwrap();
        assert!((base - shifted).abs() < 1e-9 * base.abs().max(1.0));

        let (sx, sy) = standardize_pair(s.view()).unwrap();
        let standardized = sample(&sx, &sy);
        let plain = hc_statistic(standardized.view()).unwrap();
        let again = hc_plugin_statistic(standardized.view()).unwrap();
        assert!((plain - again).abs() < 1e-9 * plain.abs().max(1.0));
        assert!(hc_plugin_statistic(sample(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).view()).is_err());
    }
}
