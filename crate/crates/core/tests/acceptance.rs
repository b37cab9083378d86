//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

mod common;

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use sparsedep::calibration::{exact_pvalue_extremes, CalibrationMethod, NullTableCache, TestKind};
use sparsedep::model::{sample_gmm, MarginalTransform, ModelParams, PairedSample, Regime};
use sparsedep::parametric::{extremes_statistic, lrt_term, LrtParams};
use sparsedep::power::{
    run_experiment_with_cache, summarize, ExperimentConfig, ExperimentResult, ModelKind, SweepKind,
    TestSpec,
};
use sparsedep::rank::{
    compute_ranks, lambda_orthant, rank_hc_null_count, rank_hc_statistic, spearman_brute_null,
    spearman_cov_statistic, spearman_null_mean, spearman_null_variance, spearman_standardized,
};
use sparsedep::rng::stream;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Check {
    for n in 2..=8u32 {
        let null = spearman_brute_null(n).map_err(|e| e.to_string())?;
        let mean = spearman_null_mean(n as u64);
        let var = spearman_null_variance(n as u64);
        if null.mean() != mean || null.variance() != var {
            return Err(format!(
                "n = {n}: enumeration gives mean {} var {}, closed form {} {}",
                null.mean(),
                null.variance(),
                mean,
                var
            ));
        }
    }
    Ok("enumerated mean and variance equal the closed forms for n = 2..8".into())
}

fn criterion_2() -> Check {
    let mut checked = 0usize;
    for n in 1..=200u64 {
        // Histogram of |r - s| over all n^2 pairs, then cumulative counts.
        let mut hist = vec![0u128; n as usize];
        for r in 1..=n {
            for s in 1..=n {
                hist[r.abs_diff(s) as usize] += 1;
            }
        }
        let mut cumulative = 0u128;
        for t in 0..=n / 2 {
            cumulative += hist[t as usize];
            let closed = rank_hc_null_count(t, n).map_err(|e| e.to_string())?;
            if closed != cumulative {
                return Err(format!("n = {n}, t = {t}: closed form {closed}, brute force {cumulative}"));
            }
            checked += 1;
        }
    }
    Ok(format!("closed form matches brute force at {checked} (n, t) pairs"))
}

fn criterion_3() -> Check {
    let draws: u64 = 10_000_000;
    let chunks = 100u64;
    let mut worst = 0.0f64;
    for (i, &rho) in [0.0, 0.3, 0.5, 0.9, 1.0].iter().enumerate() {
        let hits: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(3, &[i as u64, c]);
                let mut hits = 0u64;
                for _ in 0..draws / chunks {
                    let z: f64 = rng.sample(StandardNormal);
                    let w: f64 = rng.sample(StandardNormal);
                    let y = rho * z + (1.0 - rho * rho).sqrt() * w;
                    hits += (z > 0.0 && y > 0.0) as u64;
                }
                hits
            })
            .sum();
        let mc = hits as f64 / draws as f64;
        let analytic = lambda_orthant(rho).map_err(|e| e.to_string())?;
        worst = worst.max((mc - analytic).abs());
    }
    let exact = lambda_orthant(0.0).unwrap() == 0.25
        && (lambda_orthant(0.5).unwrap() - 1.0 / 3.0).abs() <= f64::EPSILON
        && lambda_orthant(1.0).unwrap() == 0.5;
    ensure(
        worst <= 1e-3 && exact,
        format!("max |MC - analytic| = {worst:.2e} over 10^7 draws; exact values hold: {exact}"),
    )
}

fn criterion_4() -> Check {
    // Trapezoid rule on a wide grid; spectrally accurate for Gaussian integrands.
    let h = 0.01;
    let half = 12.0;
    let k = (2.0 * half / h) as i64;
    let mut worst = 0.0f64;
    for eps in [0.1, 0.3] {
        for rho in [0.2, 0.5, 0.8] {
            let params = LrtParams::new(eps, rho).unwrap();
            let total: f64 = (0..=k)
                .into_par_iter()
                .map(|i| {
                    let x = -half + i as f64 * h;
                    let mut row = 0.0;
                    for j in 0..=k {
                        let y = -half + j as f64 * h;
                        let u = (x - y) / std::f64::consts::SQRT_2;
                        let v = (x + y) / std::f64::consts::SQRT_2;
                        let l = lrt_term(u, v, &params);
                        row += l * l * (-(x * x + y * y) / 2.0).exp();
                    }
                    row
                })
                .sum();
            let integral = total * h * h / (2.0 * std::f64::consts::PI);
            let expected = 1.0 + eps * eps * rho * rho / (1.0 - rho * rho);
            worst = worst.max(((integral - expected) / expected).abs());
        }
    }
    ensure(worst <= 1e-6, format!("max relative error {worst:.2e} over 6 (eps, rho) pairs"))
}

fn criterion_5() -> Check {
    let started = Instant::now();
    let n = 10_000;
    let p: Vec<f64> = (0..500u64)
        .into_par_iter()
        .map(|r| {
            let s = sample_gmm(&ModelParams::null(), n, &mut stream(5, &[r])).unwrap();
            exact_pvalue_extremes(extremes_statistic(s.view()), n)
                .unwrap()
                .p_value
                .unwrap()
        })
        .collect();
    let d = common::ks_distance(&p, common::uniform_cdf);
    let pv = common::ks_pvalue(d, p.len());
    let secs = started.elapsed().as_secs_f64();
    ensure(
        pv > 0.01 && secs < 60.0,
        format!("KS D = {d:.4}, p = {pv:.3}, runtime {secs:.1} s"),
    )
}

fn base_config(regime: Regime, beta: f64, n: usize, sweep: Vec<f64>, tests: Vec<TestSpec>) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelKind::Gmm,
        transform_x: MarginalTransform::Identity,
        transform_y: MarginalTransform::Identity,
        n,
        beta,
        regime,
        sweep_kind: SweepKind::Gamma,
        sweep,
        tests,
        level: 0.05,
        replications: 200,
        master_seed: 20240601,
        null: false,
    }
}

fn run(config: &ExperimentConfig, cache: &NullTableCache) -> Result<ExperimentResult, String> {
    let result = run_experiment_with_cache(config, cache).map_err(|e| e.to_string())?;
    if let Some(f) = result.failures.first() {
        return Err(f.message.clone());
    }
    Ok(result)
}

fn criterion_6(_cache: &NullTableCache) -> Check {
    let tests = TestKind::ALL
        .iter()
        .map(|&k| TestSpec::with(k, k.default_method(), k.desk_reps()))
        .collect();
    let mut config = base_config(Regime::Dense, 0.2, 10_000, vec![0.3], tests);
    config.replications = 2000;
    config.null = true;
    let result = run(&config, &NullTableCache::new())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for curve in &result.curves {
        let rate = curve.points[0].power;
        ok &= (0.02..=0.08).contains(&rate);
        parts.push(format!("{} {rate:.4}", curve.test));
    }
    ensure(ok, format!("null rejection rates: {}", parts.join(", ")))
}

fn hc_table() -> TestSpec {
    TestSpec::with(TestKind::Hc, CalibrationMethod::MonteCarlo, 2000)
}

fn hc_rank_table() -> TestSpec {
    TestSpec::with(TestKind::HcRank, CalibrationMethod::MonteCarlo, 10_000)
}

fn power(result: &ExperimentResult, test: TestKind, gamma: f64) -> f64 {
    result.curve(test).and_then(|c| c.power_at_gamma(gamma)).unwrap_or(f64::NAN)
}

fn max_power(result: &ExperimentResult, test: TestKind, upto: f64) -> f64 {
    result
        .curve(test)
        .map(|c| {
            c.points
                .iter()
                .filter(|p| p.gamma.unwrap() <= upto + 1e-12)
                .map(|p| p.power)
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::NAN)
}

fn criterion_7(cache: &NullTableCache) -> Check {
    let tests = vec![
        TestSpec::new(TestKind::Cov),
        TestSpec::new(TestKind::Pearson),
        hc_table(),
        hc_rank_table(),
        TestSpec::new(TestKind::Extremes),
    ];
    let config = base_config(Regime::Dense, 0.2, 100_000, vec![0.05, 0.3, 0.6], tests);
    let r = run(&config, cache)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for test in [TestKind::Cov, TestKind::Pearson, TestKind::Hc, TestKind::HcRank] {
        let (lo, hi) = (power(&r, test, 0.05), power(&r, test, 0.6));
        ok &= lo >= 0.9 && hi <= 0.15;
        parts.push(format!("{test} {lo:.3}/{hi:.3}"));
    }
    let ext = max_power(&r, TestKind::Extremes, 1.0);
    ok &= ext <= 0.15;
    ensure(
        ok,
        format!("power at gamma 0.05/0.6: {}; extremes max {ext:.3}", parts.join(", ")),
    )
}

fn sparse_06(cache: &NullTableCache) -> Result<ExperimentResult, String> {
    let tests = vec![
        hc_table(),
        TestSpec::new(TestKind::Cov),
        TestSpec::new(TestKind::Extremes),
        hc_rank_table(),
    ];
    let config = base_config(Regime::Sparse, 0.6, 100_000, vec![0.1, 0.8, 1.5, 2.0], tests);
    run(&config, cache)
}

fn criterion_8(sparse: &Result<ExperimentResult, String>) -> Check {
    let r = sparse.as_ref().map_err(Clone::clone)?;
    let hc = (power(r, TestKind::Hc, 1.5), power(r, TestKind::Hc, 0.1));
    let cov = max_power(r, TestKind::Cov, 2.0);
    let ext = (power(r, TestKind::Extremes, 2.0), power(r, TestKind::Extremes, 0.8));
    ensure(
        hc.0 >= 0.9 && hc.1 <= 0.15 && cov <= 0.15 && ext.0 >= 0.9 && ext.1 <= 0.5,
        format!(
            "hc {:.3} at 1.5, {:.3} at 0.1; cov max {cov:.3}; extremes {:.3} at 2.0, {:.3} at 0.8",
            hc.0, hc.1, ext.0, ext.1
        ),
    )
}

fn criterion_9(sparse: &Result<ExperimentResult, String>, cache: &NullTableCache) -> Check {
    let r = sparse.as_ref().map_err(Clone::clone)?;
    let moderate = power(r, TestKind::HcRank, 1.5);
    let tests = vec![hc_rank_table(), TestSpec::new(TestKind::Spearman)];
    let config = base_config(Regime::Sparse, 0.8, 100_000, vec![0.5, 1.0, 1.5, 2.0], tests);
    let very = run(&config, cache)?;
    let rank_max = max_power(&very, TestKind::HcRank, 2.0);
    let spearman_max = max_power(&very, TestKind::Spearman, 2.0);
    ensure(
        moderate >= 0.8 && rank_max <= 0.2 && spearman_max <= 0.2,
        format!(
            "beta 0.6 gamma 1.5: hc-rank {moderate:.3}; beta 0.8: hc-rank max {rank_max:.3}, spearman max {spearman_max:.3}"
        ),
    )
}

fn criterion_10() -> Check {
    let transforms = [MarginalTransform::Identity, MarginalTransform::Cube, MarginalTransform::Exp];
    let params = ModelParams::new(0.2, 0.7).unwrap();
    for k in 0..100u64 {
        let s = sample_gmm(&params, 300, &mut stream(10, &[k])).unwrap();
        let base = compute_ranks(s.view()).map_err(|e| e.to_string())?;
        let reference = (
            spearman_cov_statistic(&base).to_bits(),
            spearman_standardized(&base).unwrap().to_bits(),
            rank_hc_statistic(&base).to_bits(),
        );
        for hx in &transforms {
            for hy in &transforms {
                let x: Vec<f64> = s.x().iter().map(|&v| hx.apply(v)).collect();
                let y: Vec<f64> = s.y().iter().map(|&v| hy.apply(v)).collect();
                let t = PairedSample::new(x, y).unwrap();
                let ranks = compute_ranks(t.view()).map_err(|e| e.to_string())?;
                let got = (
                    spearman_cov_statistic(&ranks).to_bits(),
                    spearman_standardized(&ranks).unwrap().to_bits(),
                    rank_hc_statistic(&ranks).to_bits(),
                );
                if got != reference {
                    return Err(format!("sample {k}: statistics changed under {} x {}", hx.name(), hy.name()));
                }
            }
        }
    }
    Ok("Spearman and rank-HC statistics bit-identical under 9 transform pairs on 100 samples".into())
}

fn criterion_11() -> Check {
    let tests = vec![
        TestSpec::with(TestKind::Lrt, CalibrationMethod::Permutation, 19),
        TestSpec::with(TestKind::Hc, CalibrationMethod::Permutation, 19),
        TestSpec::with(TestKind::HcPlugin, CalibrationMethod::MonteCarlo, 200),
        TestSpec::with(TestKind::HcRank, CalibrationMethod::MonteCarlo, 500),
        TestSpec::new(TestKind::Pearson),
        TestSpec::new(TestKind::Spearman),
        TestSpec::new(TestKind::Extremes),
    ];
    let mut config = base_config(Regime::Sparse, 0.6, 2000, vec![0.5, 1.0, 1.5], tests);
    config.replications = 50;
    let csv = || -> Result<String, String> {
        let result = run(&config, &NullTableCache::new())?;
        summarize(&config, &result.curves).map(|s| s.csv).map_err(|e| e.to_string())
    };
    let (a, b) = (csv()?, csv()?);
    ensure(
        a == b,
        format!("two runs produced {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let cache = NullTableCache::new();
    let mut sparse = None;
    let mut failures = 0;

    for k in 1..=11u32 {
        if !selected(k) {
            continue;
        }
        let started = Instant::now();
        let outcome = match k {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&cache),
            7 => criterion_7(&cache),
            8 | 9 => {
                let r = sparse.get_or_insert_with(|| sparse_06(&cache));
                if k == 8 {
                    criterion_8(r)
                } else {
                    criterion_9(r, &cache)
                }
            }
            10 => criterion_10(),
            11 => criterion_11(),
            _ => unreachable!(),
        };
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {k:>2} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {k:>2} ({secs:.1} s): {detail}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
