//! The property suite: integral inequalities, combinatorics, OU rescaling,
//! chaos orthogonality, cell covariance and hypercontractivity.

use hamf::chaos_kernels::{enumerate_a_n, multiindex_identity_check};
use hamf::fluctuation::{build_coefficients, empirical_cross_moment, hypercontractivity_check, ou_rescale, sample_chaos, ChaosSampleConfig};
use hamf::limit_covariance::{sin_product_inequality, weighted_step_inequality, StepFunction};
use hamf::rng::{self, derive_seed, Stream};
use hamf::rough_noise::{cell_covariance, CellNoise};
use hamf::stats::MeanVar;
use serde_json::json;

use crate::config::RunConfig;
use crate::exit::CliError;
use crate::report::{num, PropertyOutcome, ReportBundle, Table};

/// Relative allowance for the adaptive quadrature inside the inequality checks.
const QUADRATURE_TOLERANCE: f64 = 1e-8;
const Z_LIMIT: f64 = 4.0;
const HYPER_SLACK: f64 = 0.05;

fn between(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::uniform(rng)
}

fn random_step(rng: &mut Stream) -> StepFunction {
    let pieces = 1 + (rng::uniform(rng) * 4.0) as usize;
    let mut breaks: Vec<f64> = (0..=pieces).map(|_| between(rng, -5.0, 5.0)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if breaks.len() < 2 {
        breaks = vec![-1.0, 1.0];
    }
    let values = (1..breaks.len()).map(|_| between(rng, -2.0, 2.0)).collect();
    StepFunction::new(breaks, values).expect("sorted breaks")
}

fn outcome(name: &str, passed: bool, margin: f64, detail: String) -> PropertyOutcome {
    PropertyOutcome { name: name.into(), passed, margin, detail }
}

pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let c = &cfg.check;
    let mut b = ReportBundle::new("check");
    let mut cases = Table::new("inequalities", &["inequality", "case", "t", "s", "beta", "lhs", "rhs", "slack", "passed", "seed"]);
    // a fault shrinks the right-hand sides so the first inequality must fail
    let shrink = if c.inject_fault { 1e-3 } else { 1.0 };

    let seed = derive_seed(cfg.seed, 1);
    let mut rng = rng::stream(seed, 0);
    let (mut bad, mut margin) = (0usize, f64::INFINITY);
    for case in 0..c.inequality_cases {
        let sign = if rng::uniform(&mut rng) < 0.5 { -1.0 } else { 1.0 };
        let t = sign * between(&mut rng, 0.1, 3.0);
        let s = between(&mut rng, 0.1, 3.0);
        let beta = between(&mut rng, 0.05, 1.95);
        let phi = random_step(&mut rng);
        let chk = weighted_step_inequality(&phi, t, s, beta)?;
        let rhs = chk.rhs * shrink;
        let ok = chk.lhs <= rhs * (1.0 + QUADRATURE_TOLERANCE);
        bad += usize::from(!ok);
        margin = margin.min((rhs - chk.lhs) / rhs);
        cases.push(vec![
            "weighted_step".into(),
            case.to_string(),
            num(t),
            num(s),
            num(beta),
            num(chk.lhs),
            num(rhs),
            num(rhs - chk.lhs),
            ok.to_string(),
            seed.to_string(),
        ]);
    }
    b.properties.push(outcome("weighted_step_inequality", bad == 0, margin, format!("{bad} of {} cases violated", c.inequality_cases)));

    let seed = derive_seed(cfg.seed, 2);
    let mut rng = rng::stream(seed, 0);
    let (mut bad, mut margin) = (0usize, f64::INFINITY);
    for case in 0..c.inequality_cases {
        let t = between(&mut rng, 0.5, 3.0);
        let s = between(&mut rng, 0.5, 3.0);
        let beta = between(&mut rng, 0.05, 0.95);
        let (chk, _tail) = sin_product_inequality(t, s, beta)?;
        let ok = chk.lhs <= chk.rhs * (1.0 + QUADRATURE_TOLERANCE);
        bad += usize::from(!ok);
        margin = margin.min((chk.rhs - chk.lhs) / chk.rhs);
        cases.push(vec![
            "sin_product".into(),
            case.to_string(),
            num(t),
            num(s),
            num(beta),
            num(chk.lhs),
            num(chk.rhs),
            num(chk.rhs - chk.lhs),
            ok.to_string(),
            seed.to_string(),
        ]);
    }
    b.properties.push(outcome("sin_product_inequality", bad == 0, margin, format!("{bad} of {} cases violated", c.inequality_cases)));

    let mut card_ok = true;
    for n in 1..=12 {
        card_ok &= enumerate_a_n(n)?.len() == 1 << (n - 1);
    }
    b.properties.push(outcome("card_a_n", card_ok, 0.0, "card(A_n) = 2^(n-1) for n <= 12".into()));

    let seed = derive_seed(cfg.seed, 3);
    let mut rng = rng::stream(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..c.identity_cases {
        let n = 1 + (rng::uniform(&mut rng) * 10.0) as usize;
        let x: Vec<f64> = (0..n).map(|_| between(&mut rng, 0.05, 2.0)).collect();
        let lhs = x[0] * (1..n).map(|j| x[j] + x[j - 1]).product::<f64>();
        worst = worst.max(multiindex_identity_check(&x)? / lhs.abs());
    }
    b.properties.push(outcome("multiindex_identity", worst <= 1e-10, 1e-10 - worst, format!("largest relative residual {worst}")));

    // small grids keep the third-order tensors cheap
    let base = ChaosSampleConfig { n_chaos: 3, delta: 0.1, r: 2.0, t: 1.0, theta: 2.0 * cfg.theta, h: cfg.h, ..Default::default() };
    let coeffs = build_coefficients(&base)?;
    let rescaled = ou_rescale(&coeffs, std::f64::consts::LN_2 / 2.0)?;
    let rebuilt = build_coefficients(&ChaosSampleConfig { theta: cfg.theta, ..base.clone() })?;
    let mut ulps: f64 = 0.0;
    for (x, y) in rescaled.tensors.iter().zip(&rebuilt.tensors) {
        for (u, v) in x.data.iter().zip(&y.data) {
            if *v != 0.0 {
                ulps = ulps.max((u - v).abs() / (f64::EPSILON * v.abs()));
            }
        }
    }
    b.properties.push(outcome("ou_rescaling", ulps <= 4.0, 4.0 - ulps, format!("largest deviation {ulps} ulp")));

    let seed = derive_seed(cfg.seed, 4);
    let draws = sample_chaos(&coeffs, c.moment_samples, seed)?;
    let mut worst_z: f64 = 0.0;
    for (m, n) in [(1, 2), (1, 3), (2, 3)] {
        let e = empirical_cross_moment(&draws, m, n);
        worst_z = worst_z.max(if e.std_error > 0.0 { e.value.abs() / e.std_error } else { 0.0 });
    }
    b.properties.push(outcome("chaos_orthogonality", worst_z <= Z_LIMIT, Z_LIMIT - worst_z, format!("largest |z| {worst_z}")));

    // cell sums reproduce the fBm variance, and sampled cells have the right covariance
    let delta = 0.1;
    let mut sum_err: f64 = 0.0;
    for n in 1..=16i64 {
        let total: f64 = (0..n).flat_map(|i| (0..n).map(move |j| i - j)).map(|k| cell_covariance(cfg.h, delta, k)).sum();
        let exact = (n as f64 * delta).powf(2.0 * cfg.h);
        sum_err = sum_err.max((total - exact).abs() / exact);
    }
    let noise = CellNoise::new(cfg.h, delta, 16)?;
    let seed = derive_seed(cfg.seed, 5);
    let mut rng = rng::stream(seed, 0);
    let mut acc: Vec<MeanVar> = (0..4).map(|_| MeanVar::default()).collect();
    for _ in 0..c.moment_samples {
        let w = noise.sample(&mut rng);
        for (k, a) in acc.iter_mut().enumerate() {
            a.push(w[0] * w[k]);
        }
    }
    let cov_z = acc
        .iter()
        .enumerate()
        .map(|(k, a)| a.estimate().z_score(&hamf::Estimate::exact(cell_covariance(cfg.h, delta, k as i64))))
        .fold(0.0, f64::max);
    b.properties.push(outcome(
        "fbm_covariance",
        sum_err <= 1e-12 && cov_z <= Z_LIMIT,
        Z_LIMIT - cov_z,
        format!("cell-sum relative error {sum_err}, largest sampled |z| {cov_z}"),
    ));

    let hyper_cfg = ChaosSampleConfig { n_chaos: 2, ..base };
    let hyper = hypercontractivity_check(&build_coefficients(&hyper_cfg)?, c.moment_samples, HYPER_SLACK, derive_seed(cfg.seed, 6))?;
    let hmargin = hyper.iter().map(|r| (r.bound + 3.0 * r.l4.std_error - r.l4.value) / r.bound).fold(f64::INFINITY, f64::min);
    b.properties.push(outcome(
        "hypercontractivity",
        hyper.iter().all(|r| r.holds),
        hmargin,
        format!("orders 1..={}, slack {HYPER_SLACK}", hyper.len()),
    ));

    let mut props = Table::new("properties", &["property", "passed", "margin", "detail"]);
    for p in &b.properties {
        props.push(vec![p.name.clone(), p.passed.to_string(), num(p.margin), p.detail.clone()]);
    }
    b.results = json!({ "inject_fault": c.inject_fault, "hypercontractivity": hyper });
    b.tables = vec![props, cases];
    Ok(b)
}
