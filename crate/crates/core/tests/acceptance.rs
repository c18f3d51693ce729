//! End-to-end acceptance run: one line per criterion, then a single verdict.

use std::time::Instant;

use hamf::chaos_kernels::{enumerate_a_n, multiindex_identity_check, weighted_g_integral};
use hamf::fluctuation::{
    build_coefficients, clt_rate_study, combine, hist_slope, hypercontractivity_check, ou_rescale, sample_chaos, tightness_check,
    ChaosSampleConfig,
};
use hamf::limit_covariance::{
    k_theta, q1_r, q2_tt, qn_r_multi, sigma_r_sq_multi, sin_product_inequality, weighted_step_inequality, StepFunction,
};
use hamf::rng::{self, Stream};
use hamf::stats::loglog_slope;
use hamf::volterra::{j_functions, simulate_ensemble, simulate_v, v_second_moment_series, KernelKind, WalshGrid};
use hamf::Estimate;

const H: f64 = 0.3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn dual_method_q2() -> Outcome {
    let multi = qn_r_multi(2, 1.0, 1.0, &[250.0, 500.0, 1000.0], H, 800_000, 101).unwrap();
    let e = multi.extrapolated.unwrap();
    let exact = q2_tt(1.0, H).unwrap();
    let tol = (0.02 * exact).max(3.0 * e.std_error);
    outcome((e.value - exact).abs() <= tol, format!("Q2 = {} ± {} against quadrature {exact} (tol {tol})", e.value, e.std_error))
}

fn first_chaos_vanishes() -> Outcome {
    let rs = [10.0, 100.0, 1000.0];
    let q: Vec<f64> = rs.iter().map(|&r| q1_r(1.0, 1.0, r, H).unwrap().abs()).collect();
    let slope = loglog_slope(&rs, &q);
    let decreasing = q.windows(2).all(|w| w[1] < w[0]);
    outcome(decreasing && slope <= -0.3, format!("|q1_R| = {q:?}, slope {slope}"))
}

fn variance_limit() -> Outcome {
    let cfg = ChaosSampleConfig { n_chaos: 2, r: 200.0, n_samples: 10_000, ..Default::default() };
    let draws = sample_chaos(&build_coefficients(&cfg).unwrap(), cfg.n_samples, 202).unwrap();
    let xs = combine(&draws, true);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 / cfg.r;
    let var_se = ((m4 - m2 * m2) / n).sqrt() / cfg.r;
    let sigma200 = sigma_r_sq_multi(1.0, 1.0, &[200.0], 2, H, 200_000, 5).unwrap()[0].scale(1.0 / 200.0);
    let z = (var - sigma200.value).abs() / var_se.hypot(sigma200.std_error);

    let radii = [50.0, 200.0, 800.0];
    let sig = sigma_r_sq_multi(1.0, 1.0, &radii, 3, H, 200_000, 5).unwrap();
    let per_r: Vec<Estimate> = sig.iter().zip(radii).map(|(s, r)| s.scale(1.0 / r)).collect();
    let k = k_theta(1.0, 1.0, 1.0, 3, H, 200_000, 303).unwrap().total;
    let errs: Vec<f64> = per_r.iter().map(|s| (s.value - k.value).abs()).collect();
    let approaching = errs.windows(2).all(|w| w[1] < w[0]);
    let positive = k.value > 5.0 * k.std_error;
    outcome(
        z <= 3.0 && approaching && positive,
        format!(
            "Var/R = {var} vs sigma^2/R = {} (z = {z:.2}); |sigma^2/R - K| = {errs:?}; K = {} ± {}",
            sigma200.value, k.value, k.std_error
        ),
    )
}

fn clt_trend() -> Outcome {
    let template = ChaosSampleConfig { n_chaos: 2, n_samples: 10_000, ..Default::default() };
    let study = clt_rate_study(&[20.0, 25.0, 50.0, 100.0, 200.0], &template, 404).unwrap();
    let higher: Vec<_> = study.rows.iter().map(|r| r.higher_orders.unwrap()).collect();
    let (ks20, ks200) = (higher[0].ks_stat, higher[4].ks_stat);
    let rs: Vec<f64> = study.rows[1..].iter().map(|r| r.r).collect();
    let l1: Vec<f64> = higher[1..].iter().map(|d| d.hist_l1).collect();
    let fit = hist_slope(&rs, &l1).unwrap();
    outcome(
        ks200 < ks20 && fit.slope < 0.0,
        format!("orders >= 2: ks {ks20} -> {ks200}, hist_l1 slope {} ± {}", fit.slope, fit.std_error),
    )
}

fn combinatorics() -> Outcome {
    let card = (1..=12).all(|n| enumerate_a_n(n).unwrap().len() == 1 << (n - 1));
    let mut rng = rng::stream(505, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 1 + (rng::uniform(&mut rng) * 12.0) as usize;
        let x: Vec<f64> = (0..n).map(|_| 0.05 + 1.95 * rng::uniform(&mut rng)).collect();
        let lhs = x[0] * (1..n).map(|j| x[j] + x[j - 1]).product::<f64>();
        worst = worst.max(multiindex_identity_check(&x).unwrap() / lhs);
    }
    outcome(card && worst <= 1e-10, format!("card(A_n) ok = {card}, largest relative residual {worst:e}"))
}

fn scaling_laws() -> Outcome {
    let ts = [0.5, 1.0, 2.0, 4.0];
    let mut worst: f64 = 0.0;
    for alpha in [-0.5, 0.0, 0.4, 0.8] {
        let ys: Vec<f64> = ts.iter().map(|&t| weighted_g_integral(t, alpha).unwrap()).collect();
        worst = worst.max((loglog_slope(&ts, &ys) - (1.0 - alpha)).abs());
    }
    let js: Vec<_> = ts.iter().map(|&t| j_functions(KernelKind::Wave, t, H).unwrap()).collect();
    let expected = [2.0 * H, 4.0 * H - 1.0, 1.0, 4.0 * H + 1.0];
    let picks: [fn(&hamf::volterra::JValues) -> f64; 4] = [|j| j.j1, |j| j.j3, |j| j.j4, |j| j.j2];
    for (pick, e) in picks.iter().zip(expected) {
        let ys: Vec<f64> = js.iter().map(pick).collect();
        worst = worst.max((loglog_slope(&ts, &ys) - e).abs());
    }
    outcome(worst < 1e-2, format!("largest slope error {worst:e}"))
}

fn ou_and_hypercontractivity() -> Outcome {
    let base = ChaosSampleConfig { n_chaos: 3, delta: 0.1, r: 2.0, theta: 2.0, ..Default::default() };
    let c = build_coefficients(&base).unwrap();
    let a = ou_rescale(&c, std::f64::consts::LN_2 / 2.0).unwrap();
    let b = build_coefficients(&ChaosSampleConfig { theta: 1.0, ..base.clone() }).unwrap();
    let mut ulps: f64 = 0.0;
    for (x, y) in a.tensors.iter().zip(&b.tensors) {
        for (u, v) in x.data.iter().zip(&y.data) {
            if *v != 0.0 {
                ulps = ulps.max((u - v).abs() / (f64::EPSILON * v.abs()));
            }
        }
    }
    let h2 = build_coefficients(&ChaosSampleConfig { n_chaos: 2, r: 5.0, ..base }).unwrap();
    let rows = hypercontractivity_check(&h2, 20_000, 0.05, 606).unwrap();
    let holds = rows.iter().all(|r| r.holds);
    let ratios: Vec<f64> = rows.iter().map(|r| r.l4.value / r.bound).collect();
    outcome(ulps <= 4.0 && holds, format!("OU deviation {ulps} ulp; ||I_n||_4 / bound = {ratios:?}"))
}

fn volterra_consistency() -> Outcome {
    let grid = WalshGrid::new(1.0, 512, H).unwrap();
    let still = simulate_v(0.0, 0.0, 1.0, 0.0, &grid, 707).unwrap();
    let exact = still
        .slices
        .iter()
        .all(|s| s.values.iter().enumerate().all(|(j, &v)| v == hamf::chaos_kernels::wave_kernel(s.time, still.position(j))));
    let noisy = simulate_v(0.0, 0.0, 1.0, 1.0, &grid, 708).unwrap();
    let cone = noisy.light_cone_violations() + still.light_cone_violations();
    let ens = simulate_ensemble(0.0, 0.0, 1.0, 1.0, &grid, 1000, 709).unwrap();
    let m2 = ens.mean_square(0.0);
    let series = v_second_moment_series(0.0, 0.0, 1.0, 0.0, 1.0, 3, H, 2_000_000, 710).unwrap().total;
    let allowed = 3.0 * m2.std_error.hypot(series.std_error) + grid.dt;
    let diff = (m2.value - series.value).abs();
    outcome(
        exact && cone == 0 && diff <= allowed,
        format!(
            "lattice {} ± {} vs series {} ± {} (|diff| {diff:.5} <= {allowed:.5}); cone violations {cone}; theta=0 exact {exact}",
            m2.value, m2.std_error, series.value, series.std_error
        ),
    )
}

fn between(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::uniform(rng)
}

fn inequality_suite() -> Outcome {
    let mut rng = rng::stream(909, 0);
    let mut violations = 0;
    for _ in 0..1000 {
        let sign = if rng::uniform(&mut rng) < 0.5 { -1.0 } else { 1.0 };
        let (t, s) = (sign * between(&mut rng, 0.1, 3.0), between(&mut rng, 0.1, 3.0));
        let beta = between(&mut rng, 0.05, 1.95);
        let pieces = 1 + (rng::uniform(&mut rng) * 4.0) as usize;
        let mut breaks: Vec<f64> = (0..=pieces).map(|_| between(&mut rng, -5.0, 5.0)).collect();
        breaks.sort_by(f64::total_cmp);
        let values = (0..pieces).map(|_| between(&mut rng, -2.0, 2.0)).collect();
        let phi = StepFunction::new(breaks, values).unwrap();
        let c = weighted_step_inequality(&phi, t, s, beta).unwrap();
        violations += usize::from(c.lhs > c.rhs * (1.0 + 1e-8));

        let (t, s) = (between(&mut rng, 0.5, 3.0), between(&mut rng, 0.5, 3.0));
        let (c, _) = sin_product_inequality(t, s, between(&mut rng, 0.05, 0.95)).unwrap();
        violations += usize::from(c.lhs > c.rhs * (1.0 + 1e-8));
    }
    outcome(violations == 0, format!("{violations} violations over 2 x 1000 configurations"))
}

fn tightness() -> Outcome {
    let rep = tightness_check(&[50.0, 200.0], &[0.2, 0.4, 0.6, 0.8, 1.0], 1.0, H, 0.1).unwrap();
    outcome(rep.holds, format!("max ratio {} against frozen constant {}", rep.max_ratio, rep.constant))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("dual-method Q2 agreement", dual_method_q2),
        ("first chaos vanishes", first_chaos_vanishes),
        ("variance limit", variance_limit),
        ("CLT trend", clt_trend),
        ("exact combinatorics", combinatorics),
        ("scaling laws", scaling_laws),
        ("OU rescaling and hypercontractivity", ou_and_hypercontractivity),
        ("Volterra consistency", volterra_consistency),
        ("integral inequality suite", inequality_suite),
        ("tightness bound", tightness),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {:>2} {}: {} ({:.1}s) {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
