use hamf::chaos_kernels::wave_kernel;
use hamf::rng::derive_seed;
use hamf::stats::loglog_slope;
use hamf::volterra::{
    gronwall_sequence, j_functions, moment_norm_x, picard_second_moment, simulate_ensemble, simulate_v, v_second_moment_series,
    InitialCondition, JValues, KernelFamily, KernelKind, PicardGrid, WalshGrid,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::exit::CliError;
use crate::report::{num, PropertyOutcome, ReportBundle, Table};
use crate::svg::{LineChart, Scale, Series};

const SLOPE_TOLERANCE: f64 = 1e-2;

pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let v = &cfg.volterra;
    let mut b = ReportBundle::new("volterra");

    // J functionals and their power laws
    let mut jt = Table::new("j_functions", &["kind", "t", "J1", "J2", "J3", "J4"]);
    let mut st = Table::new("j_slopes", &["kind", "functional", "slope", "expected", "abs_error"]);
    let mut worst: f64 = 0.0;
    for kind in [KernelKind::Wave, KernelKind::Heat] {
        let name = match kind {
            KernelKind::Wave => "wave",
            KernelKind::Heat => "heat",
        };
        let values = v.j_times.iter().map(|&t| j_functions(kind, t, cfg.h)).collect::<Result<Vec<JValues>, _>>()?;
        for (&t, j) in v.j_times.iter().zip(&values) {
            jt.push(vec![name.into(), num(t), num(j.j1), num(j.j2), num(j.j3), num(j.j4)]);
        }
        if v.j_times.len() >= 2 {
            let expected = KernelFamily::new(kind, cfg.h)?.exponents();
            let picks: [(&str, fn(&JValues) -> f64); 4] =
                [("J1", |j| j.j1), ("J2", |j| j.j2), ("J3", |j| j.j3), ("J4", |j| j.j4)];
            for ((label, pick), e) in picks.iter().zip(expected) {
                let ys: Vec<f64> = values.iter().map(pick).collect();
                let s = loglog_slope(&v.j_times, &ys);
                worst = worst.max((s - e).abs());
                st.push(vec![name.into(), (*label).into(), num(s), num(e), num((s - e).abs())]);
            }
        }
    }
    if v.j_times.len() >= 2 {
        b.properties.push(PropertyOutcome {
            name: "j_scaling".into(),
            passed: worst < SLOPE_TOLERANCE,
            margin: SLOPE_TOLERANCE - worst,
            detail: format!("largest slope error {worst}"),
        });
    }

    // Gronwall sequence
    let gseed = derive_seed(cfg.seed, 1);
    let g = gronwall_sequence(2.0, cfg.h, v.t, cfg.theta, v.gronwall_order, v.gronwall_paths, gseed)?;
    let mut gt = Table::new("gronwall", &["n", "P", "stderr", "bracket_low", "bracket_high", "a_n", "sqrt_partial_sum", "seed"]);
    let sums = g.sqrt_partial_sums();
    let mut outside = 0usize;
    for (i, ((p, br), (a, s))) in g.probabilities.iter().zip(&g.brackets).zip(g.a.iter().zip(&sums)).enumerate() {
        let se = (br.1 / p.samples as f64).sqrt();
        if p.value < br.0 - 4.0 * se || p.value > br.1 + 4.0 * se {
            outside += 1;
        }
        gt.push(vec![
            (i + 1).to_string(),
            num(p.value),
            num(p.std_error),
            num(br.0),
            num(br.1),
            num(*a),
            num(*s),
            gseed.to_string(),
        ]);
    }
    b.properties.push(PropertyOutcome {
        name: "gronwall_within_brackets".into(),
        passed: outside == 0,
        margin: 0.0 - outside as f64,
        detail: "sampled P(S_n <= T) inside the convolution brackets up to 4 binomial errors".into(),
    });

    // Picard majorant
    let grid = PicardGrid::new(cfg.h, cfg.theta, v.t, v.picard_cells)?;
    let picard = picard_second_moment(v.r, &InitialCondition::WaveImpulse, v.picard_iterations, &grid)?;
    let mut pt = Table::new("picard", &["n", "v_sup", "w_sup", "norm"]);
    for it in &picard.iterates {
        pt.push(vec![it.n.to_string(), num(it.v_sup), num(it.w_sup), num(it.norm)]);
    }

    // lattice scheme against the chaos series
    let wg = WalshGrid::new(v.t, v.steps, cfg.h)?;
    let still = simulate_v(v.r, v.z, v.t, 0.0, &wg, derive_seed(cfg.seed, 2))?;
    let exact_err = still
        .slices
        .iter()
        .flat_map(|s| {
            s.values.iter().enumerate().map(|(j, &x)| (x - wave_kernel(s.time - v.r, still.position(j) - v.z)).abs())
        })
        .fold(0.0, f64::max);
    let fseed = derive_seed(cfg.seed, 3);
    let field = simulate_v(v.r, v.z, v.t, cfg.theta, &wg, fseed)?;
    let cone = field.light_cone_violations() + still.light_cone_violations();
    let eseed = derive_seed(cfg.seed, 4);
    let ens = simulate_ensemble(v.r, v.z, v.t, cfg.theta, &wg, v.replicas, eseed)?;
    let m2 = ens.mean_square(v.x);
    let series = v_second_moment_series(v.r, v.z, v.t, v.x, cfg.theta, v.series_order, cfg.h, v.series_budget, derive_seed(cfg.seed, 5))?;
    let norm = moment_norm_x(&ens, 2.0)?;
    let still_ens = simulate_ensemble(v.r, v.z, v.t, 0.0, &wg, 2, eseed)?;
    let still_norm = moment_norm_x(&still_ens, 2.0)?;
    let g0 = wave_kernel(v.t - v.r, v.x - v.z);

    let diff = (m2.value - series.total.value).abs();
    let sigma = m2.std_error.hypot(series.total.std_error);
    let allowed = 3.0 * sigma + wg.dt;
    b.properties.push(PropertyOutcome {
        name: "theta_zero_exact".into(),
        passed: exact_err == 0.0,
        margin: 0.0 - exact_err,
        detail: "noise-free lattice run equals the wave kernel at every node".into(),
    });
    b.properties.push(PropertyOutcome {
        name: "light_cone".into(),
        passed: cone == 0,
        margin: 0.0 - cone as f64,
        detail: format!("{cone} nonzero cells outside the light cone"),
    });
    b.properties.push(PropertyOutcome {
        name: "lattice_matches_series".into(),
        passed: diff <= allowed,
        margin: allowed - diff,
        detail: format!("|{} - {}| against 3 sigma + dt = {allowed}", m2.value, series.total.value),
    });

    let mut wt = Table::new(
        "walsh",
        &[
            "theta", "replicas", "steps", "E_V2", "stderr", "series", "series_stderr", "z_score", "max_abs_error_vs_G",
            "light_cone_violations", "sup_part", "increment_part", "seed",
        ],
    );
    wt.push(vec![
        num(0.0),
        "1".into(),
        v.steps.to_string(),
        num(still.value(still.slices.len() - 1, v.x).powi(2)),
        num(0.0),
        num(g0 * g0),
        num(0.0),
        num(0.0),
        num(exact_err),
        still.light_cone_violations().to_string(),
        num(still_norm.sup_part),
        num(still_norm.increment_part),
        derive_seed(cfg.seed, 2).to_string(),
    ]);
    wt.push(vec![
        num(cfg.theta),
        v.replicas.to_string(),
        v.steps.to_string(),
        num(m2.value),
        num(m2.std_error),
        num(series.total.value),
        num(series.total.std_error),
        num(m2.z_score(&series.total)),
        String::new(),
        field.light_cone_violations().to_string(),
        num(norm.sup_part),
        num(norm.increment_part),
        eseed.to_string(),
    ]);

    let mut vt = Table::new("series", &["n", "norm_sq", "stderr", "contribution", "contribution_stderr", "seed"]);
    vt.push(vec!["0".into(), num(series.g0_sq), num(0.0), num(series.g0_sq), num(0.0), String::new()]);
    for term in &series.terms {
        let seed = if term.n == 1 { String::new() } else { derive_seed(derive_seed(cfg.seed, 5), term.n as u64).to_string() };
        vt.push(vec![
            term.n.to_string(),
            num(term.norm_sq.value),
            num(term.norm_sq.std_error),
            num(term.contribution.value),
            num(term.contribution.std_error),
            seed,
        ]);
    }

    let mut ft = Table::new("field", &["time", "x", "V", "seed"]);
    for (k, s) in field.slices.iter().enumerate() {
        for (x, val) in field.points(k) {
            ft.push(vec![num(s.time), num(x), num(val), fseed.to_string()]);
        }
    }

    b.plots.push((
        "gronwall".into(),
        LineChart {
            title: "Gronwall sequence".into(),
            x_label: "n".into(),
            y_label: "a_n".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            series: vec![
                Series { name: "sampled".into(), points: g.a.iter().enumerate().map(|(i, &a)| ((i + 1) as f64, a)).collect() },
                Series {
                    name: "upper bracket".into(),
                    points: g.a_upper().iter().enumerate().map(|(i, &a)| ((i + 1) as f64, a)).collect(),
                },
            ],
        },
    ));
    b.plots.push((
        "picard".into(),
        LineChart {
            title: "Picard differences (majorant)".into(),
            x_label: "n".into(),
            y_label: "norm".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            series: vec![Series { name: picard.label.clone(), points: picard.iterates.iter().map(|i| (i.n as f64, i.norm)).collect() }],
        },
    ));
    b.plots.push((
        "field".into(),
        LineChart {
            title: format!("V at t = {}", field.last().time),
            x_label: "x".into(),
            y_label: "V".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: vec![Series { name: format!("seed {fseed}"), points: field.points(field.slices.len() - 1) }],
        },
    ));

    b.results = json!({
        "gronwall": {
            "q_t": g.q_t,
            "bdg_constant": g.bdg_constant,
            "growth_constant": g.growth_constant(),
            "paths": g.paths,
        },
        "picard": picard,
        "lattice": {
            "mean_square": m2,
            "series": series,
            "moment_norm": { "sup_part": norm.sup_part, "increment_part": norm.increment_part, "total": norm.total() },
            "dt": wg.dt,
        },
    });
    b.tables = vec![jt, st, gt, pt, wt, vt, ft];
    Ok(b)
}
