use hamf::limit_covariance::{k_theta_with_radii, q1_r};
use hamf::stats::loglog_slope;
use serde_json::json;

use super::{decreasing_property, q1_table};
use crate::config::RunConfig;
use crate::exit::CliError;
use crate::report::{num, PropertyOutcome, ReportBundle, Table};
use crate::svg::{LineChart, Scale, Series};

pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let c = &cfg.covariance;
    let mut b = ReportBundle::new("covariance");

    let (q1, q1_values) = q1_table(&c.q1_radii, c.t, c.s, cfg.h)?;
    let mut radii = c.q1_radii.clone();
    radii.sort_by(f64::total_cmp);
    let abs: Vec<f64> = q1_values.iter().map(|v| v.abs()).collect();
    let q1_slope = (radii.len() >= 2).then(|| loglog_slope(&radii, &abs));
    b.properties.push(decreasing_property("q1_decreasing", &abs));

    let k = k_theta_with_radii(c.t, c.s, cfg.theta, c.n_max, cfg.h, c.budget, cfg.seed, &c.radii)?;
    let largest = c.radii.iter().copied().fold(0.0, f64::max);

    let mut terms = Table::new("terms", &["n", "Q_n", "stderr", "Q_n_largest_R", "stderr_largest_R", "largest_R", "seed"]);
    // the first chaos has no limit contribution; its finite-R value is exact
    terms.push(vec!["1".into(), num(0.0), num(0.0), num(q1_r(c.t, c.s, largest, cfg.h)?), num(0.0), num(largest), String::new()]);
    for x in &k.terms {
        terms.push(vec![
            x.n.to_string(),
            num(x.q.value),
            num(x.q.std_error),
            num(x.q_largest_r.value),
            num(x.q_largest_r.std_error),
            num(x.largest_r),
            x.seed.to_string(),
        ]);
    }

    let zero = k.with_theta(0.0)?;
    let mut total = Table::new("total", &["theta", "K", "stderr", "tail_bound", "truncation", "seed"]);
    for r in [&zero, &k] {
        total.push(vec![
            num(r.theta),
            num(r.total.value),
            num(r.total.std_error),
            num(r.tail_bound),
            r.truncation.to_string(),
            cfg.seed.to_string(),
        ]);
    }
    b.properties.push(PropertyOutcome {
        name: "k_positive".into(),
        passed: k.total.value > 0.0,
        margin: if k.total.std_error > 0.0 { k.total.value / k.total.std_error } else { k.total.value },
        detail: format!("K = {} ± {}", k.total.value, k.total.std_error),
    });
    b.properties.push(PropertyOutcome {
        name: "theta_zero_total".into(),
        passed: zero.total.value == 0.0,
        margin: 0.0 - zero.total.value.abs(),
        detail: "K vanishes at theta = 0".into(),
    });

    b.plots.push((
        "terms".into(),
        LineChart {
            title: "Covariance terms".into(),
            x_label: "n".into(),
            y_label: "theta^n Q_n".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            series: vec![Series {
                name: format!("t = {}, s = {}", c.t, c.s),
                points: k.terms.iter().map(|x| (x.n as f64, cfg.theta.powi(x.n as i32) * x.q.value)).collect(),
            }],
        },
    ));
    b.plots.push((
        "q1_decay".into(),
        LineChart {
            title: "First-chaos term".into(),
            x_label: "R".into(),
            y_label: "|q1_R|".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![Series { name: "|q1_R|".into(), points: radii.iter().copied().zip(abs.iter().copied()).collect() }],
        },
    ));
    b.results = json!({
        "q1_slope": q1_slope,
        "series": k,
        "theta_zero": zero,
    });
    b.tables = vec![q1, terms, total];
    Ok(b)
}
