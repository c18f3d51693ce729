//! Decay of the first-chaos term and the tightness bound of `F_R`.

use std::collections::BTreeMap;

use hamf::fluctuation::tightness_check;
use hamf::stats::loglog_slope;
use serde_json::json;

use super::{decreasing_property, q1_table};
use crate::config::RunConfig;
use crate::exit::CliError;
use crate::report::{num, PropertyOutcome, ReportBundle, Table};
use crate::svg::{LineChart, Scale, Series};

/// Largest log-log slope of `|q1_R|` accepted as decay.
const Q1_SLOPE_LIMIT: f64 = -0.3;

pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let c = &cfg.rate;
    let mut b = ReportBundle::new("rate");

    let (q1, values) = q1_table(&c.q1_radii, 1.0, 1.0, cfg.h)?;
    let mut radii = c.q1_radii.clone();
    radii.sort_by(f64::total_cmp);
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    b.properties.push(decreasing_property("q1_decreasing", &abs));
    let slope = (radii.len() >= 2).then(|| loglog_slope(&radii, &abs));
    if let Some(s) = slope {
        b.properties.push(PropertyOutcome {
            name: "q1_slope".into(),
            passed: s <= Q1_SLOPE_LIMIT,
            margin: Q1_SLOPE_LIMIT - s,
            detail: format!("log-log slope {s}"),
        });
    }

    let report = tightness_check(&c.tightness_radii, &c.times, cfg.theta, cfg.h, c.delta)?;
    let mut tt = Table::new("tightness", &["R", "t", "s", "norm", "ratio", "next_order_bound"]);
    let mut by_r: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &report.rows {
        tt.push(vec![num(r.r), num(r.t), num(r.s), num(r.norm), num(r.ratio), num(r.next_order_bound)]);
        by_r.entry(r.r.to_bits()).or_default().push((r.t - r.s, r.ratio));
    }
    b.properties.push(PropertyOutcome {
        name: "tightness_bound".into(),
        passed: report.holds,
        margin: report.constant - report.max_ratio,
        detail: format!("max ratio {} against {}", report.max_ratio, report.constant),
    });

    b.plots.push((
        "q1_decay".into(),
        LineChart {
            title: "First-chaos term".into(),
            x_label: "R".into(),
            y_label: "|q1_R(1,1)|".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![Series { name: "|q1_R|".into(), points: radii.iter().copied().zip(abs.iter().copied()).collect() }],
        },
    ));
    b.plots.push((
        "tightness".into(),
        LineChart {
            title: "Increment ratio".into(),
            x_label: "t - s".into(),
            y_label: "norm / (R^1/2 (t - s))".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: by_r
                .into_iter()
                .map(|(r, mut pts)| {
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    Series { name: format!("R = {}", f64::from_bits(r)), points: pts }
                })
                .collect(),
        },
    ));
    b.results = json!({
        "q1_slope": slope,
        "tightness": { "max_ratio": report.max_ratio, "constant": report.constant, "holds": report.holds },
    });
    b.tables = vec![q1, tt];
    Ok(b)
}
