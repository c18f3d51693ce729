use hamf::fluctuation::{clt_rate_study, ChaosSampleConfig, GaussianDiagnostics, SlopeFit};
use serde_json::json;

use crate::config::RunConfig;
use crate::exit::CliError;
use crate::report::{num, opt, PropertyOutcome, ReportBundle, Table};
use crate::svg::{LineChart, Scale, Series};

pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let c = &cfg.clt;
    let template = ChaosSampleConfig {
        n_chaos: c.n_chaos,
        delta: c.delta,
        n_samples: c.n_samples,
        r: c.r_list[0],
        t: c.t,
        theta: cfg.theta,
        h: cfg.h,
        include_first: true,
        entry_budget: c.entry_budget,
    };
    let study = clt_rate_study(&c.r_list, &template, cfg.seed)?;
    let mut b = ReportBundle::new("clt");

    let mut diag = Table::new(
        "diagnostics",
        &["R", "variant", "samples", "ks_stat", "hist_l1", "bins", "mean", "variance", "skewness", "excess_kurtosis", "seed"],
    );
    let mut push = |r: f64, variant: &str, d: &GaussianDiagnostics| {
        diag.push(vec![
            num(r),
            variant.into(),
            d.n.to_string(),
            num(d.ks_stat),
            num(d.hist_l1),
            d.bins.to_string(),
            num(d.sample_mean),
            num(d.sample_var),
            num(d.skewness),
            num(d.excess_kurtosis),
            cfg.seed.to_string(),
        ]);
    };
    for row in &study.rows {
        push(row.r, "all_orders", &row.all_orders);
        if let Some(d) = &row.higher_orders {
            push(row.r, "higher_orders", d);
        }
    }

    let mut slopes = Table::new("slopes", &["variant", "slope", "stderr", "ci_low", "ci_high", "seed"]);
    for (name, fit) in [("all_orders", study.slope_all), ("higher_orders", study.slope_higher)] {
        if let Some(SlopeFit { slope, std_error, ci }) = fit {
            slopes.push(vec![
                name.into(),
                num(slope),
                num(std_error),
                opt(ci.map(|c| c.0)),
                opt(ci.map(|c| c.1)),
                cfg.seed.to_string(),
            ]);
        }
    }

    // trend checks apply to the chaoses of order ≥ 2, whose law approaches the normal
    let higher: Option<Vec<(f64, f64)>> =
        study.rows.iter().map(|r| r.higher_orders.map(|d| (r.r, d.ks_stat))).collect();
    if let Some(ks) = higher.filter(|v| v.len() >= 2 && v[0].0 < v[v.len() - 1].0) {
        let (first, last) = (ks[0].1, ks[ks.len() - 1].1);
        b.properties.push(PropertyOutcome {
            name: "ks_decreases".into(),
            passed: last < first,
            margin: first - last,
            detail: format!("ks at R = {} vs R = {}", ks[ks.len() - 1].0, ks[0].0),
        });
    }
    if let Some(fit) = study.slope_higher {
        b.properties.push(PropertyOutcome {
            name: "hist_l1_slope_negative".into(),
            passed: fit.slope < 0.0,
            margin: -fit.slope,
            detail: format!("slope {} ± {}", fit.slope, fit.std_error),
        });
    }

    let series = |pick: fn(&GaussianDiagnostics) -> f64| {
        let mut out = vec![Series {
            name: "all orders".into(),
            points: study.rows.iter().map(|r| (r.r, pick(&r.all_orders))).collect(),
        }];
        if study.rows.iter().all(|r| r.higher_orders.is_some()) {
            out.push(Series {
                name: "orders ≥ 2".into(),
                points: study.rows.iter().filter_map(|r| r.higher_orders.map(|d| (r.r, pick(&d)))).collect(),
            });
        }
        out
    };
    for (name, title, pick) in [
        ("ks", "Kolmogorov-Smirnov distance", (|d: &GaussianDiagnostics| d.ks_stat) as fn(&GaussianDiagnostics) -> f64),
        ("hist_l1", "Histogram L1 distance", |d: &GaussianDiagnostics| d.hist_l1),
    ] {
        b.plots.push((
            name.into(),
            LineChart {
                title: title.into(),
                x_label: "R".into(),
                y_label: name.into(),
                x_scale: Scale::Log,
                y_scale: Scale::Log,
                series: series(pick),
            },
        ));
    }

    b.results = json!({
        "rows": study.rows,
        "slope_all_orders": study.slope_all,
        "slope_higher_orders": study.slope_higher,
    });
    b.tables = vec![diag, slopes];
    Ok(b)
}
