pub mod check;
pub mod clt;
pub mod covariance;
pub mod rate;
pub mod volterra;

use hamf::limit_covariance::q1_r;

use crate::exit::CliError;
use crate::report::{num, PropertyOutcome, Table};

/// `q1_R(t, s)` over the sorted radii, as a table and as values.
fn q1_table(radii: &[f64], t: f64, s: f64, h: f64) -> Result<(Table, Vec<f64>), CliError> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut table = Table::new("q1", &["R", "t", "s", "q1_R"]);
    let mut values = Vec::with_capacity(sorted.len());
    for &r in &sorted {
        let v = q1_r(t, s, r, h)?;
        table.push(vec![num(r), num(t), num(s), num(v)]);
        values.push(v);
    }
    Ok((table, values))
}

/// Strict decrease of a sequence; the margin is the smallest drop.
fn decreasing_property(name: &str, values: &[f64]) -> PropertyOutcome {
    let margin = values.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let margin = if margin.is_finite() { margin } else { 0.0 };
    PropertyOutcome {
        name: name.into(),
        passed: values.windows(2).all(|w| w[1] < w[0]),
        margin,
        detail: format!("{} values", values.len()),
    }
}
