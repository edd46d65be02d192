//! Plain-text tables: the one-column data CSV and the heatmap CSV.

use std::fmt::Write as _;

use crate::error::{DacError, Result};
use crate::serde_ext::format_value;
use crate::sensitivity::{GridResult, Panel};

/// Parse a one-column data file. An optional first line `y` is a header;
/// blank lines are skipped; the decimal separator is always `.`.
pub fn parse_data_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.trim_matches('"');
        if first && field.eq_ignore_ascii_case("y") {
            first = false;
            continue;
        }
        first = false;
        if line.contains(',') || line.contains(';') || line.contains('\t') {
            return Err(DacError::validation(format!(
                "line {}: expected a single column, got '{line}'",
                lineno + 1
            )));
        }
        let v: f64 = field
            .parse()
            .map_err(|_| DacError::validation(format!("line {}: '{line}' is not a number", lineno + 1)))?;
        if !v.is_finite() {
            return Err(DacError::validation(format!("line {}: value is not finite", lineno + 1)));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(DacError::validation("data file contains no observations"));
    }
    Ok(out)
}

pub fn format_data_csv(values: &[f64]) -> String {
    let mut s = String::from("y\n");
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub const HEATMAP_HEADER: &str = "mean,sd,benchmark_id,dac";

/// Heatmap rows for one panel, row-major: expert mean outer, expert sd inner.
pub fn heatmap_csv(grid: &GridResult, panel: &Panel) -> Option<String> {
    let dac = panel.dac.as_ref()?;
    let mut s = String::with_capacity(32 * dac.values.len());
    s.push_str(HEATMAP_HEADER);
    s.push('\n');
    for (i, mean) in grid.means.iter().enumerate() {
        for (j, sd) in grid.sds.iter().enumerate() {
            let _ = writeln!(s, "{mean},{sd},{},{}", panel.benchmark_id, format_value(dac.get(i, j)));
        }
    }
    Some(s)
}
