//! Verdicts over recorded traces: monotonicity audits, convergence
//! certification and observed refinement orders.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::DiagnosticsRecord;
use crate::geometry::GraphSurface;
use crate::quantities::{slice_values, Functionals, SliceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneVerdict {
    pub key: String,
    pub direction: Direction,
    pub pass: bool,
    /// Largest increment against `direction`, zero if none.
    pub worst_violation: f64,
    /// Index of the record ending the worst increment.
    pub index: Option<usize>,
    pub slack: f64,
}

/// Scans consecutive records of column `key`.
pub fn audit_monotone(
    trace: &[DiagnosticsRecord],
    key: &str,
    direction: Direction,
    slack: f64,
) -> Result<MonotoneVerdict> {
    let col = DiagnosticsRecord::COLUMNS
        .iter()
        .position(|c| *c == key)
        .ok_or_else(|| Error::Parameter(format!("unknown trace column {key:?}")))?;
    let series: Vec<f64> = trace.iter().map(|r| r.values()[col]).collect();
    Ok(audit_series(key, &series, direction, slack))
}

pub fn audit_series(
    key: &str,
    series: &[f64],
    direction: Direction,
    slack: f64,
) -> MonotoneVerdict {
    let mut worst = 0.0f64;
    let mut index = None;
    for (i, w) in series.windows(2).enumerate() {
        let inc = w[1] - w[0];
        let against = match direction {
            Direction::Nondecreasing => -inc,
            Direction::Nonincreasing => inc,
        };
        // NaN increments count as violations.
        if against > worst || against.is_nan() {
            worst = if against.is_nan() {
                f64::INFINITY
            } else {
                against
            };
            index = Some(i + 1);
        }
    }
    MonotoneVerdict {
        key: key.to_string(),
        direction,
        pass: worst <= slack,
        worst_violation: worst,
        index,
        slack,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCertificate {
    pub limit_radius: f64,
    pub osc: f64,
    pub speed_max: f64,
    /// `|area - A(s*)| / A(s*)`
    pub area_residual: f64,
    /// `|W - W(s*)| / W(s*)`
    pub weighted_volume_residual: f64,
    /// `|Q - Q(s*)| / |Q(s*)|`
    pub q_residual: f64,
    pub osc_tol: f64,
    pub speed_tol: f64,
    pub certified: bool,
}

/// Compares the final surface with the slice at its mean radius.
pub fn certify_convergence(
    trace: &[DiagnosticsRecord],
    surface: &GraphSurface,
    profile: &SliceProfile,
    osc_tol: f64,
    speed_tol: f64,
) -> Result<ConvergenceCertificate> {
    let s = surface.mean_radius();
    let f = Functionals::of(surface)?;
    let target = slice_values(profile.model(), s)?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let speed_max = trace.last().map(|r| r.speed_max).unwrap_or(f64::INFINITY);
    let osc = surface.oscillation();
    Ok(ConvergenceCertificate {
        limit_radius: s,
        osc,
        speed_max,
        area_residual: rel(f.area, target.area),
        weighted_volume_residual: rel(f.weighted_volume, target.weighted_volume),
        q_residual: rel(f.q, target.q),
        osc_tol,
        speed_tol,
        certified: osc < osc_tol && speed_max < speed_tol,
    })
}

/// `log2(|v_N - v_2N| / |v_2N - v_4N|)` for a ladder with refinement ratio 2.
pub fn refinement_order(coarse: f64, medium: f64, fine: f64) -> f64 {
    ((coarse - medium).abs() / (medium - fine).abs()).log2()
}

/// Observed order when the exact limit is known: `log2(|e_N| / |e_2N|)`
/// averaged over both halvings.
pub fn refinement_order_to_limit(coarse: f64, medium: f64, fine: f64, exact: f64) -> f64 {
    let e = [coarse - exact, medium - exact, fine - exact].map(f64::abs);
    0.5 * ((e[0] / e[1]).log2() + (e[1] / e[2]).log2())
}
