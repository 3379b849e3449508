//! Semi-concavity and semi-convexity constants of sampled fields.
//!
//! A field is c-semi-concave at grid scale when every midpoint second
//! difference quotient, along the axes and in 2D also the diagonals, is at
//! most `c`. Bounded semi-concave functions obey `|∇h|² ≤ 4c‖h‖∞`;
//! [`check_gradient_bound`] tests that inequality on samples.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Direction, Field, Grid, SpaceTimeField};
use crate::vector::Vector;

/// Constant in the discretization slack `5·h·Lip/‖f‖∞`.
pub const SLACK_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub position: Vector,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub passed: bool,
    /// `max|∇f|² / (4c‖f‖∞)`.
    pub ratio: f64,
    pub slack: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiConcavityReport {
    pub c_upper: f64,
    pub c_lower: f64,
    pub witness_max: Witness,
    pub witness_min: Witness,
    /// Gradient bound evaluated at the smallest admissible constant
    /// `min(max(c_upper, 0), max(−c_lower, 0))`.
    pub gradient_bound_ok: bool,
    pub gradient_bound_ratio: f64,
    pub gradient_bound_slack: f64,
}

impl SemiConcavityReport {
    /// Smallest `c ≥ 0` for which the field is c-semi-concave or c-semi-convex.
    pub fn two_sided_constant(&self) -> f64 {
        self.c_upper.max(0.0).min((-self.c_lower).max(0.0))
    }
}

/// Per-slice reports and the running max of `c_upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub reports: Vec<SemiConcavityReport>,
    pub running_max: Vec<f64>,
}

impl TraceReport {
    pub fn max_upper(&self) -> f64 {
        self.running_max.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Extremal quotients over the nodes selected by `mask` (called with node coordinates).
pub fn estimate_constants_in(f: &Field, mask: &(dyn Fn([usize; 2]) -> bool + Sync)) -> Result<SemiConcavityReport> {
    let grid = f.grid();
    let mut best: Option<((f64, Witness), (f64, Witness))> = None;
    for &dir in Direction::probe_set(grid.dim()) {
        let q = f.second_difference_quotients(dir);
        for (idx, &v) in q.values().iter().enumerate() {
            if !mask(grid.coords(idx)) {
                continue;
            }
            let w = Witness { node: idx, position: grid.node(idx), direction: dir };
            match &mut best {
                None => best = Some(((v, w), (v, w))),
                Some((hi, lo)) => {
                    if v > hi.0 {
                        *hi = (v, w);
                    }
                    if v < lo.0 {
                        *lo = (v, w);
                    }
                }
            }
        }
    }
    let ((c_upper, witness_max), (c_lower, witness_min)) =
        best.ok_or_else(|| Error::InvalidInput("no node selected".into()))?;
    let mut report = SemiConcavityReport {
        c_upper,
        c_lower,
        witness_max,
        witness_min,
        gradient_bound_ok: false,
        gradient_bound_ratio: 0.0,
        gradient_bound_slack: 0.0,
    };
    let bound = gradient_bound_unchecked(f, report.two_sided_constant(), mask);
    report.gradient_bound_ok = bound.passed;
    report.gradient_bound_ratio = bound.ratio;
    report.gradient_bound_slack = bound.slack;
    Ok(report)
}

pub fn estimate_constants(f: &Field) -> SemiConcavityReport {
    estimate_constants_in(f, &|_| true).expect("grids are never empty")
}

/// Roundoff allowance when comparing measured quotients against `c`.
fn roundoff(f: &Field, c: f64) -> f64 {
    let h = f.grid().min_spacing();
    1e-9 * c.abs().max(1.0) + 64.0 * f64::EPSILON * f.sup_norm() / (h * h)
}

/// Checks `max|∇f|² ≤ 4c‖f‖∞(1 + slack)` with `slack = 5h·Lip/‖f‖∞`.
///
/// Requires `f` to be c-semi-concave or c-semi-convex at grid scale.
pub fn check_gradient_bound(f: &Field, c: f64) -> Result<GradientBound> {
    check_gradient_bound_in(f, c, &|_| true)
}

pub fn check_gradient_bound_in(
    f: &Field,
    c: f64,
    mask: &(dyn Fn([usize; 2]) -> bool + Sync),
) -> Result<GradientBound> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("c must be finite and >= 0, got {c}")));
    }
    let r = estimate_constants_in(f, mask)?;
    let tol = roundoff(f, c);
    if r.c_upper > c + tol && -r.c_lower > c + tol {
        return Err(Error::HypothesisUnmet(format!(
            "field is neither {c}-semi-concave (c_upper = {}) nor {c}-semi-convex (c_lower = {})",
            r.c_upper, r.c_lower
        )));
    }
    Ok(gradient_bound_unchecked(f, c, mask))
}

fn gradient_bound_unchecked(f: &Field, c: f64, mask: &(dyn Fn([usize; 2]) -> bool + Sync)) -> GradientBound {
    let grid = f.grid();
    let sup = f.sup_norm();
    let slack = SLACK_FACTOR * grid.max_spacing() * f.lipschitz_estimate() / sup.max(1e-12);
    let grads = f.gradient_fd();
    let gmax2 = (0..grid.node_count())
        .filter(|&idx| mask(grid.coords(idx)))
        .map(|idx| grads.iter().map(|g| g.values()[idx].powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    let budget = 4.0 * c * sup;
    let ratio = if gmax2 == 0.0 {
        0.0
    } else if budget == 0.0 {
        f64::INFINITY
    } else {
        gmax2 / budget
    };
    GradientBound { passed: gmax2 <= budget * (1.0 + slack), ratio, slack, c }
}

/// One report per time slice plus the running max of `c_upper`.
pub fn trace_constants(field: &SpaceTimeField) -> TraceReport {
    let reports: Vec<SemiConcavityReport> = field.slices().par_iter().map(estimate_constants).collect();
    let running_max = reports
        .iter()
        .scan(f64::NEG_INFINITY, |m, r| {
            *m = m.max(r.c_upper);
            Some(*m)
        })
        .collect();
    TraceReport { reports, running_max }
}

/// A bounded periodic field that is exactly c-semi-concave: the periodic
/// closure of `(c/2)x²` minus a random convex piecewise-linear function,
/// shifted by a random offset. Returns the field and `c`.
pub fn random_semiconcave_field<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Result<(Field, f64)> {
    if grid.dim() != 1 {
        return Err(Error::InvalidInput("corpus fields are one-dimensional".into()));
    }
    let len = grid.lengths()[0];
    let c = rng.random_range(0.2..2.0);
    let kinks = rng.random_range(1..=6);
    let xs: Vec<f64> = (0..kinks).map(|_| rng.random_range(0.0..len)).collect();
    let ws: Vec<f64> = (0..kinks).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = ws.iter().sum();
    let ms: Vec<f64> = ws.iter().map(|w| c * len * w / total).collect();
    let s0 = -(0.5 * c * len * len - ms.iter().zip(&xs).map(|(m, x)| m * (len - x)).sum::<f64>()) / len;
    let raw = Field::sample(grid, |p| {
        let x = p[0];
        0.5 * c * x * x - ms.iter().zip(&xs).map(|(m, xj)| m * (x - xj).max(0.0)).sum::<f64>() + s0 * x
    })?;
    let (lo, hi) = raw.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let offset = -0.5 * (lo + hi) + rng.random_range(-0.2..0.2) * (hi - lo);
    Ok((raw.map(|v| v + offset), c))
}
