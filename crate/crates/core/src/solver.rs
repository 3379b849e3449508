//! Regular solutions of `∂t g − H(∇g) = 0`.
//!
//! Two independent constructions are provided: an explicit monotone
//! Lax-Friedrichs scheme (1D and 2D) and, in 1D, the characteristic formula
//! evaluated exactly at every node. [`classical_horizon`] estimates the time
//! after which the characteristic construction breaks down.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{uniform_times, Field, Grid, SpaceTimeField};
use crate::hamiltonian::{Hamiltonian, SCAN_INFLATION};
use crate::initial::InitialCondition;
use crate::vector::{dot, Vector};

pub const DEFAULT_CFL: f64 = 0.4;
/// Largest magnitude tolerated before a run is declared blown up.
pub const BLOWUP_LIMIT: f64 = 1e12;
/// Upper end of the horizon search.
pub const HORIZON_CAP: f64 = 10.0;
const HORIZON_RTOL: f64 = 1e-6;
const PAR_MIN_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dissipation {
    /// `1.1 × sup |∂_{p_d} H|` over `|p|∞ ≤ Lip(ψ) + 1`.
    Auto,
    Fixed(Vector),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub dissipation: Dissipation,
    pub horizon: f64,
    /// Explicit time step. When absent the largest stable step dividing the
    /// horizon evenly is used.
    pub dt: Option<f64>,
}

impl SchemeConfig {
    pub fn new(horizon: f64) -> Self {
        Self { cfl: DEFAULT_CFL, dissipation: Dissipation::Auto, horizon, dt: None }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_dissipation(mut self, dissipation: Dissipation) -> Self {
        self.dissipation = dissipation;
        self
    }
}

/// Resolved time step, step count and dissipation of a scheme run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemePlan {
    pub dt: f64,
    pub steps: usize,
    pub dissipation: Vector,
}

/// Largest `Δt` allowed by `cfl·h_d ≥ 2·D·σ_d·Δt` on every axis.
pub fn stable_dt(grid: &Grid, sigma: &Vector, cfl: f64) -> f64 {
    let dim = grid.dim() as f64;
    let limit = sigma[..grid.dim()]
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0.0)
        .map(|(d, s)| cfl * grid.spacing(d) / (2.0 * dim * s))
        .fold(f64::INFINITY, f64::min);
    if limit.is_finite() {
        limit
    } else {
        cfl * grid.min_spacing()
    }
}

pub fn auto_dissipation(h: &Hamiltonian, psi0: &Field) -> Vector {
    let radius = psi0.lipschitz_estimate() + 1.0;
    let partial = h.partial_sup(radius);
    [SCAN_INFLATION * partial[0], SCAN_INFLATION * partial[1]]
}

pub fn plan(h: &Hamiltonian, psi0: &Field, cfg: &SchemeConfig) -> Result<SchemePlan> {
    let grid = psi0.grid();
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::InvalidInput(format!("cfl must lie in (0, 1], got {}", cfg.cfl)));
    }
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {}", cfg.horizon)));
    }
    if h.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!("H has dimension {}, grid has {}", h.dim(), grid.dim())));
    }
    let sigma = match cfg.dissipation {
        Dissipation::Auto => auto_dissipation(h, psi0),
        Dissipation::Fixed(s) => {
            if s[..grid.dim()].iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidInput(format!("dissipation must be >= 0, got {s:?}")));
            }
            s
        }
    };
    let limit = stable_dt(grid, &sigma, cfg.cfl);
    let (dt, steps) = match cfg.dt {
        Some(dt) => {
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
            }
            let dim = grid.dim() as f64;
            for (d, s) in sigma[..grid.dim()].iter().enumerate() {
                let axis_limit = cfg.cfl * grid.spacing(d) / (2.0 * dim * s);
                if dt > axis_limit * (1.0 + 1e-12) {
                    return Err(Error::CflViolation { axis: d, dt, limit: axis_limit });
                }
            }
            let steps = (cfg.horizon / dt).round();
            if steps < 1.0 || (steps * dt - cfg.horizon).abs() > 1e-9 * cfg.horizon {
                return Err(Error::InvalidInput(format!(
                    "time step {dt} does not divide the horizon {}",
                    cfg.horizon
                )));
            }
            (dt, steps as usize)
        }
        None => {
            let steps = (cfg.horizon / limit).ceil().max(1.0) as usize;
            (cfg.horizon / steps as f64, steps)
        }
    };
    Ok(SchemePlan { dt, steps, dissipation: sigma })
}

/// `Ĥ(p⁻, p⁺) = H((p⁻+p⁺)/2) + Σ_d σ_d/2 (p⁺_d − p⁻_d)`.
#[inline]
pub fn numerical_hamiltonian(h: &Hamiltonian, minus: &Vector, plus: &Vector, sigma: &Vector) -> f64 {
    let mid = [0.5 * (minus[0] + plus[0]), 0.5 * (minus[1] + plus[1])];
    h.value(&mid) + 0.5 * (sigma[0] * (plus[0] - minus[0]) + sigma[1] * (plus[1] - minus[1]))
}

/// One explicit step `g + Δt·Ĥ(D⁻g, D⁺g)`.
pub fn lax_friedrichs_step(h: &Hamiltonian, g: &Field, dt: f64, sigma: &Vector) -> Vec<f64> {
    let grid = g.grid();
    let v = g.values();
    let dim = grid.dim();
    let inv_h = [1.0 / grid.spacing(0), if dim == 2 { 1.0 / grid.spacing(1) } else { 0.0 }];
    let update = |idx: usize| {
        let mut minus = [0.0, 0.0];
        let mut plus = [0.0, 0.0];
        for d in 0..dim {
            let mut off = [0, 0];
            off[d] = 1;
            let fwd = v[grid.neighbor(idx, off)];
            off[d] = -1;
            let bwd = v[grid.neighbor(idx, off)];
            plus[d] = (fwd - v[idx]) * inv_h[d];
            minus[d] = (v[idx] - bwd) * inv_h[d];
        }
        v[idx] + dt * numerical_hamiltonian(h, &minus, &plus, sigma)
    };
    (0..v.len()).into_par_iter().with_min_len(PAR_MIN_LEN).map(update).collect()
}

/// Marches `ψ` to the configured horizon, storing every step.
pub fn solve_lax_friedrichs(
    h: &Hamiltonian,
    psi: &InitialCondition,
    grid: &Grid,
    cfg: &SchemeConfig,
) -> Result<SpaceTimeField> {
    psi.check_grid(grid)?;
    let psi0 = psi.sample(grid)?;
    let p = plan(h, &psi0, cfg)?;
    solve_lax_friedrichs_from(h, psi0, &p)
}

/// Marches sampled initial data according to a resolved plan.
pub fn solve_lax_friedrichs_from(h: &Hamiltonian, initial: Field, plan: &SchemePlan) -> Result<SpaceTimeField> {
    let grid = initial.grid().clone();
    let mut slices = Vec::with_capacity(plan.steps + 1);
    slices.push(initial);
    for n in 0..plan.steps {
        let next = lax_friedrichs_step(h, slices.last().unwrap(), plan.dt, &plan.dissipation);
        if next.iter().any(|x| !x.is_finite() || x.abs() > BLOWUP_LIMIT) {
            return Err(Error::Blowup { time: (n + 1) as f64 * plan.dt });
        }
        slices.push(Field::from_values(grid.clone(), next)?);
    }
    SpaceTimeField::new(grid, uniform_times(plan.dt, plan.steps), slices)
}

fn require_1d(h: &Hamiltonian, psi: &InitialCondition, grid: &Grid) -> Result<()> {
    psi.check_grid(grid)?;
    if grid.dim() != 1 || h.dim() != 1 {
        return Err(Error::InvalidInput("the characteristic construction is one-dimensional".into()));
    }
    Ok(())
}

/// Foot-point image `x − t·H'(ψ'(x))`.
#[inline]
fn image(h: &Hamiltonian, psi: &InitialCondition, t: f64, x: f64) -> f64 {
    x - t * h.gradient(&psi.gradient(&[x, 0.0]))[0]
}

/// Transported value `ψ(x) + t·(H(p) − p·H'(p))` with `p = ψ'(x)`.
#[inline]
fn transported(h: &Hamiltonian, psi: &InitialCondition, t: f64, x: f64) -> f64 {
    let p = psi.gradient(&[x, 0.0]);
    psi.value(&[x, 0.0]) + t * (h.value(&p) - dot(&p, &h.gradient(&p)))
}

fn images_increasing(images: &[f64], length: f64) -> bool {
    images.windows(2).all(|w| w[1] > w[0]) && images[0] + length > *images.last().unwrap()
}

/// Exact regular solution at time `t` via the characteristic formula.
///
/// Images of the grid nodes bracket each target node; the foot point is then
/// refined to full precision by a safeguarded secant iteration.
pub fn solve_characteristic_exact(h: &Hamiltonian, psi: &InitialCondition, grid: &Grid, t: f64) -> Result<Field> {
    require_1d(h, psi, grid)?;
    let n = grid.points()[0];
    let len = grid.lengths()[0];
    let step = grid.spacing(0);
    let mut feet: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    feet[n] = len;
    let mut images: Vec<f64> = feet[..n].iter().map(|&x| image(h, psi, t, x)).collect();
    if !images_increasing(&images, len) {
        return Err(Error::HorizonExceeded { time: t });
    }
    images.push(images[0] + len);

    let values = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let z = i as f64 * step;
            let shift = ((z - images[0]) / len).floor();
            let target = z - shift * len;
            let k = images.partition_point(|&y| y <= target).clamp(1, n) - 1;
            let foot = solve_foot(|x| image(h, psi, t, x) - target, feet[k], feet[k + 1]);
            transported(h, psi, t, foot)
        })
        .collect();
    Field::from_values(grid.clone(), values)
}

/// Illinois regula falsi for an increasing `f` with a sign change on `[a, b]`.
fn solve_foot(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa >= 0.0 {
        return a;
    }
    if fb <= 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..100 {
        let x = (a * fb - b * fa) / (fb - fa);
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            return x;
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// [`solve_characteristic_exact`] at every time of a lattice.
pub fn characteristic_field(
    h: &Hamiltonian,
    psi: &InitialCondition,
    grid: &Grid,
    times: Vec<f64>,
) -> Result<SpaceTimeField> {
    let slices = times
        .par_iter()
        .map(|&t| solve_characteristic_exact(h, psi, grid, t))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(grid.clone(), times, slices)
}

/// Largest `t ≤ 10` for which the node images `x − t·H'(ψ'(x))` remain
/// strictly increasing, located by bisection to relative `1e−6`.
pub fn classical_horizon(h: &Hamiltonian, psi: &InitialCondition, grid: &Grid) -> Result<f64> {
    require_1d(h, psi, grid)?;
    let n = grid.points()[0];
    let len = grid.lengths()[0];
    let nodes: Vec<f64> = (0..n).map(|i| grid.node(i)[0]).collect();
    let speeds: Vec<f64> = nodes.iter().map(|&x| h.gradient(&psi.gradient(&[x, 0.0]))[0]).collect();
    let monotone = |t: f64| {
        let images: Vec<f64> = nodes.iter().zip(&speeds).map(|(x, s)| x - t * s).collect();
        images_increasing(&images, len)
    };
    if monotone(HORIZON_CAP) {
        return Ok(HORIZON_CAP);
    }
    let (mut lo, mut hi) = (0.0, HORIZON_CAP);
    while hi - lo > HORIZON_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if monotone(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
