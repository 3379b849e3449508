//! Weak-solution checks and uniqueness certificates.
//!
//! A Lipschitz `f` with `f(0) = ψ`, satisfying the equation almost everywhere
//! and semi-concave uniformly in time, coincides with the regular solution `g`.
//! This module checks those three conditions on samples, evaluates the
//! difference-control inequality along characteristics and assembles a
//! discrete Gronwall certificate for `u = f − g`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::CharacteristicBundle;
use crate::error::{Error, Result};
use crate::grid::{uniform_times, Field, Grid, SpaceTimeField};
use crate::hamiltonian::Hamiltonian;
use crate::initial::InitialCondition;
use crate::semiconcavity::{estimate_constants, trace_constants};
use crate::vector::Vector;

/// One-sided slopes differing by more than this fraction of the slice
/// Lipschitz constant mark a kink node.
pub const KINK_THRESHOLD: f64 = 0.2;
/// Excluded fractions at or above this make the residual check inconclusive.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.05;
/// Budget constant of the difference-control slack `10·(h + Δt)·(1 + c)·T`.
pub const CONTROL_BUDGET: f64 = 10.0;
/// `h·c > 0.2·Lip(u)` on both sides means the constant only reflects a kink.
pub const GRID_SCALE_FACTOR: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSolutionOptions {
    /// Tolerance on `sup|f(0) − ψ|`; default `1e−9·max(1, ‖ψ‖∞)`.
    pub initial_tol: Option<f64>,
    pub residual_tol: f64,
    /// Semi-concavity threshold; default `10·c_upper(slice 0) + 1`.
    pub semiconcavity_threshold: Option<f64>,
}

impl Default for WeakSolutionOptions {
    fn default() -> Self {
        Self { initial_tol: None, residual_tol: 0.05, semiconcavity_threshold: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSolutionReport {
    pub initial_match: f64,
    pub initial_tol: f64,
    pub residual_sup: f64,
    pub residual_tol: f64,
    pub excluded_fraction: f64,
    pub semiconcavity_max: f64,
    pub semiconcavity_threshold: f64,
    pub initial_condition: Verdict,
    pub equation: Verdict,
    pub semiconcavity: Verdict,
}

impl WeakSolutionReport {
    pub fn all_passed(&self) -> bool {
        self.initial_condition.passed() && self.equation.passed() && self.semiconcavity.passed()
    }
}

/// Nodes where the one-sided slopes along some axis differ by more than
/// `0.2·Lip` of the slice.
pub fn kink_mask(f: &Field) -> Vec<bool> {
    let grid = f.grid();
    let v = f.values();
    let threshold = KINK_THRESHOLD * f.lipschitz_estimate();
    let mut kink = vec![false; v.len()];
    for d in 0..grid.dim() {
        let step = grid.spacing(d);
        let mut off = [0, 0];
        off[d] = 1;
        let back = [-off[0], -off[1]];
        for (idx, k) in kink.iter_mut().enumerate() {
            let plus = (v[grid.neighbor(idx, off)] - v[idx]) / step;
            let minus = (v[idx] - v[grid.neighbor(idx, back)]) / step;
            *k |= (plus - minus).abs() > threshold;
        }
    }
    kink
}

/// Checks the three weak-solution conditions on a sampled `f`.
pub fn check_weak_solution(
    f: &SpaceTimeField,
    h: &Hamiltonian,
    psi: &InitialCondition,
    opts: &WeakSolutionOptions,
) -> Result<WeakSolutionReport> {
    psi.check_grid(f.grid())?;
    if h.dim() != f.grid().dim() {
        return Err(Error::GridMismatch(format!("H has dimension {}, field has {}", h.dim(), f.grid().dim())));
    }
    let psi0 = psi.sample(f.grid())?;
    let initial_match = f.slice(0).distance(&psi0)?;
    let initial_tol = opts.initial_tol.unwrap_or(1e-9 * psi0.sup_norm().max(1.0));

    let interior: Vec<usize> = (1..f.last_index()).collect();
    let per_slice = interior
        .par_iter()
        .map(|&k| -> Result<(f64, usize)> {
            let dtf = f.time_derivative_fd(k)?;
            let slice = f.slice(k);
            let grads = slice.gradient_fd();
            let mask = kink_mask(slice);
            let mut worst = 0.0_f64;
            let mut excluded = 0;
            for (idx, &kink) in mask.iter().enumerate() {
                if kink {
                    excluded += 1;
                    continue;
                }
                let mut p: Vector = [0.0, 0.0];
                for (d, g) in grads.iter().enumerate() {
                    p[d] = g.values()[idx];
                }
                worst = worst.max((dtf.values()[idx] - h.value(&p)).abs());
            }
            Ok((worst, excluded))
        })
        .collect::<Result<Vec<_>>>()?;
    let residual_sup = per_slice.iter().map(|r| r.0).fold(0.0, f64::max);
    let total = interior.len() * f.grid().node_count();
    let excluded_fraction =
        if total == 0 { 0.0 } else { per_slice.iter().map(|r| r.1).sum::<usize>() as f64 / total as f64 };
    let equation = if total == 0 || excluded_fraction >= MAX_EXCLUDED_FRACTION {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(residual_sup <= opts.residual_tol)
    };

    let trace = trace_constants(f);
    let semiconcavity_max = trace.max_upper();
    let semiconcavity_threshold =
        opts.semiconcavity_threshold.unwrap_or(10.0 * trace.reports[0].c_upper.max(0.0) + 1.0);
    Ok(WeakSolutionReport {
        initial_match,
        initial_tol,
        residual_sup,
        residual_tol: opts.residual_tol,
        excluded_fraction,
        semiconcavity_max,
        semiconcavity_threshold,
        initial_condition: Verdict::from_bool(initial_match <= initial_tol),
        equation,
        semiconcavity: Verdict::from_bool(semiconcavity_max.is_finite() && semiconcavity_max <= semiconcavity_threshold),
    })
}

/// `v(t, x) = f(t, x − t∇H(0)) − t·H(0)`, shifting by periodic interpolation.
pub fn galilean_reparametrize(f: &SpaceTimeField, h: &Hamiltonian) -> Result<SpaceTimeField> {
    let h0 = h.value(&[0.0, 0.0]);
    let slope = h.gradient(&[0.0, 0.0]);
    let grid = f.grid();
    let slices = f
        .times()
        .par_iter()
        .zip(f.slices())
        .map(|(&t, s)| {
            if slope == [0.0, 0.0] {
                return Ok(s.map(|v| v - t * h0));
            }
            Field::sample(grid, |x| s.interpolate(&[x[0] - t * slope[0], x[1] - t * slope[1]]) - t * h0)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(grid.clone(), f.times().to_vec(), slices)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    pub time_index: usize,
    pub seed: usize,
    /// `|u(t, X^t(x))|`.
    pub lhs: f64,
    /// `∫₀ᵗ |∇u(s, X^s(x))|² ds` by the trapezoid rule, with `|∇u|²` from
    /// [`reachable_gradient_sq`].
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceControlReport {
    pub lipschitz: f64,
    /// Inflated constant `½·sup_{|r|≤2L}|∇²H(r)|`.
    pub c: f64,
    /// The same constant without inflation.
    pub c_raw: f64,
    pub tol: f64,
    /// `min(c·integral − lhs)` over all samples.
    pub worst_margin: f64,
    /// Some sample has `lhs > c·integral` before slack is applied.
    pub violated: bool,
    pub passed: bool,
    pub samples: Vec<ControlSample>,
}

/// Largest Lipschitz estimate over the slices of `f` and `g`.
fn joint_lipschitz(f: &SpaceTimeField, g: &SpaceTimeField) -> f64 {
    f.lipschitz_estimate().max(g.lipschitz_estimate())
}

/// `Σ_d max((D⁺_d u)², (D⁻_d u)²)` per node: the squared norm of the steepest
/// one-sided gradient, which equals `|∇u|²` up to `O(h)` where `u` is smooth
/// and picks a reachable gradient at kinks.
pub fn reachable_gradient_sq(u: &Field) -> Field {
    let grid = u.grid();
    let v = u.values();
    let mut out = vec![0.0; v.len()];
    for d in 0..grid.dim() {
        let step = grid.spacing(d);
        let mut off = [0, 0];
        off[d] = 1;
        let back = [-off[0], -off[1]];
        for (idx, o) in out.iter_mut().enumerate() {
            let plus = (v[grid.neighbor(idx, off)] - v[idx]) / step;
            let minus = (v[idx] - v[grid.neighbor(idx, back)]) / step;
            *o += plus.powi(2).max(minus.powi(2));
        }
    }
    Field::from_values(grid.clone(), out).expect("finite differences of finite values")
}

/// Evaluates `|u(t, X^t x)| ≤ c∫₀ᵗ|∇u(s, X^s x)|² ds` along every seed path.
pub fn difference_control(
    f: &SpaceTimeField,
    g: &SpaceTimeField,
    bundle: &CharacteristicBundle,
    h: &Hamiltonian,
) -> Result<DifferenceControlReport> {
    f.ensure_same_lattice(g)?;
    let times_match = bundle.times.len() == g.times().len()
        && bundle.times.iter().zip(g.times()).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
    if !times_match {
        return Err(Error::GridMismatch("bundle was not integrated on the lattice of g".into()));
    }
    bundle.grid.ensure_same(g.grid())?;
    let lipschitz = joint_lipschitz(f, g);
    let bound = h.hess_opnorm_sup(2.0 * lipschitz);
    let (c, c_raw) = (0.5 * bound.inflated, 0.5 * bound.raw);
    let u = f.sub(g)?;
    let dt = g.dt().unwrap_or(0.0);
    let grid = g.grid();
    let tol = CONTROL_BUDGET * (grid.max_spacing() + dt) * (1.0 + c) * g.final_time();

    let envelopes: Vec<Field> = u.slices().par_iter().map(reachable_gradient_sq).collect();
    let grad_sq = |k: usize, x: &Vector| envelopes[k].interpolate(x);
    let samples: Vec<ControlSample> = (0..bundle.seeds.len())
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut integral = 0.0;
            let mut prev = grad_sq(0, &bundle.paths[0][j]);
            let mut out = Vec::with_capacity(bundle.times.len());
            for k in 0..bundle.times.len() {
                let x = bundle.paths[k][j];
                if k > 0 {
                    let cur = grad_sq(k, &x);
                    integral += 0.5 * dt * (prev + cur);
                    prev = cur;
                }
                out.push(ControlSample { time_index: k, seed: j, lhs: u.slice(k).interpolate(&x).abs(), integral });
            }
            out
        })
        .collect();
    let worst_margin = samples.iter().map(|s| c * s.integral - s.lhs).fold(f64::INFINITY, f64::min);
    Ok(DifferenceControlReport {
        lipschitz,
        c,
        c_raw,
        tol,
        worst_margin,
        violated: worst_margin < 0.0,
        passed: worst_margin >= -tol,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCertificate {
    /// Largest Lipschitz estimate over the slices of `f` and `g`.
    pub lipschitz: f64,
    /// Lipschitz constant of `∇g`, measured.
    pub gradient_lipschitz: f64,
    pub c: f64,
    /// Max over slices of the two-sided semi-concavity constant of `u`.
    pub c_u: f64,
    pub c_prime: f64,
    pub times: Vec<f64>,
    /// `m(t_k) = ‖u(t_k)‖∞`.
    pub m: Vec<f64>,
    pub eps: f64,
    pub envelope: Vec<f64>,
    /// `c′·Δt·Σ_{j<k} m(t_j) + eps`.
    pub gronwall_rhs: Vec<f64>,
    pub verdict: bool,
    /// `eps·exp(c′T)`.
    pub certified_bound: f64,
}

/// Semi-concavity constant of `u` per slice, rejecting slices whose constant
/// is set by a kink rather than by curvature.
fn difference_constant(u: &SpaceTimeField) -> Result<f64> {
    let step = u.grid().max_spacing();
    let per_slice = u
        .slices()
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let r = estimate_constants(s);
            let lip = s.lipschitz_estimate();
            let cu = r.two_sided_constant();
            if step * cu > GRID_SCALE_FACTOR * lip {
                return Err(Error::HypothesisUnmet(format!(
                    "u is not semi-concave or semi-convex at grid scale at t = {} (c_upper = {}, c_lower = {}, h = {step})",
                    u.times()[k],
                    r.c_upper,
                    r.c_lower
                )));
            }
            Ok(cu)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_slice.into_iter().fold(0.0, f64::max))
}

/// Discrete Gronwall certificate `m(t_k) ≤ c′Δt Σ_{j<k} m(t_j) + eps`.
pub fn gronwall_certificate(
    f: &SpaceTimeField,
    g: &SpaceTimeField,
    h: &Hamiltonian,
    eps: f64,
) -> Result<UniquenessCertificate> {
    f.ensure_same_lattice(g)?;
    let u = f.sub(g)?;
    let m: Vec<f64> = u.slices().iter().map(Field::sup_norm).collect();
    if eps.is_nan() || eps < m[0] {
        return Err(Error::InvalidInput(format!("eps = {eps} is below the initial mismatch {}", m[0])));
    }
    let c_u = difference_constant(&u)?;
    let lipschitz = joint_lipschitz(f, g);
    let gradient_lipschitz = g
        .slices()
        .iter()
        .flat_map(|s| s.gradient_fd().into_iter().map(|gd| gd.lipschitz_estimate()))
        .fold(0.0, f64::max);
    let c = 0.5 * h.hess_opnorm_sup(2.0 * lipschitz).inflated;
    let c_prime = 4.0 * c * c_u;
    let dt = g.dt().unwrap_or(0.0);
    let mut gronwall_rhs = Vec::with_capacity(m.len());
    let mut sum = 0.0;
    for &mk in &m {
        gronwall_rhs.push(c_prime * dt * sum + eps);
        sum += mk;
    }
    let verdict = m.iter().zip(&gronwall_rhs).all(|(a, b)| a <= b);
    let envelope: Vec<f64> = g.times().iter().map(|t| eps * (c_prime * t).exp()).collect();
    Ok(UniquenessCertificate {
        lipschitz,
        gradient_lipschitz,
        c,
        c_u,
        c_prime,
        times: g.times().to_vec(),
        m,
        eps,
        certified_bound: *envelope.last().unwrap(),
        envelope,
        gronwall_rhs,
        verdict,
    })
}

/// Samples `f(t, x) = |x| − t` inside the cone `|x| ≤ t`, `0` outside, with
/// `|x|` the periodic distance to the origin node.
pub fn counterexample_field(grid: &Grid, times: Vec<f64>) -> Result<SpaceTimeField> {
    let half_cell = (0..grid.dim()).map(|d| 0.5 * grid.lengths()[d]).fold(f64::INFINITY, f64::min);
    if let Some(&t) = times.iter().find(|&&t| t >= half_cell) {
        return Err(Error::ConeLeavesCell { time: t, half_cell });
    }
    SpaceTimeField::from_fn(grid, times, |t, x| {
        let r = grid.periodic_distance(x, &[0.0, 0.0]);
        if r <= t {
            r - t
        } else {
            0.0
        }
    })
}

/// Time lattice `t_k = k·h` up to `T`, aligning the cone front with the nodes.
pub fn counterexample_times(grid: &Grid, horizon: f64) -> Vec<f64> {
    let step = grid.min_spacing();
    let steps = (horizon / step + 1e-9).floor() as usize;
    uniform_times(step, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::{integrate_flow, uniform_seeds};
    use crate::solver::{characteristic_field, solve_lax_friedrichs, SchemeConfig};
    use std::f64::consts::TAU;

    fn oracle_run(n: usize, t: f64) -> (Hamiltonian, InitialCondition, SpaceTimeField, SpaceTimeField) {
        let h = Hamiltonian::quadratic(0.5, 0.0, 0.0);
        let psi = InitialCondition::cosine(1.0, 1).unwrap();
        let grid = psi.grid(n).unwrap();
        let lf = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(t)).unwrap();
        let g = characteristic_field(&h, &psi, &grid, lf.times().to_vec()).unwrap();
        (h, psi, lf, g)
    }

    fn counterexample(n: usize, t: f64) -> SpaceTimeField {
        let grid = Grid::new_1d(TAU, n).unwrap();
        counterexample_field(&grid, counterexample_times(&grid, t)).unwrap()
    }

    #[test]
    fn counterexample_values() {
        let grid = Grid::new_1d(TAU, 512).unwrap();
        let f = counterexample_field(&grid, vec![0.0, 0.5]).unwrap();
        assert_eq!(f.slice(0).sup_norm(), 0.0);
        assert_eq!(f.slice(1).values()[0], -0.5);
        let node = (1.0 / grid.spacing(0)).round() as usize;
        assert_eq!(f.slice(1).values()[node], 0.0);
        assert!(matches!(counterexample_field(&grid, vec![0.0, 3.2]), Err(Error::ConeLeavesCell { .. })));
    }

    #[test]
    fn oracle_is_a_weak_solution() {
        let (h, psi, _, g) = oracle_run(512, 0.5);
        let r = check_weak_solution(&g, &h, &psi, &WeakSolutionOptions::default()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert!(r.residual_sup <= 0.05);
    }

    #[test]
    fn counterexample_fails_only_semiconcavity() {
        let f = counterexample(512, 0.5);
        let psi = InitialCondition::zero(1).unwrap();
        let r = check_weak_solution(&f, &Hamiltonian::neg_square(), &psi, &WeakSolutionOptions::default()).unwrap();
        assert_eq!(r.initial_condition, Verdict::Pass);
        assert_eq!(r.equation, Verdict::Pass);
        assert_eq!(r.semiconcavity, Verdict::Fail);
        assert!(r.residual_sup <= 1e-12 && r.excluded_fraction <= 0.02, "{r:?}");
    }

    #[test]
    fn zero_field_passes_everything() {
        let grid = Grid::new_1d(TAU, 64).unwrap();
        let f = SpaceTimeField::from_fn(&grid, uniform_times(0.05, 10), |_, _| 0.0).unwrap();
        let psi = InitialCondition::zero(1).unwrap();
        let r = check_weak_solution(&f, &Hamiltonian::neg_square(), &psi, &WeakSolutionOptions::default()).unwrap();
        assert!(r.all_passed() && r.residual_sup == 0.0);
    }

    #[test]
    fn mismatched_cell_is_rejected() {
        let grid = Grid::new_1d(1.0, 64).unwrap();
        let f = SpaceTimeField::from_fn(&grid, uniform_times(0.05, 4), |_, _| 0.0).unwrap();
        let psi = InitialCondition::zero(1).unwrap();
        assert!(matches!(
            check_weak_solution(&f, &Hamiltonian::neg_square(), &psi, &WeakSolutionOptions::default()),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn reparametrization_examples() {
        let grid = Grid::new_1d(TAU, 128).unwrap();
        let times = uniform_times(0.05, 10);
        let h = Hamiltonian::quadratic(0.5, 0.0, 3.0);
        let f = SpaceTimeField::from_fn(&grid, times.clone(), |t, _| 3.0 * t).unwrap();
        let v = galilean_reparametrize(&f, &h).unwrap();
        assert!(v.slices().iter().all(|s| s.sup_norm() < 1e-14));

        // ∂t f = b + a·∂x f is solved by ψ(x + at) + bt
        let (a, b) = (0.7, -1.3);
        let h = Hamiltonian::quadratic(0.0, a, b);
        let f = SpaceTimeField::from_fn(&grid, times, |t, x| (x[0] + a * t).sin() + b * t).unwrap();
        let v = galilean_reparametrize(&f, &h).unwrap();
        let step = grid.spacing(0);
        for s in v.slices() {
            for (i, val) in s.values().iter().enumerate() {
                assert!((val - (i as f64 * step).sin()).abs() <= step * step);
            }
        }
    }

    #[test]
    fn difference_control_equal_fields() {
        let (h, _, _, g) = oracle_run(128, 0.5);
        let b = integrate_flow(&g, &h, &uniform_seeds(g.grid(), 16)).unwrap();
        let r = difference_control(&g, &g, &b, &h).unwrap();
        assert!(r.passed && !r.violated);
        assert!(r.samples.iter().all(|s| s.lhs == 0.0 && s.integral == 0.0));
    }

    #[test]
    fn difference_control_detects_constant_drift() {
        let (h, _, _, g) = oracle_run(256, 0.5);
        let b = integrate_flow(&g, &h, &uniform_seeds(g.grid(), 16)).unwrap();
        for delta in [1e-3, 1.0] {
            let f = SpaceTimeField::new(
                g.grid().clone(),
                g.times().to_vec(),
                g.times().iter().zip(g.slices()).map(|(t, s)| s.map(|v| v + delta * t)).collect(),
            )
            .unwrap();
            let r = difference_control(&f, &g, &b, &h).unwrap();
            assert!(r.violated);
            assert!((r.worst_margin + delta * 0.5).abs() < 1e-9 * (1.0 + delta));
            assert_eq!(r.passed, delta * 0.5 <= r.tol);
        }
    }

    #[test]
    fn difference_control_is_sharp_on_counterexample() {
        let n = 512;
        let f = counterexample(n, 0.5);
        let g = SpaceTimeField::from_fn(f.grid(), f.times().to_vec(), |_, _| 0.0).unwrap();
        let h = Hamiltonian::neg_square();
        let seeds: Vec<Vector> = (0..n).map(|i| f.grid().node(i)).collect();
        let b = integrate_flow(&g, &h, &seeds).unwrap();
        let r = difference_control(&f, &g, &b, &h).unwrap();
        assert!(r.passed);
        assert!((r.c_raw - 1.0).abs() < 1e-12);
        let step = f.grid().spacing(0);
        let dt = f.dt().unwrap();
        for s in &r.samples {
            let t = f.times()[s.time_index];
            let x = f.grid().periodic_distance(&b.seeds[s.seed], &[0.0, 0.0]);
            if x < t - 3.0 * step {
                assert!((s.lhs - r.c_raw * s.integral).abs() <= 3.0 * (step + dt));
            }
        }
    }

    #[test]
    fn certificate_for_equal_fields() {
        let (h, _, _, g) = oracle_run(128, 0.3);
        let c = gronwall_certificate(&g, &g, &h, 0.0).unwrap();
        assert!(c.verdict && c.certified_bound == 0.0 && c.m.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn certificate_for_scheme_against_oracle() {
        let (h, _, lf, g) = oracle_run(512, 0.5);
        let eps = lf.last().distance(g.last()).unwrap();
        assert!(eps <= 0.05);
        let c = gronwall_certificate(&lf, &g, &h, eps).unwrap();
        assert!(c.verdict, "{:?}", c.c_prime);
        assert!(c.m.iter().all(|&m| m <= c.certified_bound));
        assert!(c.envelope.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn certificate_unavailable_for_counterexample() {
        let f = counterexample(256, 0.5);
        let g = SpaceTimeField::from_fn(f.grid(), f.times().to_vec(), |_, _| 0.0).unwrap();
        assert!(matches!(
            gronwall_certificate(&f, &g, &Hamiltonian::neg_square(), 0.0),
            Err(Error::HypothesisUnmet(_))
        ));
    }

    #[test]
    fn eps_below_initial_mismatch_is_rejected() {
        let grid = Grid::new_1d(TAU, 32).unwrap();
        let f = SpaceTimeField::from_fn(&grid, uniform_times(0.1, 3), |_, _| 0.1).unwrap();
        let g = SpaceTimeField::from_fn(&grid, uniform_times(0.1, 3), |_, _| 0.0).unwrap();
        assert!(matches!(
            gronwall_certificate(&f, &g, &Hamiltonian::neg_square(), 0.01),
            Err(Error::InvalidInput(_))
        ));
    }
}
