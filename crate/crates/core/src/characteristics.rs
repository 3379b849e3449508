//! Characteristic flow `Ẋ = −∇H(∇g(t, X))` of a sampled regular solution.
//!
//! The velocity is rebuilt from centered differences of the stored slices,
//! interpolated linearly in space and in time, and integrated with classical
//! RK4 on the solution's own time lattice. Paths are kept unwrapped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, SpaceTimeField};
use crate::hamiltonian::Hamiltonian;
use crate::initial::InitialCondition;
use crate::vector::{add, norm, scale, sub, Vector};

/// Budget constant of the bi-Lipschitz tolerance `10·Δt²·(1+c)·T`.
pub const RK4_BUDGET: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicBundle {
    pub grid: Grid,
    pub seeds: Vec<Vector>,
    pub times: Vec<f64>,
    /// `paths[k][j] = X(t_k, seeds[j])`.
    pub paths: Vec<Vec<Vector>>,
    /// `grad_along[k][j] = ∇g(t_k, X(t_k, seeds[j]))`.
    pub grad_along: Vec<Vec<Vector>>,
    /// Largest one-sided difference quotient of the velocity field over all slices.
    pub drift_constant: f64,
}

impl CharacteristicBundle {
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[self.times.len() - 1] / (self.times.len() - 1) as f64
        } else {
            0.0
        }
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Evenly spaced seeds: `count` points in 1D, a `m × m` lattice with
/// `m = round(√count)` in 2D.
pub fn uniform_seeds(grid: &Grid, count: usize) -> Vec<Vector> {
    let l = grid.lengths();
    if grid.dim() == 1 {
        return (0..count).map(|j| [j as f64 * l[0] / count as f64, 0.0]).collect();
    }
    let m = ((count as f64).sqrt().round() as usize).max(1);
    let mut seeds = Vec::with_capacity(m * m);
    for b in 0..m {
        for a in 0..m {
            seeds.push([a as f64 * l[0] / m as f64, b as f64 * l[1] / m as f64]);
        }
    }
    seeds
}

/// One classical RK4 step of `ẋ = v(t, x)`.
pub fn rk4_step(v: impl Fn(f64, &Vector) -> Vector, t: f64, x: &Vector, dt: f64) -> Vector {
    let k1 = v(t, x);
    let k2 = v(t + 0.5 * dt, &add(x, &scale(0.5 * dt, &k1)));
    let k3 = v(t + 0.5 * dt, &add(x, &scale(0.5 * dt, &k2)));
    let k4 = v(t + dt, &add(x, &scale(dt, &k3)));
    let incr = add(&add(&k1, &scale(2.0, &k2)), &add(&scale(2.0, &k3), &k4));
    add(x, &scale(dt / 6.0, &incr))
}

struct GradientData {
    slices: Vec<Vec<Field>>,
}

impl GradientData {
    fn new(g: &SpaceTimeField) -> Self {
        Self { slices: g.slices().par_iter().map(Field::gradient_fd).collect() }
    }

    /// `∇g` at slice `k + alpha`, linear in time and space.
    fn at(&self, k: usize, alpha: f64, x: &Vector) -> Vector {
        let mut out = [0.0, 0.0];
        let lo = &self.slices[k];
        for (d, comp) in lo.iter().enumerate() {
            let a = comp.interpolate(x);
            out[d] = if alpha == 0.0 {
                a
            } else {
                let b = self.slices[k + 1][d].interpolate(x);
                a + alpha * (b - a)
            };
        }
        out
    }
}

fn velocity_lipschitz(h: &Hamiltonian, grads: &[Field]) -> f64 {
    let grid = grads[0].grid();
    let vel: Vec<Vector> = (0..grid.node_count())
        .map(|idx| {
            let mut p = [0.0, 0.0];
            for (d, comp) in grads.iter().enumerate() {
                p[d] = comp.values()[idx];
            }
            scale(-1.0, &h.gradient(&p))
        })
        .collect();
    let mut lip = 0.0_f64;
    for d in 0..grid.dim() {
        let mut off = [0, 0];
        off[d] = 1;
        let step = grid.spacing(d);
        for (idx, v) in vel.iter().enumerate() {
            lip = lip.max(norm(&sub(&vel[grid.neighbor(idx, off)], v)) / step);
        }
    }
    lip
}

/// Integrates the characteristic flow from every seed across the lattice of `g`.
pub fn integrate_flow(g: &SpaceTimeField, h: &Hamiltonian, seeds: &[Vector]) -> Result<CharacteristicBundle> {
    if h.dim() != g.grid().dim() {
        return Err(Error::GridMismatch(format!("H has dimension {}, field has {}", h.dim(), g.grid().dim())));
    }
    let data = GradientData::new(g);
    let dt = g.dt().unwrap_or(0.0);
    let steps = g.last_index();
    let velocity = |k: usize, alpha: f64, x: &Vector| scale(-1.0, &h.gradient(&data.at(k, alpha, x)));

    let trajectories: Vec<(Vec<Vector>, Vec<Vector>)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut path = Vec::with_capacity(steps + 1);
            let mut grads = Vec::with_capacity(steps + 1);
            let mut x = seed;
            path.push(x);
            grads.push(data.at(0, 0.0, &x));
            for k in 0..steps {
                x = rk4_step(|s, y| velocity(k, s / dt, y), 0.0, &x, dt);
                path.push(x);
                grads.push(data.at(k + 1, 0.0, &x));
            }
            (path, grads)
        })
        .collect();

    let mut paths = vec![Vec::with_capacity(seeds.len()); steps + 1];
    let mut grad_along = vec![Vec::with_capacity(seeds.len()); steps + 1];
    for (path, grads) in trajectories {
        for (k, (x, p)) in path.into_iter().zip(grads).enumerate() {
            if !(x[0].is_finite() && x[1].is_finite()) {
                return Err(Error::NonFinite { node: k });
            }
            paths[k].push(x);
            grad_along[k].push(p);
        }
    }
    let drift_constant = data.slices.par_iter().map(|s| velocity_lipschitz(h, s)).reduce(|| 0.0, f64::max);
    Ok(CharacteristicBundle {
        grid: g.grid().clone(),
        seeds: seeds.to_vec(),
        times: g.times().to_vec(),
        paths,
        grad_along,
        drift_constant,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiLipschitzReport {
    pub c: f64,
    pub tol: f64,
    /// `min(d_t − e^{−ct}d_0, e^{ct}d_0 − d_t)` over all pairs and times.
    pub worst_margin: f64,
    pub passed: bool,
    /// Cyclic seed order kept at every time (1D only, `true` in 2D).
    pub order_preserved: bool,
    pub pairs: usize,
}

/// Checks `e^{−ct}d(x,y) − tol ≤ d(X^t x, X^t y) ≤ e^{ct}d(x,y) + tol` for
/// every seed pair and time, with `c = drift_constant`.
pub fn check_bilipschitz(bundle: &CharacteristicBundle) -> Result<BiLipschitzReport> {
    let n = bundle.seeds.len();
    if n < 2 {
        return Err(Error::InvalidInput("at least two seeds are needed".into()));
    }
    let c = bundle.drift_constant;
    let dt = bundle.dt();
    let tol = RK4_BUDGET * dt * dt * (1.0 + c) * bundle.final_time();
    let grid = &bundle.grid;
    let worst_margin = bundle
        .times
        .par_iter()
        .zip(&bundle.paths)
        .map(|(&t, row)| {
            let (lo, hi) = ((-c * t).exp(), (c * t).exp());
            let mut worst = f64::INFINITY;
            for a in 0..n {
                for b in a + 1..n {
                    let d0 = grid.periodic_distance(&bundle.seeds[a], &bundle.seeds[b]);
                    let dt = grid.periodic_distance(&row[a], &row[b]);
                    worst = worst.min(dt - lo * d0).min(hi * d0 - dt);
                }
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(BiLipschitzReport {
        c,
        tol,
        worst_margin,
        passed: worst_margin >= -tol,
        order_preserved: seed_order_preserved(bundle),
        pairs: n * (n - 1) / 2,
    })
}

fn sorted_seed_indices(bundle: &CharacteristicBundle) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bundle.seeds.len()).collect();
    order.sort_by(|&a, &b| bundle.seeds[a][0].total_cmp(&bundle.seeds[b][0]));
    order
}

fn cyclically_increasing(values: &[f64], length: f64) -> bool {
    values.windows(2).all(|w| w[1] > w[0]) && values[0] + length > values[values.len() - 1]
}

/// Whether the images of the seeds, sorted by seed position, stay in strictly
/// increasing cyclic order at every stored time (1D).
pub fn seed_order_preserved(bundle: &CharacteristicBundle) -> bool {
    if bundle.grid.dim() != 1 || bundle.seeds.len() < 2 {
        return true;
    }
    let order = sorted_seed_indices(bundle);
    let len = bundle.grid.lengths()[0];
    bundle.paths.iter().all(|row| {
        let images: Vec<f64> = order.iter().map(|&j| row[j][0]).collect();
        cyclically_increasing(&images, len)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversePoint {
    pub x: Vector,
    /// Lattice time actually used.
    pub time: f64,
    /// Set when the requested time was not on the lattice.
    pub snapped: bool,
}

/// Piecewise-linear inversion of `x ↦ X^t(x)` through the seed images (1D).
pub fn inverse_flow(bundle: &CharacteristicBundle, t: f64, y: &Vector) -> Result<InversePoint> {
    if bundle.grid.dim() != 1 {
        return Err(Error::InvalidInput("inverse flow is one-dimensional".into()));
    }
    if bundle.seeds.len() < 2 {
        return Err(Error::InvalidInput("at least two seeds are needed".into()));
    }
    let dt = bundle.dt();
    let k = if dt > 0.0 { ((t / dt).round().max(0.0) as usize).min(bundle.times.len() - 1) } else { 0 };
    let time = bundle.times[k];
    let snapped = (time - t).abs() > 1e-9 * bundle.final_time().max(1.0);
    let len = bundle.grid.lengths()[0];
    let order = sorted_seed_indices(bundle);
    let mut feet: Vec<f64> = order.iter().map(|&j| bundle.seeds[j][0]).collect();
    let mut images: Vec<f64> = order.iter().map(|&j| bundle.paths[k][j][0]).collect();
    if !cyclically_increasing(&images, len) {
        return Err(Error::NotMonotone { time });
    }
    feet.push(feet[0] + len);
    images.push(images[0] + len);
    let target = images[0] + (y[0] - images[0]).rem_euclid(len);
    let i = images.partition_point(|&v| v <= target).clamp(1, images.len() - 1) - 1;
    let w = (target - images[i]) / (images[i + 1] - images[i]);
    let x = feet[i] + w * (feet[i + 1] - feet[i]);
    Ok(InversePoint { x: [x, 0.0], time, snapped })
}

/// `sup |∇g(t_k, X(t_k, x_j)) − ∇ψ(x_j)|` over seeds and times.
pub fn check_gradient_constancy(bundle: &CharacteristicBundle, psi: &InitialCondition) -> f64 {
    let initial: Vec<Vector> = bundle.seeds.iter().map(|x| psi.gradient(x)).collect();
    bundle
        .grad_along
        .iter()
        .flat_map(|row| row.iter().zip(&initial).map(|(p, q)| norm(&sub(p, q))))
        .fold(0.0, f64::max)
}

/// `sup |X(t, x) − (x − t∇H(∇ψ(x)))|` in periodic distance over seeds and times.
pub fn straight_line_residual(bundle: &CharacteristicBundle, h: &Hamiltonian, psi: &InitialCondition) -> f64 {
    let speeds: Vec<Vector> = bundle.seeds.iter().map(|x| h.gradient(&psi.gradient(x))).collect();
    bundle
        .times
        .iter()
        .zip(&bundle.paths)
        .flat_map(|(&t, row)| {
            row.iter().zip(&bundle.seeds).zip(&speeds).map(move |((x, seed), s)| {
                let line = sub(seed, &scale(t, s));
                bundle.grid.periodic_distance(x, &line)
            })
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{characteristic_field, solve_lax_friedrichs, SchemeConfig};
    use std::f64::consts::TAU;

    fn cos_run(n: usize, t: f64) -> (Hamiltonian, InitialCondition, SpaceTimeField) {
        let h = Hamiltonian::quadratic(0.5, 0.0, 0.0);
        let psi = InitialCondition::cosine(1.0, 1).unwrap();
        let grid = psi.grid(n).unwrap();
        let lf = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(t)).unwrap();
        let g = characteristic_field(&h, &psi, &grid, lf.times().to_vec()).unwrap();
        (h, psi, g)
    }

    #[test]
    fn constant_drift_paths_are_straight() {
        let h = Hamiltonian::quadratic(0.5, 0.7, 2.0);
        let psi = InitialCondition::zero(1).unwrap();
        let grid = psi.grid(64).unwrap();
        let g = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(0.5)).unwrap();
        let seeds = uniform_seeds(&grid, 16);
        let b = integrate_flow(&g, &h, &seeds).unwrap();
        for (t, row) in b.times.iter().zip(&b.paths) {
            for (x, s) in row.iter().zip(&seeds) {
                assert!((x[0] - (s[0] - t * 0.7)).abs() < 1e-12);
            }
        }
        assert!(straight_line_residual(&b, &h, &psi) < 1e-12);
        assert_eq!(check_gradient_constancy(&b, &psi), 0.0);
        let r = check_bilipschitz(&b).unwrap();
        assert!(r.passed && r.order_preserved && r.worst_margin.abs() < 1e-12);
        let inv = inverse_flow(&b, 0.5, &[1.0, 0.0]).unwrap();
        assert!(b.grid.periodic_distance(&inv.x, &[1.35, 0.0]) < 1e-12);
        let id = inverse_flow(&b, 0.0, &[2.0, 0.0]).unwrap();
        assert!((id.x[0] - 2.0).abs() < 1e-12 && !id.snapped);
    }

    #[test]
    fn neg_square_paths_are_vertical() {
        let h = Hamiltonian::neg_square();
        let psi = InitialCondition::zero(1).unwrap();
        let grid = psi.grid(32).unwrap();
        let g = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(0.5)).unwrap();
        let b = integrate_flow(&g, &h, &uniform_seeds(&grid, 8)).unwrap();
        assert!(b.paths.iter().all(|row| row.iter().zip(&b.seeds).all(|(x, s)| x == s)));
        assert_eq!(check_gradient_constancy(&b, &psi), 0.0);
    }

    #[test]
    fn quadratic_cosine_run_follows_straight_lines() {
        let (h, psi, g) = cos_run(512, 0.5);
        let b = integrate_flow(&g, &h, &uniform_seeds(g.grid(), 64)).unwrap();
        assert!(straight_line_residual(&b, &h, &psi) <= 5e-3);
        assert!(check_gradient_constancy(&b, &psi) <= 5e-2);
        let r = check_bilipschitz(&b).unwrap();
        assert!(r.passed && r.order_preserved, "{r:?}");
        // velocity −g_x has Lipschitz constant sup|g_xx| = 1/(1 − t) at t = 0.5
        assert!((b.drift_constant - 2.0).abs() < 0.05, "{}", b.drift_constant);
    }

    #[test]
    fn inverse_round_trip() {
        let (h, _, g) = cos_run(512, 0.25);
        let b = integrate_flow(&g, &h, &uniform_seeds(g.grid(), 512)).unwrap();
        for y in [0.3, 1.7, 3.1, 5.9] {
            let inv = inverse_flow(&b, 0.25, &[y, 0.0]).unwrap();
            let forward = integrate_flow(&g, &h, &[inv.x]).unwrap();
            let back = forward.paths.last().unwrap()[0];
            assert!(b.grid.periodic_distance(&back, &[y, 0.0]) < 1e-4);
        }
        let off = inverse_flow(&b, 0.2501, &[1.0, 0.0]).unwrap();
        assert!(off.snapped);
    }

    #[test]
    fn inverse_flow_detects_crossing() {
        let grid = Grid::new_1d(TAU, 8).unwrap();
        let b = CharacteristicBundle {
            grid,
            seeds: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            times: vec![0.0, 1.0],
            paths: vec![vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0.0, 0.0], [2.5, 0.0], [2.0, 0.0]]],
            grad_along: vec![vec![[0.0; 2]; 3]; 2],
            drift_constant: 0.0,
        };
        assert!(matches!(inverse_flow(&b, 1.0, &[1.0, 0.0]), Err(Error::NotMonotone { .. })));
        assert!(!seed_order_preserved(&b));
    }

    #[test]
    fn semigroup_property() {
        let (h, _, g) = cos_run(256, 0.5);
        let seeds = uniform_seeds(g.grid(), 32);
        let full = integrate_flow(&g, &h, &seeds).unwrap();
        let k = g.last_index() / 2;
        let restart = integrate_flow(&g.window(k, g.last_index()).unwrap(), &h, &full.paths[k]).unwrap();
        let tol = 2.0 * RK4_BUDGET * full.dt().powi(2) * (1.0 + full.drift_constant) * full.final_time();
        for (a, b) in full.paths.last().unwrap().iter().zip(restart.paths.last().unwrap()) {
            assert!((a[0] - b[0]).abs() <= tol);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let v = |t: f64, x: &Vector| [x[0].sin() + t, 0.0];
        let run = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut x = [0.5, 0.0];
            for k in 0..steps {
                x = rk4_step(v, k as f64 * dt, &x, dt);
            }
            x[0]
        };
        let reference = run(4096);
        let errors: Vec<f64> = [8, 16, 32].iter().map(|&s| (run(s) - reference).abs()).collect();
        assert!(errors[0] / errors[1] >= 8.0 && errors[1] / errors[2] >= 8.0, "{errors:?}");
    }

    #[test]
    fn pipeline_path_error_converges() {
        // Linear-in-time velocity interpolation caps the pipeline at second order.
        let errors: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| {
                let (h, psi, g) = cos_run(n, 0.5);
                let b = integrate_flow(&g, &h, &uniform_seeds(g.grid(), 16)).unwrap();
                straight_line_residual(&b, &h, &psi)
            })
            .collect();
        assert!(errors[0] / errors[1] >= 3.5 && errors[1] / errors[2] >= 3.5, "{errors:?}");
    }

    #[test]
    fn two_dimensional_flow() {
        let h: Hamiltonian = "quadratic:0.5,0,0,0".parse().unwrap();
        let psi = InitialCondition::cosine(0.5, 2).unwrap();
        let grid = psi.grid(64).unwrap();
        let g = solve_lax_friedrichs(&h, &psi, &grid, &SchemeConfig::new(0.3)).unwrap();
        let b = integrate_flow(&g, &h, &uniform_seeds(&grid, 16)).unwrap();
        assert_eq!(b.seeds.len(), 16);
        assert!(straight_line_residual(&b, &h, &psi) < 0.05);
        assert!(check_bilipschitz(&b).unwrap().passed);
    }
}
