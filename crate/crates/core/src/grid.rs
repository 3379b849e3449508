//! Periodic uniform grids, sampled fields and finite-difference primitives.
//!
//! Nodes sit at `x_i = i·h` with `h = ℓ/n`; index `n` wraps to index `0`.
//! In 2D the flat index is `j·n₀ + i` (axis 0 fastest).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    lengths: Vector,
    points: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, lengths: Vector, points: [usize; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dim}")));
        }
        for d in 0..dim {
            if !(lengths[d] > 0.0 && lengths[d].is_finite()) {
                return Err(Error::InvalidInput(format!("cell length {} on axis {d}", lengths[d])));
            }
            if points[d] < MIN_POINTS {
                return Err(Error::InvalidInput(format!(
                    "need at least {MIN_POINTS} points per axis, got {} on axis {d}",
                    points[d]
                )));
            }
        }
        let (lengths, points) = if dim == 1 {
            ([lengths[0], 0.0], [points[0], 1])
        } else {
            (lengths, points)
        };
        Ok(Self { dim, lengths, points })
    }

    pub fn new_1d(length: f64, n: usize) -> Result<Self> {
        Self::new(1, [length, 0.0], [n, 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengths(&self) -> Vector {
        self.lengths
    }

    pub fn points(&self) -> [usize; 2] {
        self.points
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim).map(|d| self.spacing(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim).map(|d| self.spacing(d)).fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.points[0] * self.points[1]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.points[0] + i
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 2] {
        [index % self.points[0], index / self.points[0]]
    }

    pub fn node(&self, index: usize) -> Vector {
        let [i, j] = self.coords(index);
        [i as f64 * self.spacing(0), if self.dim == 2 { j as f64 * self.spacing(1) } else { 0.0 }]
    }

    #[inline]
    fn wrap(&self, i: isize, axis: usize) -> usize {
        i.rem_euclid(self.points[axis] as isize) as usize
    }

    /// Flat index of the node `offset` steps away, with periodic wrap.
    #[inline]
    pub fn neighbor(&self, index: usize, offset: [isize; 2]) -> usize {
        let [i, j] = self.coords(index);
        let ni = self.wrap(i as isize + offset[0], 0);
        let nj = self.wrap(j as isize + offset[1], 1);
        self.index(ni, nj)
    }

    /// Wraps a coordinate difference into `[−ℓ/2, ℓ/2)` per axis.
    pub fn periodic_delta(&self, a: &Vector, b: &Vector) -> Vector {
        let mut d = [0.0, 0.0];
        for k in 0..self.dim {
            let l = self.lengths[k];
            d[k] = (a[k] - b[k] + 0.5 * l).rem_euclid(l) - 0.5 * l;
        }
        d
    }

    pub fn periodic_distance(&self, a: &Vector, b: &Vector) -> f64 {
        crate::vector::norm(&self.periodic_delta(a, b))
    }

    /// Representative of `x` in the cell `[0, ℓ)^D`.
    pub fn wrap_point(&self, x: &Vector) -> Vector {
        let mut w = [0.0, 0.0];
        for k in 0..self.dim {
            w[k] = x[k].rem_euclid(self.lengths[k]);
        }
        w
    }

    /// Samples a vector-valued rule into one field per component.
    pub fn sample_vector(&self, rule: impl Fn(&Vector) -> Vector) -> Vec<Field> {
        let mut comps = vec![Vec::with_capacity(self.node_count()); self.dim];
        for idx in 0..self.node_count() {
            let v = rule(&self.node(idx));
            for (d, c) in comps.iter_mut().enumerate() {
                c.push(v[d]);
            }
        }
        comps.into_iter().map(|values| Field { grid: self.clone(), values }).collect()
    }

    /// Checks that `other` discretizes the same cell with the same resolution.
    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        let same = self.dim == other.dim
            && self.points == other.points
            && (0..self.dim).all(|d| (self.lengths[d] - other.lengths[d]).abs() <= 1e-12 * self.lengths[d]);
        if same {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Integer stencil direction `e`; the physical step is `(e₀h₀, e₁h₁)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Direction(pub [isize; 2]);

impl Direction {
    pub const AXIS_X: Direction = Direction([1, 0]);
    pub const AXIS_Y: Direction = Direction([0, 1]);
    pub const DIAGONAL: Direction = Direction([1, 1]);
    pub const ANTI_DIAGONAL: Direction = Direction([1, -1]);

    /// Directions probed for semi-concavity: the axis in 1D; both axes and
    /// both diagonals in 2D.
    pub fn probe_set(dim: usize) -> &'static [Direction] {
        const ONE: [Direction; 1] = [Direction::AXIS_X];
        const TWO: [Direction; 4] =
            [Direction::AXIS_X, Direction::AXIS_Y, Direction::DIAGONAL, Direction::ANTI_DIAGONAL];
        if dim == 1 {
            &ONE
        } else {
            &TWO
        }
    }

    pub fn step_length_sq(&self, grid: &Grid) -> f64 {
        (0..grid.dim())
            .map(|d| {
                let s = self.0[d] as f64 * grid.spacing(d);
                s * s
            })
            .sum()
    }

    fn negated(&self) -> [isize; 2] {
        [-self.0[0], -self.0[1]]
    }
}

/// A scalar field sampled at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn sample(grid: &Grid, rule: impl Fn(&Vector) -> f64) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| rule(&grid.node(i))).collect();
        Self::from_values(grid.clone(), values)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.node_count()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest one-sided difference quotient `|f_{i+1} − f_i|/h` over all axes.
    pub fn lipschitz_estimate(&self) -> f64 {
        let mut lip = 0.0_f64;
        for d in 0..self.grid.dim {
            let h = self.grid.spacing(d);
            let mut off = [0, 0];
            off[d] = 1;
            for (idx, v) in self.values.iter().enumerate() {
                let next = self.values[self.grid.neighbor(idx, off)];
                lip = lip.max((next - v).abs() / h);
            }
        }
        lip
    }

    /// Centered periodic differences, one field per axis.
    pub fn gradient_fd(&self) -> Vec<Field> {
        (0..self.grid.dim)
            .map(|d| {
                let h2 = 2.0 * self.grid.spacing(d);
                let mut fwd = [0, 0];
                fwd[d] = 1;
                let bwd = [-fwd[0], -fwd[1]];
                let values = (0..self.values.len())
                    .map(|idx| {
                        (self.values[self.grid.neighbor(idx, fwd)] - self.values[self.grid.neighbor(idx, bwd)])
                            / h2
                    })
                    .collect();
                Field { grid: self.grid.clone(), values }
            })
            .collect()
    }

    /// `(f(x+he) + f(x−he) − 2f(x)) / |he|²` with periodic wrap.
    pub fn second_difference_quotients(&self, direction: Direction) -> Field {
        let step_sq = direction.step_length_sq(&self.grid);
        let back = direction.negated();
        let values = (0..self.values.len())
            .map(|idx| {
                let plus = self.values[self.grid.neighbor(idx, direction.0)];
                let minus = self.values[self.grid.neighbor(idx, back)];
                (plus + minus - 2.0 * self.values[idx]) / step_sq
            })
            .collect();
        Field { grid: self.grid.clone(), values }
    }

    /// Periodic linear (1D) or bilinear (2D) interpolation at `x`.
    pub fn interpolate(&self, x: &Vector) -> f64 {
        let g = &self.grid;
        let mut base = [0usize; 2];
        let mut w = [0.0; 2];
        for d in 0..g.dim {
            let s = x[d] / g.spacing(d);
            let fl = s.floor();
            base[d] = g.wrap(fl as isize, d);
            w[d] = s - fl;
        }
        if g.dim == 1 {
            let a = self.values[base[0]];
            let b = self.values[g.wrap(base[0] as isize + 1, 0)];
            return a + w[0] * (b - a);
        }
        let i1 = g.wrap(base[0] as isize + 1, 0);
        let j1 = g.wrap(base[1] as isize + 1, 1);
        let f00 = self.values[g.index(base[0], base[1])];
        let f10 = self.values[g.index(i1, base[1])];
        let f01 = self.values[g.index(base[0], j1)];
        let f11 = self.values[g.index(i1, j1)];
        let lo = f00 + w[0] * (f10 - f00);
        let hi = f01 + w[0] * (f11 - f01);
        lo + w[1] * (hi - lo)
    }

    /// Cyclic shift by whole nodes: `out[i] = self[i − shift]`.
    pub fn roll(&self, shift: [isize; 2]) -> Field {
        let back = [-shift[0], -shift[1]];
        let values = (0..self.values.len()).map(|idx| self.values[self.grid.neighbor(idx, back)]).collect();
        Field { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Sup-norm distance to `other`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }
}

/// `t_k = k·dt` for `k = 0..=steps`.
pub fn uniform_times(dt: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 * dt).collect()
}

/// A space-time field on a uniform time lattice starting at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, times: Vec<f64>, slices: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != slices.len() {
            return Err(Error::InvalidInput(format!("{} times for {} slices", times.len(), slices.len())));
        }
        for s in &slices {
            grid.ensure_same(s.grid())?;
        }
        let last = *times.last().unwrap();
        let scale = last.abs().max(1.0);
        if times[0].abs() > 1e-12 * scale {
            return Err(Error::InvalidInput(format!("time lattice must start at 0, got {}", times[0])));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        let k = times.len() - 1;
        if k > 0 {
            let dt = last / k as f64;
            if let Some(i) = times.iter().enumerate().position(|(i, &t)| (t - i as f64 * dt).abs() > 1e-12 * scale) {
                return Err(Error::InvalidInput(format!("time step is not uniform at index {i}")));
            }
        }
        Ok(Self { grid, times, slices })
    }

    /// Samples `rule(t, x)` on every node and time.
    pub fn from_fn(grid: &Grid, times: Vec<f64>, rule: impl Fn(f64, &Vector) -> f64) -> Result<Self> {
        let slices = times.iter().map(|&t| Field::sample(grid, |x| rule(t, x))).collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), times, slices)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &Field {
        &self.slices[k]
    }

    pub fn last(&self) -> &Field {
        self.slices.last().expect("non-empty by construction")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty by construction")
    }

    /// Index of the last time, `K`.
    pub fn last_index(&self) -> usize {
        self.times.len() - 1
    }

    /// Uniform time step, `None` for a single slice.
    pub fn dt(&self) -> Option<f64> {
        (self.times.len() > 1).then(|| self.final_time() / self.last_index() as f64)
    }

    /// `(slice_{k+1} − slice_{k−1}) / (2Δt)` for interior `k`.
    pub fn time_derivative_fd(&self, k: usize) -> Result<Field> {
        let hi = self.last_index();
        if k == 0 || k >= hi {
            return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: hi.saturating_sub(1) });
        }
        let dt2 = 2.0 * self.dt().expect("at least three slices");
        self.slices[k + 1].zip_with(&self.slices[k - 1], |a, b| (a - b) / dt2)
    }

    /// Max of [`Field::lipschitz_estimate`] over all slices.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.slices.iter().map(Field::lipschitz_estimate).fold(0.0, f64::max)
    }

    /// Checks grid and time lattice agreement.
    pub fn ensure_same_lattice(&self, other: &SpaceTimeField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        let same_times = self.times.len() == other.times.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
        if same_times {
            Ok(())
        } else {
            Err(Error::GridMismatch("time lattices differ".into()))
        }
    }

    pub fn sub(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.ensure_same_lattice(other)?;
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid.clone(), times: self.times.clone(), slices })
    }

    /// Slices `from..=to` with times rebased so the first is `0`.
    pub fn window(&self, from: usize, to: usize) -> Result<SpaceTimeField> {
        if from > to || to > self.last_index() {
            return Err(Error::IndexOutOfRange { index: to, lo: from, hi: self.last_index() });
        }
        let dt = self.dt().unwrap_or(0.0);
        let times = (0..=to - from).map(|k| k as f64 * dt).collect();
        Self::new(self.grid.clone(), times, self.slices[from..=to].to_vec())
    }

    /// Index of the lattice time nearest to `t`, and whether `t` had to be snapped.
    pub fn time_index(&self, t: f64) -> (usize, bool) {
        let k = match self.dt() {
            Some(dt) => ((t / dt).round().max(0.0) as usize).min(self.last_index()),
            None => 0,
        };
        let snapped = (self.times[k] - t).abs() > 1e-9 * self.final_time().max(1.0);
        (k, snapped)
    }
}
