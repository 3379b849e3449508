//! Initial conditions `ψ` with declared Lipschitz constants on a periodic cell.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::hamiltonian::{GradientRule, ValueRule};
use crate::vector::Vector;

/// Number of modes in the `trig` family.
pub const TRIG_MODES: usize = 3;
/// Bound on each mode amplitude of a randomly drawn `trig` initial condition.
pub const TRIG_MAX_AMPLITUDE: f64 = 0.3;

#[derive(Clone)]
pub struct InitialCondition {
    label: String,
    dim: usize,
    cell: Vector,
    sign: f64,
    value: ValueRule,
    gradient: GradientRule,
    lipschitz: f64,
    gradient_lipschitz: f64,
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialCondition")
            .field("label", &self.to_string())
            .field("dim", &self.dim)
            .field("cell", &self.cell)
            .field("lipschitz", &self.lipschitz)
            .field("gradient_lipschitz", &self.gradient_lipschitz)
            .finish()
    }
}

impl InitialCondition {
    /// User supplied rules. `cell` holds the period per axis (second entry
    /// ignored in 1D).
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        label: impl Into<String>,
        dim: usize,
        cell: Vector,
        value: ValueRule,
        gradient: GradientRule,
        lipschitz: f64,
        gradient_lipschitz: f64,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(lipschitz >= 0.0 && gradient_lipschitz >= 0.0) {
            return Err(Error::InvalidInput("Lipschitz constants must be >= 0".into()));
        }
        let cell = if dim == 1 { [cell[0], 0.0] } else { cell };
        if cell[..dim].iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput(format!("bad periodicity cell {cell:?}")));
        }
        Ok(Self {
            label: label.into(),
            dim,
            cell,
            sign: 1.0,
            value,
            gradient,
            lipschitz,
            gradient_lipschitz,
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::custom("zero", dim, [TAU, TAU], Arc::new(|_| 0.0), Arc::new(|_| [0.0, 0.0]), 0.0, 0.0)
            .map(|p| p.relabel(if dim == 1 { "zero".into() } else { format!("zero:{dim}") }))
    }

    /// `A Σ_d cos(x_d)` on the cell `[0, 2π)^D`.
    pub fn cosine(amplitude: f64, dim: usize) -> Result<Self> {
        let d = dim;
        Self::custom(
            "",
            dim,
            [TAU, TAU],
            Arc::new(move |x| amplitude * (0..d).map(|i| x[i].cos()).sum::<f64>()),
            Arc::new(move |x| {
                let mut g = [0.0, 0.0];
                for i in 0..d {
                    g[i] = -amplitude * x[i].sin();
                }
                g
            }),
            amplitude.abs() * (dim as f64).sqrt(),
            amplitude.abs(),
        )
        .map(|p| p.relabel(family_label("cos", amplitude, dim)))
    }

    /// `A Σ_d sin(x_d)` on the cell `[0, 2π)^D`.
    pub fn sine(amplitude: f64, dim: usize) -> Result<Self> {
        let d = dim;
        Self::custom(
            "",
            dim,
            [TAU, TAU],
            Arc::new(move |x| amplitude * (0..d).map(|i| x[i].sin()).sum::<f64>()),
            Arc::new(move |x| {
                let mut g = [0.0, 0.0];
                for i in 0..d {
                    g[i] = amplitude * x[i].cos();
                }
                g
            }),
            amplitude.abs() * (dim as f64).sqrt(),
            amplitude.abs(),
        )
        .map(|p| p.relabel(family_label("sin", amplitude, dim)))
    }

    /// One-dimensional `Σ_k a_k cos(k x + φ_k)`, `k = 1..=3`, on `[0, 2π)`.
    pub fn trig(amplitudes: [f64; TRIG_MODES], phases: [f64; TRIG_MODES]) -> Self {
        let lip = (0..TRIG_MODES).map(|k| (k + 1) as f64 * amplitudes[k].abs()).sum();
        let lip2 = (0..TRIG_MODES).map(|k| ((k + 1) * (k + 1)) as f64 * amplitudes[k].abs()).sum();
        let label = format!(
            "trig:{},{},{};phases={},{},{}",
            amplitudes[0], amplitudes[1], amplitudes[2], phases[0], phases[1], phases[2]
        );
        Self::custom(
            label,
            1,
            [TAU, 0.0],
            Arc::new(move |x| {
                (0..TRIG_MODES)
                    .map(|k| amplitudes[k] * ((k + 1) as f64 * x[0] + phases[k]).cos())
                    .sum()
            }),
            Arc::new(move |x| {
                let d = (0..TRIG_MODES)
                    .map(|k| {
                        let m = (k + 1) as f64;
                        -m * amplitudes[k] * (m * x[0] + phases[k]).sin()
                    })
                    .sum();
                [d, 0.0]
            }),
            lip,
            lip2,
        )
        .expect("trig family is well formed")
    }

    /// Random `trig` member: amplitudes uniform in `[−0.3, 0.3]`, phases uniform in `[0, 2π)`.
    pub fn random_trig<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut amplitudes = [0.0; TRIG_MODES];
        let mut phases = [0.0; TRIG_MODES];
        for k in 0..TRIG_MODES {
            amplitudes[k] = rng.random_range(-TRIG_MAX_AMPLITUDE..=TRIG_MAX_AMPLITUDE);
            phases[k] = rng.random_range(0.0..TAU);
        }
        Self::trig(amplitudes, phases)
    }

    /// Parses a psi spec string. Random members of the `trig` family draw
    /// from `rng_seed`:
    ///
    /// * `zero[:D]`, `cos[:A[,D]]`, `sin[:A[,D]]`
    /// * `trig:a1,a2,a3` (phases drawn), `trig:a1,a2,a3;phases=φ1,φ2,φ3`, `trig:random`
    /// * a leading `-` negates.
    pub fn from_spec(spec: &str, rng_seed: u64) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix('-') {
            return Self::from_spec(rest, rng_seed).map(|p| p.negate());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let (head, modifier) = match spec.split_once(';') {
            Some((h, m)) => (h, Some(m.trim())),
            None => (spec, None),
        };
        let (name, args) = match head.split_once(':') {
            Some((n, a)) => (n.trim(), a.trim()),
            None => (head.trim(), ""),
        };
        let nums = || -> Result<Vec<f64>> {
            if args.is_empty() {
                return Ok(Vec::new());
            }
            args.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {t:?}"))))
                .collect()
        };
        let dim_of = |v: f64| -> Result<usize> {
            if v == 1.0 || v == 2.0 {
                Ok(v as usize)
            } else {
                Err(Error::Parse(format!("dimension must be 1 or 2, got {v}")))
            }
        };
        if name != "trig" && modifier.is_some() {
            return Err(Error::Parse(format!("unexpected modifier in {spec:?}")));
        }
        match name {
            "zero" => match nums()?.as_slice() {
                [] => Self::zero(1),
                [d] => Self::zero(dim_of(*d)?),
                _ => Err(Error::Parse("zero takes at most a dimension".into())),
            },
            "cos" | "sin" => {
                let (a, d) = match nums()?.as_slice() {
                    [] => (1.0, 1),
                    [a] => (*a, 1),
                    [a, d] => (*a, dim_of(*d)?),
                    _ => return Err(Error::Parse(format!("{name} takes amplitude[,dim]"))),
                };
                if name == "cos" {
                    Self::cosine(a, d)
                } else {
                    Self::sine(a, d)
                }
            }
            "trig" if args == "random" => Ok(Self::random_trig(&mut rng)),
            "trig" => {
                let a = nums()?;
                let amplitudes: [f64; TRIG_MODES] = a
                    .as_slice()
                    .try_into()
                    .map_err(|_| Error::Parse("trig takes three amplitudes".into()))?;
                let phases = match modifier {
                    Some(m) => {
                        let list = m
                            .strip_prefix("phases=")
                            .ok_or_else(|| Error::Parse(format!("unknown trig modifier {m:?}")))?;
                        let v = list
                            .split(',')
                            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad phase {t:?}"))))
                            .collect::<Result<Vec<_>>>()?;
                        <[f64; TRIG_MODES]>::try_from(v.as_slice())
                            .map_err(|_| Error::Parse("trig takes three phases".into()))?
                    }
                    None => std::array::from_fn(|_| rng.random_range(0.0..TAU)),
                };
                Ok(Self::trig(amplitudes, phases))
            }
            _ => Err(Error::Parse(format!("unknown psi family {name:?}"))),
        }
    }

    fn relabel(mut self, label: String) -> Self {
        self.label = label;
        self
    }

    /// `−ψ`. Applying it twice restores the original rules exactly.
    pub fn negate(&self) -> Self {
        let mut out = self.clone();
        out.sign = -out.sign;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Periodicity cell length per axis.
    pub fn cell(&self) -> Vector {
        self.cell
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn gradient_lipschitz(&self) -> f64 {
        self.gradient_lipschitz
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.sign * (self.value)(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let g = (self.gradient)(x);
        [self.sign * g[0], if self.dim == 1 { 0.0 } else { self.sign * g[1] }]
    }

    /// A grid on this condition's cell with `n` points per axis.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.dim, self.cell, [n, n])
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        Field::sample(grid, |x| self.value(x))
    }

    /// Errors unless `grid` discretizes this condition's cell.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "grid has dimension {}, psi has {}",
                grid.dim(),
                self.dim
            )));
        }
        for d in 0..self.dim {
            let (a, b) = (grid.lengths()[d], self.cell[d]);
            if (a - b).abs() > 1e-12 * b {
                return Err(Error::GridMismatch(format!("axis {d}: grid length {a} vs psi cell {b}")));
            }
        }
        Ok(())
    }
}

fn family_label(name: &str, amplitude: f64, dim: usize) -> String {
    match (amplitude == 1.0, dim) {
        (true, 1) => name.to_string(),
        (_, 1) => format!("{name}:{amplitude}"),
        _ => format!("{name}:{amplitude},{dim}"),
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0.0 {
            write!(f, "-{}", self.label)
        } else {
            write!(f, "{}", self.label)
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    /// Parses with RNG seed 0; use [`InitialCondition::from_spec`] to choose the seed.
    fn from_str(s: &str) -> Result<Self> {
        Self::from_spec(s, 0)
    }
}

/// `(p ↦ −H(−p), −ψ)`: solving the reflected pair and negating recovers the
/// original solution.
pub fn reflect(
    h: &crate::hamiltonian::Hamiltonian,
    psi: &InitialCondition,
) -> (crate::hamiltonian::Hamiltonian, InitialCondition) {
    (h.reflect(), psi.negate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Hamiltonian;

    #[test]
    fn declared_constants_hold_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cases = vec![
            InitialCondition::cosine(2.0, 1).unwrap(),
            InitialCondition::sine(0.5, 1).unwrap(),
            InitialCondition::zero(1).unwrap(),
        ];
        cases.extend((0..5).map(|_| InitialCondition::random_trig(&mut rng)));
        for psi in cases {
            let grid = psi.grid(256).unwrap();
            let f = psi.sample(&grid).unwrap();
            // Chord slopes never exceed the true Lipschitz constant.
            assert!(f.lipschitz_estimate() <= psi.lipschitz() * (1.0 + 1e-12), "{psi}");
            let grad = grid.sample_vector(|x| psi.gradient(x));
            assert!(grad[0].lipschitz_estimate() <= psi.gradient_lipschitz() * (1.0 + 1e-12), "{psi}");
            // Periodic: the value one cell over matches.
            for x in [0.0, 1.3, 4.0] {
                let a = psi.value(&[x, 0.0]);
                let b = psi.value(&[x + psi.cell()[0], 0.0]);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_rules_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = InitialCondition::random_trig(&mut rng);
        let d = 1e-5;
        for i in 0..40 {
            let x = 0.157 * i as f64;
            let fd = (psi.value(&[x + d, 0.0]) - psi.value(&[x - d, 0.0])) / (2.0 * d);
            assert!((fd - psi.gradient(&[x, 0.0])[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["zero", "zero:2", "cos", "cos:0.5", "sin:2,2", "-cos", "trig:0.1,-0.2,0.3;phases=0,1,2"] {
            let psi = InitialCondition::from_spec(s, 0).unwrap();
            assert_eq!(psi.to_string(), s);
        }
        let a = InitialCondition::from_spec("trig:random", 7).unwrap();
        let b = InitialCondition::from_spec("trig:random", 7).unwrap();
        let c = InitialCondition::from_spec(&a.to_string(), 99).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        for x in [0.0, 0.7, 3.0] {
            assert_eq!(a.value(&[x, 0.0]), c.value(&[x, 0.0]));
        }
        assert!(InitialCondition::from_spec("cos:1,3", 0).is_err());
        assert!(InitialCondition::from_spec("bump", 0).is_err());
    }

    #[test]
    fn reflect_pair_is_an_involution() {
        let h = Hamiltonian::quadratic(0.5, 1.0, 0.0);
        let psi = InitialCondition::cosine(1.0, 1).unwrap();
        let (h1, p1) = reflect(&h, &psi);
        let (h2, p2) = reflect(&h1, &p1);
        for x in [-3.0, 0.1, 2.5] {
            assert_eq!(p1.value(&[x, 0.0]), -psi.value(&[x, 0.0]));
            assert_eq!(p2.value(&[x, 0.0]), psi.value(&[x, 0.0]));
            assert_eq!(h2.value(&[x, 0.0]), h.value(&[x, 0.0]));
        }
        let (h0, p0) = reflect(&Hamiltonian::neg_square(), &InitialCondition::zero(1).unwrap());
        assert_eq!(h0.to_string(), "quadratic:1,0,0");
        assert_eq!(p0.value(&[1.0, 0.0]), 0.0);
    }
}
