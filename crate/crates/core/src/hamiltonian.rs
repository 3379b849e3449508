//! The nonlinearity `H` of `∂t g − H(∇g) = 0`.
//!
//! A [`Hamiltonian`] bundles the value, gradient and Hessian rules of a C²
//! function `H : R^D → R` for `D ∈ {1, 2}`. Builtin families have closed
//! forms; user rules go through [`Family::Custom`]. Every Hamiltonian carries
//! an affine correction and an optional mirror so that [`Hamiltonian::normalize`]
//! and [`Hamiltonian::reflect`] stay exact at the level of evaluation rules:
//!
//! ```text
//! H(p) = s · B(s p) + offset + slope · p,     s = ±1
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::{dot, norm, spectral_norm, Matrix, Vector, ZERO};

pub type ValueRule = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientRule = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type HessianRule = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// Multiplicative safety margin applied to scanned derivative bounds.
pub const SCAN_INFLATION: f64 = 1.1;

/// Half-width, in samples, of the 1D derivative scan (10⁴ + 1 points).
const SCAN_HALF_1D: i64 = 5_000;
/// Half-width, in samples per axis, of the 2D derivative scan (301 × 301 points).
const SCAN_HALF_2D: i64 = 150;

/// User supplied evaluation rules. Gradient and Hessian are required; they
/// are never obtained by numerical differentiation.
#[derive(Clone)]
pub struct CustomRules {
    pub name: String,
    pub value: ValueRule,
    pub gradient: GradientRule,
    pub hessian: HessianRule,
}

impl fmt::Debug for CustomRules {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomRules").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    /// `a|p|² + b·p + c0`
    Quadratic { a: f64, b: Vector, c0: f64 },
    /// `−|p|²`
    NegSquare,
    /// `A cos(k p₁)`, nonconvex.
    Cosine { amplitude: f64, frequency: f64 },
    Custom(CustomRules),
}

/// Sup of `|∇²H|_op` over a ball, with and without the safety inflation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianBound {
    pub raw: f64,
    pub inflated: f64,
}

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    family: Family,
    dim: usize,
    mirrored: bool,
    offset: f64,
    slope: Vector,
}

impl Hamiltonian {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension must be 1 or 2, got {dim}")));
        }
        if let Family::Quadratic { b, .. } = &family {
            if dim == 1 && b[1] != 0.0 {
                return Err(Error::InvalidInput("1D quadratic has a two-component b".into()));
            }
        }
        Ok(Self { family, dim, mirrored: false, offset: 0.0, slope: ZERO })
    }

    /// One-dimensional `a p² + b p + c0`.
    pub fn quadratic(a: f64, b: f64, c0: f64) -> Self {
        Self::unchecked(Family::Quadratic { a, b: [b, 0.0], c0 }, 1)
    }

    /// One-dimensional `−p²`.
    pub fn neg_square() -> Self {
        Self::unchecked(Family::NegSquare, 1)
    }

    /// One-dimensional `A cos(k p)`.
    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        Self::unchecked(Family::Cosine { amplitude, frequency }, 1)
    }

    pub fn custom(rules: CustomRules, dim: usize) -> Result<Self> {
        Self::new(Family::Custom(rules), dim)
    }

    fn unchecked(family: Family, dim: usize) -> Self {
        Self { family, dim, mirrored: false, offset: 0.0, slope: ZERO }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Affine correction `(offset, slope)` on top of the family, if any.
    pub fn affine_part(&self) -> (f64, Vector) {
        (self.offset, self.slope)
    }

    fn sign(&self) -> f64 {
        if self.mirrored {
            -1.0
        } else {
            1.0
        }
    }

    fn base_arg(&self, p: &Vector) -> Vector {
        let s = self.sign();
        [s * p[0], s * p[1]]
    }

    pub fn value(&self, p: &Vector) -> f64 {
        let q = self.base_arg(p);
        let base = match &self.family {
            Family::Quadratic { a, b, c0 } => a * dot(&q, &q) + dot(b, &q) + c0,
            Family::NegSquare => -dot(&q, &q),
            Family::Cosine { amplitude, frequency } => amplitude * (frequency * q[0]).cos(),
            Family::Custom(r) => (r.value)(&q),
        };
        self.sign() * base + self.offset + dot(&self.slope, p)
    }

    pub fn gradient(&self, p: &Vector) -> Vector {
        let q = self.base_arg(p);
        let mut g = match &self.family {
            Family::Quadratic { a, b, .. } => [2.0 * a * q[0] + b[0], 2.0 * a * q[1] + b[1]],
            Family::NegSquare => [-2.0 * q[0], -2.0 * q[1]],
            Family::Cosine { amplitude, frequency } => {
                [-amplitude * frequency * (frequency * q[0]).sin(), 0.0]
            }
            Family::Custom(r) => (r.gradient)(&q),
        };
        g[0] += self.slope[0];
        g[1] += self.slope[1];
        if self.dim == 1 {
            g[1] = 0.0;
        }
        g
    }

    pub fn hessian(&self, p: &Vector) -> Matrix {
        let q = self.base_arg(p);
        let m = match &self.family {
            Family::Quadratic { a, .. } => [[2.0 * a, 0.0], [0.0, 2.0 * a]],
            Family::NegSquare => [[-2.0, 0.0], [0.0, -2.0]],
            Family::Cosine { amplitude, frequency } => {
                let k2 = frequency * frequency;
                [[-amplitude * k2 * (frequency * q[0]).cos(), 0.0], [0.0, 0.0]]
            }
            Family::Custom(r) => (r.hessian)(&q),
        };
        let s = self.sign();
        let mut out = [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]];
        if self.dim == 1 {
            out[0][1] = 0.0;
            out[1][0] = 0.0;
            out[1][1] = 0.0;
        }
        out
    }

    /// Operator norm of the Hessian (largest absolute eigenvalue).
    pub fn hessian_opnorm(&self, p: &Vector) -> f64 {
        spectral_norm(&self.hessian(p))
    }

    /// Sup of `|∇²H(r)|_op` over `|r| ≤ radius` by a dense scan of the ball.
    pub fn hess_opnorm_sup(&self, radius: f64) -> HessianBound {
        let mut sup = 0.0_f64;
        scan(self.dim, radius.abs(), true, |p| sup = sup.max(self.hessian_opnorm(p)));
        HessianBound { raw: sup, inflated: SCAN_INFLATION * sup }
    }

    /// Sup of `|∂_{p_d} H|` over the box `|p|∞ ≤ radius`, per axis, uninflated.
    pub fn partial_sup(&self, radius: f64) -> Vector {
        let mut sup = ZERO;
        scan(self.dim, radius.abs(), false, |p| {
            let g = self.gradient(p);
            sup[0] = sup[0].max(g[0].abs());
            sup[1] = sup[1].max(g[1].abs());
        });
        sup
    }

    /// Constant `c(ℓ)` with `|H(p)| ≤ c(ℓ)|p|²` for `|p| ≤ ℓ`; requires a
    /// normalized `H` (`H(0) = 0`, `∇H(0) = 0`).
    pub fn quadratic_remainder_constant(&self, ell: f64) -> Result<f64> {
        const TOL: f64 = 1e-10;
        let value = self.value(&ZERO);
        let slope = norm(&self.gradient(&ZERO));
        if value.abs() > TOL || slope > TOL {
            return Err(Error::NotNormalized { value, slope });
        }
        Ok(0.5 * self.hess_opnorm_sup(ell).inflated)
    }

    /// `H̃(p) = H(p) − H(0) − ∇H(0)·p`.
    pub fn normalize(&self) -> Self {
        let h0 = self.value(&ZERO);
        let g0 = self.gradient(&ZERO);
        let mut out = self.clone();
        out.offset -= h0;
        out.slope = [out.slope[0] - g0[0], out.slope[1] - g0[1]];
        out.simplify()
    }

    /// `p ↦ −H(−p)`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.mirrored = !out.mirrored;
        out.offset = -out.offset;
        out.simplify()
    }

    /// Folds mirror and affine parts into closed forms where the family allows it.
    fn simplify(mut self) -> Self {
        if self.mirrored {
            match &mut self.family {
                Family::Quadratic { a, c0, .. } => {
                    *a = -*a;
                    *c0 = -*c0;
                    self.mirrored = false;
                }
                Family::NegSquare => {
                    self.family = Family::Quadratic { a: 1.0, b: ZERO, c0: 0.0 };
                    self.mirrored = false;
                }
                Family::Cosine { amplitude, .. } => {
                    *amplitude = -*amplitude;
                    self.mirrored = false;
                }
                Family::Custom(_) => {}
            }
        }
        let affine = self.offset != 0.0 || self.slope != ZERO;
        if affine {
            match &mut self.family {
                Family::Quadratic { b, c0, .. } => {
                    *c0 += self.offset;
                    b[0] += self.slope[0];
                    b[1] += self.slope[1];
                    self.offset = 0.0;
                    self.slope = ZERO;
                }
                Family::NegSquare => {
                    self.family = Family::Quadratic { a: -1.0, b: self.slope, c0: self.offset };
                    self.offset = 0.0;
                    self.slope = ZERO;
                }
                _ => {}
            }
        }
        // Drop signed zeros so printing is stable.
        if self.offset == 0.0 {
            self.offset = 0.0;
        }
        if let Family::Quadratic { b, c0, .. } = &mut self.family {
            for v in b.iter_mut().chain(std::iter::once(c0)) {
                if *v == 0.0 {
                    *v = 0.0;
                }
            }
        }
        self.slope = self.slope.map(|v| if v == 0.0 { 0.0 } else { v });
        self
    }
}

/// Visits a symmetric lattice on the ball (`masked`) or box of the given radius.
/// The lattice always contains the origin.
fn scan(dim: usize, radius: f64, masked: bool, mut visit: impl FnMut(&Vector)) {
    if dim == 1 {
        for i in -SCAN_HALF_1D..=SCAN_HALF_1D {
            visit(&[radius * i as f64 / SCAN_HALF_1D as f64, 0.0]);
        }
        return;
    }
    let limit = radius * (1.0 + 1e-12);
    for i in -SCAN_HALF_2D..=SCAN_HALF_2D {
        for j in -SCAN_HALF_2D..=SCAN_HALF_2D {
            let p = [
                radius * i as f64 / SCAN_HALF_2D as f64,
                radius * j as f64 / SCAN_HALF_2D as f64,
            ];
            if !masked || norm(&p) <= limit {
                visit(&p);
            }
        }
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Quadratic { a, b, c0 } => {
                if self.dim == 1 {
                    write!(f, "quadratic:{a},{},{c0}", b[0])?
                } else {
                    write!(f, "quadratic:{a},{},{},{c0}", b[0], b[1])?
                }
            }
            Family::NegSquare => {
                if self.dim == 1 {
                    write!(f, "negsquare")?
                } else {
                    write!(f, "negsquare:{}", self.dim)?
                }
            }
            Family::Cosine { amplitude, frequency } => {
                if self.dim == 1 {
                    write!(f, "cosine:{amplitude},{frequency}")?
                } else {
                    write!(f, "cosine:{amplitude},{frequency},{}", self.dim)?
                }
            }
            Family::Custom(r) => write!(f, "custom:{}", r.name)?,
        }
        if self.mirrored {
            write!(f, ";mirror")?;
        }
        if self.offset != 0.0 {
            write!(f, ";offset={}", self.offset)?;
        }
        if self.slope != ZERO {
            if self.dim == 1 {
                write!(f, ";slope={}", self.slope[0])?;
            } else {
                write!(f, ";slope={},{}", self.slope[0], self.slope[1])?;
            }
        }
        Ok(())
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a number: {t:?}")))
        })
        .collect()
}

fn parse_dim(v: f64) -> Result<usize> {
    if v == 1.0 || v == 2.0 {
        Ok(v as usize)
    } else {
        Err(Error::Parse(format!("dimension must be 1 or 2, got {v}")))
    }
}

impl FromStr for Hamiltonian {
    type Err = Error;

    /// Parses `family[:params][;mirror][;offset=v][;slope=v[,v]]`, e.g.
    /// `quadratic:0.5,0,0`, `negsquare`, `cosine:1,1`, `quadratic:0.5,0,0,0` (2D).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(';');
        let head = parts.next().unwrap_or_default();
        let (name, params) = match head.split_once(':') {
            Some((n, p)) => (n.trim(), parse_numbers(p)?),
            None => (head.trim(), Vec::new()),
        };
        let mut h = match (name, params.as_slice()) {
            ("quadratic", [a, b, c0]) => Self::quadratic(*a, *b, *c0),
            ("quadratic", [a, b1, b2, c0]) => {
                Self::new(Family::Quadratic { a: *a, b: [*b1, *b2], c0: *c0 }, 2)?
            }
            ("negsquare", []) => Self::neg_square(),
            ("negsquare", [d]) => Self::new(Family::NegSquare, parse_dim(*d)?)?,
            ("cosine", [a, k]) => Self::cosine(*a, *k),
            ("cosine", [a, k, d]) => {
                Self::new(Family::Cosine { amplitude: *a, frequency: *k }, parse_dim(*d)?)?
            }
            ("quadratic" | "negsquare" | "cosine", p) => {
                return Err(Error::Parse(format!("wrong parameter count {} for {name}", p.len())))
            }
            _ => return Err(Error::Parse(format!("unknown hamiltonian family {name:?}"))),
        };
        for modifier in parts {
            let modifier = modifier.trim();
            if modifier == "mirror" {
                h.mirrored = !h.mirrored;
            } else if let Some(v) = modifier.strip_prefix("offset=") {
                h.offset = v.trim().parse().map_err(|_| Error::Parse(format!("bad offset {v:?}")))?;
            } else if let Some(v) = modifier.strip_prefix("slope=") {
                let nums = parse_numbers(v)?;
                if nums.len() != h.dim {
                    return Err(Error::Parse(format!("slope needs {} components", h.dim)));
                }
                h.slope = [nums[0], nums.get(1).copied().unwrap_or(0.0)];
            } else {
                return Err(Error::Parse(format!("unknown modifier {modifier:?}")));
            }
        }
        Ok(h.simplify())
    }
}
