//! Fixed-size vectors for D ∈ {1, 2}. One-dimensional quantities keep the
//! second component at zero.

pub type Vector = [f64; 2];
pub type Matrix = [[f64; 2]; 2];

pub const ZERO: Vector = [0.0, 0.0];

#[inline]
pub fn dot(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: &Vector) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn add(a: &Vector, b: &Vector) -> Vector {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: &Vector, b: &Vector) -> Vector {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(s: f64, a: &Vector) -> Vector {
    [s * a[0], s * a[1]]
}

/// Largest absolute eigenvalue of the symmetric part of `m`.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let a = m[0][0];
    let d = m[1][1];
    let b = 0.5 * (m[0][1] + m[1][0]);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    (mean + radius).abs().max((mean - radius).abs())
}
