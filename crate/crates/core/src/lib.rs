//! Numerical laboratory for weak-strong uniqueness of Hamilton-Jacobi
//! equations `∂t g − H(∇g) = 0` on a periodic torus in one or two dimensions.
//!
//! The crate computes the regular solution two independent ways (a monotone
//! Lax-Friedrichs scheme and the characteristic formula), integrates and
//! inverts the characteristic flow, measures semi-concavity of sampled fields,
//! checks the a.e. weak-solution conditions and assembles Gronwall
//! certificates bounding the distance between a semi-concave weak solution and
//! the regular one.

pub mod characteristics;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod initial;
pub mod io;
pub mod semiconcavity;
pub mod solver;
pub mod suite;
pub mod uniqueness;
pub mod vector;

pub use characteristics::{
    check_bilipschitz, check_gradient_constancy, integrate_flow, inverse_flow, straight_line_residual,
    BiLipschitzReport, CharacteristicBundle,
};
pub use error::{Error, Result};
pub use grid::{Direction, Field, Grid, SpaceTimeField};
pub use hamiltonian::{CustomRules, Family, Hamiltonian, HessianBound};
pub use initial::{reflect, InitialCondition};
pub use semiconcavity::{check_gradient_bound, estimate_constants, trace_constants, SemiConcavityReport};
pub use solver::{classical_horizon, solve_characteristic_exact, solve_lax_friedrichs, SchemeConfig};
pub use uniqueness::{
    check_weak_solution, counterexample_field, difference_control, galilean_reparametrize, gronwall_certificate,
    UniquenessCertificate, Verdict, WeakSolutionReport,
};
pub use vector::Vector;

/// Library version string embedded in reports.
pub const VERSION: &str = concat!("hjlab ", env!("CARGO_PKG_VERSION"));
