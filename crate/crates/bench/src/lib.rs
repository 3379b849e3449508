//! Shared fixtures for the kernel benchmarks.

use hjlab_core::solver::{plan, SchemeConfig, SchemePlan};
use hjlab_core::{Field, Grid, Hamiltonian, InitialCondition, Result};

/// `H = ½p²`, `ψ = cos` on an `n`-point grid with its scheme plan to `t`.
pub struct Fixture {
    pub hamiltonian: Hamiltonian,
    pub psi: InitialCondition,
    pub grid: Grid,
    pub initial: Field,
    pub plan: SchemePlan,
}

pub fn quadratic_cosine(n: usize, t: f64) -> Result<Fixture> {
    let hamiltonian = Hamiltonian::quadratic(0.5, 0.0, 0.0);
    let psi = InitialCondition::cosine(1.0, 1)?;
    let grid = psi.grid(n)?;
    let initial = psi.sample(&grid)?;
    let plan = plan(&hamiltonian, &initial, &SchemeConfig::new(t))?;
    Ok(Fixture { hamiltonian, psi, grid, initial, plan })
}
