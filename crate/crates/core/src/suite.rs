//! End-to-end measurement pipelines, one per acceptance property.
//!
//! Every function returns the raw measurements together with a `passed`
//! flag computed against the documented threshold, so callers can both
//! report and re-check them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characteristics::{
    check_bilipschitz, check_gradient_constancy, integrate_flow, straight_line_residual, uniform_seeds,
    BiLipschitzReport,
};
use crate::error::{Error, Result};
use crate::grid::{uniform_times, Field, Grid, SpaceTimeField};
use crate::hamiltonian::Hamiltonian;
use crate::initial::{reflect, InitialCondition};
use crate::semiconcavity::{check_gradient_bound, random_semiconcave_field, GradientBound};
use crate::solver::{
    characteristic_field, classical_horizon, plan, solve_characteristic_exact, solve_lax_friedrichs, SchemeConfig,
};
use crate::uniqueness::{
    check_weak_solution, counterexample_field, counterexample_times, difference_control, galilean_reparametrize,
    gronwall_certificate, UniquenessCertificate, WeakSolutionOptions, WeakSolutionReport,
};

pub const DEFAULT_N: usize = 512;
pub const DEFAULT_T: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 7;

fn quadratic_cos() -> (Hamiltonian, InitialCondition) {
    (Hamiltonian::quadratic(0.5, 0.0, 0.0), InitialCondition::cosine(1.0, 1).expect("valid"))
}

fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[0] / w[1]).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradientControl {
    pub corpus: Vec<GradientBound>,
    /// `(A, ratio)` for `h = A·cos`.
    pub cosine: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Gradient bound on 50 generated semi-concave fields and on `A·cos`.
pub fn gradient_control(seed: u64, n: usize) -> Result<GradientControl> {
    let grid = Grid::new_1d(std::f64::consts::TAU, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = (0..50)
        .map(|_| {
            let (f, c) = random_semiconcave_field(&grid, &mut rng)?;
            check_gradient_bound(&f, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let cosine = [0.1, 1.0, 10.0]
        .iter()
        .map(|&a| Ok((a, check_gradient_bound(&Field::sample(&grid, |x| a * x[0].cos())?, a)?.ratio)))
        .collect::<Result<Vec<_>>>()?;
    let passed = corpus.iter().all(|b| b.passed) && cosine.iter().all(|(_, r)| (r - 0.25).abs() <= 1e-3);
    Ok(GradientControl { corpus, cosine, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowRun {
    pub n: usize,
    pub dt: f64,
    pub residual: f64,
    pub constancy: f64,
    pub drift_constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StraightLines {
    pub runs: Vec<FlowRun>,
    pub residual_ratio: f64,
    pub constancy_ratio: f64,
    pub bilipschitz: BiLipschitzReport,
    pub passed: bool,
}

impl StraightLines {
    pub fn bilipschitz_passed(&self) -> bool {
        self.bilipschitz.passed && self.bilipschitz.order_preserved
    }
}

/// Oracle solution sampled on the Lax-Friedrichs lattice of the coarsest
/// grid, refined by halving both `h` and `Δt`.
fn flow_run(
    h: &Hamiltonian,
    psi: &InitialCondition,
    n: usize,
    steps: usize,
    horizon: f64,
    seeds: usize,
) -> Result<(FlowRun, crate::characteristics::CharacteristicBundle)> {
    let grid = psi.grid(n)?;
    let dt = horizon / steps as f64;
    let g = characteristic_field(h, psi, &grid, uniform_times(dt, steps))?;
    let bundle = integrate_flow(&g, h, &uniform_seeds(&grid, seeds))?;
    let run = FlowRun {
        n,
        dt,
        residual: straight_line_residual(&bundle, h, psi),
        constancy: check_gradient_constancy(&bundle, psi),
        drift_constant: bundle.drift_constant,
    };
    Ok((run, bundle))
}

/// Straight-line residual, gradient constancy and the bi-Lipschitz sandwich
/// on the quadratic/cosine run.
pub fn straight_lines(n: usize, seeds: usize) -> Result<StraightLines> {
    let (h, psi) = quadratic_cos();
    let grid = psi.grid(n)?;
    let steps = plan(&h, &psi.sample(&grid)?, &SchemeConfig::new(DEFAULT_T))?.steps;
    let (coarse, bundle) = flow_run(&h, &psi, n, steps, DEFAULT_T, seeds)?;
    let (fine, _) = flow_run(&h, &psi, 2 * n, 2 * steps, DEFAULT_T, seeds)?;
    let bilipschitz = check_bilipschitz(&bundle)?;
    let residual_ratio = coarse.residual / fine.residual;
    let constancy_ratio = coarse.constancy / fine.constancy;
    let passed = coarse.residual <= 5e-3
        && coarse.constancy <= 5e-2
        && residual_ratio >= 1.8
        && constancy_ratio >= 1.8;
    Ok(StraightLines { runs: vec![coarse, fine], residual_ratio, constancy_ratio, bilipschitz, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleEquivalence {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
    pub passed: bool,
}

/// Final-time sup distance between the scheme and the oracle.
pub fn scheme_error(h: &Hamiltonian, psi: &InitialCondition, n: usize, horizon: f64) -> Result<(SpaceTimeField, f64)> {
    let grid = psi.grid(n)?;
    let lf = solve_lax_friedrichs(h, psi, &grid, &SchemeConfig::new(horizon))?;
    let exact = solve_characteristic_exact(h, psi, &grid, lf.final_time())?;
    let err = lf.last().distance(&exact)?;
    Ok((lf, err))
}

pub fn oracle_equivalence(ns: &[usize]) -> Result<OracleEquivalence> {
    let (h, psi) = quadratic_cos();
    let errors = ns.iter().map(|&n| Ok(scheme_error(&h, &psi, n, DEFAULT_T)?.1)).collect::<Result<Vec<_>>>()?;
    let ratios = ratios(&errors);
    let at_512 = ns.iter().position(|&n| n == DEFAULT_N).map(|i| errors[i]);
    let passed = ratios.iter().all(|&r| r >= 1.3) && at_512.is_none_or(|e| e <= 0.05);
    Ok(OracleEquivalence { ns: ns.to_vec(), errors, ratios, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateCase {
    pub psi: String,
    pub hamiltonian: String,
    pub horizon: f64,
    pub final_time: f64,
    pub eps: f64,
    pub certificate: Option<UniquenessCertificate>,
    pub error: Option<String>,
}

impl CertificateCase {
    pub fn passed(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.verdict)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificates {
    pub seed: u64,
    pub cases: Vec<CertificateCase>,
    pub passed: bool,
}

/// Scheme and oracle certify each other for random trigonometric data at
/// `T = 0.4·T*`, for a convex and a nonconvex Hamiltonian.
pub fn certificates(seed: u64, n: usize) -> Result<Certificates> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hams = [Hamiltonian::quadratic(0.5, 0.0, 0.0), Hamiltonian::cosine(1.0, 1.0)];
    let mut cases = Vec::new();
    for _ in 0..5 {
        let psi = InitialCondition::random_trig(&mut rng);
        let grid = psi.grid(n)?;
        for h in &hams {
            let horizon = classical_horizon(h, &psi, &grid)?;
            let t = 0.4 * horizon;
            let lf = solve_lax_friedrichs(h, &psi, &grid, &SchemeConfig::new(t))?;
            let g = characteristic_field(h, &psi, &grid, lf.times().to_vec())?;
            let eps = lf.sub(&g)?.slices().iter().map(Field::sup_norm).fold(0.0, f64::max);
            let (certificate, error) = match gronwall_certificate(&lf, &g, h, eps) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            cases.push(CertificateCase {
                psi: psi.to_string(),
                hamiltonian: h.to_string(),
                horizon,
                final_time: t,
                eps,
                certificate,
                error,
            });
        }
    }
    let passed = cases.iter().all(CertificateCase::passed);
    Ok(Certificates { seed, cases, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleRun {
    pub n: usize,
    pub spacing: f64,
    pub weak: WeakSolutionReport,
    pub c_upper: f64,
    pub certificate_unavailable: bool,
}

impl CounterexampleRun {
    pub fn passed(&self) -> bool {
        self.weak.initial_condition.passed()
            && self.weak.equation.passed()
            && self.weak.residual_sup <= 1e-12
            && !self.weak.semiconcavity.passed()
            && self.c_upper >= 0.9 * 2.0 / self.spacing
            && self.certificate_unavailable
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub runs: Vec<CounterexampleRun>,
    pub ratios: Vec<f64>,
    pub passed: bool,
}

/// The zero-initial-data counterexample at one resolution.
pub fn counterexample_run(n: usize, horizon: f64) -> Result<(SpaceTimeField, CounterexampleRun)> {
    let grid = Grid::new_1d(std::f64::consts::TAU, n)?;
    let f = counterexample_field(&grid, counterexample_times(&grid, horizon))?;
    let h = Hamiltonian::neg_square();
    let psi = InitialCondition::zero(1)?;
    let weak = check_weak_solution(&f, &h, &psi, &WeakSolutionOptions::default())?;
    let zero = SpaceTimeField::from_fn(&grid, f.times().to_vec(), |_, _| 0.0)?;
    let certificate_unavailable = matches!(gronwall_certificate(&f, &zero, &h, 0.0), Err(Error::HypothesisUnmet(_)));
    let run = CounterexampleRun {
        n,
        spacing: grid.spacing(0),
        c_upper: weak.semiconcavity_max,
        weak,
        certificate_unavailable,
    };
    Ok((f, run))
}

pub fn counterexample(ns: &[usize]) -> Result<Counterexample> {
    let runs = ns.iter().map(|&n| Ok(counterexample_run(n, DEFAULT_T)?.1)).collect::<Result<Vec<_>>>()?;
    let c: Vec<f64> = runs.iter().map(|r| r.c_upper).collect();
    let ratios: Vec<f64> = ratios(&c).into_iter().map(|r| 1.0 / r).collect();
    // Three kink nodes per slice make the excluded fraction 3/n; its bound is
    // applied at the working resolution.
    let excluded_ok = runs.iter().find(|r| r.n == DEFAULT_N).is_some_and(|r| r.weak.excluded_fraction <= 0.02);
    let passed =
        excluded_ok && runs.iter().all(CounterexampleRun::passed) && ratios.iter().all(|r| (r - 2.0).abs() <= 0.1);
    Ok(Counterexample { runs, ratios, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlSharpness {
    pub n: usize,
    pub c_raw: f64,
    pub samples: usize,
    pub max_gap: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Both sides of the difference-control inequality on the counterexample
/// against `g = 0`, at every node seed with `|x| < t − 3h`.
pub fn control_sharpness(n: usize) -> Result<ControlSharpness> {
    let (f, _) = counterexample_run(n, DEFAULT_T)?;
    let grid = f.grid().clone();
    let g = SpaceTimeField::from_fn(&grid, f.times().to_vec(), |_, _| 0.0)?;
    let h = Hamiltonian::neg_square();
    let seeds: Vec<_> = (0..grid.node_count()).map(|i| grid.node(i)).collect();
    let bundle = integrate_flow(&g, &h, &seeds)?;
    let report = difference_control(&f, &g, &bundle, &h)?;
    let step = grid.spacing(0);
    let tol = 3.0 * (step + f.dt().unwrap_or(0.0));
    let mut max_gap = 0.0_f64;
    let mut count = 0;
    for s in &report.samples {
        let t = f.times()[s.time_index];
        let r = grid.periodic_distance(&bundle.paths[s.time_index][s.seed], &[0.0, 0.0]);
        if r < t - 3.0 * step {
            count += 1;
            max_gap = max_gap.max((s.lhs - report.c_raw * s.integral).abs());
        }
    }
    Ok(ControlSharpness { n, c_raw: report.c_raw, samples: count, max_gap, tol, passed: count > 0 && max_gap <= tol })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub difference: f64,
    pub scheme_error: f64,
    pub passed: bool,
}

/// Reparametrized solve with `Quadratic(½, 1, 3)` against a direct solve with
/// its normalization.
pub fn frame_change(n: usize) -> Result<Comparison> {
    let psi = InitialCondition::cosine(1.0, 1)?;
    let h = Hamiltonian::quadratic(0.5, 1.0, 3.0);
    let normalized = h.normalize();
    let (f, err_h) = scheme_error(&h, &psi, n, DEFAULT_T)?;
    let (w, err_n) = scheme_error(&normalized, &psi, n, DEFAULT_T)?;
    let v = galilean_reparametrize(&f, &h)?;
    let difference = v.last().distance(w.last())?;
    let scheme_error = err_h.max(err_n);
    Ok(Comparison { difference, scheme_error, passed: difference <= 2.0 * scheme_error })
}

/// Negated solve of the reflected pair against the direct solve, cosine Hamiltonian.
pub fn reflection(n: usize) -> Result<Comparison> {
    let psi = InitialCondition::cosine(1.0, 1)?;
    let h = Hamiltonian::cosine(1.0, 1.0);
    let (direct, err) = scheme_error(&h, &psi, n, DEFAULT_T)?;
    let (rh, rpsi) = reflect(&h, &psi);
    let grid = psi.grid(n)?;
    let reflected = solve_lax_friedrichs(&rh, &rpsi, &grid, &SchemeConfig::new(DEFAULT_T))?;
    reflected.ensure_same_lattice(&direct)?;
    let difference = direct.last().zip_with(reflected.last(), |a, b| a + b)?.sup_norm();
    Ok(Comparison { difference, scheme_error: err, passed: difference <= 2.0 * err })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionLine {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionLine>,
    pub gradient_control: GradientControl,
    pub straight_lines: StraightLines,
    pub oracle_equivalence: OracleEquivalence,
    pub certificates: Certificates,
    pub counterexample: Counterexample,
    pub control_sharpness: ControlSharpness,
    pub frame_change: Comparison,
    pub reflection: Comparison,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn line(id: u8, name: &str, passed: bool, summary: String) -> CriterionLine {
    CriterionLine { id, name: name.into(), passed, summary }
}

/// Runs every pipeline at the default resolution.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let gc = gradient_control(seed, DEFAULT_N)?;
    let sl = straight_lines(DEFAULT_N, 64)?;
    let oe = oracle_equivalence(&[128, 256, 512, 1024])?;
    let ce = certificates(seed, DEFAULT_N)?;
    let cx = counterexample(&[128, 256, 512])?;
    let ls = control_sharpness(DEFAULT_N)?;
    let fc = frame_change(DEFAULT_N)?;
    let rf = reflection(DEFAULT_N)?;
    let worst_ratio = gc.corpus.iter().map(|b| b.ratio).fold(0.0, f64::max);
    let criteria = vec![
        line(
            1,
            "gradient control",
            gc.passed,
            format!("corpus worst ratio {worst_ratio:.4}, cosine ratios {:?}", gc.cosine.iter().map(|c| c.1).collect::<Vec<_>>()),
        ),
        line(
            2,
            "straight characteristics",
            sl.passed,
            format!(
                "residual {:.3e} (ratio {:.2}), constancy {:.3e} (ratio {:.2})",
                sl.runs[0].residual, sl.residual_ratio, sl.runs[0].constancy, sl.constancy_ratio
            ),
        ),
        line(
            3,
            "bi-Lipschitz flow",
            sl.bilipschitz_passed(),
            format!(
                "c {:.4}, worst margin {:.3e}, tol {:.3e}, order kept {}",
                sl.bilipschitz.c, sl.bilipschitz.worst_margin, sl.bilipschitz.tol, sl.bilipschitz.order_preserved
            ),
        ),
        line(4, "oracle equivalence", oe.passed, format!("errors {:?}, ratios {:?}", oe.errors, oe.ratios)),
        line(
            5,
            "uniqueness certificate",
            ce.passed,
            format!("{}/{} verdicts true", ce.cases.iter().filter(|c| c.passed()).count(), ce.cases.len()),
        ),
        line(
            6,
            "counterexample necessity",
            cx.passed,
            format!(
                "c_upper {:?}, ratios {:?}",
                cx.runs.iter().map(|r| r.c_upper).collect::<Vec<_>>(),
                cx.ratios
            ),
        ),
        line(7, "difference-control sharpness", ls.passed, format!("max gap {:.3e}, tol {:.3e}", ls.max_gap, ls.tol)),
        line(
            8,
            "frame change",
            fc.passed,
            format!("difference {:.3e}, scheme error {:.3e}", fc.difference, fc.scheme_error),
        ),
        line(
            9,
            "reflection symmetry",
            rf.passed,
            format!("difference {:.3e}, scheme error {:.3e}", rf.difference, rf.scheme_error),
        ),
    ];
    Ok(SuiteReport {
        seed,
        criteria,
        gradient_control: gc,
        straight_lines: sl,
        oracle_equivalence: oe,
        certificates: ce,
        counterexample: cx,
        control_sharpness: ls,
        frame_change: fc,
        reflection: rf,
    })
}
