//! Subcommand bodies. Each returns `Some(verdict)` when the run has one.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use hjlab_core::characteristics::{uniform_seeds, CharacteristicBundle};
use hjlab_core::grid::uniform_times;
use hjlab_core::io::{read_field_csv, write_bundle_csv, write_field_csv};
use hjlab_core::semiconcavity::{GradientBound, TraceReport};
use hjlab_core::solver::{characteristic_field, plan, solve_lax_friedrichs_from};
use hjlab_core::suite::{counterexample_run, run_suite, CounterexampleRun, SuiteReport, DEFAULT_N, DEFAULT_T};
use hjlab_core::uniqueness::WeakSolutionOptions;
use hjlab_core::{
    check_bilipschitz, check_gradient_bound, check_gradient_constancy, check_weak_solution, classical_horizon,
    gronwall_certificate, integrate_flow, straight_line_residual, trace_constants, BiLipschitzReport, Error,
    Hamiltonian, InitialCondition, SchemeConfig, SpaceTimeField, UniquenessCertificate, Verdict,
    WeakSolutionReport, VERSION,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{write_atomic, write_json, write_text, Envelope};
use crate::Method;

/// Thresholds of the straight-line and gradient-constancy checks.
pub const RESIDUAL_TOL: f64 = 5e-3;
pub const CONSTANCY_TOL: f64 = 5e-2;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files: exit 2.
    Usage(String),
    /// The computation could not complete: exit 1.
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidInput(_)
            | Error::CflViolation { .. }
            | Error::GridMismatch(_)
            | Error::ConeLeavesCell { .. }
            | Error::NotNormalized { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

type Outcome = Result<Option<bool>, Failure>;

fn read_field(path: &Path) -> Result<SpaceTimeField, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    read_field_csv(BufReader::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn hamiltonian(cfg: &RunConfig) -> Result<Hamiltonian, Failure> {
    Ok(cfg.hamiltonian.parse()?)
}

fn psi(cfg: &RunConfig) -> Result<InitialCondition, Failure> {
    Ok(InitialCondition::from_spec(&cfg.psi, cfg.seed)?)
}

fn inputs(pairs: &[(&'static str, &Path)]) -> BTreeMap<&'static str, String> {
    pairs.iter().map(|(k, p)| (*k, p.display().to_string())).collect()
}

fn emit<T: Serialize>(
    cfg: &RunConfig,
    command: &'static str,
    inputs: BTreeMap<&'static str, String>,
    verdict: Option<Verdict>,
    report: T,
) -> Result<(), Failure> {
    let envelope = Envelope { version: VERSION, command, config: cfg, inputs, verdict, report };
    let path = write_json(&cfg.out, &format!("{command}.json"), &envelope)?;
    write_text(&cfg.out, &format!("{command}.config"), &cfg.to_config_string())?;
    let verdict = verdict.map_or("none".to_string(), |v| format!("{v:?}").to_lowercase());
    println!("{command}: verdict {verdict}, report {}", path.display());
    Ok(())
}

fn write_field(cfg: &RunConfig, name: &str, field: &SpaceTimeField) -> Result<(), Failure> {
    write_atomic(&cfg.out, name, |w| write_field_csv(field, w))?;
    Ok(())
}

fn write_bundle(cfg: &RunConfig, name: &str, bundle: &CharacteristicBundle) -> Result<(), Failure> {
    write_atomic(&cfg.out, name, |w| write_bundle_csv(bundle, w))?;
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    method: Method,
    scheme: &'static str,
    dissipation: Vec<f64>,
    dt: f64,
    steps: usize,
    /// Classical horizon of the data (1D only).
    horizon_estimate: Option<f64>,
    sup_norm_final: f64,
}

pub fn solve(cfg: &RunConfig, method: Method) -> Outcome {
    let h = hamiltonian(cfg)?;
    let psi = psi(cfg)?;
    let grid = psi.grid(cfg.n)?;
    let psi0 = psi.sample(&grid)?;
    let plan = plan(&h, &psi0, &SchemeConfig::new(cfg.t).with_cfl(cfg.cfl))?;
    let horizon_estimate = if grid.dim() == 1 { Some(classical_horizon(&h, &psi, &grid)?) } else { None };
    let (field, scheme) = match method {
        Method::Lf => (solve_lax_friedrichs_from(&h, psi0, &plan)?, "lax-friedrichs"),
        Method::Characteristic => {
            (characteristic_field(&h, &psi, &grid, uniform_times(plan.dt, plan.steps))?, "characteristic")
        }
    };
    write_field(cfg, "solution.csv", &field)?;
    let report = SolveReport {
        method,
        scheme,
        dissipation: plan.dissipation[..grid.dim()].to_vec(),
        dt: plan.dt,
        steps: plan.steps,
        horizon_estimate,
        sup_norm_final: field.last().sup_norm(),
    };
    emit(cfg, "solve", BTreeMap::new(), None, report)?;
    Ok(None)
}

#[derive(Serialize)]
struct CharacteristicsReport {
    straight_line_residual: f64,
    residual_tol: f64,
    gradient_constancy: f64,
    constancy_tol: f64,
    drift_constant: f64,
    bilipschitz: BiLipschitzReport,
}

pub fn characteristics(cfg: &RunConfig, solution: &Path) -> Outcome {
    let g = read_field(solution)?;
    let h = hamiltonian(cfg)?;
    let psi = psi(cfg)?;
    psi.check_grid(g.grid())?;
    let bundle = integrate_flow(&g, &h, &uniform_seeds(g.grid(), cfg.seeds))?;
    let bilipschitz = check_bilipschitz(&bundle)?;
    let report = CharacteristicsReport {
        straight_line_residual: straight_line_residual(&bundle, &h, &psi),
        residual_tol: RESIDUAL_TOL,
        gradient_constancy: check_gradient_constancy(&bundle, &psi),
        constancy_tol: CONSTANCY_TOL,
        drift_constant: bundle.drift_constant,
        bilipschitz,
    };
    let ok = report.straight_line_residual <= RESIDUAL_TOL
        && report.gradient_constancy <= CONSTANCY_TOL
        && report.bilipschitz.passed
        && report.bilipschitz.order_preserved;
    write_bundle(cfg, "bundle.csv", &bundle)?;
    emit(cfg, "characteristics", inputs(&[("solution", solution)]), Some(Verdict::from_bool(ok)), report)?;
    Ok(Some(ok))
}

#[derive(Serialize)]
struct SliceBound {
    t: f64,
    bound: Option<GradientBound>,
    hypothesis_unmet: Option<String>,
}

#[derive(Serialize)]
struct SemiconcavityReport {
    trace: TraceReport,
    gradient_bound: Option<Vec<SliceBound>>,
}

pub fn semiconcavity(cfg: &RunConfig, input: &Path, c: Option<f64>) -> Outcome {
    let field = read_field(input)?;
    let trace = trace_constants(&field);
    let gradient_bound = c
        .map(|c| {
            field
                .times()
                .iter()
                .zip(field.slices())
                .map(|(&t, slice)| match check_gradient_bound(slice, c) {
                    Ok(b) => Ok(SliceBound { t, bound: Some(b), hypothesis_unmet: None }),
                    Err(Error::HypothesisUnmet(msg)) => Ok(SliceBound { t, bound: None, hypothesis_unmet: Some(msg) }),
                    Err(e) => Err(Failure::from(e)),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let ok = gradient_bound
        .as_ref()
        .map(|bs| bs.iter().all(|b| b.bound.as_ref().is_some_and(|g| g.passed)));
    let report = SemiconcavityReport { trace, gradient_bound };
    emit(cfg, "semiconcavity", inputs(&[("input", input)]), ok.map(Verdict::from_bool), report)?;
    Ok(ok)
}

pub fn check_weak(cfg: &RunConfig, f: &Path) -> Outcome {
    let field = read_field(f)?;
    let report: WeakSolutionReport =
        check_weak_solution(&field, &hamiltonian(cfg)?, &psi(cfg)?, &WeakSolutionOptions::default())?;
    let ok = report.all_passed();
    emit(cfg, "check-weak", inputs(&[("f", f)]), Some(Verdict::from_bool(ok)), report)?;
    Ok(Some(ok))
}

#[derive(Serialize)]
struct CertifyReport {
    certificate: Option<UniquenessCertificate>,
    hypothesis_unmet: Option<String>,
}

pub fn certify(cfg: &RunConfig, f: &Path, g: &Path) -> Outcome {
    let eps = cfg.eps.ok_or_else(|| Failure::Usage("certify needs --eps or an eps entry in the config".into()))?;
    let (ff, gg) = (read_field(f)?, read_field(g)?);
    let report = match gronwall_certificate(&ff, &gg, &hamiltonian(cfg)?, eps) {
        Ok(c) => CertifyReport { certificate: Some(c), hypothesis_unmet: None },
        Err(Error::HypothesisUnmet(msg)) => CertifyReport { certificate: None, hypothesis_unmet: Some(msg) },
        Err(e) => return Err(e.into()),
    };
    let ok = report.certificate.as_ref().is_some_and(|c| c.verdict);
    emit(cfg, "certify", inputs(&[("f", f), ("g", g)]), Some(Verdict::from_bool(ok)), report)?;
    Ok(Some(ok))
}

#[derive(Serialize)]
struct CounterexampleReport {
    run: CounterexampleRun,
    /// Conditions (1) and (2) hold, (3) fails and no certificate exists: the
    /// field is a weak solution that differs from the viscosity solution 0.
    reproduces_counterexample: bool,
}

pub fn counterexample(cfg: &RunConfig) -> Outcome {
    let (field, run) = counterexample_run(cfg.n, cfg.t)?;
    let ok = run.weak.all_passed();
    let report = CounterexampleReport { reproduces_counterexample: run.passed(), run };
    write_field(cfg, "counterexample.csv", &field)?;
    emit(cfg, "counterexample", BTreeMap::new(), Some(Verdict::from_bool(ok)), report)?;
    Ok(Some(ok))
}

fn criteria_text(report: &SuiteReport) -> String {
    let mut text: String = report
        .criteria
        .iter()
        .map(|c| format!("criterion {}: {} [{}] {}\n", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name, c.summary))
        .collect();
    text.push_str(&format!("summary: {}/{} passed\n", report.criteria.iter().filter(|c| c.passed).count(), report.criteria.len()));
    text
}

pub fn suite(cfg: &RunConfig) -> Outcome {
    let report = run_suite(cfg.seed)?;
    let h = Hamiltonian::quadratic(0.5, 0.0, 0.0);
    let psi = InitialCondition::cosine(1.0, 1)?;
    let grid = psi.grid(DEFAULT_N)?;
    let lf_plan = plan(&h, &psi.sample(&grid)?, &SchemeConfig::new(DEFAULT_T))?;
    let lf = solve_lax_friedrichs_from(&h, psi.sample(&grid)?, &lf_plan)?;
    let oracle = characteristic_field(&h, &psi, &grid, lf.times().to_vec())?;
    let bundle = integrate_flow(&oracle, &h, &uniform_seeds(&grid, 64))?;
    let (cx, _) = counterexample_run(DEFAULT_N, DEFAULT_T)?;
    write_field(cfg, "quadratic_cos_lf.csv", &lf)?;
    write_field(cfg, "quadratic_cos_oracle.csv", &oracle)?;
    write_bundle(cfg, "quadratic_cos_bundle.csv", &bundle)?;
    write_field(cfg, "counterexample.csv", &cx)?;
    let text = criteria_text(&report);
    write_text(&cfg.out, "criteria.txt", &text)?;
    print!("{text}");
    let ok = report.passed();
    emit(cfg, "suite", BTreeMap::new(), Some(Verdict::from_bool(ok)), report)?;
    Ok(Some(ok))
}
