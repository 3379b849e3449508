//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Thresholds are restated here rather than read from the suite so the
//! library's own pass flags are checked, not trusted.

use std::process::ExitCode;
use std::time::Instant;

use hjlab_core::suite::{
    certificates, counterexample, frame_change, gradient_control, control_sharpness, oracle_equivalence, reflection,
    straight_lines, DEFAULT_N, DEFAULT_SEED,
};
use hjlab_core::Result;

struct Outcome {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn c1() -> Result<(bool, String)> {
    let r = gradient_control(DEFAULT_SEED, DEFAULT_N)?;
    let corpus_ok = r.corpus.len() == 50 && r.corpus.iter().all(|b| b.passed);
    let cos_ok = r.cosine.len() == 3 && r.cosine.iter().all(|(_, q)| (q - 0.25).abs() <= 1e-3);
    let worst = r.corpus.iter().map(|b| b.ratio).fold(0.0, f64::max);
    let ok = corpus_ok && cos_ok;
    assert_eq!(ok, r.passed, "suite flag disagrees");
    Ok((ok, format!("50-field corpus worst ratio {worst:.4}; A*cos ratios {:?}", r.cosine)))
}

fn c2_c3() -> Result<((bool, String), (bool, String))> {
    let r = straight_lines(DEFAULT_N, 64)?;
    let coarse = &r.runs[0];
    let fine = &r.runs[1];
    assert!((coarse.dt / fine.dt - 2.0).abs() < 1e-12 && fine.n == 2 * coarse.n);
    let ok2 = coarse.residual <= 5e-3
        && coarse.constancy <= 5e-2
        && coarse.residual / fine.residual >= 1.8
        && coarse.constancy / fine.constancy >= 1.8;
    let d2 = format!(
        "residual {:.3e} -> {:.3e} (x{:.2}), constancy {:.3e} -> {:.3e} (x{:.2})",
        coarse.residual,
        fine.residual,
        coarse.residual / fine.residual,
        coarse.constancy,
        fine.constancy,
        coarse.constancy / fine.constancy
    );
    let b = &r.bilipschitz;
    let ok3 = b.worst_margin >= -b.tol && b.order_preserved && b.pairs == 64 * 63 / 2;
    let d3 = format!(
        "measured c {:.4}, worst margin {:.3e} vs -tol {:.3e}, seed order kept {}",
        b.c, b.worst_margin, -b.tol, b.order_preserved
    );
    Ok(((ok2, d2), (ok3, d3)))
}

fn c4() -> Result<(bool, String)> {
    let r = oracle_equivalence(&[128, 256, 512, 1024])?;
    let ratios: Vec<f64> = r.errors.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|&q| q >= 1.3) && r.errors[2] <= 0.05;
    Ok((ok, format!("errors {:.3?}, ratios {:.3?}", r.errors, ratios)))
}

fn c5() -> Result<(bool, String)> {
    let r = certificates(DEFAULT_SEED, DEFAULT_N)?;
    let mut ok = r.cases.len() == 10;
    let mut cosine_cases = 0;
    for case in &r.cases {
        if case.hamiltonian.starts_with("cosine") {
            cosine_cases += 1;
        }
        match &case.certificate {
            Some(c) => {
                let sound = c.m.iter().all(|&m| m <= c.certified_bound);
                ok &= c.verdict && sound && (case.final_time - 0.4 * case.horizon).abs() < 1e-12;
            }
            None => ok = false,
        }
    }
    ok &= cosine_cases == 5;
    let failures: Vec<String> =
        r.cases.iter().filter(|c| !c.passed()).map(|c| format!("{} / {}: {:?}", c.psi, c.hamiltonian, c.error)).collect();
    let cprime = r.cases.iter().filter_map(|c| c.certificate.as_ref().map(|x| x.c_prime)).fold(0.0, f64::max);
    Ok((ok, format!("{} verdicts true of {}, max c' {cprime:.3}, failures {failures:?}", r.cases.len() - failures.len(), r.cases.len())))
}

fn c6() -> Result<(bool, String)> {
    let r = counterexample(&[128, 256, 512])?;
    let mut ok = true;
    for run in &r.runs {
        ok &= run.weak.initial_condition.passed()
            && run.weak.equation.passed()
            && run.weak.residual_sup <= 1e-12
            && (run.n != DEFAULT_N || run.weak.excluded_fraction <= 0.02)
            && !run.weak.semiconcavity.passed()
            && run.c_upper >= 0.9 * 2.0 / run.spacing
            && run.certificate_unavailable;
    }
    let ratios: Vec<f64> = r.runs.windows(2).map(|w| w[1].c_upper / w[0].c_upper).collect();
    ok &= ratios.iter().all(|q| (q - 2.0).abs() <= 0.1);
    let residual = r.runs.iter().map(|x| x.weak.residual_sup).fold(0.0, f64::max);
    ok &= r.runs.iter().any(|x| x.n == DEFAULT_N);
    let excluded: Vec<f64> = r.runs.iter().map(|x| x.weak.excluded_fraction).collect();
    Ok((
        ok,
        format!(
            "residual {residual:.1e}, excluded fraction per n {excluded:.4?} (bound at n=512), c_upper*h/2 {:.3?}, ratios {ratios:.3?}, certificate unavailable {}",
            r.runs.iter().map(|x| x.c_upper * x.spacing / 2.0).collect::<Vec<_>>(),
            r.runs.iter().all(|x| x.certificate_unavailable)
        ),
    ))
}

fn c7() -> Result<(bool, String)> {
    let r = control_sharpness(DEFAULT_N)?;
    let ok = r.samples > 0 && r.max_gap <= r.tol && (r.c_raw - 1.0).abs() < 1e-12;
    Ok((ok, format!("{} samples, max gap {:.3e} vs 3(h+dt) = {:.3e}", r.samples, r.max_gap, r.tol)))
}

fn c8() -> Result<(bool, String)> {
    let r = frame_change(DEFAULT_N)?;
    Ok((r.difference <= 2.0 * r.scheme_error, format!("difference {:.3e}, scheme error {:.3e}", r.difference, r.scheme_error)))
}

fn c9() -> Result<(bool, String)> {
    let r = reflection(DEFAULT_N)?;
    Ok((r.difference <= 2.0 * r.scheme_error, format!("difference {:.3e}, scheme error {:.3e}", r.difference, r.scheme_error)))
}

fn record(out: &mut Vec<Outcome>, id: u8, name: &'static str, r: Result<(bool, String)>) {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    out.push(Outcome { id, name, passed, detail });
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut out = Vec::new();
    record(&mut out, 1, "gradient-control inequality", c1());
    match c2_c3() {
        Ok((a, b)) => {
            record(&mut out, 2, "straight-line characteristics", Ok(a));
            record(&mut out, 3, "bi-Lipschitz flow", Ok(b));
        }
        Err(e) => {
            record(&mut out, 2, "straight-line characteristics", Err(e));
            out.push(Outcome { id: 3, name: "bi-Lipschitz flow", passed: false, detail: "flow run failed".into() });
        }
    }
    record(&mut out, 4, "oracle equivalence", c4());
    record(&mut out, 5, "uniqueness certificate", c5());
    record(&mut out, 6, "counterexample necessity", c6());
    record(&mut out, 7, "difference-control sharpness", c7());
    record(&mut out, 8, "frame change", c8());
    record(&mut out, 9, "reflection symmetry", c9());
    for o in &out {
        println!("criterion {}: {} [{}] {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = out.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed in {:.1}s", out.len() - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
