use crate::args::{ConstructArgs, ExampleArgs, ExampleName, Format, SystemArgs, ValidateArgs, VerifyArgs};
use crate::files::{emit, output_format, read_export, render};
use crate::Failure;
use qesforge_core::export::GridExport;
use qesforge_core::razavy::{self, RazavyParams};
use qesforge_core::validator::{self, AdmissibilityReport, CheckStatus, ValidatorOptions, VplusMode};
use qesforge_core::verify::{self, SpectrumReport, VerifyOptions};
use qesforge_core::{parse, ConstructedSystem, EnergyPair, Expression, GeneratingFunction, SusyError};
use serde::Serialize;
use std::f64::consts::TAU;

fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn parse_expr(src: &str, what: &str) -> Result<Expression, Failure> {
    parse(src).map_err(|e| Failure::usage(format!("cannot parse {what} {src:?}: {e}")))
}

fn generating_function(src: &str, eps0: f64, eps1: f64, period: f64) -> Result<GeneratingFunction, Failure> {
    let expr = parse_expr(src, "generating function")?;
    let eps = EnergyPair::new(eps0, eps1).map_err(|e| Failure::usage(e.to_string()))?;
    GeneratingFunction::new(expr, eps, period).map_err(|e| Failure::usage(e.to_string()))
}

fn system_gf(a: &SystemArgs) -> Result<GeneratingFunction, Failure> {
    generating_function(&a.u, a.eps0, a.eps1, a.period)
}

fn print_admissibility(r: &AdmissibilityReport, mode: &VplusMode) {
    println!("admissible: {}", if r.pass { "yes" } else { "no" });
    for z in &r.zeros {
        println!("zero: x = {:.12} order {} ({})", z.x, z.order, tag(&z.classification));
    }
    println!("parity defect: {:.3e}", r.parity_defect);
    println!("curvature at midpoint: {:.12} (required {:.12})", r.curvature, r.curvature_expected);
    println!("third derivative at midpoint: {:.3e}", r.third_derivative);
    println!("min discriminant: {:.6e} at x = {:.12}", r.min_discriminant, r.min_discriminant_at);
    for c in &r.checks {
        let status = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skip",
        };
        match c.location {
            Some(x) => println!("  {status} {:<22} {} (x = {x:.12})", c.name, c.detail),
            None => println!("  {status} {:<22} {}", c.name, c.detail),
        }
    }
    match mode {
        VplusMode::RangeOk => println!("V+ regularity: U stays inside (-2 eps0, 2 eps1)"),
        VplusMode::BranchSwitchRequired { c0_points, b0_points } => println!(
            "V+ regularity: branch switch required (U = -2 eps0 at {c0_points:?}, U = 2 eps1 at {b0_points:?})"
        ),
    }
}

pub fn validate(a: &ValidateArgs) -> Result<(), Failure> {
    let gf = system_gf(&a.system)?;
    let opts = ValidatorOptions::default();
    let report = validator::check_admissibility(&gf, &opts);
    let mode = validator::vplus_regularity_mode(&gf, &opts);
    if a.format == Some(Format::Json) {
        let v = serde_json::json!({ "report": report, "vplus": mode });
        println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
    } else {
        print_admissibility(&report, &mode);
    }
    if report.pass {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        Err(Failure::validation(format!("generating function is not admissible (failed: {})", names.join(", "))))
    }
}

/// Validates, then builds. Validation failures exit 1; a build failure
/// after a passing validation is an internal consistency abort (exit 2).
fn admissible_system(gf: &GeneratingFunction) -> Result<ConstructedSystem, Failure> {
    let report = validator::check_admissibility(gf, &ValidatorOptions::default());
    if !report.pass {
        for c in report.failures() {
            eprintln!("validation: {} failed: {}", c.name, c.detail);
        }
        return Err(Failure::validation("generating function is not admissible"));
    }
    ConstructedSystem::build(gf).map_err(|e| match e {
        SusyError::SeamMismatch { .. } => Failure::verification(format!("consistency abort: {e}")),
        other => Failure::verification(format!("construction failed: {other}")),
    })
}

pub fn construct(a: &ConstructArgs) -> Result<(), Failure> {
    let gf = system_gf(&a.system)?;
    let sys = admissible_system(&gf)?;
    let export = GridExport::from_system(&sys, &a.system.u, a.output.grid as usize, [1.0; 3], [1.0; 2]);
    let out = a.output.out.as_deref();
    emit(&render(&export, output_format(a.output.format, out)), out)?;
    if let Some(p) = out {
        eprintln!("wrote {} rows x {} columns to {}", export.rows(), export.columns.len(), p.display());
    }
    Ok(())
}

fn print_spectrum(r: &SpectrumReport) {
    println!("oracle: {} harmonics, energy tolerance {:.1e}", r.harmonics, r.tol);
    let edges = |s: &qesforge_core::oracle::EdgeSpectrum| {
        s.states
            .iter()
            .map(|e| format!("{:.10} [{}, {} nodes]", e.energy, tag(&e.periodicity), e.nodes))
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("V- edges: {}", edges(&r.minus));
    println!("V+ edges: {}", edges(&r.plus));
    for s in &r.states {
        let opt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |v| format!("{v:.p$}"));
        let nodes = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        println!(
            "{:<6} E = {:.10}  found {}  edge {} (gap {})  nodes {}/{}  residual {}  {}",
            s.state,
            s.expected_energy,
            opt(s.found_energy, 10),
            nodes(s.edge_index),
            nodes(s.gap()),
            nodes(s.expected_nodes),
            nodes(s.found_nodes),
            s.residual.map_or("-".to_string(), |v| format!("{v:.2e}")),
            if s.pass() { "ok".to_string() } else { format!("FAIL: {}", s.failures.join("; ")) }
        );
    }
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(Failure::usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let opts = VerifyOptions {
        harmonics: a.modes as usize,
        tol: a.tol,
        ..VerifyOptions::default()
    };
    let report = if let Some(path) = &a.input {
        let export = read_export(path)?;
        verify::verify_export(&export, &opts)
    } else {
        let (Some(u), Some(eps0), Some(eps1)) = (&a.u, a.eps0, a.eps1) else {
            return Err(Failure::usage("either --input or --u, --eps0 and --eps1 are required"));
        };
        let perturb = a.perturb.as_deref().map(|p| parse_expr(p, "perturbation")).transpose()?;
        let gf = generating_function(u, eps0, eps1, a.period.unwrap_or(TAU))?;
        let sys = admissible_system(&gf)?;
        verify::verify_system(&sys, perturb.as_ref(), &opts)
    }
    .map_err(|e| Failure::verification(e.to_string()))?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if a.format == Some(Format::Json) {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_spectrum(&report);
    }
    if report.pass() {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .states
            .iter()
            .filter(|s| !s.pass())
            .map(|s| format!("{}: {}", s.state, s.failures.join("; ")))
            .collect();
        Err(Failure::verification(format!("verification failed ({})", failed.join(" | "))))
    }
}

pub fn example(a: &ExampleArgs) -> Result<(), Failure> {
    match a.name {
        ExampleName::Razavy => {
            let p = RazavyParams::new(a.eps0).map_err(|e| Failure::usage(e.to_string()))?;
            let gf = generating_function(RazavyParams::GENERATOR, p.eps0, p.eps1, TAU)?;
            let sys = admissible_system(&gf)?;
            let export = razavy::side_by_side(&sys, &p, a.output.grid as usize);
            let out = a.output.out.as_deref();
            emit(&render(&export, output_format(a.output.format, out)), out)?;
            if let Some(path) = out {
                eprintln!("wrote {} rows x {} columns to {}", export.rows(), export.columns.len(), path.display());
            }
            Ok(())
        }
    }
}
