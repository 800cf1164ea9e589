use hqc_core::experiments::run_single;
use hqc_core::holonomy::{gate_matrix, logical_gate};
use hqc_core::propagation::{propagate_lab, UNITARITY_TOL};
use hqc_core::{control, GateKind, GateSpec, Operator, PulseTrain, Schedule, StepPolicy};
use serde::Serialize;

use crate::{parse_control, CliError, GateArgs};

/// Gate matrix as rows of `[re, im]` pairs.
fn rows(m: &Operator) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim()).map(|r| (0..m.dim()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

#[derive(Serialize)]
struct GateReport {
    kind: GateKind,
    a: f64,
    #[serde(rename = "T")]
    period: f64,
    control: PulseTrain,
    policy: StepPolicy,
    gamma_ideal: f64,
    gamma_measured: f64,
    overlap: f64,
    f: f64,
    unitarity_defect: f64,
    steps: usize,
    gate_ideal: Vec<Vec<[f64; 2]>>,
    gate_measured: Vec<Vec<[f64; 2]>>,
    /// Arguments of the measured gate diagonal.
    diagonal_phases: Vec<f64>,
}

pub fn run(args: &GateArgs) -> Result<(), CliError> {
    let kind: GateKind = args.kind.into();
    let schedule = Schedule::new(args.a, args.period)?;
    let spec = GateSpec::new(kind, schedule);
    let train = match &args.control {
        Some(c) => parse_control(c)?,
        None => PulseTrain::none(),
    };
    let mut policy = StepPolicy::default();
    if let Some(steps) = args.steps {
        if steps == 0 {
            return Err(CliError::Invalid("--steps must be positive".into()));
        }
        policy.max_step = policy.max_step.min(args.period / steps as f64);
    }

    let outcome = run_single(&spec, &train, &policy)?;
    // The propagator itself is needed for the gate matrix.
    let segments = control::generate_segments(&train, args.period)?;
    let kicks = control::kicks_for(&train, args.period)?;
    let u = propagate_lab(&spec, &segments, &kicks, &policy)?.unitary;
    let measured = logical_gate(kind, &u)?.entries;
    let ideal = gate_matrix(kind, outcome.holonomy.gamma_ideal)?.entries;

    let report = GateReport {
        kind,
        a: args.a,
        period: args.period,
        control: train,
        policy,
        gamma_ideal: outcome.holonomy.gamma_ideal,
        gamma_measured: outcome.holonomy.gamma_measured,
        overlap: outcome.holonomy.overlap_abs,
        f: outcome.holonomy.f,
        unitarity_defect: outcome.unitarity_defect,
        steps: outcome.steps,
        gate_ideal: rows(&ideal),
        gate_measured: rows(&measured),
        diagonal_phases: (0..measured.dim()).map(|i| measured[(i, i)].arg()).collect(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, &json).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    eprintln!(
        "gamma_measured={:.6} gamma_ideal={:.6} overlap={:.6} f={:.6}",
        report.gamma_measured, report.gamma_ideal, report.overlap, report.f
    );
    if report.unitarity_defect > UNITARITY_TOL {
        return Err(CliError::Tolerance(format!(
            "unitarity defect {:.3e} exceeds {UNITARITY_TOL:e}",
            report.unitarity_defect
        )));
    }
    Ok(())
}
