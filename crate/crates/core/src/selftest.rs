//! Built-in invariant checks, runnable from the command line.
//!
//! The phase-gate Hamiltonian builder is injectable so that a deliberately
//! broken model can be shown to fail.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{generate_segments, make_kicks, PulseKind, PulseTrain};
use crate::error::Result;
use crate::hamiltonians::{
    build_physical, dark_states_at, h1_at, h2_at, h3_at, project_dfs, total_z, Couplings, DfsBasis, GateKind, GateSpec,
    Schedule,
};
use crate::holonomy::{berry_closed_form, berry_numeric, bessel_j0};
use crate::linalg::{inner, matexp_hermitian, spectral_gap, Operator, C64};
use crate::propagation::{propagate_adiabatic, propagate_with, StepPolicy, UNITARITY_TOL};

/// `H1` as a function of `(theta, phi)`.
pub type H1Builder = fn(f64, f64) -> Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Flips the sign of the `cos theta` couplings of `H1`.
    H1Sign,
}

fn h1_sign_flipped(theta: f64, phi: f64) -> Operator {
    let mut h = h1_at(theta, phi);
    for (r, c) in [(2, 3), (3, 2)] {
        h[(r, c)] = -h[(r, c)];
    }
    h
}

impl Fault {
    pub fn h1_builder(self) -> H1Builder {
        match self {
            Fault::None => h1_at,
            Fault::H1Sign => h1_sign_flipped,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn record(&mut self, group: &'static str, name: impl Into<String>, value: f64, tolerance: f64) {
        let passed = value.is_finite() && value <= tolerance;
        self.checks.push(Check { group, name: name.into(), value, tolerance, passed });
    }

    fn record_err(&mut self, group: &'static str, name: impl Into<String>, err: crate::Error) {
        self.checks.push(Check {
            group,
            name: format!("{}: {err}", name.into()),
            value: f64::NAN,
            tolerance: 0.0,
            passed: false,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Distinct group names in execution order.
    pub fn groups(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for c in &self.checks {
            if !out.contains(&c.group) {
                out.push(c.group);
            }
        }
        out
    }

    pub fn group_passed(&self, group: &str) -> bool {
        self.checks.iter().filter(|c| c.group == group).all(|c| c.passed)
    }
}

const SAMPLES: usize = 100;

/// `SAMPLES` seeded uniform times in `[0, T]`.
fn sample_times(s: &Schedule) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..SAMPLES).map(|_| rng.random_range(0.0..=s.period)).collect()
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let a = Operator::from_fn(dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + &a.dagger()).scale_re(0.5)
}

fn unitarity(report: &mut Report, h1: H1Builder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let h = random_hermitian(&mut rng, 4);
        let tau = rng.random_range(-3.0..3.0);
        worst = worst.max(matexp_hermitian(&h, tau)?.unitarity_defect());
    }
    report.record("unitarity", "matrix exponential of 200 random 4x4 Hermitians", worst, 1e-12);

    let s = Schedule::new(0.7605, 10.0)?;
    let segs = generate_segments(&PulseTrain::none(), s.period)?;
    let u = propagate_with(4, |t| Ok(h1(s.theta(t)?, s.phi(t)?)), &segs, &Default::default(), &StepPolicy::default())?;
    report.record("unitarity", "phase-gate propagator at T = 10", u.unitarity_defect, UNITARITY_TOL);
    Ok(())
}

fn dark_states(report: &mut Report, h1: H1Builder) -> Result<()> {
    let s = Schedule::new(0.9, 1.0)?;
    let builders: [(GateKind, H1Builder); 3] =
        [(GateKind::Phase, h1), (GateKind::Xgate, h2_at), (GateKind::Cphase, h3_at)];
    for (kind, build) in builders {
        let mut worst: f64 = 0.0;
        for t in sample_times(&s) {
            let (theta, phi) = (s.theta(t)?, s.phi(t)?);
            let h = build(theta, phi);
            for d in dark_states_at(kind, theta, phi)? {
                worst = worst.max(h.apply(&d).max_abs());
            }
        }
        report.record("dark-states", format!("{kind:?} Hamiltonian annihilates its dark states"), worst, 1e-12);
    }
    Ok(())
}

fn spectrum(report: &mut Report, h1: H1Builder) -> Result<()> {
    let s = Schedule::new(1.1, 1.0)?;
    let builders: [(&str, H1Builder); 3] = [("Phase", h1), ("Xgate", h2_at), ("Cphase", h3_at)];
    for (name, build) in builders {
        let reference =
            if build(0.0, 0.0).dim() == 4 { vec![-1.0, 0.0, 0.0, 1.0] } else { spectral_gap(&build(0.0, 0.0))? };
        let mut worst: f64 = 0.0;
        for t in sample_times(&s) {
            let values = spectral_gap(&build(s.theta(t)?, s.phi(t)?))?;
            for (v, r) in values.iter().zip(&reference) {
                worst = worst.max((v - r).abs());
            }
        }
        report.record("spectrum", format!("{name} spectrum is time independent"), worst, 1e-10);
    }
    Ok(())
}

fn bessel(report: &mut Report) -> Result<()> {
    let reference = [(1.0, 0.7651976865579666), (5.0, -0.1775967713143383), (10.0, -0.2459357644513483)];
    let worst = reference.iter().map(|(x, v)| Ok((bessel_j0(*x)? - v).abs())).collect::<Result<Vec<f64>>>()?;
    report.record("bessel", "J0 at reference points", worst.into_iter().fold(0.0, f64::max), 1e-12);
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.5, 0.7605, 1.2, 1.9] {
        let s = Schedule::new(a, 1.0)?;
        worst = worst.max((berry_numeric(&s, 4000)? - berry_closed_form(a)?).abs());
    }
    report.record("bessel", "loop integral matches pi (1 - J0(2a))", worst, 1e-10);
    Ok(())
}

fn dfs(report: &mut Report, h1: H1Builder) -> Result<()> {
    let z = total_z();
    let basis = DfsBasis::default();
    let (mut commutator, mut leakage, mut block): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for j12 in [0.3, 1.0, 2.7] {
        for j13 in [0.3, 1.0, 2.7] {
            let spec = GateSpec {
                couplings: Couplings { j12, j13 },
                ..GateSpec::new(GateKind::PhysicalFour, Schedule::new(0.5, 1.0)?)
            };
            let scale = f64::hypot(j12, j13);
            let theta = (j13 / j12).atan();
            for i in 0..20 {
                let phi = 2.0 * PI * i as f64 / 20.0;
                let h = build_physical(&spec, phi);
                commutator = commutator.max(h.commutator(&z).max_abs());
                let projection = project_dfs(&h, &basis)?;
                leakage = leakage.max(projection.leakage);
                block = block.max(projection.block.max_abs_diff(&h1(theta, phi).scale_re(scale)));
            }
        }
    }
    report.record("dfs", "four-qubit Hamiltonian commutes with total Z", commutator, 1e-13);
    report.record("dfs", "four-qubit Hamiltonian keeps the DFS invariant", leakage, 1e-13);
    report.record("dfs", "DFS block equals the scaled phase-gate Hamiltonian", block, 1e-11);
    report.record("dfs", "DFS states share one Z eigenvalue", if basis.is_consistent() { 0.0 } else { 1.0 }, 0.0);
    Ok(())
}

fn frames(report: &mut Report, h1: H1Builder) -> Result<()> {
    let policy = StepPolicy::default();
    let cases = [
        ("no control, T = 10", 10.0, PulseTrain::none()),
        ("positive square J = 200, T = 1", 1.0, PulseTrain::new(PulseKind::PositiveSquare, 200.0, 0.005, 0.0, 0)),
    ];
    for (label, period, train) in cases {
        let s = Schedule::new(0.7605, period)?;
        let segs = generate_segments(&train, period)?;
        let lab = propagate_with(4, |t| Ok(h1(s.theta(t)?, s.phi(t)?)), &segs, &Default::default(), &policy)?;
        let ad = propagate_adiabatic(&s, &segs, &policy)?;
        let d1 = &dark_states_at(GateKind::Phase, 0.0, 0.0)?[1];
        let lab_amp = inner(d1, &lab.unitary.apply(d1))?;
        let diff = (lab_amp.norm() - ad.unitary[(1, 1)].norm()).abs();
        report.record("frames", format!("lab and adiabatic |<D1|U|D1>| agree ({label})"), diff, 1e-4);
    }
    Ok(())
}

fn kicks(report: &mut Report, h1: H1Builder) -> Result<()> {
    let s = Schedule::new(0.7605, 1.0)?;
    let segs = generate_segments(&PulseTrain::none(), s.period)?;
    let positive = make_kicks(PulseKind::DeltaKickPositive, s.period, 0.05, 0.5, 3)?;
    let h = |t: f64| Ok(h1(s.theta(t)?, s.phi(t)?));
    let up = propagate_with(4, h, &segs, &positive, &StepPolicy::default())?;
    let ua = propagate_with(4, h, &segs, &positive.alternating(), &StepPolicy::default())?;
    report.record(
        "kicks",
        "positive and alternating pi-kicks give the same gate",
        up.unitary.max_abs_diff(&ua.unitary),
        1e-10,
    );
    Ok(())
}

type Group = Box<dyn Fn(&mut Report) -> Result<()>>;

/// Runs every invariant group; errors inside a group are recorded as failures.
pub fn run(fault: Fault) -> Report {
    let h1 = fault.h1_builder();
    let mut report = Report::default();
    let groups: [(&'static str, Group); 7] = [
        ("unitarity", Box::new(move |r| unitarity(r, h1))),
        ("dark-states", Box::new(move |r| dark_states(r, h1))),
        ("spectrum", Box::new(move |r| spectrum(r, h1))),
        ("bessel", Box::new(bessel)),
        ("dfs", Box::new(move |r| dfs(r, h1))),
        ("frames", Box::new(move |r| frames(r, h1))),
        ("kicks", Box::new(move |r| kicks(r, h1))),
    ];
    for (name, group) in groups {
        if let Err(e) = group(&mut report) {
            report.record_err(name, "group aborted", e);
        }
    }
    report
}
