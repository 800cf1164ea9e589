//! Time-ordered propagators for `[1 + c(t)] H(t)`.
//!
//! Both frames use midpoint-sampled piecewise-constant exponentials
//! (first-order Magnus per step). Steps never straddle a control-segment
//! boundary or a kick instant; kicks are applied as the exact unitary
//! `exp(-i sign area H(tau))`.
//!
//! The adiabatic frame expands the state in the instantaneous eigenbasis
//! `(D0, D1, B+, B-)` of `H1` in the interaction picture, so its Hamiltonian
//! depends on the control only through `C(t) = int_0^t [1 + c] ds`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::control::{check_tiling, ControlSegment, KickSchedule};
use crate::error::{Error, Result};
use crate::hamiltonians::{hamiltonian, GateSpec, Schedule};
use crate::linalg::{eigh, matexp_hermitian, spectral_exp, Operator, StateVector, C64};

/// Propagators with a larger unitarity defect are treated as failed runs.
pub const UNITARITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepPolicy {
    /// Minimum number of steps per control segment (at least 20).
    pub substeps_per_segment: u32,
    /// Upper bound on a single step length.
    pub max_step: f64,
    /// Upper bound on `(1 + |c|) * step`, the dynamical phase swept per step.
    pub max_phase_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { substeps_per_segment: 20, max_step: 1e-3, max_phase_step: 0.05 }
    }
}

impl StepPolicy {
    pub const MIN_SUBSTEPS: u32 = 20;

    pub fn validate(&self) -> Result<()> {
        if self.substeps_per_segment < Self::MIN_SUBSTEPS {
            return Err(Error::InvalidParameter(format!(
                "substeps_per_segment must be >= {}, got {}",
                Self::MIN_SUBSTEPS,
                self.substeps_per_segment
            )));
        }
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::InvalidParameter(format!("max_step must be > 0, got {}", self.max_step)));
        }
        if !(self.max_phase_step.is_finite() && self.max_phase_step > 0.0) {
            return Err(Error::InvalidParameter(format!("max_phase_step must be > 0, got {}", self.max_phase_step)));
        }
        Ok(())
    }

    /// Same policy with every step bound halved.
    pub fn halved(&self) -> Self {
        Self {
            substeps_per_segment: self.substeps_per_segment * 2,
            max_step: self.max_step / 2.0,
            max_phase_step: self.max_phase_step / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Adiabatic,
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub unitary: Operator,
    pub steps_taken: usize,
    pub unitarity_defect: f64,
    pub frame: Frame,
}

/// One midpoint step.
#[derive(Clone, Copy, Debug)]
struct Step {
    t_mid: f64,
    len: f64,
    control: f64,
    c_mid: f64,
}

enum Event {
    Step(Step),
    Kick { tau: f64, sign: i8 },
}

/// Walks the step grid in time order. Returns the number of steps.
fn walk(
    segments: &[ControlSegment],
    kicks: &KickSchedule,
    policy: &StepPolicy,
    mut visit: impl FnMut(Event) -> Result<()>,
) -> Result<usize> {
    policy.validate()?;
    kicks.validate()?;
    let end = check_tiling(segments)?;
    if let Some(&last) = kicks.times.last() {
        if kicks.times[0] < 0.0 || last > end {
            return Err(Error::InvalidParameter(format!("kick times must lie within [0, {end}]")));
        }
    }

    let mut steps = 0usize;
    let mut next_kick = 0usize;
    let mut c_start = 0.0;
    for seg in segments {
        let seg_len = seg.len();
        let rate = 1.0 + seg.value;
        let mut piece_start = seg.t_start;
        loop {
            let cut = kicks.times.get(next_kick).copied().filter(|&tau| tau < seg.t_end);
            let piece_end = cut.unwrap_or(seg.t_end).max(piece_start);
            let piece_len = piece_end - piece_start;
            if piece_len > 0.0 {
                let by_segment = (policy.substeps_per_segment as f64 * piece_len / seg_len).ceil();
                let by_length = (piece_len / policy.max_step).ceil();
                let by_phase = (piece_len * (1.0 + seg.value.abs()) / policy.max_phase_step).ceil();
                let n = by_segment.max(by_length).max(by_phase).max(1.0) as usize;
                let h = piece_len / n as f64;
                for k in 0..n {
                    let t_mid = piece_start + (k as f64 + 0.5) * h;
                    let c_mid = c_start + rate * (t_mid - seg.t_start);
                    visit(Event::Step(Step { t_mid, len: h, control: seg.value, c_mid }))?;
                }
                steps += n;
            }
            match cut {
                Some(tau) => {
                    visit(Event::Kick { tau, sign: kicks.signs[next_kick] })?;
                    next_kick += 1;
                    piece_start = piece_end;
                }
                None => break,
            }
        }
        c_start += rate * seg_len;
    }
    // Kicks sitting exactly on the final boundary.
    while let Some(&tau) = kicks.times.get(next_kick) {
        visit(Event::Kick { tau, sign: kicks.signs[next_kick] })?;
        next_kick += 1;
    }
    Ok(steps)
}

/// Lab-frame propagation of an arbitrary Hamiltonian family `h(t)`.
pub fn propagate_with(
    dim: usize,
    h: impl Fn(f64) -> Result<Operator>,
    segments: &[ControlSegment],
    kicks: &KickSchedule,
    policy: &StepPolicy,
) -> Result<PropagationResult> {
    let mut u = Operator::identity(dim);
    let area = kicks.area;
    let steps = walk(segments, kicks, policy, |event| {
        let factor = match event {
            Event::Step(step) => {
                let eig = eigh(&h(step.t_mid)?)?;
                spectral_exp(&eig, (1.0 + step.control) * step.len)
            }
            Event::Kick { tau, sign } => matexp_hermitian(&h(tau)?, sign as f64 * area)?,
        };
        if factor.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: factor.dim() });
        }
        u = &factor * &u;
        Ok(())
    })?;
    finish(u, steps, Frame::Lab)
}

fn finish(unitary: Operator, steps_taken: usize, frame: Frame) -> Result<PropagationResult> {
    if !unitary.is_finite() {
        return Err(Error::NonFinite { context: "propagator" });
    }
    let unitarity_defect = unitary.unitarity_defect();
    Ok(PropagationResult { unitary, steps_taken, unitarity_defect, frame })
}

fn check_span(spec_period: f64, segments: &[ControlSegment]) -> Result<()> {
    let end = check_tiling(segments)?;
    if !segments.is_empty() && (end - spec_period).abs() > 1e-9 * spec_period.max(1.0) {
        return Err(Error::BadTiling(format!("segments end at {end}, schedule period is {spec_period}")));
    }
    Ok(())
}

/// `U(T)` for `[1 + c(t)] H(t)` plus kicks, in the lab frame.
pub fn propagate_lab(
    spec: &GateSpec,
    segments: &[ControlSegment],
    kicks: &KickSchedule,
    policy: &StepPolicy,
) -> Result<PropagationResult> {
    spec.validate()?;
    check_span(spec.schedule.period, segments)?;
    propagate_with(spec.kind.dim(), |t| hamiltonian(spec, t), segments, kicks, policy)
}

/// Instantaneous eigenbasis of `H1` used by the adiabatic frame, as columns
/// `(D0, D1, B+, B-)` with `H1 B± = ±B±` and
/// `B± = i (sin θ |1> + cos θ e^{-iφ} |3> ± |2>) / √2`.
pub fn adiabatic_basis(s: &Schedule, t: f64) -> Result<[StateVector; 4]> {
    let theta = s.theta(t)?;
    let phi = s.phi(t)?;
    let (sn, cs) = theta.sin_cos();
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let tail = C64::from_polar(cs, -phi);
    let bright = |sign: f64| {
        let amps = vec![zero, i * sn, i * sign, i * tail].into_iter().map(|z| z * FRAC_1_SQRT_2).collect();
        StateVector::new(amps)
    };
    let d1 = StateVector::new(vec![zero, C64::new(cs, 0.0), zero, C64::from_polar(sn, -phi) * -1.0]);
    Ok([StateVector::basis(4, 0), d1, bright(1.0), bright(-1.0)])
}

/// Phase-gate Hamiltonian in the adiabatic (interaction-picture) frame.
///
/// Rows and columns are `(D0, D1, B+, B-)`. With
/// `x = (θ' + (i/2) φ' sin 2θ) / √2`:
///
/// ```text
/// [ 0   0              0                      0                     ]
/// [ 0  -φ' sin²θ       x e^{-iC}              x e^{iC}              ]
/// [ 0   x* e^{iC}     -φ' cos²θ / 2          -φ' cos²θ / 2 e^{2iC}  ]
/// [ 0   x* e^{-iC}    -φ' cos²θ / 2 e^{-2iC} -φ' cos²θ / 2          ]
/// ```
pub fn build_adiabatic_h(s: &Schedule, t: f64, c_integral: f64) -> Result<Operator> {
    let theta = s.theta(t)?;
    let theta_dot = s.theta_dot(t)?;
    let phi_dot = s.phi_dot();
    let (sn, cs) = theta.sin_cos();
    let x = C64::new(theta_dot, 0.5 * phi_dot * (2.0 * theta).sin()) * FRAC_1_SQRT_2;
    let bright_diag = -0.5 * phi_dot * cs * cs;
    let e1 = C64::from_polar(1.0, c_integral);
    let e2 = C64::from_polar(1.0, 2.0 * c_integral);

    let mut h = Operator::zeros(4);
    h[(1, 1)] = C64::new(-phi_dot * sn * sn, 0.0);
    h[(2, 2)] = C64::new(bright_diag, 0.0);
    h[(3, 3)] = C64::new(bright_diag, 0.0);
    h[(1, 2)] = x * e1.conj();
    h[(1, 3)] = x * e1;
    h[(2, 1)] = h[(1, 2)].conj();
    h[(3, 1)] = h[(1, 3)].conj();
    h[(2, 3)] = e2 * bright_diag;
    h[(3, 2)] = h[(2, 3)].conj();
    Ok(h)
}

/// Phase-gate propagation in the adiabatic frame. The `(1, 1)` entry of the
/// returned unitary equals `<D1(0)|U_lab(T)|D1(0)>`.
pub fn propagate_adiabatic(
    s: &Schedule,
    segments: &[ControlSegment],
    policy: &StepPolicy,
) -> Result<PropagationResult> {
    s.validate()?;
    check_span(s.period, segments)?;
    let mut u = Operator::identity(4);
    let steps = walk(segments, &KickSchedule::empty(), policy, |event| {
        if let Event::Step(step) = event {
            let h = build_adiabatic_h(s, step.t_mid, step.c_mid)?;
            u = &matexp_hermitian(&h, step.len)? * &u;
        }
        Ok(())
    })?;
    finish(u, steps, Frame::Adiabatic)
}
