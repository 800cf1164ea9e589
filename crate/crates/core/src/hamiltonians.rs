//! Time-dependent Hamiltonians of the holonomic gate protocols.
//!
//! Logical Hamiltonians live in the four-dimensional decoherence-free
//! subspace spanned by `(|0>, |1>, |2>, |3>)` (C-Phase: the row-major
//! `4 (x) 4` product of two such spaces). The physical four-qubit model uses
//! the convention that qubit 1 is the most significant bit of the
//! 16-dimensional index, so `|0001>` is index 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor_product, Operator, StateVector, C64};

const TWO_PI: f64 = 2.0 * PI;

/// Loop parametrization `theta(t) = a sin(2 pi t / T)`, `phi(t) = 2 pi t / T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub a: f64,
    #[serde(rename = "T")]
    pub period: f64,
}

impl Schedule {
    pub fn new(a: f64, period: f64) -> Result<Self> {
        let s = Self { a, period };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidParameter(format!("period T must be > 0, got {}", self.period)));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidParameter(format!("amplitude a must be >= 0, got {}", self.a)));
        }
        Ok(())
    }

    pub fn with_period(&self, period: f64) -> Self {
        Self { period, ..*self }
    }

    fn check(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.period;
        if t.is_nan() || t < -slack || t > self.period + slack {
            return Err(Error::TimeOutOfRange { t, period: self.period });
        }
        Ok(())
    }

    fn omega(&self) -> f64 {
        TWO_PI / self.period
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.theta_unchecked(t))
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.phi_unchecked(t))
    }

    pub fn theta_dot(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.a * self.omega() * (self.omega() * t).cos())
    }

    pub fn phi_dot(&self) -> f64 {
        self.omega()
    }

    pub(crate) fn theta_unchecked(&self, t: f64) -> f64 {
        self.a * (self.omega() * t).sin()
    }

    pub(crate) fn phi_unchecked(&self, t: f64) -> f64 {
        self.omega() * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    Phase,
    #[serde(alias = "x-gate")]
    Xgate,
    Cphase,
    PhysicalFour,
}

impl GateKind {
    /// Hilbert-space dimension the gate's Hamiltonian acts on.
    pub fn dim(self) -> usize {
        match self {
            GateKind::Phase | GateKind::Xgate => 4,
            GateKind::Cphase | GateKind::PhysicalFour => 16,
        }
    }

    /// Index (into [`dark_states`]) of the dark state carrying the Berry phase.
    pub fn phase_carrier(self) -> Option<usize> {
        match self {
            GateKind::Phase | GateKind::Xgate => Some(1),
            GateKind::Cphase => Some(3),
            GateKind::PhysicalFour => None,
        }
    }

    /// Computational basis indices of the logical qubit states.
    pub fn logical_indices(self) -> Option<&'static [usize]> {
        match self {
            GateKind::Phase | GateKind::Xgate => Some(&[0, 1]),
            GateKind::Cphase => Some(&[0, 1, 4, 5]),
            GateKind::PhysicalFour => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub j12: f64,
    pub j13: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self { j12: 1.0, j13: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: GateKind,
    pub schedule: Schedule,
    #[serde(default)]
    pub couplings: Couplings,
}

impl GateSpec {
    pub fn new(kind: GateKind, schedule: Schedule) -> Self {
        Self { kind, schedule, couplings: Couplings::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.kind == GateKind::PhysicalFour {
            let Couplings { j12, j13 } = self.couplings;
            if !(j12.is_finite() && j13.is_finite()) || j12 * j12 + j13 * j13 <= 0.0 {
                return Err(Error::InvalidParameter("PhysicalFour needs J12^2 + J13^2 > 0".into()));
            }
        }
        Ok(())
    }
}

/// Logical DFS labels mapped onto the 16-dimensional four-qubit index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DfsBasis {
    pub indices: [usize; 4],
}

impl Default for DfsBasis {
    /// `|0>=|0001>, |1>=|0010>, |2>=|1000>, |3>=|0100>`
    fn default() -> Self {
        Self { indices: [0b0001, 0b0010, 0b1000, 0b0100] }
    }
}

impl DfsBasis {
    /// Eigenvalue of `Z = sum_i sigma_z^i` on a computational basis index.
    pub fn z_eigenvalue(index: usize) -> f64 {
        let ones = (index & 0xF).count_ones() as f64;
        4.0 - 2.0 * ones
    }

    pub fn is_consistent(&self) -> bool {
        let mut seen = self.indices;
        seen.sort_unstable();
        let distinct = seen.windows(2).all(|w| w[0] != w[1]);
        let z0 = Self::z_eigenvalue(self.indices[0]);
        distinct && self.indices.iter().all(|&i| i < 16 && Self::z_eigenvalue(i) == z0)
    }
}

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `|+>` and `|->` in the `(|0>, |1>, |2>, |3>)` basis.
pub fn plus_state() -> StateVector {
    StateVector::new(vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2), re(0.0), re(0.0)])
}

pub fn minus_state() -> StateVector {
    StateVector::new(vec![re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2), re(0.0), re(0.0)])
}

/// The common three-level coupling pattern
/// `sin(theta)(|x><2| + h.c.) + cos(theta)(e^{-i phi}|3><2| + h.c.)`
/// with `|x>` a unit vector orthogonal to `|2>, |3>`.
fn lambda_coupling(
    bright_partner: &StateVector,
    theta: f64,
    phi: f64,
    two: usize,
    three: usize,
    dim: usize,
) -> Operator {
    let (s, c) = theta.sin_cos();
    let mut h = Operator::zeros(dim);
    for (i, amp) in bright_partner.amplitudes().iter().enumerate() {
        if *amp == re(0.0) {
            continue;
        }
        h[(i, two)] += amp * s;
        h[(two, i)] += amp.conj() * s;
    }
    h[(three, two)] = cis(-phi) * c;
    h[(two, three)] = cis(phi) * c;
    h
}

/// Phase-gate Hamiltonian `H1` at angles `(theta, phi)`.
pub fn h1_at(theta: f64, phi: f64) -> Operator {
    lambda_coupling(&StateVector::basis(4, 1), theta, phi, 2, 3, 4)
}

pub fn build_h1(s: &Schedule, t: f64) -> Result<Operator> {
    Ok(h1_at(s.theta(t)?, s.phi(t)?))
}

/// X-gate Hamiltonian `H2`, written in the `(|0>, |1>, |2>, |3>)` basis with
/// `|->` coupled to the ancilla `|2>`.
pub fn h2_at(theta: f64, phi: f64) -> Operator {
    lambda_coupling(&minus_state(), theta, phi, 2, 3, 4)
}

pub fn build_h2(s: &Schedule, t: f64) -> Result<Operator> {
    Ok(h2_at(s.theta(t)?, s.phi(t)?))
}

/// Two-qubit index of `|i, j>` in the row-major `4 (x) 4` space.
pub fn pair_index(i: usize, j: usize) -> usize {
    4 * i + j
}

/// C-Phase Hamiltonian `H3` on `span{|1,1>, |2,1>, |3,1>}`.
pub fn h3_at(theta: f64, phi: f64) -> Operator {
    let partner = StateVector::basis(16, pair_index(1, 1));
    lambda_coupling(&partner, theta, phi, pair_index(2, 1), pair_index(3, 1), 16)
}

pub fn build_h3(s: &Schedule, t: f64) -> Result<Operator> {
    Ok(h3_at(s.theta(t)?, s.phi(t)?))
}

/// Single-qubit operator acting on qubit `site` (1-based, 1 = most significant).
fn on_site(op: &Operator, site: usize) -> Operator {
    let mut acc: Option<Operator> = None;
    for q in 1..=4 {
        let factor = if q == site { op.clone() } else { pauli::identity() };
        acc = Some(match acc {
            None => factor,
            Some(prev) => tensor_product(&prev, &factor).expect("16-dim product"),
        });
    }
    acc.expect("four factors")
}

/// `R^x_{lm} = (X_l X_m + Y_l Y_m) / 2`
pub fn r_x(l: usize, m: usize) -> Operator {
    let xx = &on_site(&pauli::x(), l) * &on_site(&pauli::x(), m);
    let yy = &on_site(&pauli::y(), l) * &on_site(&pauli::y(), m);
    (&xx + &yy).scale_re(0.5)
}

/// `R^y_{lm} = (X_l Y_m - Y_l X_m) / 2`
pub fn r_y(l: usize, m: usize) -> Operator {
    let xy = &on_site(&pauli::x(), l) * &on_site(&pauli::y(), m);
    let yx = &on_site(&pauli::y(), l) * &on_site(&pauli::x(), m);
    (&xy - &yx).scale_re(0.5)
}

/// Collective `Z = sum_i sigma_z^i` on four qubits.
pub fn total_z() -> Operator {
    (1..=4).map(|q| on_site(&pauli::z(), q)).fold(Operator::zeros(16), |acc, z| &acc + &z)
}

/// `H = J13 R^x_13 + J12 [cos(phi) R^x_12 - sin(phi) R^y_12]` on four qubits.
pub fn build_physical(spec: &GateSpec, varphi: f64) -> Operator {
    let Couplings { j12, j13 } = spec.couplings;
    let (s, c) = varphi.sin_cos();
    let mixed = &r_x(1, 2).scale_re(c) - &r_y(1, 2).scale_re(s);
    &r_x(1, 3).scale_re(j13) + &mixed.scale_re(j12)
}

/// DFS block of a four-qubit operator plus its leakage out of the DFS span.
#[derive(Clone, Debug)]
pub struct DfsProjection {
    pub block: Operator,
    /// `max |<x|H|b_j>|` over computational states `x` outside the DFS span.
    pub leakage: f64,
}

pub fn project_dfs(h: &Operator, basis: &DfsBasis) -> Result<DfsProjection> {
    if h.dim() != 16 {
        return Err(Error::DimensionMismatch { expected: 16, found: h.dim() });
    }
    let block = h.restrict(&basis.indices);
    let mut leakage: f64 = 0.0;
    for x in (0..16).filter(|x| !basis.indices.contains(x)) {
        for &b in &basis.indices {
            leakage = leakage.max(h[(x, b)].norm());
        }
    }
    Ok(DfsProjection { block, leakage })
}

/// Hamiltonian of any gate kind at time `t`.
pub fn hamiltonian(spec: &GateSpec, t: f64) -> Result<Operator> {
    let s = &spec.schedule;
    match spec.kind {
        GateKind::Phase => build_h1(s, t),
        GateKind::Xgate => build_h2(s, t),
        GateKind::Cphase => build_h3(s, t),
        GateKind::PhysicalFour => Ok(build_physical(spec, s.phi(t)?)),
    }
}

/// Dark (zero-energy) eigenstates of the logical Hamiltonians at angles
/// `(theta, phi)`; the last entry carries the Berry phase.
pub fn dark_states_at(kind: GateKind, theta: f64, phi: f64) -> Result<Vec<StateVector>> {
    let (s, c) = theta.sin_cos();
    let tail = cis(-phi) * (-s);
    match kind {
        GateKind::Phase => {
            let mut d1 = StateVector::zeros(4).amplitudes().to_vec();
            d1[1] = re(c);
            d1[3] = tail;
            Ok(vec![StateVector::basis(4, 0), StateVector::new(d1)])
        }
        GateKind::Xgate => {
            let mut d1: Vec<C64> = minus_state().amplitudes().iter().map(|z| z * c).collect();
            d1[3] = tail;
            Ok(vec![plus_state(), StateVector::new(d1)])
        }
        GateKind::Cphase => {
            let mut d3 = vec![re(0.0); 16];
            d3[pair_index(1, 1)] = re(c);
            d3[pair_index(3, 1)] = tail;
            Ok(vec![
                StateVector::basis(16, pair_index(0, 0)),
                StateVector::basis(16, pair_index(0, 1)),
                StateVector::basis(16, pair_index(1, 0)),
                StateVector::new(d3),
            ])
        }
        GateKind::PhysicalFour => Err(Error::Unsupported("dark states")),
    }
}

pub fn dark_states(spec: &GateSpec, t: f64) -> Result<Vec<StateVector>> {
    let s = &spec.schedule;
    dark_states_at(spec.kind, s.theta(t)?, s.phi(t)?)
}
