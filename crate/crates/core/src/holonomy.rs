//! Berry phases, logical gate matrices and the quality factor.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{dark_states_at, GateKind, Schedule};
use crate::linalg::{Operator, StateVector, C64};

/// Largest |x| accepted by [`bessel_j0`].
pub const J0_MAX_ARG: f64 = 50.0;

/// First positive zero of J1, where J0 attains its global minimum.
const J0_ARGMIN: f64 = 3.831_705_970_207_512;

const GAUSS_NODES: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_NODES;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

/// Zero-order Bessel function of the first kind.
///
/// Evaluates `(1/pi) int_0^pi cos(x sin t) dt` with composite 16-point
/// Gauss-Legendre panels, at least 4 panels and roughly one panel per unit
/// of |x|. Absolute error stays below 1e-13 on `|x| <= 50`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > J0_MAX_ARG {
        return Err(Error::InvalidParameter(format!("bessel_j0 needs |x| <= {J0_MAX_ARG}, got {x}")));
    }
    let panels = (x.abs().ceil() as usize).max(4);
    let width = PI / panels as f64;
    let rule = gauss_legendre();
    let half = 0.5 * width;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let panel: f64 = rule.iter().map(|&(node, w)| w * (x * (mid + half * node).sin()).cos()).sum();
        sum += half * panel;
    }
    // Dividing by the rule's own integral of 1 makes J0(0) = 1 exactly.
    let measure: f64 = panels as f64 * half * rule.iter().map(|&(_, w)| w).sum::<f64>();
    Ok(sum / measure)
}

/// `gamma_1 = pi [1 - J0(2a)]`
pub fn berry_closed_form(a: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
    }
    Ok(PI * (1.0 - bessel_j0(2.0 * a)?))
}

/// `int_0^T sin^2(theta) phi' ds` by the trapezoid rule on `n_points`
/// intervals (the integrand is periodic, so convergence is spectral).
pub fn berry_numeric(s: &Schedule, n_points: usize) -> Result<f64> {
    if n_points < 100 {
        return Err(Error::InvalidParameter(format!("n_points must be >= 100, got {n_points}")));
    }
    s.validate()?;
    let h = s.period / n_points as f64;
    let phi_dot = s.phi_dot();
    // Periodic trapezoid: endpoints coincide, so each node has full weight.
    let sum: f64 = (0..n_points)
        .map(|k| {
            let theta = s.theta_unchecked(k as f64 * h);
            theta.sin().powi(2) * phi_dot
        })
        .sum();
    Ok(sum * h)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReading {
    pub gamma: f64,
    pub overlap_abs: f64,
}

/// Phase and modulus of `<d|U|d>`.
pub fn extract_phase(u: &Operator, d: &StateVector) -> Result<PhaseReading> {
    if u.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: d.dim() });
    }
    if (d.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("probe state has norm {}", d.norm())));
    }
    let z = u.matrix_element(d, d);
    let overlap_abs = z.norm();
    if overlap_abs < 1e-12 {
        return Err(Error::PhaseUndefined { overlap: overlap_abs });
    }
    Ok(PhaseReading { gamma: z.arg(), overlap_abs })
}

/// `f = (1 - |wrap(gamma_measured - gamma_ideal)| / pi) * overlap`, in [0, 1].
pub fn quality_factor(gamma_ideal: f64, gamma_measured: f64, overlap_abs: f64) -> f64 {
    let delta = wrap_angle(gamma_measured - gamma_ideal);
    ((1.0 - delta.abs() / PI) * overlap_abs).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub gamma_ideal: f64,
    pub gamma_measured: f64,
    pub overlap_abs: f64,
    pub f: f64,
}

/// Scores a gate propagator against the closed-form Berry phase, probing the
/// phase-carrying dark state at `t = 0`.
pub fn evaluate(kind: GateKind, a: f64, u: &Operator) -> Result<HolonomyResult> {
    let carrier = kind.phase_carrier().ok_or(Error::Unsupported("quality factor"))?;
    let d = &dark_states_at(kind, 0.0, 0.0)?[carrier];
    let gamma_ideal = berry_closed_form(a)?;
    let reading = extract_phase(u, d)?;
    Ok(HolonomyResult {
        gamma_ideal,
        gamma_measured: reading.gamma,
        overlap_abs: reading.overlap_abs,
        f: quality_factor(gamma_ideal, reading.gamma, reading.overlap_abs),
    })
}

/// Logical gate in the computational basis of one or two logical qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateMatrix {
    pub dim: usize,
    pub entries: Operator,
}

impl GateMatrix {
    fn new(entries: Operator) -> Self {
        Self { dim: entries.dim(), entries }
    }
}

/// Ideal holonomic gate for Berry phase `gamma`.
pub fn gate_matrix(kind: GateKind, gamma: f64) -> Result<GateMatrix> {
    let one = C64::new(1.0, 0.0);
    let phase = C64::from_polar(1.0, gamma);
    let m = match kind {
        GateKind::Phase => Operator::diag(&[one, phase]),
        GateKind::Xgate => {
            let global = C64::from_polar(1.0, gamma / 2.0);
            let (s, c) = (gamma / 2.0).sin_cos();
            let diag = global * c;
            let off = global * C64::new(0.0, -s);
            Operator::from_rows(&[&[diag, off], &[off, diag]])
        }
        GateKind::Cphase => Operator::diag(&[one, one, one, phase]),
        GateKind::PhysicalFour => return Err(Error::Unsupported("gate matrix")),
    };
    Ok(GateMatrix::new(m))
}

/// `<L_i|U|L_j>` over the logical computational states of `kind`.
pub fn logical_gate(kind: GateKind, u: &Operator) -> Result<GateMatrix> {
    let indices = kind.logical_indices().ok_or(Error::Unsupported("logical gate"))?;
    if u.dim() != kind.dim() {
        return Err(Error::DimensionMismatch { expected: kind.dim(), found: u.dim() });
    }
    Ok(GateMatrix::new(u.restrict(indices)))
}

/// Largest Berry phase the loop can produce, `pi [1 - min J0]`.
pub fn max_reachable_phase() -> f64 {
    PI * (1.0 - bessel_j0(J0_ARGMIN).expect("in range"))
}

/// Smallest `a >= 0` with `pi [1 - J0(2a)] = gamma_target`.
pub fn find_a_for_phase(gamma_target: f64) -> Result<f64> {
    let max = max_reachable_phase();
    if !(gamma_target.is_finite() && (0.0..2.0 * PI).contains(&gamma_target)) || gamma_target > max {
        return Err(Error::Unreachable { gamma: gamma_target, max });
    }
    if gamma_target == 0.0 {
        return Ok(0.0);
    }
    // berry_closed_form increases monotonically on [0, J0_ARGMIN / 2].
    let (mut lo, mut hi) = (0.0, J0_ARGMIN / 2.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if berry_closed_form(mid)? < gamma_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    /// Power series oracle, adequate for |x| <= 10.
    fn j0_series(x: f64) -> f64 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    /// Periodic trapezoid oracle on the same integral representation.
    fn j0_trapezoid(x: f64) -> f64 {
        let n = 2000;
        let h = 2.0 * PI / n as f64;
        (0..n).map(|k| (x * (k as f64 * h).sin()).cos()).sum::<f64>() * h / (2.0 * PI)
    }

    #[test]
    fn j0_reference_points() {
        assert!((bessel_j0(0.0).unwrap() - 1.0).abs() < 1e-15);
        // Reference digits from an independent library evaluation.
        let refs = [
            (1.0, 0.765_197_686_557_966_6),
            (5.0, -0.177_596_771_314_338_3),
            (10.0, -0.245_935_764_451_348_3),
            (50.0, 0.055_812_327_669_252_09),
        ];
        for (x, want) in refs {
            assert!((bessel_j0(x).unwrap() - want).abs() < 1e-13, "x={x}");
        }
        assert!(bessel_j0(2.404_825_557_695_773).unwrap().abs() < 1e-14);
        assert!(bessel_j0(50.5).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
    }

    #[test]
    fn j0_matches_independent_oracles() {
        for k in 0..=200 {
            let x = -10.0 + 0.1 * k as f64;
            assert!((bessel_j0(x).unwrap() - j0_series(x)).abs() < 1e-12, "x={x}");
        }
        for k in 0..=100 {
            let x = 0.5 * k as f64;
            assert!((bessel_j0(x).unwrap() - j0_trapezoid(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn j0_near_gate_amplitudes() {
        assert!(bessel_j0(2.0 * 1.2024).unwrap().abs() < 1e-4);
        assert!((bessel_j0(1.5210).unwrap() - 0.5).abs() < 2e-4);
    }

    #[test]
    fn berry_phase_closed_form() {
        assert_eq!(berry_closed_form(0.0).unwrap(), 0.0);
        assert!((berry_closed_form(1.2024).unwrap() - PI).abs() < 1e-3);
        assert!((berry_closed_form(0.7605).unwrap() - FRAC_PI_2).abs() < 1e-3);
        assert!(berry_closed_form(-0.1).is_err());
    }

    #[test]
    fn berry_numeric_agrees_with_closed_form() {
        for k in 0..50 {
            let a = 3.0 * k as f64 / 49.0;
            let s = Schedule::new(a, 7.3).unwrap();
            let numeric = berry_numeric(&s, 10_000).unwrap();
            assert!((numeric - berry_closed_form(a).unwrap()).abs() < 1e-8, "a={a}");
        }
        let zero = Schedule::new(0.0, 1.0).unwrap();
        assert_eq!(berry_numeric(&zero, 100).unwrap(), 0.0);
        assert!(berry_numeric(&zero, 99).is_err());
    }

    #[test]
    fn phase_extraction() {
        let d = StateVector::basis(4, 1);
        let r = extract_phase(&Operator::identity(4), &d).unwrap();
        assert_eq!((r.gamma, r.overlap_abs), (0.0, 1.0));

        let mut u = Operator::identity(4);
        u[(1, 1)] = C64::from_polar(1.0, PI / 3.0);
        let r = extract_phase(&u, &d).unwrap();
        assert!((r.gamma - PI / 3.0).abs() < 1e-15 && (r.overlap_abs - 1.0).abs() < 1e-15);

        let mut swap = Operator::zeros(4);
        swap[(0, 1)] = C64::new(1.0, 0.0);
        swap[(1, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(extract_phase(&swap, &d), Err(Error::PhaseUndefined { .. })));
    }

    #[test]
    fn quality_factor_examples() {
        assert_eq!(quality_factor(1.0, 1.0, 1.0), 1.0);
        assert!(quality_factor(0.0, PI, 1.0).abs() < 1e-15);
        assert!((quality_factor(0.0, FRAC_PI_2, 0.8) - 0.4).abs() < 1e-15);
        // Wrapping: a measured phase of -pi + 0.1 is 0.2 away from pi - 0.1.
        let f = quality_factor(PI - 0.1, -PI + 0.1, 1.0);
        assert!((f - (1.0 - 0.2 / PI)).abs() < 1e-12);
        assert!(wrap_angle(PI) == PI && wrap_angle(-PI) == PI);
    }

    #[test]
    fn gate_matrices() {
        let x = gate_matrix(GateKind::Xgate, PI).unwrap().entries;
        assert!(x[(0, 0)].norm() < 1e-15 && x[(1, 1)].norm() < 1e-15);
        assert!((x[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(gate_matrix(GateKind::Phase, 0.0).unwrap().entries, Operator::identity(2));
        let cz = gate_matrix(GateKind::Cphase, PI).unwrap().entries;
        let want = Operator::diag(&[1.0, 1.0, 1.0, -1.0].map(|v| C64::new(v, 0.0)));
        assert!(cz.max_abs_diff(&want) < 1e-15);
        for k in 0..40 {
            let g = -4.0 + 0.2 * k as f64;
            for kind in [GateKind::Phase, GateKind::Xgate, GateKind::Cphase] {
                assert!(gate_matrix(kind, g).unwrap().entries.unitarity_defect() <= 1e-12);
            }
        }
        assert!(gate_matrix(GateKind::PhysicalFour, 0.0).is_err());
    }

    #[test]
    fn inverse_design() {
        assert_eq!(find_a_for_phase(0.0).unwrap(), 0.0);
        assert!((find_a_for_phase(PI).unwrap() - 1.2024).abs() < 5e-4);
        assert!((find_a_for_phase(FRAC_PI_2).unwrap() - 0.7605).abs() < 5e-4);
        for g in [0.3, 1.0, 2.0, 3.0, 4.0] {
            let a = find_a_for_phase(g).unwrap();
            assert!((berry_closed_form(a).unwrap() - g).abs() < 1e-10);
        }
        let max = max_reachable_phase();
        assert!((max - PI * 1.402_759_395_702_553).abs() < 1e-10);
        assert!(matches!(find_a_for_phase(4.5), Err(Error::Unreachable { .. })));
        assert!(find_a_for_phase(-0.1).is_err());
    }
}
