//! Dense complex linear algebra for the small Hilbert spaces used here.
//!
//! Everything is row-major `Vec<Complex64>`; dimensions stay at 16 or below
//! in practice, so no blocking or BLAS is involved. The Hermitian
//! eigensolver is a cyclic complex Jacobi iteration, which keeps
//! `exp(-i H tau)` unitary to rounding no matter how many steps are chained.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension a tensor product may produce.
pub const MAX_DIM: usize = 256;

/// Hermiticity tolerance accepted by [`matexp_hermitian`] and [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: vec![ZERO; dim] }
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { amps: self.amps.iter().map(|z| z / n).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for StateVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        assert_eq!(self.dim(), rhs.dim(), "state dimension mismatch");
        StateVector { amps: self.amps.iter().zip(&rhs.amps).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        assert_eq!(self.dim(), rhs.dim(), "state dimension mismatch");
        StateVector { amps: self.amps.iter().zip(&rhs.amps).map(|(a, b)| a - b).collect() }
    }
}

/// `<u|v>`, conjugate-linear in the first argument.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        for row in rows {
            assert_eq!(row.len(), dim, "from_rows needs a square matrix");
        }
        Self::from_fn(dim, |r, c| rows[r][c])
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// `|u><v|`
    pub fn outer(u: &StateVector, v: &StateVector) -> Self {
        assert_eq!(u.dim(), v.dim());
        Self::from_fn(u.dim(), |r, c| u[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn dagger(&self) -> Self {
        dagger(self)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.dim, v.dim(), "operator/state dimension mismatch");
        let n = self.dim;
        let amps = (0..n)
            .map(|r| {
                let row = &self.data[r * n..(r + 1) * n];
                row.iter().zip(v.amplitudes()).map(|(a, b)| a * b).sum()
            })
            .collect();
        StateVector::new(amps)
    }

    /// `<u|self|v>`
    pub fn matrix_element(&self, u: &StateVector, v: &StateVector) -> C64 {
        let w = self.apply(v);
        u.amplitudes().iter().zip(w.amplitudes()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^dagger U - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.dagger() * self;
        prod.max_abs_diff(&Operator::identity(self.dim))
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Column `c` as a state vector.
    pub fn column(&self, c: usize) -> StateVector {
        StateVector::new((0..self.dim).map(|r| self[(r, c)]).collect())
    }

    /// Submatrix on the listed basis indices (rows and columns).
    pub fn restrict(&self, indices: &[usize]) -> Operator {
        Operator::from_fn(indices.len(), |r, c| self[(indices[r], indices[c])])
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            let out_row = &mut out[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Operator { dim: n, data: out }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

pub fn dagger(a: &Operator) -> Operator {
    Operator::from_fn(a.dim, |r, c| a[(c, r)].conj())
}

/// Kronecker product `a (x) b`, row-major: index `(i_a * dim_b + i_b)`.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    let dim = a.dim.saturating_mul(b.dim);
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim, limit: MAX_DIM });
    }
    let nb = b.dim;
    Ok(Operator::from_fn(dim, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)]))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues ascend; column `k` of `vectors` is the eigenvector of
/// `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

pub fn eigh(h: &Operator) -> Result<Eigen> {
    if !h.is_finite() {
        return Err(Error::NonFinite { context: "eigh input" });
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(jacobi_eigh(h))
}

fn jacobi_eigh(h: &Operator) -> Eigen {
    let n = h.dim;
    let mut a = h.data.clone();
    // Symmetrize so rounding in the input cannot bias the rotations.
    for r in 0..n {
        a[r * n + r] = C64::new(a[r * n + r].re, 0.0);
        for c in r + 1..n {
            let avg = (a[r * n + c] + a[c * n + r].conj()) * 0.5;
            a[r * n + c] = avg;
            a[c * n + r] = avg.conj();
        }
    }
    let mut v = Operator::identity(n).data;
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let phase = apq / b; // e^{i alpha}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let conj_phase = phase.conj();

                // A <- A G with G = [[c, s], [-s e^{-i alpha}, c e^{-i alpha}]] on (p, q).
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = arp * c - arq * conj_phase * s;
                    a[r * n + q] = arp * s + arq * conj_phase * c;
                }
                // A <- G^dagger A.
                for col in 0..n {
                    let apc = a[p * n + col];
                    let aqc = a[q * n + col];
                    a[p * n + col] = apc * c - aqc * phase * s;
                    a[q * n + col] = apc * s + aqc * phase * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp * c - vrq * conj_phase * s;
                    v[r * n + q] = vrp * s + vrq * conj_phase * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = Operator::from_fn(n, |r, c| v[r * n + order[c]]);
    Eigen { values, vectors }
}

/// `exp(-i h tau)` for Hermitian `h`, via eigendecomposition.
pub fn matexp_hermitian(h: &Operator, tau: f64) -> Result<Operator> {
    if !tau.is_finite() {
        return Err(Error::NonFinite { context: "matexp_hermitian tau" });
    }
    let eig = eigh(h)?;
    Ok(spectral_exp(&eig, tau))
}

/// `V diag(exp(-i lambda tau)) V^dagger` from a precomputed decomposition.
pub fn spectral_exp(eig: &Eigen, tau: f64) -> Operator {
    let n = eig.vectors.dim;
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, -l * tau)).collect();
    let v = &eig.vectors;
    let mut out = Operator::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += v[(r, k)] * phases[k] * v[(c, k)].conj();
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn spectral_gap(h: &Operator) -> Result<Vec<f64>> {
    Ok(eigh(h)?.values)
}

pub mod pauli {
    use super::{Operator, C64};

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_rows(&[&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]])
    }

    pub fn y() -> Operator {
        Operator::from_rows(&[&[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], &[C64::new(0.0, 1.0), C64::new(0.0, 0.0)]])
    }

    pub fn z() -> Operator {
        Operator::diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
    }
}
