use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Deref, Index, IndexMut, Mul, Neg, Sub};

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::{DensityViolation, Error, Result};
use crate::tol;

pub use num_complex::Complex64;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| {
            if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    /// `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// `(M + M^dag)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)] * c)
    }

    pub fn scale_re(&self, r: f64) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)] * r)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<u|M|v>`.
    pub fn bra_op_ket(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mv = self.matvec(v);
        inner(u, &mv)
    }

    /// `<v|M|v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        self.bra_op_ket(v, v)
    }

    /// `V^dag M V`: the representation of `M` in the basis whose vectors
    /// are the columns of `V`.
    pub fn rotate_to_basis(&self, v: &ComplexMatrix) -> Self {
        &v.adjoint() * &(self * v)
    }

    /// `V M V^dag`: inverse of [`Self::rotate_to_basis`] for unitary `V`.
    pub fn rotate_from_basis(&self, v: &ComplexMatrix) -> Self {
        v * &(self * &v.adjoint())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix::from_fn(self.dim, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix::from_fn(self.dim, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| -self[(i, j)])
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// `<u|v>` with the physics convention (conjugate-linear in `u`).
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn pauli_x() -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(1, 0)] = Complex64::new(1.0, 0.0);
    HermitianMatrix(m)
}

pub fn pauli_y() -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex64::new(0.0, -1.0);
    m[(1, 0)] = Complex64::new(0.0, 1.0);
    HermitianMatrix(m)
}

pub fn pauli_z() -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m[(1, 1)] = Complex64::new(-1.0, 0.0);
    HermitianMatrix(m)
}

/// A matrix checked (or symmetrized) to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` if `|M - M^dag|_max <= tol * (1 + |M|_max)`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        let limit = tol::HERMITICITY_TOL * (1.0 + m.max_abs());
        if defect > limit {
            return Err(Error::InvalidDensity {
                violations: vec![DensityViolation::NotHermitian { defect, limit }],
            });
        }
        Ok(HermitianMatrix(m))
    }

    /// Wraps `(M + M^dag)/2` without a tolerance check. For results that are
    /// Hermitian by construction up to roundoff.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        HermitianMatrix(m.hermitian_part())
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(dim))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        HermitianMatrix(ComplexMatrix::from_real_diagonal(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scale_re(&self, r: f64) -> Self {
        HermitianMatrix(self.0.scale_re(r))
    }

    /// Real trace of `self * other`; both factors Hermitian makes the trace
    /// real up to roundoff, which is discarded here.
    pub fn trace_product_re(&self, other: &HermitianMatrix) -> f64 {
        trace_product(&self.0, &other.0).re
    }
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.dim(), b.dim());
    let d = a.dim();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            sum += a[(i, k)] * b[(k, i)];
        }
    }
    sum
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

/// Acceptance limits for density-operator validation.
///
/// [`ValidationLimits::default`] is the strict contract for states handed to
/// analysis; [`ValidationLimits::integration`] is the looser envelope states
/// may visit transiently while being propagated.
#[derive(Debug, Clone, Copy)]
pub struct ValidationLimits {
    pub hermiticity: f64,
    pub trace: f64,
    pub eigenvalue_floor: f64,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        ValidationLimits {
            hermiticity: tol::HERMITICITY_TOL,
            trace: tol::TRACE_TOL,
            eigenvalue_floor: tol::PSD_FLOOR,
        }
    }
}

impl ValidationLimits {
    pub fn integration() -> Self {
        ValidationLimits {
            hermiticity: tol::HERMITICITY_TOL,
            trace: tol::INTEGRATION_TRACE_DRIFT,
            eigenvalue_floor: tol::INTEGRATION_PSD_FLOOR,
        }
    }
}

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite within the limits it was constructed with.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_limits(m, &ValidationLimits::default())
    }

    pub fn with_limits(m: ComplexMatrix, limits: &ValidationLimits) -> Result<Self> {
        let mut violations = Vec::new();

        let defect = m.hermiticity_defect();
        let herm_limit = limits.hermiticity * (1.0 + m.max_abs());
        if defect > herm_limit {
            violations.push(DensityViolation::NotHermitian { defect, limit: herm_limit });
        }

        let tr = m.trace();
        if (tr.re - 1.0).abs() > limits.trace || tr.im.abs() > limits.trace {
            violations.push(DensityViolation::Trace { trace_re: tr.re, trace_im: tr.im });
        }

        // Positivity is judged on the Hermitian part so that it can still be
        // reported alongside a Hermiticity violation.
        match super::eigen::eigh_unchecked(&m.hermitian_part()) {
            Ok(eig) => {
                for (index, &ev) in eig.values.iter().enumerate() {
                    if ev < limits.eigenvalue_floor {
                        violations.push(DensityViolation::NegativeEigenvalue { index, eigenvalue: ev });
                    }
                }
            }
            Err(e) => return Err(e),
        }

        if violations.is_empty() {
            Ok(DensityMatrix(HermitianMatrix(m)))
        } else {
            Err(Error::InvalidDensity { violations })
        }
    }

    /// Wraps without validation. For states produced by constructions that
    /// guarantee the invariants (spectral reconstruction, mixing, ...).
    pub(crate) fn trusted(m: HermitianMatrix) -> Self {
        DensityMatrix(m)
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    /// `(1 - delta) rho + delta I/d`: pushes every population up by at least
    /// `delta/d` at the cost of an `O(delta)` perturbation.
    pub fn mixed_with_identity(&self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && (0.0..1.0).contains(&delta)) {
            return Err(Error::InvalidParameter {
                name: "delta",
                message: alloc::format!("must lie in [0, 1), got {delta}"),
            });
        }
        let d = self.dim();
        let mixed = &self.0.scale_re(1.0 - delta)
            + &HermitianMatrix::identity(d).scale_re(delta / d as f64);
        Ok(DensityMatrix(mixed))
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}
