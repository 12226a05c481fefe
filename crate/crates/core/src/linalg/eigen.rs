//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Row-cyclic sweeps of complex Givens rotations; each rotation annihilates
//! one off-diagonal pair exactly. Quadratic convergence makes the sweep
//! budget generous for the dimensions this crate targets (d <= 64).
//!
//! Output conventions, relied on for deterministic downstream artifacts:
//! eigenvalues ascend; equal eigenvalues are ordered by lexicographic
//! comparison of their (phase-fixed) eigenvectors; each eigenvector is
//! rephased so its largest-magnitude component is real and positive.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};
use crate::tol;

use super::matrix::{Complex64, ComplexMatrix, HermitianMatrix};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (ascending) and eigenvectors (matching columns, orthonormal,
/// phase-fixed) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^dag`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.values).rotate_from_basis(&self.vectors)
    }

    /// `max |V^dag V - I|`.
    pub fn gram_defect(&self) -> f64 {
        let d = self.dim();
        let gram = &self.vectors.adjoint() * &self.vectors;
        gram.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

pub fn hermitian_eigendecompose(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    eigh_unchecked(m.matrix())
}

/// Eigensolver entry that trusts the caller about Hermiticity (it reads only
/// the upper triangle through the rotations applied to the full matrix).
pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(d);

    let scale = a.frobenius_norm();
    let threshold = tol::JACOBI_RELATIVE_OFFDIAG * scale;

    if d > 1 && scale > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if offdiag_frobenius(&a) <= threshold {
                converged = true;
                break;
            }
            for p in 0..d - 1 {
                for q in p + 1..d {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && offdiag_frobenius(&a) > threshold {
            return Err(Error::EigenIterationLimit {
                offdiag: offdiag_frobenius(&a),
                threshold,
            });
        }
    }

    let mut values: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    for k in 0..d {
        fix_phase(&mut v, k);
    }

    // Ascending sort; exact eigenvalue ties fall back to lexicographic
    // vector order so that identical inputs give identical output.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| lex_compare_columns(&v, i, j))
    });

    let vectors = ComplexMatrix::from_fn(d, |i, j| v[(i, order[j])]);
    values = order.iter().map(|&k| values[k]).collect();

    Ok(EigenDecomposition { values, vectors })
}

fn offdiag_frobenius(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`.
///
/// With `beta = a[(p, q)] = |beta| e^{i phi}` the 2x2 block is reduced to the
/// real symmetric case; the classic stable tangent formula then gives the
/// rotation angle. `U` differs from the identity only in rows/columns `p, q`:
/// `U[p][p] = U[q][q] = c`, `U[p][q] = s e^{i phi}`, `U[q][p] = -s e^{-i phi}`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = a[(p, q)];
    let abs_beta = beta.norm();
    if abs_beta == 0.0 {
        // Still scrub the conjugate element so roundoff cannot linger there.
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let u = beta / abs_beta;

    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs_beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let d = a.dim();

    // A <- A U (columns p, q).
    for i in 0..d {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c - aiq * u.conj() * s;
        a[(i, q)] = aip * u * s + aiq * c;
    }
    // A <- U^dag A (rows p, q).
    for j in 0..d {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c - aqj * u * s;
        a[(q, j)] = apj * u.conj() * s + aqj * c;
    }
    // The rotation zeroes these exactly in exact arithmetic.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // V <- V U.
    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c - viq * u.conj() * s;
        v[(i, q)] = vip * u * s + viq * c;
    }
}

/// Rephase column `k` so its largest-magnitude component is real positive.
/// Magnitude ties resolve to the smallest index.
pub(crate) fn fix_phase(v: &mut ComplexMatrix, k: usize) {
    let d = v.dim();
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for i in 0..d {
        let mag = v[(i, k)].norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[(best, k)].conj() / best_mag;
    for i in 0..d {
        let z = v[(i, k)] * phase;
        v[(i, k)] = z;
    }
    v[(best, k)] = Complex64::new(best_mag, 0.0);
}

fn lex_compare_columns(v: &ComplexMatrix, i: usize, j: usize) -> core::cmp::Ordering {
    let d = v.dim();
    for row in 0..d {
        let a = v[(row, i)];
        let b = v[(row, j)];
        match a.re.partial_cmp(&b.re) {
            Some(core::cmp::Ordering::Equal) | None => {}
            Some(o) => return o,
        }
        match a.im.partial_cmp(&b.im) {
            Some(core::cmp::Ordering::Equal) | None => {}
            Some(o) => return o,
        }
    }
    core::cmp::Ordering::Equal
}
