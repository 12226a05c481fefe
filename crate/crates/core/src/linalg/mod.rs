//! Dense complex linear algebra sized for few-level quantum systems.
//!
//! Conventions: matrices are square, row-major; eigenvectors are columns;
//! `<u|v>` is conjugate-linear in the first argument; eigenvalues ascend and
//! eigenvector phases are fixed (largest component real positive), so every
//! decomposition is deterministic for identical input.

pub(crate) mod eigen;
mod matrix;

use alloc::format;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

pub use eigen::{hermitian_eigendecompose, EigenDecomposition};
pub use matrix::{
    inner, pauli_x, pauli_y, pauli_z, trace_product, Complex64, ComplexMatrix, DensityMatrix,
    HermitianMatrix, ValidationLimits,
};

use crate::error::{Error, Result};
use crate::tol;

/// Checks Hermiticity, unit trace and positivity (strict limits) and returns
/// the validated state. The error lists every violated invariant.
pub fn validate_density(m: &ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(m.clone())
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn eigenvalue_range(m: &HermitianMatrix) -> Result<(f64, f64)> {
    let eig = hermitian_eigendecompose(m)?;
    Ok((eig.values[0], eig.values[eig.values.len() - 1]))
}

/// `S(rho) = -sum_k r_k ln r_k`, populations at or below
/// [`tol::ENTROPY_FLOOR`] contributing zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = eigen::eigh_unchecked(rho.matrix()).expect("validated state must decompose");
    let s: f64 = eig
        .values
        .iter()
        .filter(|&&r| r > tol::ENTROPY_FLOOR)
        .map(|&r| -r * r.ln())
        .sum();
    // Populations marginally above one can leave a negative roundoff residue.
    if s < 0.0 && s > -1e-12 {
        0.0
    } else {
        s
    }
}

/// `S(rho || sigma) = Tr[rho ln rho] - Tr[rho ln sigma]`.
///
/// Fails if `rho` carries more than [`tol::SUPPORT_FLOOR`] weight on an
/// eigenvector of `sigma` whose eigenvalue is at or below the same floor.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let eig_r = eigen::eigh_unchecked(rho.matrix())?;
    let eig_s = eigen::eigh_unchecked(sigma.matrix())?;

    let tr_rho_ln_rho: f64 = eig_r
        .values
        .iter()
        .filter(|&&r| r > tol::ENTROPY_FLOOR)
        .map(|&r| r * r.ln())
        .sum();

    let mut tr_rho_ln_sigma = 0.0;
    for (index, &s) in eig_s.values.iter().enumerate() {
        let col = eig_s.vectors.column(index);
        let weight = rho.expectation(&col).re.max(0.0);
        if s <= tol::SUPPORT_FLOOR {
            if weight > tol::SUPPORT_FLOOR {
                return Err(Error::SupportViolation { index, eigenvalue: s, weight });
            }
            continue;
        }
        tr_rho_ln_sigma += weight * s.ln();
    }

    let div = tr_rho_ln_rho - tr_rho_ln_sigma;
    // Nonnegative up to roundoff; scrub the roundoff, keep anything larger.
    if div < 0.0 && div > -1e-12 {
        Ok(0.0)
    } else {
        Ok(div)
    }
}

/// `exp(-beta H) / Tr exp(-beta H)`, evaluated in the eigenbasis of `H` with
/// the spectrum shifted by its minimum so the exponentials cannot overflow.
pub fn gibbs_state(h: &HermitianMatrix, beta: f64) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("must be finite and positive, got {beta}"),
        });
    }
    let eig = hermitian_eigendecompose(h)?;
    let ground = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: alloc::vec::Vec<f64> =
        eig.values.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pops: alloc::vec::Vec<f64> = weights.iter().map(|&w| w / z).collect();
    let m = ComplexMatrix::from_real_diagonal(&pops).rotate_from_basis(&eig.vectors);
    Ok(DensityMatrix::trusted(HermitianMatrix::symmetrized(&m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianMatrix {
        let raw = ComplexMatrix::from_fn(d, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::symmetrized(&raw)
    }

    fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
        gibbs_state(&random_hermitian(rng, d), rng.gen_range(0.3..3.0)).unwrap()
    }

    #[test]
    fn pauli_z_eigensystem() {
        let eig = hermitian_eigendecompose(&pauli_z()).unwrap();
        assert_eq!(eig.values, vec![-1.0, 1.0]);
        // Ascending order puts |1> (eigenvalue -1) first.
        assert!((eig.vectors[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((eig.vectors[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(eig.vectors[(0, 0)].norm() < 1e-15);
        assert!(eig.vectors[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn pauli_x_eigensystem() {
        let eig = hermitian_eigendecompose(&pauli_x()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        // Phase fixing makes the first component real positive in both.
        assert!((eig.vectors[(0, 0)] - c(r, 0.0)).norm() < 1e-14);
        assert!((eig.vectors[(1, 0)] - c(-r, 0.0)).norm() < 1e-14);
        assert!((eig.vectors[(0, 1)] - c(r, 0.0)).norm() < 1e-14);
        assert!((eig.vectors[(1, 1)] - c(r, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigendecomposition_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3, 4, 8, 16] {
            for _ in 0..8 {
                let h = random_hermitian(&mut rng, d);
                let eig = hermitian_eigendecompose(&h).unwrap();
                assert!(eig.gram_defect() < 1e-12, "gram defect too large at d={d}");
                let err = eig.reconstruct().max_abs_diff(h.matrix());
                assert!(err < 1e-11 * (1.0 + h.max_abs()), "reconstruction {err:.3e} at d={d}");
                for w in eig.values.windows(2) {
                    assert!(w[0] <= w[1]);
                }
            }
        }
    }

    #[test]
    fn eigendecomposition_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 5);
        let a = hermitian_eigendecompose(&h).unwrap();
        let b = hermitian_eigendecompose(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        let eig = hermitian_eigendecompose(&HermitianMatrix::identity(4)).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);
        assert!(eig.gram_defect() < 1e-14);
    }

    #[test]
    fn validate_accepts_maximally_mixed() {
        let m = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(validate_density(&m).is_ok());
    }

    #[test]
    fn validate_accepts_pure_projector() {
        // (I + sigma_x)/2 is rank one with eigenvalues {0, 1}.
        let m = ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0));
        validate_density(&m).unwrap();
    }

    #[test]
    fn validate_reports_every_violation() {
        // Non-Hermitian, wrong trace, and (Hermitian part) indefinite at once.
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = c(1.4, 0.0);
        m[(1, 1)] = c(-0.2, 0.0);
        m[(0, 1)] = c(0.3, 0.0);
        m[(1, 0)] = c(0.1, 0.1);
        match validate_density(&m) {
            Err(Error::InvalidDensity { violations }) => {
                assert_eq!(violations.len(), 3, "got {violations:?}");
            }
            other => panic!("expected InvalidDensity, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_negative_eigenvalue_only() {
        let m = ComplexMatrix::from_real_diagonal(&[1.2, -0.2]);
        match validate_density(&m) {
            Err(Error::InvalidDensity { violations }) => {
                assert_eq!(violations.len(), 1);
                assert!(matches!(
                    violations[0],
                    crate::error::DensityViolation::NegativeEigenvalue { index: 0, .. }
                ));
            }
            other => panic!("expected InvalidDensity, got {other:?}"),
        }
    }

    #[test]
    fn entropy_reference_values() {
        let mixed = validate_density(&ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        assert!((von_neumann_entropy(&mixed) - core::f64::consts::LN_2).abs() < 1e-14);

        let pure = validate_density(&ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0))).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);

        let diag = validate_density(&ComplexMatrix::from_real_diagonal(&[0.75, 0.25])).unwrap();
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((von_neumann_entropy(&diag) - expected).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_reference_values() {
        let rho = validate_density(&ComplexMatrix::from_real_diagonal(&[0.75, 0.25])).unwrap();
        let mixed = validate_density(&ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let expected = 0.75f64 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((relative_entropy(&rho, &mixed).unwrap() - expected).abs() < 1e-14);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-13);
    }

    #[test]
    fn relative_entropy_detects_support_violation() {
        // sigma is |0><0|, rho has weight on |1>.
        let sigma = validate_density(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let rho = validate_density(&ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        assert!(matches!(
            relative_entropy(&rho, &sigma),
            Err(Error::SupportViolation { .. })
        ));
    }

    #[test]
    fn relative_entropy_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let d = rng.gen_range(2..=4);
            let rho = random_density(&mut rng, d);
            let sigma = random_density(&mut rng, d);
            let s = relative_entropy(&rho, &sigma).unwrap();
            assert!(s >= 0.0, "relative entropy came out negative: {s}");
        }
    }

    #[test]
    fn entropy_stays_within_bounds_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let d = rng.gen_range(2..=5);
            let rho = random_density(&mut rng, d);
            let s = von_neumann_entropy(&rho);
            assert!(s >= 0.0);
            assert!(s <= (d as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn gibbs_matches_qubit_closed_form() {
        // <sigma_z> = -tanh(beta * omega) for H = omega sigma_z.
        for beta in [0.3, 1.0, 2.5] {
            for omega in [0.5, 1.0, 2.0] {
                let h = pauli_z().scale_re(omega);
                let rho = gibbs_state(&h, beta).unwrap();
                let sz = rho.trace_product_re(&pauli_z());
                assert!((sz + (beta * omega).tanh()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gibbs_reference_populations() {
        let rho = gibbs_state(&pauli_z(), 1.0).unwrap();
        let z = 2.0 * 1.0f64.cosh();
        assert!((rho[(0, 0)].re - (-1.0f64).exp() / z).abs() < 1e-14);
        assert!((rho[(1, 1)].re - 1.0f64.exp() / z).abs() < 1e-14);
        assert!(rho[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn gibbs_approaches_maximally_mixed_at_high_temperature() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = random_hermitian(&mut rng, 3);
        let rho = gibbs_state(&h, 1e-9).unwrap();
        let err = rho.max_abs_diff(&ComplexMatrix::identity(3).scale_re(1.0 / 3.0));
        assert!(err < 1e-8);
    }

    #[test]
    fn gibbs_commutes_with_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let d = rng.gen_range(2..=5);
            let h = random_hermitian(&mut rng, d);
            let rho = gibbs_state(&h, 1.3).unwrap();
            let comm = rho.commutator(h.matrix());
            assert!(comm.max_abs() < 1e-11);
        }
    }

    #[test]
    fn gibbs_entropy_decreases_with_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let h = random_hermitian(&mut rng, 4);
        let betas = [0.1, 0.5, 1.0, 2.0, 4.0];
        let entropies: Vec<f64> = betas
            .iter()
            .map(|&b| von_neumann_entropy(&gibbs_state(&h, b).unwrap()))
            .collect();
        for w in entropies.windows(2) {
            assert!(w[1] < w[0] + 1e-12, "entropy not monotone: {entropies:?}");
        }
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(gibbs_state(&pauli_z(), 0.0).is_err());
        assert!(gibbs_state(&pauli_z(), f64::NAN).is_err());
        assert!(gibbs_state(&pauli_z(), -1.0).is_err());
    }

    #[test]
    fn mixing_with_identity_lifts_populations() {
        let pure = validate_density(&ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0))).unwrap();
        let reg = pure.mixed_with_identity(1e-10).unwrap();
        let eig = hermitian_eigendecompose(reg.hermitian()).unwrap();
        assert!((eig.values[0] - 5e-11).abs() < 1e-15);
        assert!((reg.trace().re - 1.0).abs() < 1e-15);
    }
}
