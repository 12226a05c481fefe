//! Counterdiabatic decomposition of a state trajectory.
//!
//! Any differentiable full-rank trajectory `rho(t)` is the exact solution of
//! a Lindblad-form equation built from its own spectral frame:
//!
//! ```text
//! rhodot = -i[H_v + h_geo, rho] + D[rho]
//! ```
//!
//! * `H_v` (virtual Hamiltonian) is diagonal in the state eigenbasis with
//!   levels `eps_k = -ln(z r_k) / beta`, so `rho = exp(-beta H_v) / z`. The
//!   positive gauge constant `z` shifts all levels uniformly and defaults
//!   to one.
//! * `h_geo = i V K V'` generates the eigenbasis rotation (parallel
//!   transport); it is Hermitian because the coupling `K` is anti-Hermitian.
//! * `D` uses jump operators `|r_k><r_j|` with rates
//!   `c_kj = rdot_k / (d r_j)`; on the state itself it reduces exactly to
//!   `sum_k rdot_k |r_k><r_k|`, feeding the population motion.
//!
//! The commutator moves the eigenbasis, the dissipator moves the spectrum,
//! and nothing else survives; the reconstruction residual measures how well
//! the supplied derivative satisfies this split.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::spectral::SpectralFrame;
use crate::tol;

/// Hamiltonian whose Gibbs state at `beta` reproduces the frame's state.
#[derive(Debug, Clone)]
pub struct VirtualHamiltonian {
    /// `sum_k eps_k |r_k><r_k|` in the ambient basis.
    pub matrix: HermitianMatrix,
    /// Levels `eps_k`, aligned with the frame's population order.
    pub levels: Vec<f64>,
    /// Gauge constant: `Tr exp(-beta matrix) = gauge`.
    pub gauge: f64,
    pub beta: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("inverse temperature must be finite and positive, got {beta}"),
        });
    }
    Ok(())
}

fn check_full_rank(frame: &SpectralFrame) -> Result<()> {
    for (k, &r) in frame.populations.iter().enumerate() {
        if r <= tol::RANK_FLOOR {
            return Err(Error::RankDeficient {
                index: k,
                eigenvalue: r,
                t: Some(frame.t),
            });
        }
    }
    Ok(())
}

/// Virtual Hamiltonian in the default gauge `z = 1`.
pub fn virtual_hamiltonian(frame: &SpectralFrame, beta: f64) -> Result<VirtualHamiltonian> {
    virtual_hamiltonian_with_gauge(frame, beta, 1.0)
}

/// Virtual Hamiltonian with levels `eps_k = -ln(z r_k) / beta`.
///
/// Fails on non-positive `beta` or `z`, and on populations at or below
/// [`tol::RANK_FLOOR`] (the logarithm needs strictly mixed states; regularize
/// the trajectory first if it touches the rank boundary).
pub fn virtual_hamiltonian_with_gauge(
    frame: &SpectralFrame,
    beta: f64,
    z: f64,
) -> Result<VirtualHamiltonian> {
    check_beta(beta)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gauge",
            message: format!("gauge constant must be finite and positive, got {z}"),
        });
    }
    check_full_rank(frame)?;
    let levels: Vec<f64> = frame
        .populations
        .iter()
        .map(|&r| -(z * r).ln() / beta)
        .collect();
    let diag = ComplexMatrix::from_real_diagonal(&levels);
    let matrix = HermitianMatrix::symmetrized(&diag.rotate_from_basis(&frame.vectors));
    Ok(VirtualHamiltonian {
        matrix,
        levels,
        gauge: z,
        beta,
    })
}

/// Basis-rotation generator `i V K V'`.
///
/// Hermitian by anti-Hermiticity of `K` and independent of eigenvector
/// phase conventions.
pub fn geometric_term(frame: &SpectralFrame) -> HermitianMatrix {
    let ik = frame.coupling.scale(Complex64::new(0.0, 1.0));
    HermitianMatrix::symmetrized(&ik.rotate_from_basis(&frame.vectors))
}

/// The full counterdiabatic Hamiltonian pair for one frame.
#[derive(Debug, Clone)]
pub struct CdGenerator {
    pub virtual_hamiltonian: VirtualHamiltonian,
    pub geometric: HermitianMatrix,
}

impl CdGenerator {
    /// `H_v + h_geo`.
    pub fn total(&self) -> HermitianMatrix {
        &self.virtual_hamiltonian.matrix + &self.geometric
    }
}

/// Builds the commutator part of the reconstruction at gauge `z = 1`.
pub fn cd_generator(frame: &SpectralFrame, beta: f64) -> Result<CdGenerator> {
    Ok(CdGenerator {
        virtual_hamiltonian: virtual_hamiltonian(frame, beta)?,
        geometric: geometric_term(frame),
    })
}

/// Dissipator rate `c_kj = rdot_k / (d r_j)` for jump `|r_k><r_j|`.
pub fn dissipator_rate(frame: &SpectralFrame, k: usize, j: usize) -> Result<f64> {
    check_full_rank(frame)?;
    let d = frame.dim() as f64;
    Ok(frame.rates[k] / (d * frame.populations[j]))
}

/// Applies the population-moving dissipator to an arbitrary matrix.
///
/// With `X~ = V' X V` the image in the frame basis is
///
/// ```text
/// D~[a][b] = delta_ab sum_j c_aj X~[j][j] - X~[a][b] (C_a + C_b) / 2
/// ```
///
/// where `C_a = sum_k c_ka`. The map kills traces identically and on the
/// state itself returns `sum_k rdot_k |r_k><r_k|` (up to `sum_k rdot_k / d`,
/// which vanishes for trace-preserving derivatives).
pub fn cd_dissipator_apply(frame: &SpectralFrame, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            got: x.dim(),
        });
    }
    check_full_rank(frame)?;
    let d = frame.dim();
    let df = d as f64;
    let xt = x.rotate_to_basis(&frame.vectors);
    let rate_sum: f64 = frame.rates.iter().sum();
    // C_a = sum_k rdot_k / (d r_a).
    let big_c: Vec<f64> = frame
        .populations
        .iter()
        .map(|&r| rate_sum / (df * r))
        .collect();
    let mut out = ComplexMatrix::zeros(d);
    for a in 0..d {
        let mut gain = Complex64::new(0.0, 0.0);
        for j in 0..d {
            gain += xt[(j, j)] * Complex64::new(frame.rates[a] / (df * frame.populations[j]), 0.0);
        }
        for b in 0..d {
            let loss = xt[(a, b)] * Complex64::new(0.5 * (big_c[a] + big_c[b]), 0.0);
            out[(a, b)] = -loss;
        }
        out[(a, a)] += gain;
    }
    Ok(out.rotate_from_basis(&frame.vectors))
}

/// Reconstruction of the state derivative from the frame's own generator.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// `-i[H_v + h_geo, rho] + D[rho]` in the ambient basis.
    pub rhodot: ComplexMatrix,
    /// Largest entry-wise deviation from the supplied derivative.
    pub residual: f64,
}

/// Rebuilds `rhodot` from the counterdiabatic split and reports the residual
/// against the supplied derivative.
pub fn reconstruct_rhodot(
    frame: &SpectralFrame,
    rhodot: &HermitianMatrix,
    beta: f64,
) -> Result<Reconstruction> {
    let generator = cd_generator(frame, beta)?;
    let rho = state_from_frame(frame);
    let h_cd = generator.total();
    let unitary = h_cd
        .commutator(&rho)
        .scale(Complex64::new(0.0, -1.0));
    let dissipative = cd_dissipator_apply(frame, &rho)?;
    let recon = &unitary + &dissipative;
    let residual = recon.max_abs_diff(rhodot.matrix());
    Ok(Reconstruction {
        rhodot: recon,
        residual,
    })
}

/// State implied by the frame: `V diag(r) V'`.
pub fn state_from_frame(frame: &SpectralFrame) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&frame.populations).rotate_from_basis(&frame.vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gibbs_state, pauli_x, pauli_z, validate_density, DensityMatrix};
    use crate::spectral::{default_gap, spectral_frame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frame_of(state: &DensityMatrix, rhodot: &HermitianMatrix) -> SpectralFrame {
        spectral_frame(0.0, state, rhodot, default_gap()).unwrap()
    }

    fn random_mixed(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
        let m = ComplexMatrix::from_fn(d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = HermitianMatrix::symmetrized(&m);
        let sq = &(h.matrix() * h.matrix()) + &ComplexMatrix::identity(d).scale(c(0.05, 0.0));
        validate_density(&sq.scale(c(1.0, 0.0) / sq.trace())).unwrap()
    }

    fn random_traceless(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
        let m = ComplexMatrix::from_fn(d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = HermitianMatrix::symmetrized(&m);
        let shift = h.trace().re / d as f64;
        &h + &HermitianMatrix::identity(d).scale_re(-shift)
    }

    #[test]
    fn levels_pair_with_populations() {
        // rho = diag(0.75, 0.25): ascending populations [0.25, 0.75] pick up
        // levels [ln 4, ln(4/3)] at beta = 1, so the matrix is
        // diag(ln(4/3), ln 4) in the ambient basis.
        let state = validate_density(&ComplexMatrix::from_real_diagonal(&[0.75, 0.25])).unwrap();
        let f = frame_of(&state, &HermitianMatrix::zeros(2));
        let v = virtual_hamiltonian(&f, 1.0).unwrap();
        assert!((v.levels[0] - 4.0f64.ln()).abs() < 1e-14);
        assert!((v.levels[1] - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((v.matrix[(0, 0)].re - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((v.matrix[(1, 1)].re - 4.0f64.ln()).abs() < 1e-14);
        assert!(v.matrix[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn gibbs_state_recovers_system_hamiltonian_up_to_shift() {
        let beta = 0.8;
        let h = pauli_z().scale_re(1.3);
        let rho = gibbs_state(&h, beta).unwrap();
        let f = frame_of(&rho, &HermitianMatrix::zeros(2));
        let v = virtual_hamiltonian(&f, beta).unwrap();
        // exp(-beta H_v) = rho = exp(-beta H)/Z, so H_v = H + ln(Z)/beta.
        let z = (-beta * 1.3f64).exp() + (beta * 1.3f64).exp();
        let expected = &h + &HermitianMatrix::identity(2).scale_re(z.ln() / beta);
        assert!(v.matrix.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn exponential_of_levels_reproduces_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2usize, 3, 4] {
            let state = random_mixed(&mut rng, d);
            let rhodot = random_traceless(&mut rng, d);
            let f = frame_of(&state, &rhodot);
            for z in [0.5, 1.0, 2.0] {
                let v = virtual_hamiltonian_with_gauge(&f, 2.0, z).unwrap();
                let pops: Vec<f64> =
                    v.levels.iter().map(|&e| (-v.beta * e).exp() / z).collect();
                let rebuilt = ComplexMatrix::from_real_diagonal(&pops)
                    .rotate_from_basis(&f.vectors);
                assert!(rebuilt.max_abs_diff(state.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_shifts_levels_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let state = random_mixed(&mut rng, 3);
        let rhodot = random_traceless(&mut rng, 3);
        let f = frame_of(&state, &rhodot);
        let beta = 1.7;
        let base = virtual_hamiltonian(&f, beta).unwrap();
        for z in [0.5, 2.0] {
            let gauged = virtual_hamiltonian_with_gauge(&f, beta, z).unwrap();
            let shift = HermitianMatrix::identity(3).scale_re(-z.ln() / beta);
            let expected = &base.matrix + &shift;
            assert!(gauged.matrix.max_abs_diff(&expected) < 1e-13);
        }
    }

    #[test]
    fn rank_deficiency_is_reported_with_location() {
        let state = validate_density(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let f = spectral_frame(3.5, &state, &HermitianMatrix::zeros(2), default_gap()).unwrap();
        match virtual_hamiltonian(&f, 1.0) {
            Err(Error::RankDeficient {
                index,
                eigenvalue,
                t,
            }) => {
                assert_eq!(index, 0);
                assert!(eigenvalue.abs() < 1e-12);
                assert_eq!(t, Some(3.5));
            }
            other => panic!("expected rank error, got {other:?}"),
        }
        assert!(virtual_hamiltonian(&f, 0.0).is_err());
        assert!(virtual_hamiltonian_with_gauge(&f, 1.0, -2.0).is_err());
    }

    #[test]
    fn dissipator_on_state_moves_populations_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for d in [2usize, 3, 4] {
            let state = random_mixed(&mut rng, d);
            let rhodot = random_traceless(&mut rng, d);
            let f = frame_of(&state, &rhodot);
            let rho = state_from_frame(&f);
            let image = cd_dissipator_apply(&f, &rho).unwrap();
            let expected = ComplexMatrix::from_real_diagonal(&f.rates)
                .rotate_from_basis(&f.vectors);
            assert!(image.max_abs_diff(&expected) < 1e-11);
        }
    }

    #[test]
    fn dissipator_kills_traces_and_preserves_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let state = random_mixed(&mut rng, 3);
        let rhodot = random_traceless(&mut rng, 3);
        let f = frame_of(&state, &rhodot);
        for _ in 0..20 {
            let x = HermitianMatrix::symmetrized(&ComplexMatrix::from_fn(3, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }));
            let image = cd_dissipator_apply(&f, x.matrix()).unwrap();
            assert!(image.trace().norm() < 1e-13);
            assert!(image.hermiticity_defect() < 1e-13);
        }
    }

    #[test]
    fn geometric_term_is_hermitian_and_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let state = random_mixed(&mut rng, 3);
        let rhodot = random_traceless(&mut rng, 3);
        let f = frame_of(&state, &rhodot);
        let g = geometric_term(&f);
        assert!(g.hermiticity_defect() < 1e-13);
        let rephased = f.rephased(&[0.3, -2.0, 1.1]);
        let g2 = geometric_term(&rephased);
        assert!(g2.max_abs_diff(&g) < 1e-13);
    }

    #[test]
    fn reconstruction_matches_supplied_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 3] {
            for _ in 0..30 {
                let state = random_mixed(&mut rng, d);
                let rhodot = random_traceless(&mut rng, d);
                let f = frame_of(&state, &rhodot);
                let rec = reconstruct_rhodot(&f, &rhodot, 1.0).unwrap();
                assert!(
                    rec.residual < 1e-11,
                    "dim {d}: residual {}",
                    rec.residual
                );
            }
        }
    }

    #[test]
    fn reconstruction_beta_independent() {
        // The virtual level shift commutes with the state, so beta must not
        // affect the reconstructed derivative.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let state = random_mixed(&mut rng, 3);
        let rhodot = random_traceless(&mut rng, 3);
        let f = frame_of(&state, &rhodot);
        let a = reconstruct_rhodot(&f, &rhodot, 0.3).unwrap();
        let b = reconstruct_rhodot(&f, &rhodot, 5.0).unwrap();
        assert!(a.rhodot.max_abs_diff(&b.rhodot) < 1e-11);
    }

    #[test]
    fn degenerate_frame_reconstructs_exactly() {
        // Maximally mixed state with a sigma_x-driven derivative: the cluster
        // rotation hands the motion entirely to the dissipator.
        let state = validate_density(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let rhodot = pauli_x().scale_re(0.2);
        let f = frame_of(&state, &rhodot);
        let rec = reconstruct_rhodot(&f, &rhodot, 1.0).unwrap();
        assert!(rec.residual < 1e-12);
        let geo = geometric_term(&f);
        assert!(geo.max_abs() < 1e-13);
    }
}
