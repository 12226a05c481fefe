//! Eigenframes of a Hermitian matrix and their time derivatives.
//!
//! Given a Hermitian `M` and its rate `Mdot`, first-order perturbation theory
//! yields the eigenvalue rates and the inter-level coupling
//!
//! ```text
//! K[j][k] = <v_j | Mdot | v_k> / (m_k - m_j)      (j, k in different clusters)
//! ```
//!
//! which is anti-Hermitian with zero diagonal and generates the
//! parallel-transport eigenvector derivative `vdot_k = sum_j K[j][k] v_j`.
//! Inside a near-degenerate cluster the splitting is meaningless, so the
//! cluster basis is rotated to diagonalize the projected `Mdot`; in that
//! basis the in-cluster coupling vanishes identically and the diagonal
//! entries are the correct value rates.
//!
//! [`spectral_frame`] specializes this to density matrices and
//! [`spectral_flow`] strings frames along a trajectory, matching levels
//! across steps by eigenvector overlap so that crossings do not scramble
//! level identities.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::Result;
use crate::linalg::{
    eigen, hermitian_eigendecompose, inner, Complex64, ComplexMatrix, DensityMatrix,
    HermitianMatrix,
};
use crate::propagator::Trajectory;
use crate::tol;

/// Eigenframe of `(M, Mdot)`: values, vectors, value rates and coupling.
#[derive(Debug, Clone)]
pub struct DerivativeFrame {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: ComplexMatrix,
    /// Eigenvalue time derivatives.
    pub value_rates: Vec<f64>,
    /// Anti-Hermitian inter-level coupling; zero on the diagonal and inside
    /// degenerate clusters.
    pub coupling: ComplexMatrix,
    /// Near-degenerate clusters as runs of consecutive indices.
    pub groups: Vec<Vec<usize>>,
}

impl DerivativeFrame {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Parallel-transport derivative of eigenvector `k` in the ambient basis.
    pub fn vector_rate(&self, k: usize) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            let kjk = self.coupling[(j, k)];
            if kjk.norm() == 0.0 {
                continue;
            }
            for (row, slot) in out.iter_mut().enumerate() {
                *slot += self.vectors[(row, j)] * kjk;
            }
        }
        out
    }

    /// `Mdot` implied by the frame: `V (diag(value_rates) + Y_offblock) V'`
    /// with `Y_offblock[j][k] = K[j][k] (m_k - m_j)`.
    pub fn implied_rate_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut y = ComplexMatrix::zeros(d);
        for j in 0..d {
            y[(j, j)] = Complex64::new(self.value_rates[j], 0.0);
            for k in 0..d {
                if j != k {
                    let gap = self.values[k] - self.values[j];
                    y[(j, k)] += self.coupling[(j, k)] * Complex64::new(gap, 0.0);
                }
            }
        }
        y.rotate_from_basis(&self.vectors)
    }
}

/// Clusters ascending eigenvalues into runs separated by more than `gap`.
fn cluster(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..values.len() {
        match groups.last_mut() {
            Some(g) if values[i] - values[*g.last().unwrap()] <= gap => g.push(i),
            _ => groups.push(alloc::vec![i]),
        }
    }
    groups
}

/// Builds the eigenframe of `m` with rates induced by `mdot`.
///
/// `gap` is the absolute eigenvalue spacing below which two levels are
/// treated as one cluster; [`tol::DEGENERACY_GAP`] suits order-one spectra.
pub fn derivative_frame(
    m: &HermitianMatrix,
    mdot: &HermitianMatrix,
    gap: f64,
) -> Result<DerivativeFrame> {
    let eig = hermitian_eigendecompose(m)?;
    let d = eig.values.len();
    let mut vectors = eig.vectors;
    let mut y = mdot.matrix().rotate_to_basis(&vectors);
    let groups = cluster(&eig.values, gap);

    for group in &groups {
        if group.len() < 2 {
            continue;
        }
        // Rotate the cluster to diagonalize the projected rate matrix; the
        // split directions inside a cluster are defined by Mdot, not by the
        // meaningless sub-gap ordering of M.
        let g = group.len();
        let sub = ComplexMatrix::from_fn(g, |a, b| y[(group[a], group[b])]);
        let sub_eig = eigen::eigh_unchecked(&sub)?;
        let mut rotated = ComplexMatrix::zeros(d);
        let rows = vectors.dim();
        for (b, _) in group.iter().enumerate() {
            for row in 0..rows {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, &col_a) in group.iter().enumerate() {
                    acc += vectors[(row, col_a)] * sub_eig.vectors[(a, b)];
                }
                rotated[(row, b)] = acc;
            }
        }
        for (b, &col_b) in group.iter().enumerate() {
            for row in 0..rows {
                vectors[(row, col_b)] = rotated[(row, b)];
            }
            eigen::fix_phase(&mut vectors, col_b);
        }
        // Refresh the affected rows and columns of Y in the new basis.
        y = mdot.matrix().rotate_to_basis(&vectors);
        for (a, &ca) in group.iter().enumerate() {
            for (b, &cb) in group.iter().enumerate() {
                if a != b {
                    y[(ca, cb)] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    let value_rates: Vec<f64> = (0..d).map(|k| y[(k, k)].re).collect();
    let mut coupling = ComplexMatrix::zeros(d);
    let group_of = group_index(&groups, d);
    for j in 0..d {
        for k in 0..d {
            if group_of[j] != group_of[k] {
                let denom = eig.values[k] - eig.values[j];
                coupling[(j, k)] = y[(j, k)] / Complex64::new(denom, 0.0);
            }
        }
    }

    Ok(DerivativeFrame {
        values: eig.values,
        vectors,
        value_rates,
        coupling,
        groups,
    })
}

fn group_index(groups: &[Vec<usize>], d: usize) -> Vec<usize> {
    let mut out = alloc::vec![0usize; d];
    for (gi, g) in groups.iter().enumerate() {
        for &i in g {
            out[i] = gi;
        }
    }
    out
}

/// Spectral data of one trajectory node: populations, eigenbasis, population
/// rates and the inter-level coupling of the state derivative.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    /// State eigenvalues (populations), ascending at construction.
    pub populations: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix,
    /// Population rates `rdot_k`.
    pub rates: Vec<f64>,
    /// Anti-Hermitian coupling `K[j][k] = <r_j|rhodot|r_k>/(r_k - r_j)`.
    pub coupling: ComplexMatrix,
    /// Near-degenerate population clusters.
    pub groups: Vec<Vec<usize>>,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Derivative of eigenvector `k` implied by the coupling,
    /// `sum_j K[j][k] |r_j>`, in the gauge `<r_k| d/dt |r_k> = 0`.
    pub fn vector_rate(&self, k: usize) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            let weight = self.coupling[(j, k)];
            for (slot, element) in out.iter_mut().zip(self.vectors.column(j)) {
                *slot += weight * element;
            }
        }
        out
    }

    /// State derivative implied by the frame data.
    pub fn implied_rhodot(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut y = ComplexMatrix::zeros(d);
        for j in 0..d {
            y[(j, j)] = Complex64::new(self.rates[j], 0.0);
            for k in 0..d {
                if j != k {
                    let gap = self.populations[k] - self.populations[j];
                    y[(j, k)] += self.coupling[(j, k)] * Complex64::new(gap, 0.0);
                }
            }
        }
        y.rotate_from_basis(&self.vectors)
    }

    /// Same frame with eigenvector `k` multiplied by `exp(i phase_k)` and the
    /// coupling transformed consistently. Physical rates derived from a frame
    /// must not change under this map.
    pub fn rephased(&self, phases: &[f64]) -> SpectralFrame {
        let d = self.dim();
        assert_eq!(phases.len(), d, "one phase per level");
        let units: Vec<Complex64> =
            phases.iter().map(|&p| Complex64::new(p.cos(), p.sin())).collect();
        let mut vectors = self.vectors.clone();
        for k in 0..d {
            for row in 0..d {
                let z = vectors[(row, k)] * units[k];
                vectors[(row, k)] = z;
            }
        }
        let mut coupling = self.coupling.clone();
        for j in 0..d {
            for k in 0..d {
                let z = coupling[(j, k)] * units[j].conj() * units[k];
                coupling[(j, k)] = z;
            }
        }
        SpectralFrame {
            t: self.t,
            populations: self.populations.clone(),
            vectors,
            rates: self.rates.clone(),
            coupling,
            groups: self.groups.clone(),
        }
    }
}

/// Spectral frame of a single state and its derivative.
pub fn spectral_frame(
    t: f64,
    state: &DensityMatrix,
    rhodot: &HermitianMatrix,
    gap: f64,
) -> Result<SpectralFrame> {
    let frame = derivative_frame(state.hermitian(), rhodot, gap)?;
    Ok(SpectralFrame {
        t,
        populations: frame.values,
        vectors: frame.vectors,
        rates: frame.value_rates,
        coupling: frame.coupling,
        groups: frame.groups,
    })
}

/// One level-matching event between consecutive frames.
#[derive(Debug, Clone)]
pub struct MatchEvent {
    pub t: f64,
    /// `permutation[k]` is the incoming level that continues outgoing level `k`.
    pub permutation: Vec<usize>,
    /// Smallest squared eigenvector overlap among the matched pairs.
    pub min_overlap_sq: f64,
}

/// Matching summary across a whole trajectory.
#[derive(Debug, Clone, Default)]
pub struct FlowDiagnostics {
    /// Steps where the matching permutation was not the identity.
    pub reorderings: Vec<MatchEvent>,
    /// Steps where the best match was weak (squared overlap at or below 0.5),
    /// typically a sign that the grid is too coarse near a crossing.
    pub ambiguous: Vec<MatchEvent>,
    /// Worst matched squared overlap anywhere on the trajectory.
    pub min_overlap_sq: f64,
}

/// Frames along a trajectory with level identities continued across steps.
#[derive(Debug, Clone)]
pub struct SpectralFlow {
    pub frames: Vec<SpectralFrame>,
    pub diagnostics: FlowDiagnostics,
}

/// Greedy overlap matching: permutes and rephases `next` so its levels
/// continue `prev`'s, returning the applied permutation and worst overlap.
pub fn match_frames(prev: &SpectralFrame, next: &SpectralFrame) -> (SpectralFrame, MatchEvent) {
    let d = prev.dim();
    let mut overlap_sq = alloc::vec![alloc::vec![0.0f64; d]; d];
    let mut phases = alloc::vec![Complex64::new(1.0, 0.0); d];
    for j in 0..d {
        let pj = prev.vectors.column(j);
        for k in 0..d {
            let o = inner(&pj, &next.vectors.column(k));
            overlap_sq[j][k] = o.norm_sqr();
        }
    }

    // Repeatedly take the strongest unassigned pair.
    let mut perm = alloc::vec![usize::MAX; d];
    let mut row_done = alloc::vec![false; d];
    let mut col_done = alloc::vec![false; d];
    let mut min_overlap_sq = f64::INFINITY;
    for _ in 0..d {
        let (mut bj, mut bk, mut best) = (0, 0, -1.0);
        for j in 0..d {
            if row_done[j] {
                continue;
            }
            for k in 0..d {
                if !col_done[k] && overlap_sq[j][k] > best {
                    best = overlap_sq[j][k];
                    bj = j;
                    bk = k;
                }
            }
        }
        perm[bj] = bk;
        row_done[bj] = true;
        col_done[bk] = true;
        min_overlap_sq = min_overlap_sq.min(best);
    }

    // Align matched phases so overlaps are real positive.
    for j in 0..d {
        let o = inner(&prev.vectors.column(j), &next.vectors.column(perm[j]));
        if o.norm() > 0.0 {
            phases[j] = o.conj() / o.norm();
        }
    }

    let mut vectors = ComplexMatrix::zeros(d);
    let mut coupling = ComplexMatrix::zeros(d);
    let mut populations = alloc::vec![0.0; d];
    let mut rates = alloc::vec![0.0; d];
    for j in 0..d {
        populations[j] = next.populations[perm[j]];
        rates[j] = next.rates[perm[j]];
        for row in 0..d {
            vectors[(row, j)] = next.vectors[(row, perm[j])] * phases[j];
        }
    }
    for j in 0..d {
        for k in 0..d {
            coupling[(j, k)] =
                next.coupling[(perm[j], perm[k])] * phases[j].conj() * phases[k];
        }
    }
    // Remap cluster indices through the permutation.
    let mut inverse = alloc::vec![0usize; d];
    for (out_idx, &in_idx) in perm.iter().enumerate() {
        inverse[in_idx] = out_idx;
    }
    let groups = next
        .groups
        .iter()
        .map(|g| g.iter().map(|&i| inverse[i]).collect())
        .collect();

    let matched = SpectralFrame {
        t: next.t,
        populations,
        vectors,
        rates,
        coupling,
        groups,
    };
    let event = MatchEvent {
        t: next.t,
        permutation: perm,
        min_overlap_sq,
    };
    (matched, event)
}

/// Spectral frames for every trajectory node, matched in sequence.
pub fn spectral_flow(trajectory: &Trajectory, gap: f64) -> Result<SpectralFlow> {
    let mut frames: Vec<SpectralFrame> = Vec::with_capacity(trajectory.len());
    let mut diagnostics = FlowDiagnostics {
        min_overlap_sq: 1.0,
        ..Default::default()
    };
    for point in trajectory.points() {
        let frame = spectral_frame(point.t, &point.state, &point.rhodot, gap)?;
        match frames.last() {
            None => frames.push(frame),
            Some(prev) => {
                let (matched, event) = match_frames(prev, &frame);
                diagnostics.min_overlap_sq = diagnostics.min_overlap_sq.min(event.min_overlap_sq);
                if event.permutation.iter().enumerate().any(|(i, &p)| i != p) {
                    diagnostics.reorderings.push(event.clone());
                }
                if event.min_overlap_sq <= 0.5 {
                    diagnostics.ambiguous.push(event);
                }
                frames.push(matched);
            }
        }
    }
    Ok(SpectralFlow {
        frames,
        diagnostics,
    })
}

/// Convenience wrapper using the default degeneracy gap.
pub fn default_gap() -> f64 {
    tol::DEGENERACY_GAP
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, validate_density};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_state(p0: f64) -> DensityMatrix {
        validate_density(&ComplexMatrix::from_real_diagonal(&[p0, 1.0 - p0])).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
        let m = ComplexMatrix::from_fn(d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::symmetrized(&m)
    }

    #[test]
    fn diagonal_state_with_diagonal_rate_has_no_coupling() {
        let state = diag_state(0.25);
        let rhodot = HermitianMatrix::from_real_diagonal(&[-0.1, 0.1]);
        let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
        assert_eq!(f.populations, alloc::vec![0.25, 0.75]);
        assert!((f.rates[0] + 0.1).abs() < 1e-15);
        assert!((f.rates[1] - 0.1).abs() < 1e-15);
        assert_eq!(f.coupling.max_abs(), 0.0);
        assert_eq!(f.groups.len(), 2);
    }

    #[test]
    fn off_diagonal_rate_yields_expected_coupling() {
        let state = diag_state(0.25);
        let rhodot = pauli_x().scale_re(0.1);
        let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
        // K[0][1] = <0|rhodot|1> / (r_1 - r_0) = 0.1 / 0.5.
        assert!((f.coupling[(0, 1)] - c(0.2, 0.0)).norm() < 1e-14);
        assert!((f.coupling[(1, 0)] + c(0.2, 0.0)).norm() < 1e-14);
        assert!(f.rates[0].abs() < 1e-15);
        assert!(f.rates[1].abs() < 1e-15);
    }

    #[test]
    fn degenerate_cluster_rotates_to_diagonalize_rate() {
        // At rho = I/2 the eigenbasis is arbitrary; the frame must pick the
        // basis where rhodot is diagonal, leaving zero in-cluster coupling.
        let state = validate_density(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))).unwrap();
        let rhodot = pauli_x().scale_re(0.3);
        let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
        assert_eq!(f.groups, alloc::vec![alloc::vec![0, 1]]);
        assert!((f.rates[0] + 0.3).abs() < 1e-13);
        assert!((f.rates[1] - 0.3).abs() < 1e-13);
        assert!(f.coupling.max_abs() < 1e-14);
        assert!(f.implied_rhodot().max_abs_diff(rhodot.matrix()) < 1e-13);
    }

    #[test]
    fn frame_reconstructs_rate_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for d in [2usize, 3, 4] {
            for _ in 0..40 {
                // Random mixed state: normalized square of a random Hermitian.
                let a = random_hermitian(&mut rng, d);
                let sq = a.matrix() * a.matrix();
                let state =
                    validate_density(&sq.scale(c(1.0, 0.0) / sq.trace())).unwrap();
                let mut rhodot = random_hermitian(&mut rng, d);
                // Make it traceless like a physical state derivative.
                let shift = rhodot.trace().re / d as f64;
                rhodot = &rhodot + &HermitianMatrix::identity(d).scale_re(-shift);
                let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
                let recon = f.implied_rhodot();
                assert!(
                    recon.max_abs_diff(rhodot.matrix()) < 1e-11,
                    "dim {d}: reconstruction error {}",
                    recon.max_abs_diff(rhodot.matrix())
                );
                let rate_sum: f64 = f.rates.iter().sum();
                assert!(rate_sum.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_is_anti_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 3);
            let sq = a.matrix() * a.matrix();
            let state = validate_density(&sq.scale(c(1.0, 0.0) / sq.trace())).unwrap();
            let rhodot = random_hermitian(&mut rng, 3);
            let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
            let k = &f.coupling;
            let defect = (k + &k.adjoint()).max_abs();
            assert!(defect < 1e-12);
            for i in 0..3 {
                assert_eq!(k[(i, i)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn coupling_matches_finite_difference_vector_rates() {
        // M(t) = H0 + t H1 with exact Mdot = H1; compare the perturbative
        // eigenvector rate to a phase-aligned central difference.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let h0 = random_hermitian(&mut rng, 3);
            let h1 = random_hermitian(&mut rng, 3).scale_re(0.3);
            let at = |t: f64| &h0 + &h1.scale_re(t);
            let h = 1e-4;
            let center = derivative_frame(&at(0.0), &h1, default_gap()).unwrap();
            let plus = hermitian_eigendecompose(&at(h)).unwrap();
            let minus = hermitian_eigendecompose(&at(-h)).unwrap();
            for k in 0..3 {
                let vc = center.vectors.column(k);
                let align = |vecs: &ComplexMatrix| -> Vec<Complex64> {
                    let col = vecs.column(k);
                    let o = inner(&vc, &col);
                    let phase = o.conj() / o.norm();
                    col.iter().map(|z| z * phase).collect()
                };
                let vp = align(&plus.vectors);
                let vm = align(&minus.vectors);
                let fd: Vec<Complex64> = vp
                    .iter()
                    .zip(&vm)
                    .map(|(p, m)| (p - m) / c(2.0 * h, 0.0))
                    .collect();
                let pt = center.vector_rate(k);
                let err = fd
                    .iter()
                    .zip(&pt)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                assert!(err < 1e-6, "vector rate mismatch {err}");
            }
        }
    }

    #[test]
    fn rephasing_preserves_implied_rate() {
        let state = diag_state(0.3);
        let rhodot = HermitianMatrix::symmetrized(
            &(pauli_x().matrix() + &pauli_z().matrix().scale(c(0.4, 0.0))),
        );
        let f = spectral_frame(0.0, &state, &rhodot, default_gap()).unwrap();
        let g = f.rephased(&[0.7, -1.3]);
        assert!(g.implied_rhodot().max_abs_diff(&f.implied_rhodot()) < 1e-14);
        assert!((g.coupling[(0, 1)].norm() - f.coupling[(0, 1)].norm()).abs() < 1e-15);
    }

    #[test]
    fn matching_undoes_a_level_crossing() {
        // Two frames whose ascending order swaps; matching must follow the
        // eigenvectors, not the sort order.
        let prev = spectral_frame(
            0.0,
            &diag_state(0.4),
            &HermitianMatrix::from_real_diagonal(&[0.2, -0.2]),
            default_gap(),
        )
        .unwrap();
        // Later state: populations crossed, so ascending order now lists the
        // sigma_z-up level second.
        let next = spectral_frame(
            1.0,
            &diag_state(0.55),
            &HermitianMatrix::from_real_diagonal(&[0.2, -0.2]),
            default_gap(),
        )
        .unwrap();
        let (matched, event) = match_frames(&prev, &next);
        assert_eq!(event.permutation, alloc::vec![1, 0]);
        // Outgoing slot 0 still refers to the |0> level, now at 0.55.
        assert!((matched.populations[0] - 0.55).abs() < 1e-15);
        assert!((matched.populations[1] - 0.45).abs() < 1e-15);
        assert!(event.min_overlap_sq > 0.99);
    }

    #[test]
    fn matched_overlaps_are_real_positive() {
        let prev = spectral_frame(
            0.0,
            &diag_state(0.3),
            &pauli_x().scale_re(0.05),
            default_gap(),
        )
        .unwrap();
        let shifted = prev.rephased(&[2.1, -0.4]);
        let (matched, event) = match_frames(&prev, &shifted);
        assert_eq!(event.permutation, alloc::vec![0, 1]);
        for k in 0..2 {
            let o = inner(&prev.vectors.column(k), &matched.vectors.column(k));
            assert!(o.im.abs() < 1e-14);
            assert!(o.re > 0.99);
        }
        // The rephase map on coupling must be undone by matching.
        assert!(matched.coupling.max_abs_diff(&prev.coupling) < 1e-14);
    }

    #[test]
    fn flow_over_trajectory_reports_clean_overlaps() {
        use crate::generators::qubit_bath_generator;
        use crate::propagator::{propagate, IntegratorConfig};
        let gen = qubit_bath_generator(0.25, 1.0).unwrap();
        let rho0 = validate_density(
            &(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))
                + &pauli_x().matrix().scale(c(0.25, 0.0))),
        )
        .unwrap();
        let run = propagate(
            &gen,
            &rho0,
            0.0,
            2.0,
            &IntegratorConfig {
                step: 0.01,
                ..Default::default()
            },
        )
        .unwrap();
        let flow = spectral_flow(&run.trajectory, default_gap()).unwrap();
        assert_eq!(flow.frames.len(), run.trajectory.len());
        assert!(flow.diagnostics.min_overlap_sq > 0.999);
        assert!(flow.diagnostics.ambiguous.is_empty());
        // Populations stay sorted per the initial frame's labels here (no
        // crossing in this window), so no reorderings either.
        assert!(flow.diagnostics.reorderings.is_empty());
    }
}
