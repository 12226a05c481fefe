//! Numerical thresholds shared across the crate.
//!
//! Everything is dimensionless. Tolerances on matrices are understood in the
//! max-abs (entrywise) norm unless stated otherwise.

/// Hermiticity acceptance: `|M - M^dag|_max <= HERMITICITY_TOL * (1 + |M|_max)`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Allowed deviation of `Tr rho` from one in a validated state.
pub const TRACE_TOL: f64 = 1e-10;

/// Most negative eigenvalue accepted in a validated state.
pub const PSD_FLOOR: f64 = -1e-12;

/// Populations at or below this floor contribute zero to entropies.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Support floor for the relative-entropy domain check.
pub const SUPPORT_FLOOR: f64 = 1e-12;

/// The Jacobi eigensolver sweeps until the off-diagonal Frobenius mass drops
/// below this fraction of the Frobenius norm of the input.
pub const JACOBI_RELATIVE_OFFDIAG: f64 = 1e-14;

/// Eigenvalues closer than this gap are treated as one degenerate block.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Smallest population treated as nonzero rank by the virtual-Hamiltonian
/// and counterdiabatic constructions.
pub const RANK_FLOOR: f64 = 1e-12;

/// Default mixing weight `delta` in `(1 - delta) rho + delta I/d`, the
/// regularization applied to rank-deficient trajectories on request.
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;

/// Most negative transient eigenvalue tolerated during integration.
pub const INTEGRATION_PSD_FLOOR: f64 = -1e-8;

/// Largest `|Tr rho - 1|` tolerated during integration.
pub const INTEGRATION_TRACE_DRIFT: f64 = 1e-6;

/// Imaginary residue above this in a nominally real rate is an error.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Default integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;
