//! Lindblad-form generators with time-dependent Hamiltonians.
//!
//! A generator is a Hamiltonian schedule plus a set of weighted jump
//! operators. Applied to a state it produces the right-hand side
//!
//! ```text
//! rhodot = -i[H(t), rho] + sum_j gamma_j (L_j rho L_j' - {L_j' L_j, rho} / 2)
//! ```
//!
//! where a prime denotes the adjoint. The map is linear in `rho`, so it can
//! be evaluated on arbitrary matrices (integrator stages are not exactly
//! trace-one). Jump rates are constant; time dependence enters through the
//! Hamiltonian only.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_z, Complex64, ComplexMatrix, HermitianMatrix};

/// Piecewise cubic polynomial on a closed interval.
///
/// Each segment is stored in local coordinates `x = t - breaks[i]` so that
/// evaluation stays well conditioned far from the origin. The derivative is
/// exact, not a finite difference.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    /// Coefficients `[c0, c1, c2, c3]` per segment: `c0 + c1 x + c2 x^2 + c3 x^3`.
    segments: Vec<[f64; 4]>,
}

impl PiecewisePoly {
    /// Builds a piecewise polynomial from strictly increasing breakpoints and
    /// one coefficient row per segment.
    pub fn new(breaks: Vec<f64>, segments: Vec<[f64; 4]>) -> Result<Self> {
        if breaks.len() < 2 || segments.len() + 1 != breaks.len() {
            return Err(Error::InvalidParameter {
                name: "breaks",
                message: format!(
                    "need one more breakpoint than segments, got {} breakpoints for {} segments",
                    breaks.len(),
                    segments.len()
                ),
            });
        }
        for pair in breaks.windows(2) {
            if !(pair[0] < pair[1]) || !pair[0].is_finite() || !pair[1].is_finite() {
                return Err(Error::InvalidParameter {
                    name: "breaks",
                    message: String::from("breakpoints must be finite and strictly increasing"),
                });
            }
        }
        if segments
            .iter()
            .any(|c| c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidParameter {
                name: "segments",
                message: String::from("coefficients must be finite"),
            });
        }
        Ok(Self { breaks, segments })
    }

    /// Single constant segment over `[start, end]`.
    pub fn constant(value: f64, start: f64, end: f64) -> Result<Self> {
        Self::new(alloc::vec![start, end], alloc::vec![[value, 0.0, 0.0, 0.0]])
    }

    /// Single segment `c0 + c1 (t - start)` over `[start, end]`.
    pub fn linear(c0: f64, c1: f64, start: f64, end: f64) -> Result<Self> {
        Self::new(alloc::vec![start, end], alloc::vec![[c0, c1, 0.0, 0.0]])
    }

    /// Closed domain covered by the segments.
    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    fn segment_index(&self, t: f64) -> Result<usize> {
        let (start, end) = self.domain();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfDomain { t, start, end });
        }
        // partition_point returns the count of breakpoints <= t; the right
        // endpoint maps onto the final segment.
        let idx = self.breaks.partition_point(|b| *b <= t);
        Ok(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    /// Value at `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let i = self.segment_index(t)?;
        let x = t - self.breaks[i];
        let [c0, c1, c2, c3] = self.segments[i];
        Ok(c0 + x * (c1 + x * (c2 + x * c3)))
    }

    /// Exact derivative at `t`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let i = self.segment_index(t)?;
        let x = t - self.breaks[i];
        let [_, c1, c2, c3] = self.segments[i];
        Ok(c1 + x * (2.0 * c2 + x * (3.0 * c3)))
    }
}

/// One driven term of a Hamiltonian: a scalar envelope times a fixed operator.
#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub envelope: PiecewisePoly,
    pub operator: HermitianMatrix,
}

/// Time-dependent Hamiltonian as a constant part plus drive terms.
#[derive(Debug, Clone)]
pub enum HamiltonianSchedule {
    Constant(HermitianMatrix),
    Driven {
        base: HermitianMatrix,
        drives: Vec<DriveTerm>,
    },
}

impl HamiltonianSchedule {
    /// Builds a driven schedule, checking that every drive operator matches
    /// the base dimension.
    pub fn driven(base: HermitianMatrix, drives: Vec<DriveTerm>) -> Result<Self> {
        for drive in &drives {
            if drive.operator.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    got: drive.operator.dim(),
                });
            }
        }
        Ok(Self::Driven { base, drives })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(h) => h.dim(),
            Self::Driven { base, .. } => base.dim(),
        }
    }

    /// `H(t)`.
    pub fn evaluate(&self, t: f64) -> Result<HermitianMatrix> {
        match self {
            Self::Constant(h) => Ok(h.clone()),
            Self::Driven { base, drives } => {
                let mut h = base.clone();
                for drive in drives {
                    h = &h + &drive.operator.scale_re(drive.envelope.value(t)?);
                }
                Ok(h)
            }
        }
    }

    /// `dH/dt` at `t`, exact for polynomial envelopes.
    pub fn evaluate_dot(&self, t: f64) -> Result<HermitianMatrix> {
        match self {
            Self::Constant(h) => Ok(HermitianMatrix::zeros(h.dim())),
            Self::Driven { base, drives } => {
                let mut hdot = HermitianMatrix::zeros(base.dim());
                for drive in drives {
                    hdot = &hdot + &drive.operator.scale_re(drive.envelope.derivative(t)?);
                }
                Ok(hdot)
            }
        }
    }
}

/// Jump operator with a nonnegative rate.
///
/// The operator need not be Hermitian or normal; lowering and raising
/// operators are the typical case.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    operator: ComplexMatrix,
    adjoint: ComplexMatrix,
    /// Precomputed `L' L`, reused on every application.
    normal_product: ComplexMatrix,
    rate: f64,
}

impl JumpTerm {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate",
                message: format!("jump rate must be finite and nonnegative, got {rate}"),
            });
        }
        let adjoint = operator.adjoint();
        let normal_product = &adjoint * &operator;
        Ok(Self {
            operator,
            adjoint,
            normal_product,
            rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }
}

/// Hamiltonian schedule plus jump terms; the full open-system generator.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: HamiltonianSchedule,
    jumps: Vec<JumpTerm>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: HamiltonianSchedule, jumps: Vec<JumpTerm>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for jump in &jumps {
            if jump.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: jump.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn schedule(&self) -> &HamiltonianSchedule {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    /// `H(t)`.
    pub fn hamiltonian(&self, t: f64) -> Result<HermitianMatrix> {
        self.hamiltonian.evaluate(t)
    }

    /// `dH/dt` at `t`.
    pub fn hamiltonian_dot(&self, t: f64) -> Result<HermitianMatrix> {
        self.hamiltonian.evaluate_dot(t)
    }

    /// Dissipative part alone, applied to an arbitrary matrix.
    pub fn dissipator(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(rho.dim());
        for jump in &self.jumps {
            if jump.rate == 0.0 {
                continue;
            }
            let sandwich = &(&jump.operator * rho) * &jump.adjoint;
            let anti = &(&jump.normal_product * rho) + &(rho * &jump.normal_product);
            let term = &sandwich - &anti.scale(Complex64::new(0.5, 0.0));
            out = &out + &term.scale(Complex64::new(jump.rate, 0.0));
        }
        Ok(out)
    }

    /// Full right-hand side `-i[H(t), rho]` plus the dissipator.
    pub fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        let h = self.hamiltonian.evaluate(t)?;
        let unitary_part = h.commutator(rho).scale(Complex64::new(0.0, -1.0));
        Ok(&unitary_part + &self.dissipator(rho)?)
    }
}

/// Qubit with `H = omega_z * sigma_z` and a single `sigma_x` jump at rate
/// `gamma`: the dissipator collapses to `gamma (sigma_x rho sigma_x - rho)`.
pub fn qubit_bath_generator(gamma: f64, omega_z: f64) -> Result<LindbladGenerator> {
    if !omega_z.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega_z",
            message: format!("level splitting must be finite, got {omega_z}"),
        });
    }
    let h = pauli_z().scale_re(omega_z);
    let jump = JumpTerm::new(pauli_x().matrix().clone(), gamma)?;
    LindbladGenerator::new(HamiltonianSchedule::Constant(h), alloc::vec![jump])
}
