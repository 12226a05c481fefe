use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// One reason a matrix failed density-operator validation. Validation
/// collects every violated invariant instead of stopping at the first.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityViolation {
    /// `|M - M^dag|_max` exceeded the Hermiticity budget.
    NotHermitian { defect: f64, limit: f64 },
    /// Trace differs from one beyond tolerance.
    Trace { trace_re: f64, trace_im: f64 },
    /// An eigenvalue lies below the positivity floor.
    NegativeEigenvalue { index: usize, eigenvalue: f64 },
}

impl fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityViolation::NotHermitian { defect, limit } => {
                write!(f, "not Hermitian: defect {defect:.3e} exceeds {limit:.3e}")
            }
            DensityViolation::Trace { trace_re, trace_im } => {
                write!(f, "trace is not 1 (got {trace_re} + {trace_im}i)")
            }
            DensityViolation::NegativeEigenvalue { index, eigenvalue } => {
                write!(f, "eigenvalue {index} is negative ({eigenvalue:.3e})")
            }
        }
    }
}

/// Why a propagation step was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRejection {
    /// Smallest eigenvalue fell below the integration floor.
    EigenvalueFloor { eigenvalue: f64 },
    /// `|Tr rho - 1|` exceeded the drift budget.
    TraceDrift { drift: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands have incompatible dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// A matrix is not a valid density operator; lists every failed check.
    InvalidDensity { violations: Vec<DensityViolation> },
    /// The Jacobi eigensolver did not reach its threshold in the sweep budget.
    EigenIterationLimit { offdiag: f64, threshold: f64 },
    /// `rho` has weight outside the support of `sigma`.
    SupportViolation { index: usize, eigenvalue: f64, weight: f64 },
    /// A scalar argument is out of range (non-finite, non-positive, ...).
    InvalidParameter { name: &'static str, message: String },
    /// Evaluation time lies outside a schedule's domain.
    OutOfDomain { t: f64, start: f64, end: f64 },
    /// A population is too small for the counterdiabatic construction.
    RankDeficient { index: usize, eigenvalue: f64, t: Option<f64> },
    /// The integrator left the physical envelope at time `t`.
    IntegrationFailure { t: f64, rejection: StepRejection },
    /// Snapshot ingestion needs at least three states.
    TooFewSnapshots { count: usize },
    /// A single snapshot failed validation.
    InvalidSnapshot { index: usize, source: Box<Error> },
    /// Grid times must increase strictly; `index` is the first offender.
    NonIncreasingTimes { index: usize },
    /// Two per-point sequences do not share a time grid.
    GridMismatch { index: usize, left: f64, right: f64 },
    /// A nominally real quantity came out with too much imaginary residue.
    ImaginaryResidue { name: &'static str, residue: f64, limit: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidDensity { violations } => {
                write!(f, "not a density operator:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            Error::EigenIterationLimit { offdiag, threshold } => write!(
                f,
                "eigensolver stalled: off-diagonal mass {offdiag:.3e} above threshold {threshold:.3e}"
            ),
            Error::SupportViolation { index, eigenvalue, weight } => write!(
                f,
                "support violation: sigma eigenvalue {index} is {eigenvalue:.3e} but carries rho weight {weight:.3e}"
            ),
            Error::InvalidParameter { name, message } => write!(f, "invalid `{name}`: {message}"),
            Error::OutOfDomain { t, start, end } => {
                write!(f, "t = {t} outside schedule domain [{start}, {end}]")
            }
            Error::RankDeficient { index, eigenvalue, t } => {
                write!(f, "rank deficiency: population {index} is {eigenvalue:.3e}")?;
                if let Some(t) = t {
                    write!(f, " at t = {t}")?;
                }
                write!(f, " (consider identity regularization)")
            }
            Error::IntegrationFailure { t, rejection } => {
                write!(f, "integration failed at t = {t}: ")?;
                match rejection {
                    StepRejection::EigenvalueFloor { eigenvalue } => {
                        write!(f, "eigenvalue {eigenvalue:.3e} below floor")
                    }
                    StepRejection::TraceDrift { drift } => {
                        write!(f, "trace drift {drift:.3e} over budget")
                    }
                }
            }
            Error::TooFewSnapshots { count } => {
                write!(f, "need at least 3 snapshots for derivatives, got {count}")
            }
            Error::InvalidSnapshot { index, source } => {
                write!(f, "snapshot {index} invalid: {source}")
            }
            Error::NonIncreasingTimes { index } => {
                write!(f, "times must increase strictly (violated at index {index})")
            }
            Error::GridMismatch { index, left, right } => {
                write!(f, "time grids differ at index {index}: {left} vs {right}")
            }
            Error::ImaginaryResidue { name, residue, limit } => write!(
                f,
                "{name} has imaginary residue {residue:.3e} (limit {limit:.3e})"
            ),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::InvalidSnapshot { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
