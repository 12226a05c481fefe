//! Trajectory construction: fixed-step integration and snapshot ingestion.
//!
//! A [`Trajectory`] is a time-ordered sequence of validated density matrices
//! together with the state derivative at each node. Derivatives come either
//! from the generator itself (when the trajectory is integrated here) or from
//! second-order finite differences (when the caller supplies raw snapshots).

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result, StepRejection};
use crate::generators::LindbladGenerator;
use crate::linalg::{
    eigenvalue_range, Complex64, ComplexMatrix, DensityMatrix, HermitianMatrix, ValidationLimits,
};
use crate::tol;

/// Node spacing of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Uniform { step: f64 },
    NonUniform,
}

/// Where the per-node derivatives came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Evaluated exactly from the generator at each node.
    Generator,
    /// Second-order finite differences of the supplied snapshots.
    FiniteDifference,
}

/// One trajectory node: time, state, and state derivative.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: DensityMatrix,
    pub rhodot: HermitianMatrix,
}

/// Time-ordered density-matrix path with derivatives.
#[derive(Debug, Clone)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
    grid: GridKind,
    source: DerivativeSource,
}

impl Trajectory {
    /// Builds a trajectory from caller-supplied nodes, checking ordering and
    /// dimension consistency. Useful when exact derivatives are known.
    pub fn from_points(points: Vec<TrajectoryPoint>, source: DerivativeSource) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewSnapshots {
                count: points.len(),
            });
        }
        let dim = points[0].state.dim();
        for (i, p) in points.iter().enumerate() {
            if p.state.dim() != dim || p.rhodot.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.state.dim().max(p.rhodot.dim()),
                });
            }
            if i > 0 && !(points[i - 1].t < p.t) {
                return Err(Error::NonIncreasingTimes { index: i });
            }
        }
        let grid = detect_grid(&points);
        Ok(Self {
            points,
            grid,
            source,
        })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].state.dim()
    }

    pub fn grid(&self) -> GridKind {
        self.grid
    }

    pub fn source(&self) -> DerivativeSource {
        self.source
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }

    /// Mixes every state with the maximally mixed one,
    /// `rho <- (1 - delta) rho + delta I / d`, and rescales the stored
    /// derivatives by `1 - delta`. Lifts zero eigenvalues off the rank
    /// boundary so spectral analysis stays defined for pure-state segments.
    pub fn regularized(&self, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                message: format!("mixing weight must lie in [0, 1), got {delta}"),
            });
        }
        if delta == 0.0 {
            return Ok(self.clone());
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(TrajectoryPoint {
                    t: p.t,
                    state: p.state.mixed_with_identity(delta)?,
                    rhodot: p.rhodot.scale_re(1.0 - delta),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            grid: self.grid,
            source: self.source,
        })
    }
}

fn detect_grid(points: &[TrajectoryPoint]) -> GridKind {
    let step = points[1].t - points[0].t;
    let uniform = points
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - step).abs() <= 1e-9 * step.abs());
    if uniform {
        GridKind::Uniform { step }
    } else {
        GridKind::NonUniform
    }
}

/// Fixed-step integrator controls.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    /// Requested step; the actual step divides the window exactly.
    pub step: f64,
    /// Replace the state with its Hermitian part after every step.
    pub hermitize_each_step: bool,
    /// Rescale the trace to one after every step. Off by default so that
    /// trace drift remains visible as a diagnostic.
    pub renormalize_trace: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: tol::DEFAULT_STEP,
            hermitize_each_step: true,
            renormalize_trace: false,
        }
    }
}

/// Integration result: the trajectory plus the worst trace drift seen before
/// any renormalization.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub trajectory: Trajectory,
    pub max_trace_drift: f64,
}

/// Checks a raw integration state against the loose in-flight envelope.
fn check_envelope(state: &ComplexMatrix, limits: &ValidationLimits) -> Result<()> {
    let drift = (state.trace() - Complex64::new(1.0, 0.0)).norm();
    if drift > limits.trace {
        return Err(Error::IntegrationFailure {
            t: f64::NAN,
            rejection: StepRejection::TraceDrift { drift },
        });
    }
    let (min_eig, _) = eigenvalue_range(&HermitianMatrix::symmetrized(state))?;
    if min_eig < limits.eigenvalue_floor {
        return Err(Error::IntegrationFailure {
            t: f64::NAN,
            rejection: StepRejection::EigenvalueFloor {
                eigenvalue: min_eig,
            },
        });
    }
    Ok(())
}

fn stamp_time(err: Error, t: f64) -> Error {
    match err {
        Error::IntegrationFailure { rejection, .. } => Error::IntegrationFailure { t, rejection },
        other => other,
    }
}

/// Classical fourth-order Runge-Kutta over `[t0, tf]`.
///
/// The step count is `round((tf - t0) / step)` so the grid is exactly uniform
/// and lands on `tf`. Every accepted state must stay inside the integration
/// envelope (trace drift and eigenvalue floor); a violation aborts with the
/// offending time. Stored derivatives are generator evaluations at the nodes.
pub fn propagate(
    generator: &LindbladGenerator,
    initial: &DensityMatrix,
    t0: f64,
    tf: f64,
    config: &IntegratorConfig,
) -> Result<Propagation> {
    if initial.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            got: initial.dim(),
        });
    }
    if !(config.step > 0.0) || !config.step.is_finite() {
        return Err(Error::InvalidParameter {
            name: "step",
            message: format!("step must be finite and positive, got {}", config.step),
        });
    }
    if !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
        return Err(Error::InvalidParameter {
            name: "window",
            message: format!("need finite t0 < tf, got [{t0}, {tf}]"),
        });
    }

    let span = tf - t0;
    let n_steps = ((span / config.step).round() as usize).max(1);
    let h = span / n_steps as f64;
    let limits = ValidationLimits::integration();

    let mut current: ComplexMatrix = initial.matrix().clone();
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut max_drift = (current.trace() - Complex64::new(1.0, 0.0)).norm();

    let store = |t: f64, raw: &ComplexMatrix, points: &mut Vec<TrajectoryPoint>| -> Result<()> {
        let state =
            DensityMatrix::with_limits(raw.clone(), &limits).map_err(|e| stamp_time(e, t))?;
        let rhodot = HermitianMatrix::symmetrized(&generator.apply(t, raw)?);
        points.push(TrajectoryPoint { t, state, rhodot });
        Ok(())
    };

    store(t0, &current, &mut points)?;

    for i in 0..n_steps {
        let t = t0 + i as f64 * h;
        let t_next = if i + 1 == n_steps {
            tf
        } else {
            t0 + (i + 1) as f64 * h
        };

        let k1 = generator.apply(t, &current)?;
        let mid1 = &current + &k1.scale(Complex64::new(0.5 * h, 0.0));
        let k2 = generator.apply(t + 0.5 * h, &mid1)?;
        let mid2 = &current + &k2.scale(Complex64::new(0.5 * h, 0.0));
        let k3 = generator.apply(t + 0.5 * h, &mid2)?;
        let end = &current + &k3.scale(Complex64::new(h, 0.0));
        let k4 = generator.apply(t_next, &end)?;

        let mut increment = &k1 + &k4;
        increment = &increment + &(&k2 + &k3).scale(Complex64::new(2.0, 0.0));
        current = &current + &increment.scale(Complex64::new(h / 6.0, 0.0));

        if config.hermitize_each_step {
            current = current.hermitian_part();
        }
        let drift = (current.trace() - Complex64::new(1.0, 0.0)).norm();
        max_drift = max_drift.max(drift);
        if config.renormalize_trace {
            let trace = current.trace();
            current = current.scale(Complex64::new(1.0, 0.0) / trace);
        }
        check_envelope(&current, &limits).map_err(|e| stamp_time(e, t_next))?;
        store(t_next, &current, &mut points)?;
    }

    Ok(Propagation {
        trajectory: Trajectory {
            points,
            grid: GridKind::Uniform { step: h },
            source: DerivativeSource::Generator,
        },
        max_trace_drift: max_drift,
    })
}

/// Derivative weights at `x` for the quadratic through three nodes.
fn lagrange3_weights(ts: [f64; 3], x: f64) -> [f64; 3] {
    let [ta, tb, tc] = ts;
    [
        (2.0 * x - tb - tc) / ((ta - tb) * (ta - tc)),
        (2.0 * x - ta - tc) / ((tb - ta) * (tb - tc)),
        (2.0 * x - ta - tb) / ((tc - ta) * (tc - tb)),
    ]
}

/// Builds a trajectory from raw state snapshots on a (possibly non-uniform)
/// strictly increasing time grid.
///
/// Each snapshot is validated as a density matrix; failures carry the
/// snapshot index. Derivatives are second-order three-point stencils: central
/// in the interior, one-sided at the ends, exact for paths quadratic in time.
pub fn ingest_snapshots(times: &[f64], snapshots: &[ComplexMatrix]) -> Result<Trajectory> {
    if times.len() != snapshots.len() {
        return Err(Error::InvalidParameter {
            name: "times",
            message: format!(
                "got {} times for {} snapshots",
                times.len(),
                snapshots.len()
            ),
        });
    }
    if times.len() < 3 {
        return Err(Error::TooFewSnapshots { count: times.len() });
    }
    for (i, pair) in times.windows(2).enumerate() {
        if !(pair[0] < pair[1]) {
            return Err(Error::NonIncreasingTimes { index: i + 1 });
        }
    }
    let dim = snapshots[0].dim();
    let mut states = Vec::with_capacity(snapshots.len());
    for (i, raw) in snapshots.iter().enumerate() {
        if raw.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: raw.dim(),
            });
        }
        let state = DensityMatrix::new(raw.clone()).map_err(|e| Error::InvalidSnapshot {
            index: i,
            source: Box::new(e),
        })?;
        states.push(state);
    }

    let n = times.len();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        // Three-node window: shifted inward at the ends, centered otherwise.
        let base = if i == 0 {
            0
        } else if i == n - 1 {
            n - 3
        } else {
            i - 1
        };
        let ts = [times[base], times[base + 1], times[base + 2]];
        let w = lagrange3_weights(ts, times[i]);
        let mut rhodot = ComplexMatrix::zeros(dim);
        for (k, weight) in w.iter().enumerate() {
            rhodot = &rhodot + &states[base + k].matrix().scale(Complex64::new(*weight, 0.0));
        }
        points.push(TrajectoryPoint {
            t: times[i],
            state: states[i].clone(),
            rhodot: HermitianMatrix::symmetrized(&rhodot),
        });
    }

    let grid = detect_grid(&points);
    Ok(Trajectory {
        points,
        grid,
        source: DerivativeSource::FiniteDifference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::qubit_bath_generator;
    use crate::linalg::{pauli_z, validate_density};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diagonal_state(p0: f64) -> DensityMatrix {
        let m = ComplexMatrix::from_fn(2, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i == 0 {
                c(p0, 0.0)
            } else {
                c(1.0 - p0, 0.0)
            }
        });
        validate_density(&m).unwrap()
    }

    #[test]
    fn diagonal_decay_matches_closed_form() {
        // With a sigma_x bath the sigma_z component decays as exp(-2 g t) and
        // a diagonal start stays diagonal.
        let (g, w) = (0.3, 1.0);
        let gen = qubit_bath_generator(g, w).unwrap();
        let rho0 = diagonal_state(0.9);
        let run = propagate(
            &gen,
            &rho0,
            0.0,
            1.0,
            &IntegratorConfig {
                step: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        let traj = &run.trajectory;
        assert_eq!(traj.len(), 1001);
        assert_eq!(traj.grid(), GridKind::Uniform { step: 1e-3 });
        let final_point = traj.points().last().unwrap();
        let z = final_point.state.trace_product_re(&pauli_z());
        let expected = 0.8 * (-2.0 * g * 1.0f64).exp();
        assert!((z - expected).abs() < 1e-12);
        assert!(final_point.state.matrix()[(0, 1)].norm() < 1e-15);
        assert!(run.max_trace_drift < 1e-13);
    }

    #[test]
    fn node_times_are_exact() {
        let gen = qubit_bath_generator(0.2, 0.5).unwrap();
        let run = propagate(
            &gen,
            &diagonal_state(0.7),
            0.0,
            2.0,
            &IntegratorConfig {
                step: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        let times: Vec<f64> = run.trajectory.times().collect();
        assert_eq!(times.len(), 21);
        assert_eq!(*times.last().unwrap(), 2.0);
        for (i, t) in times.iter().enumerate() {
            assert!((t - 0.1 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order_convergence() {
        // Coarse steps so truncation error dominates roundoff.
        let (g, w) = (0.3, 0.8);
        let gen = qubit_bath_generator(g, w).unwrap();
        let rho0 = diagonal_state(0.9);
        let exact = 0.8 * (-2.0 * g * 2.0f64).exp();
        let mut errors = Vec::new();
        for step in [0.25, 0.125] {
            let run = propagate(
                &gen,
                &rho0,
                0.0,
                2.0,
                &IntegratorConfig {
                    step,
                    ..Default::default()
                },
            )
            .unwrap();
            let z = run
                .trajectory
                .points()
                .last()
                .unwrap()
                .state
                .trace_product_re(&pauli_z());
            errors.push((z - exact).abs());
        }
        let ratio = errors[0] / errors[1];
        assert!(
            (12.0..24.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
    }

    #[test]
    fn stored_derivative_equals_generator_evaluation() {
        let gen = qubit_bath_generator(0.4, 1.2).unwrap();
        let run = propagate(
            &gen,
            &diagonal_state(0.6),
            0.0,
            0.5,
            &IntegratorConfig {
                step: 0.05,
                ..Default::default()
            },
        )
        .unwrap();
        for p in run.trajectory.points() {
            let direct = gen.apply(p.t, p.state.matrix()).unwrap();
            assert!(p.rhodot.max_abs_diff(&direct) < 1e-14);
        }
    }

    #[test]
    fn finite_difference_is_exact_on_quadratic_paths() {
        // rho(t) = I/2 + (0.3 t - 0.2 t^2) sigma_z / 2 on a non-uniform grid.
        let times = [0.0, 0.1, 0.25, 0.45, 0.7, 1.0];
        let path = |t: f64| 0.3 * t - 0.2 * t * t;
        let rate = |t: f64| 0.3 - 0.4 * t;
        let snaps: Vec<ComplexMatrix> = times
            .iter()
            .map(|&t| {
                let mut m = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
                m = &m + &pauli_z().matrix().scale(c(0.5 * path(t), 0.0));
                m
            })
            .collect();
        let traj = ingest_snapshots(&times, &snaps).unwrap();
        assert_eq!(traj.grid(), GridKind::NonUniform);
        assert_eq!(traj.source(), DerivativeSource::FiniteDifference);
        for p in traj.points() {
            let expected = pauli_z().scale_re(0.5 * rate(p.t));
            assert!(p.rhodot.max_abs_diff(&expected) < 1e-13);
        }
    }

    #[test]
    fn ingest_detects_uniform_grids() {
        let times: Vec<f64> = (0..5).map(|i| 0.2 * i as f64).collect();
        let snaps: Vec<ComplexMatrix> = times
            .iter()
            .map(|_| ComplexMatrix::identity(2).scale(c(0.5, 0.0)))
            .collect();
        let traj = ingest_snapshots(&times, &snaps).unwrap();
        assert!(matches!(traj.grid(), GridKind::Uniform { .. }));
    }

    #[test]
    fn ingest_rejects_bad_input() {
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(matches!(
            ingest_snapshots(&[0.0, 1.0], &[half.clone(), half.clone()]),
            Err(Error::TooFewSnapshots { count: 2 })
        ));
        assert!(matches!(
            ingest_snapshots(&[0.0, 1.0, 1.0], &[half.clone(), half.clone(), half.clone()]),
            Err(Error::NonIncreasingTimes { index: 2 })
        ));
        let bad = ComplexMatrix::identity(2); // trace 2
        match ingest_snapshots(&[0.0, 1.0, 2.0], &[half.clone(), bad, half.clone()]) {
            Err(Error::InvalidSnapshot { index: 1, source }) => {
                assert!(matches!(*source, Error::InvalidDensity { .. }));
            }
            other => panic!("expected snapshot rejection, got {other:?}"),
        }
    }

    #[test]
    fn envelope_rejects_bad_states() {
        let limits = ValidationLimits::integration();
        let mut negative = ComplexMatrix::zeros(2);
        negative[(0, 0)] = c(1.1, 0.0);
        negative[(1, 1)] = c(-0.1, 0.0);
        assert!(matches!(
            check_envelope(&negative, &limits),
            Err(Error::IntegrationFailure {
                rejection: StepRejection::EigenvalueFloor { .. },
                ..
            })
        ));
        let drifted = ComplexMatrix::identity(2).scale(c(0.6, 0.0));
        assert!(matches!(
            check_envelope(&drifted, &limits),
            Err(Error::IntegrationFailure {
                rejection: StepRejection::TraceDrift { .. },
                ..
            })
        ));
    }

    #[test]
    fn propagate_validates_parameters() {
        let gen = qubit_bath_generator(0.1, 1.0).unwrap();
        let rho0 = diagonal_state(0.5);
        let bad_step = IntegratorConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(propagate(&gen, &rho0, 0.0, 1.0, &bad_step).is_err());
        let cfg = IntegratorConfig::default();
        assert!(propagate(&gen, &rho0, 1.0, 1.0, &cfg).is_err());
        assert!(propagate(&gen, &rho0, 2.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn regularization_mixes_states_and_scales_rates() {
        let gen = qubit_bath_generator(0.3, 1.0).unwrap();
        let run = propagate(
            &gen,
            &diagonal_state(1.0),
            0.0,
            0.2,
            &IntegratorConfig {
                step: 0.02,
                ..Default::default()
            },
        )
        .unwrap();
        let delta = 1e-6;
        let reg = run.trajectory.regularized(delta).unwrap();
        for (orig, mixed) in run.trajectory.points().iter().zip(reg.points()) {
            let expected_rhodot = orig.rhodot.scale_re(1.0 - delta);
            assert!(mixed.rhodot.max_abs_diff(&expected_rhodot) < 1e-18);
            let lifted = &orig.state.matrix().scale(c(1.0 - delta, 0.0))
                + &ComplexMatrix::identity(2).scale(c(delta / 2.0, 0.0));
            assert!(mixed.state.max_abs_diff(&lifted) < 1e-18);
        }
        assert!(run.trajectory.regularized(1.5).is_err());
        assert!(run.trajectory.regularized(-0.1).is_err());
    }

    #[test]
    fn from_points_checks_ordering() {
        let mk = |t: f64| TrajectoryPoint {
            t,
            state: diagonal_state(0.5),
            rhodot: HermitianMatrix::zeros(2),
        };
        assert!(Trajectory::from_points(
            alloc::vec![mk(0.0), mk(1.0), mk(2.0)],
            DerivativeSource::Generator
        )
        .is_ok());
        assert!(matches!(
            Trajectory::from_points(
                alloc::vec![mk(0.0), mk(1.0), mk(0.5)],
                DerivativeSource::Generator
            ),
            Err(Error::NonIncreasingTimes { index: 2 })
        ));
    }
}
