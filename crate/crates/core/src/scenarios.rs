//! Built-in qubit scenarios with closed-form reference histories.
//!
//! Five named setups share one template, `H = w(t) sigma_z`, and differ in
//! the bath and the initial state. Four use a transverse `sigma_x` bath at a
//! fixed splitting (the unitary one at zero coupling); the fifth ramps the
//! splitting linearly against a raising/lowering pair with constant rates.
//! Every scenario evaluates its exact Bloch vector and every ledger rate in
//! closed form, so propagation and analysis can be checked against hand
//! algebra instead of against the code under test.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::generators::{
    qubit_bath_generator, DriveTerm, HamiltonianSchedule, JumpTerm, LindbladGenerator,
    PiecewisePoly,
};
use crate::linalg::{pauli_z, Complex64, ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::propagator::{propagate, IntegratorConfig, Propagation};
#[allow(unused_imports)] // f64 math comes from the trait in no_std builds
use num_traits::Float;

/// Normalization of the level splitting: `H = omega0 sigma_z` or
/// `H = (omega0 / 2) sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Sz,
    SzHalf,
}

impl Convention {
    /// Factor applied to `omega0` when forming the Hamiltonian.
    pub fn scale(self) -> f64 {
        match self {
            Self::Sz => 1.0,
            Self::SzHalf => 0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Sz => "sz",
            Self::SzHalf => "sz-half",
        }
    }
}

/// Physical parameters of a catalog scenario.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioParams {
    /// Bath coupling rate; zero only for the closed scenario.
    pub gamma: f64,
    /// Base level splitting before the convention scale.
    pub omega0: f64,
    /// Bath inverse temperature used for virtual levels and entropy flow.
    pub beta: f64,
    /// Analysis window start.
    pub t0: f64,
    /// Analysis window end.
    pub tf: f64,
    /// Linear splitting rate `d omega0 / dt`; nonzero only for the ramp.
    pub ramp_rate: f64,
    pub convention: Convention,
}

/// Whether the entropy-production bound is certified for a scenario, and at
/// which inverse temperature the audit should run.
#[derive(Debug, Clone, Copy)]
pub struct BoundApplicability {
    pub applicable: bool,
    /// Audit temperature when it differs from the scenario `beta`; `None`
    /// means the user-supplied value applies directly.
    pub beta_effective: Option<f64>,
    pub note: &'static str,
}

/// The five catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Thermal start relaxing in the transverse bath; populations move in a
    /// fixed eigenbasis, so all energy flow is heat.
    ThermalStart,
    /// Pure `+x` start; every energy rate vanishes although the state keeps
    /// precessing and losing purity.
    TransverseStart,
    /// Tilted mixed start; heat flows while the eigenbasis rotates.
    TiltedStart,
    /// Zero coupling; closed precession with all thermodynamic rates zero.
    Unitary,
    /// Linear splitting ramp against a fixed-rate raising/lowering pair.
    DrivenRamp,
}

const ALL_KINDS: [ScenarioKind; 5] = [
    ScenarioKind::ThermalStart,
    ScenarioKind::TransverseStart,
    ScenarioKind::TiltedStart,
    ScenarioKind::Unitary,
    ScenarioKind::DrivenRamp,
];

/// Closed-form state and rate record at one time.
#[derive(Debug, Clone)]
pub struct ReferenceRecord {
    pub t: f64,
    pub state: DensityMatrix,
    /// Bloch components `(x, y, z)` of the state.
    pub bloch: [f64; 3],
    /// State eigenvalues in ascending order.
    pub populations: [f64; 2],
    /// Internal energy `Tr[rho H]`.
    pub u: f64,
    pub udot: f64,
    pub qdot_conv: f64,
    pub wdot_conv: f64,
    pub qdot_tbsta: f64,
    pub wdot_tbsta: f64,
    pub wdot_cd: f64,
    pub sdot: f64,
    pub sirdot: f64,
    pub qdot_sc: f64,
    pub wdot_sc: f64,
}

/// A named dynamics setup with generator, initial state, and closed-form
/// reference history.
#[derive(Debug, Clone)]
pub struct Scenario {
    kind: ScenarioKind,
    params: ScenarioParams,
    default_delta: f64,
    bound: BoundApplicability,
}

impl Scenario {
    /// Builds the catalog entry for `kind` with default parameters:
    /// `gamma = 0.1`, `omega0 = 1`, window `[0, 10]`. The pure-start case
    /// pins its analysis window to `[1e-3, 10]` because the state is rank
    /// deficient exactly at zero; mixing with `default_delta()` of identity
    /// is the documented alternative for analyses that must include zero.
    pub fn from_kind(kind: ScenarioKind, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let (gamma, t0, ramp_rate, default_delta) = match kind {
            ScenarioKind::Unitary => (0.0, 0.0, 0.0, 0.0),
            ScenarioKind::TransverseStart => (0.1, 1e-3, 0.0, 1e-10),
            ScenarioKind::DrivenRamp => (0.1, 0.0, 1e-3, 0.0),
            _ => (0.1, 0.0, 0.0, 0.0),
        };
        let params = ScenarioParams {
            gamma,
            omega0: 1.0,
            beta,
            t0,
            tf: 10.0,
            ramp_rate,
            convention: Convention::Sz,
        };
        Ok(Self {
            kind,
            params,
            default_delta,
            bound: bound_metadata(kind),
        })
    }

    /// Looks up a scenario by its catalog name.
    pub fn by_name(name: &str, beta: f64) -> Result<Self> {
        let kind = ALL_KINDS
            .iter()
            .copied()
            .find(|k| kind_name(*k) == name)
            .ok_or_else(|| Error::InvalidParameter {
                name: "scenario",
                message: format!(
                    "unknown scenario '{name}'; available: case-i, case-ii, case-iii, \
                     unitary, driven-ramp"
                ),
            })?;
        Self::from_kind(kind, beta)
    }

    /// All five scenarios at a common bath temperature.
    pub fn catalog(beta: f64) -> Result<Vec<Self>> {
        ALL_KINDS
            .iter()
            .map(|kind| Self::from_kind(*kind, beta))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        kind_name(self.kind)
    }

    pub fn summary(&self) -> &'static str {
        match self.kind {
            ScenarioKind::ThermalStart => {
                "thermal start in a transverse bath: fixed eigenbasis, all energy flow is heat"
            }
            ScenarioKind::TransverseStart => {
                "pure +x start: the state precesses and mixes while every energy rate vanishes"
            }
            ScenarioKind::TiltedStart => {
                "tilted mixed start: heat leaves the system while the eigenbasis rotates"
            }
            ScenarioKind::Unitary => {
                "closed precession at zero coupling: all thermodynamic rates vanish"
            }
            ScenarioKind::DrivenRamp => {
                "slow linear splitting ramp against fixed-rate raising/lowering jumps"
            }
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn bound(&self) -> &BoundApplicability {
        &self.bound
    }

    /// Identity admixture recommended when the analysis must include a rank
    /// deficient instant; zero when the default window never hits one.
    pub fn default_delta(&self) -> f64 {
        self.default_delta
    }

    /// Analysis window `(t0, tf)`.
    pub fn window(&self) -> (f64, f64) {
        (self.params.t0, self.params.tf)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.params.convention = convention;
        self
    }

    /// Overrides the analysis window. The pure-start case requires a
    /// strictly positive start; everything else accepts any start at or
    /// after the reference anchor.
    pub fn with_window(mut self, t0: f64, tf: f64) -> Result<Self> {
        if !t0.is_finite() || !tf.is_finite() || !(tf > t0) {
            return Err(Error::InvalidParameter {
                name: "window",
                message: format!("need finite t0 < tf, got [{t0}, {tf}]"),
            });
        }
        let floor = match self.kind {
            ScenarioKind::TransverseStart => 0.0,
            _ => -0.0,
        };
        if t0 < 0.0 || (self.kind == ScenarioKind::TransverseStart && t0 <= floor) {
            return Err(Error::InvalidParameter {
                name: "t0",
                message: format!(
                    "window start {t0} is outside the scenario domain; the pure start is \
                     rank deficient at zero and needs t0 > 0"
                ),
            });
        }
        self.params.t0 = t0;
        self.params.tf = tf;
        Ok(self)
    }

    /// Overrides the coupling and splitting. The closed scenario only
    /// accepts zero coupling; the open ones accept any nonnegative rate.
    pub fn with_rates(mut self, gamma: f64, omega0: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                message: format!("coupling rate must be finite and nonnegative, got {gamma}"),
            });
        }
        if self.kind == ScenarioKind::Unitary && gamma != 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                message: format!("the closed scenario has no bath; gamma must be 0, got {gamma}"),
            });
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega0",
                message: format!("level splitting must be finite and positive, got {omega0}"),
            });
        }
        self.params.gamma = gamma;
        self.params.omega0 = omega0;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        self.params.beta = beta;
        Ok(self)
    }

    /// Splitting in front of `sigma_z` at time `t`, convention applied.
    pub fn omega(&self, t: f64) -> f64 {
        self.params.convention.scale() * (self.params.omega0 + self.params.ramp_rate * t)
    }

    /// Earliest time the closed forms cover. The transverse-start forms are
    /// anchored at the pure state at zero even though analysis starts later;
    /// the ramp anchors at its window start.
    fn anchor(&self) -> f64 {
        match self.kind {
            ScenarioKind::DrivenRamp => self.params.t0,
            _ => 0.0,
        }
    }

    /// Stationary value of `<sigma_z>` under the ramp's jump pair, balanced
    /// against the splitting at the window midpoint.
    fn ramp_bias(&self) -> f64 {
        let t_mid = 0.5 * (self.params.t0 + self.params.tf);
        (self.params.beta * self.omega(t_mid)).tanh()
    }

    /// The Lindblad generator realizing this scenario.
    pub fn generator(&self) -> Result<LindbladGenerator> {
        let p = &self.params;
        match self.kind {
            ScenarioKind::DrivenRamp => {
                let scale = p.convention.scale();
                let envelope = PiecewisePoly::linear(
                    self.omega(p.t0),
                    scale * p.ramp_rate,
                    p.t0,
                    p.tf,
                )?;
                let schedule = HamiltonianSchedule::driven(
                    HermitianMatrix::zeros(2),
                    alloc::vec![DriveTerm {
                        envelope,
                        operator: pauli_z(),
                    }],
                )?;
                let ket0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
                let ket1 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
                let bias = self.ramp_bias();
                let jumps = alloc::vec![
                    // Decay toward the lower level dominates at positive beta.
                    JumpTerm::new(ComplexMatrix::outer(&ket1, &ket0), 0.5 * p.gamma * (1.0 + bias))?,
                    JumpTerm::new(ComplexMatrix::outer(&ket0, &ket1), 0.5 * p.gamma * (1.0 - bias))?,
                ];
                LindbladGenerator::new(schedule, jumps)
            }
            ScenarioKind::Unitary => LindbladGenerator::new(
                HamiltonianSchedule::Constant(pauli_z().scale_re(self.omega(0.0))),
                Vec::new(),
            ),
            _ => qubit_bath_generator(p.gamma, self.omega(0.0)),
        }
    }

    /// State at the analysis window start.
    pub fn initial_state(&self) -> Result<DensityMatrix> {
        Ok(self.reference(self.params.t0)?.state)
    }

    /// Closed-form state and rates at `t`. Valid from the reference anchor
    /// through the window end.
    pub fn reference(&self, t: f64) -> Result<ReferenceRecord> {
        let anchor = self.anchor();
        if !t.is_finite() || t < anchor || t > self.params.tf {
            return Err(Error::OutOfDomain {
                t,
                start: anchor,
                end: self.params.tf,
            });
        }
        match self.kind {
            ScenarioKind::DrivenRamp => self.ramp_reference(t),
            _ => self.transverse_reference(t),
        }
    }

    /// Propagates the scenario over its window.
    pub fn simulate(&self, config: &IntegratorConfig) -> Result<Propagation> {
        let generator = self.generator()?;
        let initial = self.initial_state()?;
        propagate(&generator, &initial, self.params.t0, self.params.tf, config)
    }

    /// Reference for the fixed-splitting family (transverse bath or closed).
    fn transverse_reference(&self, t: f64) -> Result<ReferenceRecord> {
        let p = &self.params;
        let omega = self.omega(0.0);
        let (a0, b0, c0) = match self.kind {
            // <sigma_z> of the Gibbs state of omega * sigma_z.
            ScenarioKind::ThermalStart => (0.0, 0.0, -(p.beta * omega).tanh()),
            ScenarioKind::TransverseStart => (1.0, 0.0, 0.0),
            ScenarioKind::TiltedStart | ScenarioKind::Unitary => (0.5, 0.0, 0.5),
            ScenarioKind::DrivenRamp => unreachable!("handled by ramp_reference"),
        };
        let (a, b, c) = transverse_bloch(p.gamma, omega, a0, b0, c0, t);
        let state = state_from_bloch(a, b, c)?;

        let cdot = -2.0 * p.gamma * c;
        let norm_sq = a * a + b * b + c * c;
        // a adot + b bdot + c cdot for this generator.
        let v_dot_v = -2.0 * p.gamma * (b * b + c * c);
        let norm = norm_sq.sqrt();
        let populations = [0.5 * (1.0 - norm), 0.5 * (1.0 + norm)];

        let u = omega * c;
        let udot = omega * cdot;
        let qdot_conv = udot;
        // Population motion projected on the energy direction; the remainder
        // of Tr[rhodot H] is eigenbasis rotation, hence dissipative work.
        let (qdot_tbsta, wdot_cd) = if norm_sq > 0.0 {
            (
                omega * c * v_dot_v / norm_sq,
                -2.0 * p.gamma * omega * c * a * a / norm_sq,
            )
        } else {
            (0.0, 0.0)
        };
        let rdot_hi = if norm > 0.0 { 0.5 * v_dot_v / norm } else { 0.0 };
        let sdot = entropy_rate_two_level(populations[0], populations[1], -rdot_hi);
        let record = ReferenceRecord {
            t,
            state,
            bloch: [a, b, c],
            populations,
            u,
            udot,
            qdot_conv,
            wdot_conv: 0.0,
            qdot_tbsta,
            wdot_tbsta: wdot_cd,
            wdot_cd,
            sdot,
            sirdot: sdot - p.beta * qdot_tbsta,
            // The energy eigenbasis is fixed, so the semiclassical split sees
            // exactly the diagonal motion.
            qdot_sc: udot,
            wdot_sc: 0.0,
        };
        Ok(record)
    }

    /// Reference for the ramped-splitting scenario: diagonal dynamics with
    /// constant jump rates, so `<sigma_z>` relaxes exponentially toward the
    /// midpoint bias while the splitting moves.
    fn ramp_reference(&self, t: f64) -> Result<ReferenceRecord> {
        let p = &self.params;
        let bias = self.ramp_bias();
        let c0 = -(p.beta * self.omega(p.t0)).tanh();
        let decay = (-p.gamma * (t - p.t0)).exp();
        let c = -bias + (c0 + bias) * decay;
        let cdot = -p.gamma * (c + bias);
        let state = state_from_bloch(0.0, 0.0, c)?;

        let omega = self.omega(t);
        let omega_dot = p.convention.scale() * p.ramp_rate;
        // c stays strictly negative: both the start and the stationary value
        // are, and the motion is monotone between them.
        let populations = [0.5 * (1.0 + c), 0.5 * (1.0 - c)];
        let sdot = entropy_rate_two_level(populations[0], populations[1], 0.5 * cdot);

        let qdot = omega * cdot;
        let wdot_drive = omega_dot * c;
        let record = ReferenceRecord {
            t,
            state,
            bloch: [0.0, 0.0, c],
            populations,
            u: omega * c,
            udot: qdot + wdot_drive,
            qdot_conv: qdot,
            wdot_conv: wdot_drive,
            qdot_tbsta: qdot,
            wdot_tbsta: wdot_drive,
            wdot_cd: 0.0,
            sdot,
            sirdot: sdot - p.beta * qdot,
            qdot_sc: qdot,
            wdot_sc: wdot_drive,
        };
        Ok(record)
    }
}

fn kind_name(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::ThermalStart => "case-i",
        ScenarioKind::TransverseStart => "case-ii",
        ScenarioKind::TiltedStart => "case-iii",
        ScenarioKind::Unitary => "unitary",
        ScenarioKind::DrivenRamp => "driven-ramp",
    }
}

fn bound_metadata(kind: ScenarioKind) -> BoundApplicability {
    match kind {
        ScenarioKind::ThermalStart | ScenarioKind::TransverseStart | ScenarioKind::TiltedStart => {
            BoundApplicability {
                applicable: true,
                beta_effective: Some(0.0),
                note: "transverse bath relaxes toward the maximally mixed state, the Gibbs \
                       state at zero inverse temperature; audit there",
            }
        }
        ScenarioKind::Unitary => BoundApplicability {
            applicable: true,
            beta_effective: None,
            note: "closed evolution: entropy production and dissipative work both vanish, \
                   so the bound saturates at any inverse temperature",
        },
        ScenarioKind::DrivenRamp => BoundApplicability {
            applicable: false,
            beta_effective: None,
            note: "jump rates balance the splitting at the window midpoint only, so the \
                   instantaneous steady state is Gibbsian just there; bound not certified",
        },
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("inverse temperature must be finite and positive, got {beta}"),
        });
    }
    Ok(())
}

/// `rho = (I + a sx + b sy + c sz) / 2` as a validated density matrix.
fn state_from_bloch(a: f64, b: f64, c: f64) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(0.5 * (1.0 + c), 0.0);
    m[(1, 1)] = Complex64::new(0.5 * (1.0 - c), 0.0);
    m[(0, 1)] = Complex64::new(0.5 * a, -0.5 * b);
    m[(1, 0)] = Complex64::new(0.5 * a, 0.5 * b);
    DensityMatrix::new(m)
}

/// Two-level entropy rate `-sum rdot_k ln r_k` with the frozen-pure-point
/// convention `0 ln 0 = 0`. `rdot_lo` is the rate of the lower population.
fn entropy_rate_two_level(r_lo: f64, r_hi: f64, rdot_lo: f64) -> f64 {
    if rdot_lo == 0.0 {
        0.0
    } else {
        -rdot_lo * (r_lo / r_hi).ln()
    }
}

/// `sinh(z) / delta` where `z = delta * tau`, stable through `delta -> 0`.
fn sinh_over(delta: Complex64, tau: f64) -> Complex64 {
    let z = delta * tau;
    if z.norm() < 1e-4 {
        let z2 = z * z;
        (Complex64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0) * tau
    } else {
        z.sinh() / delta
    }
}

/// Bloch vector at time `t` under `rhodot = -i omega [sz, rho] +
/// gamma (sx rho sx - rho)` from `(a0, b0, c0)` at time zero.
///
/// With `u = a - i b`, the transverse pair closes into
/// `udot = -(gamma + 2 i omega) u + gamma conj(u)`, solved by
/// `u(t) = e^{-gamma t} (cosh(Dt) u0 + sinh(Dt)/D (-2 i omega u0 +
/// gamma conj(u0)))` with `D = sqrt(gamma^2 - 4 omega^2)` taken complex;
/// the longitudinal component decays as `e^{-2 gamma t}`.
fn transverse_bloch(gamma: f64, omega: f64, a0: f64, b0: f64, c0: f64, t: f64) -> (f64, f64, f64) {
    let delta = Complex64::new(gamma * gamma - 4.0 * omega * omega, 0.0).sqrt();
    let u0 = Complex64::new(a0, -b0);
    let forced = Complex64::new(0.0, -2.0 * omega) * u0 + u0.conj() * gamma;
    let u = ((delta * t).cosh() * u0 + sinh_over(delta, t) * forced) * (-gamma * t).exp();
    (u.re, -u.im, c0 * (-2.0 * gamma * t).exp())
}
