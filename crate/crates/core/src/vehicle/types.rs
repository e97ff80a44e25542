use nalgebra::{Matrix6, Vector3, Vector6};

use crate::error::{GliderError, Result};

/// Inertial-frame position of the body origin. `z` grows downward, so depth
/// below the surface is a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InertialPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl InertialPose {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        InertialPose { x, y, z }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

/// Yaw-pitch-roll attitude. All angles in radians; `theta` must stay inside
/// (-pi/2, pi/2) wherever the Euler rate map is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        EulerAngles { phi, theta, psi }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.phi, self.theta, self.psi)
    }
}

/// Body-frame twist: translational velocity (u, v, w) along the body axes and
/// angular rates (p, q, r) about them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, w: f64, p: f64, q: f64, r: f64) -> Self {
        BodyVelocity { u, v, w, p, q, r }
    }

    pub fn linear(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.w)
    }

    pub fn angular(&self) -> Vector3<f64> {
        Vector3::new(self.p, self.q, self.r)
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(self.u, self.v, self.w, self.p, self.q, self.r)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        BodyVelocity::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    /// Speed through the water, |(u, v, w)|.
    pub fn speed(&self) -> f64 {
        self.linear().norm()
    }
}

/// Full kinematic + dynamic state of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub pose: InertialPose,
    pub angles: EulerAngles,
    pub nu: BodyVelocity,
}

impl VehicleState {
    /// Flat layout used by the integrator:
    /// `[x, y, z, phi, theta, psi, u, v, w, p, q, r]`.
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.pose.x,
            self.pose.y,
            self.pose.z,
            self.angles.phi,
            self.angles.theta,
            self.angles.psi,
            self.nu.u,
            self.nu.v,
            self.nu.w,
            self.nu.p,
            self.nu.q,
            self.nu.r,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        VehicleState {
            pose: InertialPose::new(a[0], a[1], a[2]),
            angles: EulerAngles::new(a[3], a[4], a[5]),
            nu: BodyVelocity::new(a[6], a[7], a[8], a[9], a[10], a[11]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Time derivative of [`VehicleState`], split by block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    /// Inertial velocity of the body origin.
    pub pose_rate: Vector3<f64>,
    /// Euler angle rates (phi_dot, theta_dot, psi_dot).
    pub angle_rates: Vector3<f64>,
    /// Body-frame acceleration (u_dot ... r_dot).
    pub nu_dot: Vector6<f64>,
}

impl StateDerivative {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.pose_rate[0],
            self.pose_rate[1],
            self.pose_rate[2],
            self.angle_rates[0],
            self.angle_rates[1],
            self.angle_rates[2],
            self.nu_dot[0],
            self.nu_dot[1],
            self.nu_dot[2],
            self.nu_dot[3],
            self.nu_dot[4],
            self.nu_dot[5],
        ]
    }
}

/// Force and torque expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub const ZERO: Wrench =
        Wrench { force: Vector3::new(0.0, 0.0, 0.0), torque: Vector3::new(0.0, 0.0, 0.0) };

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.force[0],
            self.force[1],
            self.force[2],
            self.torque[0],
            self.torque[1],
            self.torque[2],
        )
    }
}

/// Quasi-steady hydrodynamic coefficient set. Forces and moments scale with
/// the square of the speed through the water; see
/// [`crate::vehicle::hydro::hydrodynamic_wrench`] for the force model and the
/// incidence-angle powers applied to each term.
///
/// Units: N s^2/m^2 for force terms, N m s^2/m^2 for moment terms (per-angle
/// or per-rate where a factor of alpha, beta, p, q or r applies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroCoefficients {
    /// Base drag.
    pub kd0: f64,
    /// Drag growth with angle of attack.
    pub kd: f64,
    /// Base lift.
    pub kl0: f64,
    /// Lift slope with angle of attack.
    pub kl: f64,
    /// Sideforce per sideslip angle.
    pub kbeta: f64,
    /// Roll moment per sideslip angle.
    pub kmr: f64,
    /// Roll moment per roll rate.
    pub kp: f64,
    /// Base pitch moment.
    pub km0: f64,
    /// Pitch moment slope with angle of attack.
    pub km: f64,
    /// Pitch moment per pitch rate.
    pub kq: f64,
    /// Yaw moment per sideslip angle.
    pub kmy: f64,
    /// Yaw moment per yaw rate.
    pub kr: f64,
}

impl HydroCoefficients {
    pub const DIM: usize = 12;

    /// Canonical parameter order used everywhere a coefficient vector is
    /// serialized (estimation chains, reports, priors).
    pub const NAMES: [&'static str; Self::DIM] = [
        "kd0", "kd", "kl0", "kl", "kbeta", "kmr", "kp", "km0", "km", "kq", "kmy", "kr",
    ];

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [
            self.kd0, self.kd, self.kl0, self.kl, self.kbeta, self.kmr, self.kp, self.km0,
            self.km, self.kq, self.kmy, self.kr,
        ]
    }

    pub fn from_array(a: &[f64; Self::DIM]) -> Self {
        HydroCoefficients {
            kd0: a[0],
            kd: a[1],
            kl0: a[2],
            kl: a[3],
            kbeta: a[4],
            kmr: a[5],
            kp: a[6],
            km0: a[7],
            km: a[8],
            kq: a[9],
            kmy: a[10],
            kr: a[11],
        }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        assert_eq!(s.len(), Self::DIM, "coefficient vector must have 12 entries");
        let mut a = [0.0; Self::DIM];
        a.copy_from_slice(s);
        Self::from_array(&a)
    }

    /// User-supplied coefficient sets must be finite and have positive base
    /// drag; anything else describes a vehicle the model cannot fly.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() {
                problems.push(format!("hydro coefficient {name} is not finite"));
            }
        }
        if self.kd0 <= 0.0 {
            problems.push(format!("base drag kd0 must be positive, got {}", self.kd0));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// Masses and geometry of the hull and the three internal moving masses:
/// a rotary mass swung about the body x-axis (roll authority), a mass sliding
/// along the x-axis (pitch trim), and a variable ballast (net buoyancy).
///
/// Position vectors are expressed in the body frame relative to the center of
/// buoyancy. `r_r` holds the rotary-mass position at zero rotation angle; its
/// transverse components are replaced at runtime by the swing kinematics
/// (y = R sin gamma, z = R cos gamma). `r_s` holds the slider rest position;
/// its x component is replaced by `r_sx0 + delta_rs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassConfiguration {
    /// Total vehicle mass (hull + internals), kg.
    pub m_total: f64,
    /// Rotary (roll) mass, kg.
    pub m_r: f64,
    /// Sliding (pitch) mass, kg.
    pub m_s: f64,
    /// Rotary-mass position at gamma = 0, m.
    pub r_r: Vector3<f64>,
    /// Slider position at delta_rs = 0, m.
    pub r_s: Vector3<f64>,
    /// Ballast position at delta_rb = 0, m.
    pub r_b: Vector3<f64>,
    /// Slider rail origin on the body x-axis, m.
    pub r_sx0: f64,
    /// Swing radius of the rotary mass about the x-axis, m.
    pub rotary_radius: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
}

impl MassConfiguration {
    /// Hull length bound used to sanity-check configured moment arms.
    pub const MAX_ARM: f64 = 1.2;

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [("m_total", self.m_total), ("m_r", self.m_r), ("m_s", self.m_s)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("mass {name} must be positive and finite, got {v}"));
            }
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            problems.push(format!("gravity g must be positive, got {}", self.g));
        }
        if self.m_r + self.m_s >= self.m_total {
            problems.push(format!(
                "moving masses m_r + m_s = {} must be below the total mass {}",
                self.m_r + self.m_s,
                self.m_total
            ));
        }
        for (name, v) in [("r_r", self.r_r), ("r_s", self.r_s), ("r_b", self.r_b)] {
            if !v.iter().all(|c| c.is_finite()) {
                problems.push(format!("position {name} has non-finite components"));
            } else if v.amax() > Self::MAX_ARM {
                problems.push(format!(
                    "position {name} = [{:.3}, {:.3}, {:.3}] exceeds the {:.1} m hull bound",
                    v[0],
                    v[1],
                    v[2],
                    Self::MAX_ARM
                ));
            }
        }
        if !(self.r_sx0.is_finite() && self.r_sx0.abs() <= Self::MAX_ARM) {
            problems.push(format!("slider rail origin r_sx0 = {} outside hull bound", self.r_sx0));
        }
        if !(self.rotary_radius.is_finite()
            && self.rotary_radius >= 0.0
            && self.rotary_radius <= Self::MAX_ARM)
        {
            problems.push(format!("rotary radius {} outside [0, 1.2] m", self.rotary_radius));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// Generalized 6x6 inertia (rigid body plus added mass), kept together with
/// its inverse so the dynamics never re-factorizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaModel {
    m: Matrix6<f64>,
    m_inv: Matrix6<f64>,
}

impl InertiaModel {
    /// Accepts a symmetric positive definite matrix; anything else is a
    /// configuration error.
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(GliderError::BadInertia { reason: "matrix has non-finite entries".into() });
        }
        let asym = (m - m.transpose()).amax();
        let scale = m.amax().max(1.0);
        if asym > 1e-9 * scale {
            return Err(GliderError::BadInertia {
                reason: format!("matrix is not symmetric (max asymmetry {asym:.3e})"),
            });
        }
        if nalgebra::linalg::Cholesky::new(m).is_none() {
            return Err(GliderError::BadInertia {
                reason: "matrix is not positive definite".into(),
            });
        }
        let m_inv = m.try_inverse().ok_or_else(|| GliderError::BadInertia {
            reason: "matrix is not invertible".into(),
        })?;
        Ok(InertiaModel { m, m_inv })
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }

    pub fn inverse(&self) -> &Matrix6<f64> {
        &self.m_inv
    }

    /// Principal moments of inertia read from the rotational block, so they
    /// can never drift out of sync with the matrix itself.
    pub fn ixx(&self) -> f64 {
        self.m[(3, 3)]
    }

    pub fn iyy(&self) -> f64 {
        self.m[(4, 4)]
    }

    pub fn izz(&self) -> f64 {
        self.m[(5, 5)]
    }
}

/// Internal actuator setpoints after clamping. `delta_rb` is not a free
/// input: the ballast plunger shifts in proportion to the pumped mass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorState {
    /// Rotary-mass angle about the body x-axis, rad.
    pub gamma: f64,
    /// Slider offset along the rail, m.
    pub delta_rs: f64,
    /// Net ballast mass (positive = heavy), kg.
    pub m_b: f64,
    /// Ballast plunger x-shift derived from `m_b`, m.
    pub delta_rb: f64,
}

impl ActuatorState {
    /// Builds a state clamped to `ranges`, reporting which channels had to be
    /// clipped. `delta_rb` is always recomputed from the clamped `m_b`.
    pub fn clamped(
        gamma: f64,
        delta_rs: f64,
        m_b: f64,
        ranges: &ActuatorRanges,
    ) -> (Self, ClampReport) {
        let cg = gamma.clamp(-ranges.gamma_max, ranges.gamma_max);
        let cs = delta_rs.clamp(-ranges.delta_rs_max, ranges.delta_rs_max);
        let cb = m_b.clamp(-ranges.m_b_max, ranges.m_b_max);
        let report = ClampReport {
            gamma: cg != gamma,
            delta_rs: cs != delta_rs,
            m_b: cb != m_b,
        };
        (
            ActuatorState {
                gamma: cg,
                delta_rs: cs,
                m_b: cb,
                delta_rb: ranges.ballast_travel_gain * cb,
            },
            report,
        )
    }

    /// Unclamped constructor for recorded data, where the log is trusted.
    pub fn from_recorded(gamma: f64, delta_rs: f64, m_b: f64, ballast_travel_gain: f64) -> Self {
        ActuatorState { gamma, delta_rs, m_b, delta_rb: ballast_travel_gain * m_b }
    }
}

/// Which actuator channels were clipped by [`ActuatorState::clamped`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClampReport {
    pub gamma: bool,
    pub delta_rs: bool,
    pub m_b: bool,
}

impl ClampReport {
    pub fn any(&self) -> bool {
        self.gamma || self.delta_rs || self.m_b
    }
}

/// Mechanical limits of the three internal actuators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorRanges {
    /// Rotary-mass angle limit, rad.
    pub gamma_max: f64,
    /// Slider travel limit, m.
    pub delta_rs_max: f64,
    /// Ballast mass limit, kg.
    pub m_b_max: f64,
    /// Plunger travel per unit ballast mass, m/kg.
    pub ballast_travel_gain: f64,
}

impl ActuatorRanges {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("gamma_max", self.gamma_max),
            ("delta_rs_max", self.delta_rs_max),
            ("m_b_max", self.m_b_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("actuator range {name} must be positive, got {v}"));
            }
        }
        if !self.ballast_travel_gain.is_finite() {
            problems.push("ballast_travel_gain must be finite".into());
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// Everything the equations of motion need to know about the vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    pub mass: MassConfiguration,
    pub inertia: InertiaModel,
    pub hydro: HydroCoefficients,
}
