use crate::vehicle::rotation::{flow_angles, rotation_flow_to_body};
use crate::vehicle::types::{BodyVelocity, HydroCoefficients, Wrench};

/// Incidence-angle power applied to each angle-dependent force/moment slope.
///
/// The quasi-steady model is, with V^2 = u^2 + v^2 + w^2:
///
/// ```text
/// drag       D  = (kd0 + kd * alpha^drag)        * V^2
/// lift       L  = (kl0 + kl * alpha^lift)        * V^2
/// sideforce  SF = (kbeta * beta)                 * V^2
/// roll mom.  T1 = (kmr * beta + kp * p)          * V^2
/// pitch mom. T2 = (km0 + km * alpha^pitch + kq*q)* V^2
/// yaw mom.   T3 = (kmy * beta + kr * r)          * V^2
/// ```
///
/// Keeping the exponents in one table makes the convention (quadratic drag
/// growth, linear lift and pitch-moment slopes) auditable and swappable in
/// one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncidencePowers {
    pub drag: i32,
    pub lift: i32,
    pub pitch_moment: i32,
}

pub const INCIDENCE_POWERS: IncidencePowers =
    IncidencePowers { drag: 2, lift: 1, pitch_moment: 1 };

/// Hydrodynamic force and torque on the body axes.
///
/// Drag, sideforce and lift are assembled on the flow axes as
/// `(-D, SF, -L)` and the three moments as `(T1, T2, T3)`, then both are
/// rotated into the body frame. At zero speed the wrench vanishes
/// identically (every term carries the V^2 factor).
pub fn hydrodynamic_wrench(nu: &BodyVelocity, k: &HydroCoefficients) -> Wrench {
    let fa = flow_angles(nu);
    let v2 = nu.linear().norm_squared();
    if v2 == 0.0 {
        return Wrench::ZERO;
    }
    let alpha = fa.alpha;
    let beta = fa.beta;

    let drag = (k.kd0 + k.kd * alpha.powi(INCIDENCE_POWERS.drag)) * v2;
    let lift = (k.kl0 + k.kl * alpha.powi(INCIDENCE_POWERS.lift)) * v2;
    let side = k.kbeta * beta * v2;
    let t_roll = (k.kmr * beta + k.kp * nu.p) * v2;
    let t_pitch = (k.km0 + k.km * alpha.powi(INCIDENCE_POWERS.pitch_moment) + k.kq * nu.q) * v2;
    let t_yaw = (k.kmy * beta + k.kr * nu.r) * v2;

    let r_bf = rotation_flow_to_body(alpha, beta);
    Wrench {
        force: r_bf * nalgebra::Vector3::new(-drag, side, -lift),
        torque: r_bf * nalgebra::Vector3::new(t_roll, t_pitch, t_yaw),
    }
}
