use nalgebra::{Vector3, Vector6};

use crate::error::Result;
use crate::vehicle::hydro::hydrodynamic_wrench;
use crate::vehicle::rotation::{
    body_down_direction, euler_rates_from_body_rates, rotation_inertial_to_body,
};
use crate::vehicle::types::{
    ActuatorState, BodyVelocity, InertiaModel, MassConfiguration, StateDerivative, VehicleParams,
    VehicleState, Wrench,
};

/// Body-frame positions of the three internal masses for a given actuator
/// state: the rotary mass swings on a circle of radius R about the x-axis
/// (below the axis at gamma = 0), the slider moves along its rail, and the
/// ballast plunger shifts along x in proportion to the pumped mass.
pub fn effective_positions(
    mass: &MassConfiguration,
    act: &ActuatorState,
) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (sg, cg) = act.gamma.sin_cos();
    let r_r = Vector3::new(mass.r_r.x, mass.rotary_radius * sg, mass.rotary_radius * cg);
    let r_s = Vector3::new(mass.r_sx0 + act.delta_rs, mass.r_s.y, mass.r_s.z);
    let r_b = Vector3::new(mass.r_b.x + act.delta_rb, mass.r_b.y, mass.r_b.z);
    (r_r, r_s, r_b)
}

/// Net weight/buoyancy wrench in the body frame.
///
/// The hull is neutrally buoyant, so the only net force is the ballast mass
/// pulled straight down. Torque comes from the first moment of the internal
/// masses about the center of buoyancy crossed with the body-frame down
/// direction.
pub fn gravity_buoyancy_wrench(
    angles: &crate::vehicle::types::EulerAngles,
    mass: &MassConfiguration,
    act: &ActuatorState,
) -> Wrench {
    let down = body_down_direction(angles);
    let (r_r, r_s, r_b) = effective_positions(mass, act);
    let first_moment = mass.m_r * r_r + mass.m_s * r_s + act.m_b * r_b;
    Wrench {
        force: mass.g * act.m_b * down,
        torque: mass.g * first_moment.cross(&down),
    }
}

/// Generalized momentum (P, Q) = M nu, split into its translational and
/// rotational halves.
pub fn generalized_momentum(
    inertia: &InertiaModel,
    nu: &BodyVelocity,
) -> (Vector3<f64>, Vector3<f64>) {
    let m = inertia.matrix() * nu.as_vector();
    (Vector3::new(m[0], m[1], m[2]), Vector3::new(m[3], m[4], m[5]))
}

/// Momentum coupling terms [P x Omega; Q x Omega + P x V] that move kinetic
/// energy between axes without creating or destroying it.
fn momentum_coupling(inertia: &InertiaModel, nu: &BodyVelocity) -> Vector6<f64> {
    let (p_mom, q_mom) = generalized_momentum(inertia, nu);
    let omega = nu.angular();
    let vel = nu.linear();
    let top = p_mom.cross(&omega);
    let bottom = q_mom.cross(&omega) + p_mom.cross(&vel);
    Vector6::new(top[0], top[1], top[2], bottom[0], bottom[1], bottom[2])
}

/// Full rigid-body state derivative.
///
/// Body accelerations solve `M nu_dot = coupling + gravity/buoyancy wrench +
/// hydrodynamic wrench`, with `extra_accel` (disturbance) added directly on
/// the acceleration. Pose rates rotate the body velocity into the inertial
/// frame; angle rates go through the Euler rate map, which fails near the
/// pitch singularity.
pub fn state_derivative(
    state: &VehicleState,
    act: &ActuatorState,
    params: &VehicleParams,
    extra_accel: &Vector6<f64>,
) -> Result<StateDerivative> {
    let gravity = gravity_buoyancy_wrench(&state.angles, &params.mass, act);
    let hydro = hydrodynamic_wrench(&state.nu, &params.hydro);
    let rhs = momentum_coupling(&params.inertia, &state.nu)
        + gravity.as_vector()
        + hydro.as_vector();
    let nu_dot = params.inertia.inverse() * rhs + extra_accel;

    let rot = rotation_inertial_to_body(&state.angles);
    let pose_rate = rot * state.nu.linear();
    let angle_rates = euler_rates_from_body_rates(&state.angles, &state.nu.angular())?;

    Ok(StateDerivative { pose_rate, angle_rates, nu_dot })
}
