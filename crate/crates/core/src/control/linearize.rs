//! Exact affine input models for the pitch and depth channels.
//!
//! Both internal actuators enter the rigid-body equations linearly: the
//! slider offset only shifts the gravity torque, and the pumped ballast mass
//! only scales the net-weight wrench. Splitting the dynamics into a drift
//! term (input zeroed) plus an input column through the inverse inertia
//! therefore reproduces the true acceleration exactly, not just to first
//! order, as long as the inertia matrix does not couple the affected block
//! back into the measured output. The ballast plunger travel adds a torque
//! quadratic in the pumped mass, so the depth split is exact only for an
//! inertia matrix with no translation/rotation coupling (the default); with
//! coupling it degrades to a first-order model about zero ballast.

use nalgebra::{Vector3, Vector6};

use crate::error::Result;
use crate::vehicle::{
    body_down_direction, state_derivative, ActuatorState, VehicleParams, VehicleState,
};

/// One output channel written as `accel = drift + gain * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineChannel {
    pub drift: f64,
    pub gain: f64,
}

impl AffineChannel {
    pub fn predict(&self, u: f64) -> f64 {
        self.drift + self.gain * u
    }
}

/// Pitch acceleration as an affine function of the slider offset.
///
/// theta_dot = cos(phi) q - sin(phi) r, so theta_ddot picks up the angular
/// accelerations plus a term from the rolling frame. Only q_dot and r_dot
/// depend on the slider, through the gravity torque column
/// `g m_s (x_hat x down)`.
pub fn pitch_affine(
    state: &VehicleState,
    act: &ActuatorState,
    params: &VehicleParams,
) -> Result<AffineChannel> {
    let act0 = ActuatorState { delta_rs: 0.0, ..*act };
    let d0 = state_derivative(state, &act0, params, &Vector6::zeros())?;

    let (sp, cp) = state.angles.phi.sin_cos();
    let phi_dot = d0.angle_rates[0];
    let frame_term = -phi_dot * (sp * state.nu.q + cp * state.nu.r);
    let drift = cp * d0.nu_dot[4] - sp * d0.nu_dot[5] + frame_term;

    let down = body_down_direction(&state.angles);
    let torque = params.mass.g * params.mass.m_s * Vector3::x().cross(&down);
    let column = params.inertia.inverse()
        * Vector6::new(0.0, 0.0, 0.0, torque[0], torque[1], torque[2]);
    let gain = cp * column[4] - sp * column[5];

    Ok(AffineChannel { drift, gain })
}

/// Depth acceleration as an affine function of the pumped ballast mass.
///
/// z_dot = down . V, and the body-frame down direction evolves as
/// `down x omega`, so z_ddot = (down x omega) . V + down . V_dot. The ballast
/// mass enters V_dot through the wrench column `[g down; g r_b x down]`,
/// taken at zero plunger travel.
pub fn depth_affine(
    state: &VehicleState,
    act: &ActuatorState,
    params: &VehicleParams,
) -> Result<AffineChannel> {
    let act0 = ActuatorState { m_b: 0.0, delta_rb: 0.0, ..*act };
    let d0 = state_derivative(state, &act0, params, &Vector6::zeros())?;

    let down = body_down_direction(&state.angles);
    let v_dot0 = Vector3::new(d0.nu_dot[0], d0.nu_dot[1], d0.nu_dot[2]);
    let drift = down.cross(&state.nu.angular()).dot(&state.nu.linear()) + down.dot(&v_dot0);

    let g = params.mass.g;
    let torque = g * params.mass.r_b.cross(&down);
    let column = params.inertia.inverse()
        * Vector6::new(g * down[0], g * down[1], g * down[2], torque[0], torque[1], torque[2]);
    let gain = down.dot(&Vector3::new(column[0], column[1], column[2]));

    Ok(AffineChannel { drift, gain })
}
