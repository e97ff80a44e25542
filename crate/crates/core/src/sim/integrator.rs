use nalgebra::Vector6;

use crate::error::Result;
use crate::vehicle::{state_derivative, ActuatorState, VehicleParams, VehicleState};

/// One classical fourth-order Runge-Kutta step of `f` over `dt`.
///
/// Generic over the derivative so kinematic test systems can ride the same
/// integrator as the full vehicle.
pub fn rk4_step_with<F>(f: F, state: &VehicleState, dt: f64) -> Result<VehicleState>
where
    F: Fn(&VehicleState) -> Result<[f64; 12]>,
{
    let y0 = state.to_array();
    let k1 = f(state)?;
    let k2 = f(&offset(&y0, &k1, dt / 2.0))?;
    let k3 = f(&offset(&y0, &k2, dt / 2.0))?;
    let k4 = f(&offset(&y0, &k3, dt))?;
    let mut out = y0;
    for i in 0..12 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(VehicleState::from_array(&out))
}

fn offset(y: &[f64; 12], k: &[f64; 12], h: f64) -> VehicleState {
    let mut s = *y;
    for i in 0..12 {
        s[i] += h * k[i];
    }
    VehicleState::from_array(&s)
}

/// RK4 step of the vehicle dynamics with actuators and disturbance frozen
/// over the step (zero-order hold).
pub fn rk4_step(
    state: &VehicleState,
    act: &ActuatorState,
    params: &VehicleParams,
    extra_accel: &Vector6<f64>,
    dt: f64,
) -> Result<VehicleState> {
    rk4_step_with(
        |s| state_derivative(s, act, params, extra_accel).map(|d| d.to_array()),
        state,
        dt,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::vehicle::{BodyVelocity, VehicleState};

    /// Pure exponential decay on the surge component: u_dot = -lambda u.
    fn decay(lambda: f64) -> impl Fn(&VehicleState) -> Result<[f64; 12]> {
        move |s: &VehicleState| {
            let mut d = [0.0; 12];
            d[6] = -lambda * s.nu.u;
            Ok(d)
        }
    }

    #[test]
    fn matches_exponential_decay_closed_form() {
        let mut state = VehicleState {
            nu: BodyVelocity::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            ..Default::default()
        };
        let dt = 0.005;
        for _ in 0..400 {
            state = rk4_step_with(decay(2.0), &state, dt).unwrap();
        }
        assert_relative_eq!(state.nu.u, (-2.0f64 * 2.0).exp(), max_relative = 1e-9);
    }

    #[test]
    fn matches_harmonic_oscillator_closed_form() {
        // x_dot = u, u_dot = -omega^2 x on the (x, u) pair.
        let omega = 3.0;
        let f = move |s: &VehicleState| {
            let mut d = [0.0; 12];
            d[0] = s.nu.u;
            d[6] = -omega * omega * s.pose.x;
            Ok(d)
        };
        let mut state = VehicleState::default();
        state.pose.x = 1.0;
        let dt = 0.001;
        let steps = 3000;
        for _ in 0..steps {
            state = rk4_step_with(f, &state, dt).unwrap();
        }
        let t = dt * steps as f64;
        assert_relative_eq!(state.pose.x, (omega * t).cos(), epsilon = 1e-8);
        assert_relative_eq!(state.nu.u, -omega * (omega * t).sin(), epsilon = 1e-8);
    }

    #[test]
    fn constant_acceleration_is_exact() {
        // Quadratics are integrated exactly by RK4.
        let f = |s: &VehicleState| {
            let mut d = [0.0; 12];
            d[2] = s.nu.w;
            d[8] = 0.5;
            Ok(d)
        };
        let mut state = VehicleState::default();
        for _ in 0..100 {
            state = rk4_step_with(f, &state, 0.01).unwrap();
        }
        assert_relative_eq!(state.nu.w, 0.5, epsilon = 1e-13);
        // z(1) = a t^2 / 2 with a = 0.5.
        assert_relative_eq!(state.pose.z, 0.25, epsilon = 1e-13);
    }
}
