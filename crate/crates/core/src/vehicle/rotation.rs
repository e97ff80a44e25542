use nalgebra::{Matrix3, Vector3};

use crate::error::{GliderError, Result};
use crate::vehicle::types::{BodyVelocity, EulerAngles};

/// How close (rad) the pitch angle may get to +/-pi/2 before the Euler-angle
/// rate map is declared singular.
pub const GIMBAL_MARGIN: f64 = 1e-3;

/// Attitude matrix for the yaw-pitch-roll Euler sequence. Its columns are the
/// body axes expressed on the inertial axes, so it carries body-frame vectors
/// into the inertial frame; the transpose carries inertial vectors (such as
/// the gravity direction) into the body frame.
pub fn rotation_inertial_to_body(angles: &EulerAngles) -> Matrix3<f64> {
    let (sphi, cphi) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let (spsi, cpsi) = angles.psi.sin_cos();
    Matrix3::new(
        ct * cpsi,
        sphi * st * cpsi - cphi * spsi,
        cphi * st * cpsi + sphi * spsi,
        ct * spsi,
        cphi * cpsi + sphi * st * spsi,
        -sphi * cpsi + cphi * st * spsi,
        -st,
        sphi * ct,
        cphi * ct,
    )
}

/// Unit vector pointing down (inertial +z) expressed in the body frame.
pub fn body_down_direction(angles: &EulerAngles) -> Vector3<f64> {
    let (sphi, cphi) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    Vector3::new(-st, sphi * ct, cphi * ct)
}

/// Angle of attack and sideslip of the body-frame velocity, plus a flag for
/// the stagnant case where neither angle is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowAngles {
    /// Angle of attack, atan2(w, u), rad.
    pub alpha: f64,
    /// Sideslip, asin(v / speed), rad.
    pub beta: f64,
    /// True when the speed through the water is numerically zero; alpha and
    /// beta are reported as 0 in that case.
    pub stagnant: bool,
}

/// Speed below which the flow direction is treated as undefined.
const STAGNANT_SPEED: f64 = 1e-12;

pub fn flow_angles(nu: &BodyVelocity) -> FlowAngles {
    let speed = nu.speed();
    if speed < STAGNANT_SPEED {
        return FlowAngles { alpha: 0.0, beta: 0.0, stagnant: true };
    }
    let alpha = nu.w.atan2(nu.u);
    // The ratio can drift a hair past 1 in magnitude from rounding.
    let beta = (nu.v / speed).clamp(-1.0, 1.0).asin();
    FlowAngles { alpha, beta, stagnant: false }
}

/// Rotation from the flow frame (x along the relative flow) to the body
/// frame. Drag, sideforce and lift live on the flow axes; this carries them
/// onto the body axes.
pub fn rotation_flow_to_body(alpha: f64, beta: f64) -> Matrix3<f64> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    Matrix3::new(
        ca * cb,
        -ca * sb,
        -sa,
        sb,
        cb,
        0.0,
        sa * cb,
        -sa * sb,
        ca,
    )
}

fn gimbal_check(angles: &EulerAngles) -> Result<()> {
    if (std::f64::consts::FRAC_PI_2 - angles.theta.abs()) < GIMBAL_MARGIN {
        return Err(GliderError::GimbalLock { theta: angles.theta, margin: GIMBAL_MARGIN });
    }
    Ok(())
}

/// Euler angle rates (phi_dot, theta_dot, psi_dot) produced by body rates
/// (p, q, r). Fails near the pitch singularity where the map blows up.
pub fn euler_rates_from_body_rates(
    angles: &EulerAngles,
    omega: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    gimbal_check(angles)?;
    let (sphi, cphi) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let tt = st / ct;
    let (p, q, r) = (omega[0], omega[1], omega[2]);
    Ok(Vector3::new(
        p + sphi * tt * q + cphi * tt * r,
        cphi * q - sphi * r,
        (sphi * q + cphi * r) / ct,
    ))
}

/// Inverse of [`euler_rates_from_body_rates`]: body rates that realize given
/// Euler angle rates at the current attitude.
pub fn body_rates_from_euler_rates(
    angles: &EulerAngles,
    euler_rates: &Vector3<f64>,
) -> Result<Vector3<f64>> {
    gimbal_check(angles)?;
    let (sphi, cphi) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let (phi_dot, theta_dot, psi_dot) = (euler_rates[0], euler_rates[1], euler_rates[2]);
    Ok(Vector3::new(
        phi_dot - st * psi_dot,
        cphi * theta_dot + sphi * ct * psi_dot,
        -sphi * theta_dot + cphi * ct * psi_dot,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

    /// Independent construction of the same attitude matrix as a product of
    /// single-axis rotations about z (yaw), y (pitch) and x (roll).
    fn axis_composition(angles: &EulerAngles) -> Matrix3<f64> {
        let (sphi, cphi) = angles.phi.sin_cos();
        let (st, ct) = angles.theta.sin_cos();
        let (spsi, cpsi) = angles.psi.sin_cos();
        let rz = Matrix3::new(cpsi, -spsi, 0.0, spsi, cpsi, 0.0, 0.0, 0.0, 1.0);
        let ry = Matrix3::new(ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct);
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cphi, -sphi, 0.0, sphi, cphi);
        rz * ry * rx
    }

    #[test]
    fn identity_at_zero_attitude() {
        let r = rotation_inertial_to_body(&EulerAngles::default());
        assert!((r - Matrix3::identity()).amax() < 1e-15);
    }

    #[test]
    fn ninety_degree_pitch_swaps_axes() {
        let r = rotation_inertial_to_body(&EulerAngles::new(0.0, FRAC_PI_2, 0.0));
        let expected = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        assert!((r - expected).amax() < 1e-15);
    }

    #[test]
    fn matches_single_axis_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let angles = EulerAngles::new(
                rng.random_range(-PI..PI),
                rng.random_range(-1.4..1.4),
                rng.random_range(-PI..PI),
            );
            let r = rotation_inertial_to_body(&angles);
            assert!((r - axis_composition(&angles)).amax() < 1e-14);
        }
    }

    #[test]
    fn rotation_is_orthonormal_with_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let angles = EulerAngles::new(
                rng.random_range(-PI..PI),
                rng.random_range(-1.5..1.5),
                rng.random_range(-PI..PI),
            );
            let r = rotation_inertial_to_body(&angles);
            assert!((r * r.transpose() - Matrix3::identity()).amax() < 1e-14);
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn down_direction_matches_third_row() {
        let angles = EulerAngles::new(0.4, -0.3, 1.1);
        let r = rotation_inertial_to_body(&angles);
        let b = body_down_direction(&angles);
        for i in 0..3 {
            assert_relative_eq!(b[i], r[(2, i)], epsilon = 1e-15);
        }
    }

    #[test]
    fn flow_angles_pure_surge_and_quadrants() {
        let fa = flow_angles(&BodyVelocity::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(fa.alpha, 0.0);
        assert_eq!(fa.beta, 0.0);
        assert!(!fa.stagnant);

        // Equal surge and heave put the flow 45 degrees below the nose.
        let fa = flow_angles(&BodyVelocity::new(1.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(fa.alpha, PI / 4.0, epsilon = 1e-15);

        // Pure sway saturates sideslip at +pi/2.
        let fa = flow_angles(&BodyVelocity::new(0.0, 2.0, 0.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(fa.beta, FRAC_PI_2, epsilon = 1e-12);

        // Reversed flow lands alpha in the rear quadrant.
        let fa = flow_angles(&BodyVelocity::new(-1.0, 0.0, -1e-3, 0.0, 0.0, 0.0));
        assert!(fa.alpha < -PI / 2.0);
    }

    #[test]
    fn stagnant_flow_is_flagged_not_nan() {
        let fa = flow_angles(&BodyVelocity::default());
        assert!(fa.stagnant);
        assert_eq!(fa.alpha, 0.0);
        assert_eq!(fa.beta, 0.0);
    }

    #[test]
    fn flow_rotation_at_ninety_degrees_attack() {
        let r = rotation_flow_to_body(FRAC_PI_2, 0.0);
        let expected = Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
        assert!((r - expected).amax() < 1e-15);
    }

    #[test]
    fn flow_rotation_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let r = rotation_flow_to_body(rng.random_range(-PI..PI), rng.random_range(-1.5..1.5));
            assert!((r * r.transpose() - Matrix3::identity()).amax() < 1e-14);
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn euler_rate_map_level_is_identity() {
        let rates = euler_rates_from_body_rates(
            &EulerAngles::default(),
            &Vector3::new(0.3, -0.2, 0.5),
        )
        .unwrap();
        assert_relative_eq!(rates[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(rates[1], -0.2, epsilon = 1e-15);
        assert_relative_eq!(rates[2], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn euler_rate_map_known_attitude() {
        // phi = 90 deg, theta = 60 deg: tan(theta) = sqrt(3), sec(theta) = 2.
        let angles = EulerAngles::new(FRAC_PI_2, FRAC_PI_3, 0.0);
        let rates =
            euler_rates_from_body_rates(&angles, &Vector3::new(0.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(rates[0], 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(rates[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(rates[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_maps_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let angles = EulerAngles::new(
                rng.random_range(-PI..PI),
                rng.random_range(-1.4..1.4),
                rng.random_range(-PI..PI),
            );
            let omega = Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let euler = euler_rates_from_body_rates(&angles, &omega).unwrap();
            let back = body_rates_from_euler_rates(&angles, &euler).unwrap();
            assert!((back - omega).amax() < 1e-10);
        }
    }

    #[test]
    fn gimbal_guard_rejects_near_vertical_pitch() {
        let angles = EulerAngles::new(0.0, FRAC_PI_2 - 1e-4, 0.0);
        let err = euler_rates_from_body_rates(&angles, &Vector3::zeros()).unwrap_err();
        assert!(matches!(err, GliderError::GimbalLock { .. }));
        let angles = EulerAngles::new(0.0, -FRAC_PI_2 + 1e-4, 0.0);
        assert!(body_rates_from_euler_rates(&angles, &Vector3::zeros()).is_err());
        // Just outside the guard band the map works.
        let angles = EulerAngles::new(0.0, FRAC_PI_2 - 2e-3, 0.0);
        assert!(euler_rates_from_body_rates(&angles, &Vector3::zeros()).is_ok());
    }

    #[test]
    fn pitch_only_rate_recovers_q_duality() {
        // theta_dot = cos(phi) q - sin(phi) r: at phi = 30 deg a pure pitch
        // rate requires body q and r components on the tilted axes.
        let angles = EulerAngles::new(FRAC_PI_6, 0.2, 0.0);
        let body = body_rates_from_euler_rates(&angles, &Vector3::new(0.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(body[1], FRAC_PI_6.cos(), epsilon = 1e-15);
        assert_relative_eq!(body[2], -FRAC_PI_6.sin(), epsilon = 1e-15);
    }
}
