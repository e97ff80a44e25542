//! Roll steering through the rotary mass.
//!
//! The rotary mass hangs below the hull axis, so at rest the hull settles at
//! roll angle phi = gamma. Commanding `gamma = phi_d + kp e + kd e_dot` with
//! `e = phi_d - phi` biases the pendulum toward the desired bank and adds
//! stiffness and damping around it.

use crate::error::{GliderError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollPd {
    pub kp: f64,
    pub kd: f64,
}

impl RollPd {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kp >= 0.0 && self.kd.is_finite() && self.kd >= 0.0) {
            return Err(GliderError::one_problem(format!(
                "roll gains must be finite and non-negative, got kp {} kd {}",
                self.kp, self.kd
            )));
        }
        Ok(())
    }

    /// Rotary-arm angle to command for a (usually constant) bank setpoint.
    pub fn command(&self, phi_d: f64, phi: f64, phi_dot: f64) -> f64 {
        let e = phi_d - phi;
        let e_dot = -phi_dot;
        phi_d + self.kp * e + self.kd * e_dot
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn at_the_setpoint_the_arm_matches_the_bank() {
        let law = RollPd { kp: 2.0, kd: 1.0 };
        // gamma = phi at rest is the pendulum equilibrium, so this is a fixed
        // point of the closed loop.
        assert_relative_eq!(law.command(0.3, 0.3, 0.0), 0.3);
    }

    #[test]
    fn feedback_pushes_the_pendulum_back_toward_the_setpoint() {
        let law = RollPd { kp: 2.0, kd: 1.0 };
        // Banked past the setpoint: arm swings below it to pull the hull back.
        assert!(law.command(0.3, 0.5, 0.0) < 0.3);
        // Rolling rapidly toward the setpoint: damping counteracts the swing.
        assert!(law.command(0.3, 0.3, 1.0) < 0.3);
        assert_relative_eq!(law.command(0.3, 0.1, -0.2), 0.3 + 2.0 * 0.2 + 1.0 * 0.2);
    }

    #[test]
    fn rejects_negative_gains() {
        assert!(RollPd { kp: -0.1, kd: 0.0 }.validate().is_err());
    }
}
