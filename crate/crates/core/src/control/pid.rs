//! PID baseline with a clamped integrator and a first-order filter on the
//! derivative term.

use crate::error::{GliderError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Absolute cap on the error integral (anti-windup).
    pub integrator_limit: f64,
    /// Time constant of the derivative filter, s. Zero disables filtering.
    pub derivative_tau: f64,
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(v.is_finite() && v >= 0.0) {
                problems.push(format!("PID {name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.integrator_limit.is_finite() && self.integrator_limit > 0.0) {
            problems.push(format!(
                "PID integrator limit must be positive, got {}",
                self.integrator_limit
            ));
        }
        if !(self.derivative_tau.is_finite() && self.derivative_tau >= 0.0) {
            problems.push(format!(
                "PID derivative time constant must be non-negative, got {}",
                self.derivative_tau
            ));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    integral: f64,
    derivative: f64,
    last_error: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains) -> Result<Self> {
        gains.validate()?;
        Ok(PidController { gains, integral: 0.0, derivative: 0.0, last_error: None })
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.derivative = 0.0;
        self.last_error = None;
    }

    /// Advances the internal state by one sample and returns the command.
    pub fn update(&mut self, error: f64, dt: f64) -> f64 {
        if dt > 0.0 {
            let limit = self.gains.integrator_limit;
            self.integral = (self.integral + error * dt).clamp(-limit, limit);
            if let Some(last) = self.last_error {
                let raw = (error - last) / dt;
                let blend = dt / (self.gains.derivative_tau + dt);
                self.derivative += blend * (raw - self.derivative);
            }
            self.last_error = Some(error);
        }
        self.gains.kp * error + self.gains.ki * self.integral + self.gains.kd * self.derivative
    }
}
