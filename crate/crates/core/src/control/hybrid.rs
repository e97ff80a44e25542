//! Supervisor that hands the loop to the nonlinear law during transients and
//! to PID when the tracking errors look like steady-state noise.
//!
//! The decision statistic is the RMS of a normalized innovation over a
//! sliding time window, compared against a threshold with a symmetric
//! hysteresis band so measurement jitter cannot flap the mode.

use std::collections::VecDeque;

use crate::error::{GliderError, Result};
use crate::sim::ControlMode;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridConfig {
    /// RMS innovation above which the nonlinear law takes over.
    pub threshold: f64,
    /// Length of the RMS window, s.
    pub window: f64,
    /// Half-width of the hysteresis band as a fraction of the threshold.
    pub hysteresis: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig { threshold: 1.0, window: 2.0, hysteresis: 0.05 }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            problems.push(format!("hybrid threshold must be positive, got {}", self.threshold));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            problems.push(format!("hybrid window must be positive, got {}", self.window));
        }
        if !(self.hysteresis.is_finite() && (0.0..1.0).contains(&self.hysteresis)) {
            problems.push(format!("hybrid hysteresis must be in [0, 1), got {}", self.hysteresis));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

#[derive(Debug, Clone)]
pub struct HybridSupervisor {
    config: HybridConfig,
    window: VecDeque<(f64, f64)>,
    active: ControlMode,
}

impl HybridSupervisor {
    /// Starts in the nonlinear mode: the first setpoint acquisition is a
    /// transient by definition.
    pub fn new(config: HybridConfig) -> Result<Self> {
        config.validate()?;
        Ok(HybridSupervisor { config, window: VecDeque::new(), active: ControlMode::Nlc })
    }

    pub fn active(&self) -> ControlMode {
        self.active
    }

    pub fn windowed_rms(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.window.iter().map(|(_, sq)| sq).sum();
        (sum / self.window.len() as f64).sqrt()
    }

    /// Feeds one innovation sample and picks the mode for this tick.
    pub fn update(&mut self, t: f64, innovation: f64, in_transition: bool) -> ControlMode {
        self.window.push_back((t, innovation * innovation));
        while let Some(&(front_t, _)) = self.window.front() {
            if front_t < t - self.config.window {
                self.window.pop_front();
            } else {
                break;
            }
        }

        if in_transition {
            self.active = ControlMode::Nlc;
            return self.active;
        }
        let rms = self.windowed_rms();
        let hi = self.config.threshold * (1.0 + self.config.hysteresis);
        let lo = self.config.threshold * (1.0 - self.config.hysteresis);
        if rms > hi {
            self.active = ControlMode::Nlc;
        } else if rms < lo {
            self.active = ControlMode::Pid;
        }
        self.active
    }
}
