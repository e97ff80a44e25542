//! Second-order reference shaping.
//!
//! Raw setpoint steps are passed through `r_ddot = omega^2 (target - r) -
//! 2 zeta omega r_dot` so the tracking laws see a smooth reference with
//! consistent value, rate, and acceleration. Critically damped by default, so
//! the shaped reference never overshoots the target.

use crate::error::{GliderError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFilter {
    omega: f64,
    zeta: f64,
    value: f64,
    rate: f64,
    target: f64,
    /// |target - value| at the most recent retarget; the yardstick for
    /// deciding whether the filter is still in transit.
    step_size: f64,
}

impl ReferenceFilter {
    pub fn new(omega: f64, zeta: f64, initial: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(omega.is_finite() && omega > 0.0) {
            problems.push(format!("reference omega must be positive, got {omega}"));
        }
        if !(zeta.is_finite() && zeta > 0.0) {
            problems.push(format!("reference zeta must be positive, got {zeta}"));
        }
        if !initial.is_finite() {
            problems.push(format!("reference initial value must be finite, got {initial}"));
        }
        if !problems.is_empty() {
            return Err(GliderError::validation(problems));
        }
        Ok(ReferenceFilter { omega, zeta, value: initial, rate: 0.0, target: initial, step_size: 0.0 })
    }

    pub fn retarget(&mut self, target: f64) {
        self.target = target;
        self.step_size = (target - self.value).abs();
    }

    /// Integrates the filter forward by `dt` with RK4 substeps sized so the
    /// local truncation error stays far below the tracking tolerances.
    pub fn advance(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let n = (dt * self.omega / 0.02).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        for _ in 0..n {
            let f = |value: f64, rate: f64| {
                (rate, self.omega * self.omega * (self.target - value) - 2.0 * self.zeta * self.omega * rate)
            };
            let (k1v, k1r) = f(self.value, self.rate);
            let (k2v, k2r) = f(self.value + 0.5 * h * k1v, self.rate + 0.5 * h * k1r);
            let (k3v, k3r) = f(self.value + 0.5 * h * k2v, self.rate + 0.5 * h * k2r);
            let (k4v, k4r) = f(self.value + h * k3v, self.rate + h * k3r);
            self.value += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            self.rate += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn accel(&self) -> f64 {
        self.omega * self.omega * (self.target - self.value) - 2.0 * self.zeta * self.omega * self.rate
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// True while the remaining distance to the target exceeds `fraction` of
    /// the last commanded step.
    pub fn in_transition(&self, fraction: f64) -> bool {
        (self.target - self.value).abs() > fraction * self.step_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Critically damped unit step from rest: r(t) = 1 - (1 + wt) e^{-wt},
    /// r_dot(t) = w^2 t e^{-wt}.
    #[test]
    fn matches_the_critically_damped_closed_form() {
        let omega = 0.5;
        let mut f = ReferenceFilter::new(omega, 1.0, 0.0).unwrap();
        f.retarget(1.0);
        let mut t = 0.0;
        for _ in 0..200 {
            f.advance(0.1);
            t += 0.1;
            let wt: f64 = omega * t;
            let exact = 1.0 - (1.0 + wt) * (-wt).exp();
            let exact_rate = omega * omega * t * (-wt).exp();
            assert_abs_diff_eq!(f.value(), exact, epsilon = 1e-8);
            assert_abs_diff_eq!(f.rate(), exact_rate, epsilon = 1e-8);
        }
    }

    #[test]
    fn never_overshoots_when_critically_damped() {
        let mut f = ReferenceFilter::new(0.5, 1.0, 2.0).unwrap();
        f.retarget(-1.0);
        let mut prev = f.value();
        for _ in 0..1000 {
            f.advance(0.1);
            assert!(f.value() >= -1.0 - 1e-12);
            assert!(f.value() <= prev + 1e-12, "approach must be monotone");
            prev = f.value();
        }
        assert_abs_diff_eq!(f.value(), -1.0, epsilon = 1e-3);
    }

    #[test]
    fn accel_is_consistent_with_the_defining_ode() {
        let mut f = ReferenceFilter::new(0.8, 1.0, 0.0).unwrap();
        f.retarget(0.4);
        f.advance(1.3);
        let expected = 0.8 * 0.8 * (0.4 - f.value()) - 2.0 * 0.8 * f.rate();
        assert_abs_diff_eq!(f.accel(), expected, epsilon = 1e-14);
    }

    #[test]
    fn rate_matches_numeric_derivative_of_value() {
        let mut f = ReferenceFilter::new(0.5, 1.0, 0.0).unwrap();
        f.retarget(1.0);
        f.advance(2.0);
        let before = f.value();
        let mid_rate = {
            let mut g = f.clone();
            g.advance(0.0005);
            g.rate()
        };
        f.advance(0.001);
        assert_abs_diff_eq!((f.value() - before) / 0.001, mid_rate, epsilon = 1e-7);
    }

    #[test]
    fn transition_flag_lifts_once_within_tolerance_of_target() {
        let mut f = ReferenceFilter::new(0.5, 1.0, 0.0).unwrap();
        assert!(!f.in_transition(0.05), "no step commanded yet");
        f.retarget(1.0);
        assert!(f.in_transition(0.05));
        // (1 + wt) e^{-wt} = 0.05 at wt ~ 4.744, i.e. t ~ 9.5 s at omega 0.5.
        f.advance(9.0);
        assert!(f.in_transition(0.05));
        f.advance(1.0);
        assert!(!f.in_transition(0.05));
    }

    #[test]
    fn retarget_to_current_value_is_never_in_transition() {
        let mut f = ReferenceFilter::new(0.5, 1.0, 0.7).unwrap();
        f.retarget(0.7);
        assert!(!f.in_transition(0.05));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ReferenceFilter::new(0.0, 1.0, 0.0).is_err());
        assert!(ReferenceFilter::new(0.5, -1.0, 0.0).is_err());
        assert!(ReferenceFilter::new(0.5, 1.0, f64::NAN).is_err());
    }
}
