//! Closed-loop flight: one object that reads the vehicle state at the
//! control rate and commands all three internal actuators.
//!
//! Pitch (slider) and depth (ballast) run either the combined nonlinear
//! tracking law or the PID baseline; roll (rotary arm) always runs the
//! feedforward/PD law. Setpoints come from a time-tagged schedule and are
//! shaped by second-order reference filters before the tracking laws see
//! them.

use crate::control::hybrid::{HybridConfig, HybridSupervisor};
use crate::control::linearize::{depth_affine, pitch_affine};
use crate::control::pid::{PidController, PidGains};
use crate::control::reference::ReferenceFilter;
use crate::control::roll::RollPd;
use crate::control::smc::{
    backstepping_term, k2_lower_bound, lyapunov, sliding_surface, smc_term,
};
use crate::error::{GliderError, Result};
use crate::sim::{ChannelRefs, ControlMode, Pilot, PilotOutput, TickAudit};
use crate::vehicle::{
    body_down_direction, euler_rates_from_body_rates, VehicleParams, VehicleState,
};

/// Who owns the pitch and depth loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Combined backstepping + switching tracking law.
    Nlc,
    /// PID baseline.
    Pid,
    /// Nonlinear law during transients and noisy stretches, PID otherwise.
    Hybrid,
}

/// Tuning for one nonlinear channel: surface slope k1, switching amplitude
/// k2, surface decay rate k3, boundary-layer width epsilon.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelNlc {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub epsilon: f64,
}

impl ChannelNlc {
    pub fn validate(&self, channel: &str) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{channel} {name} must be positive, got {v}"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0 && self.epsilon < 1.0) {
            problems.push(format!(
                "{channel} epsilon must be in (0, 1), got {}",
                self.epsilon
            ));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }

    /// The full channel law: drift-canceling branch plus switching branch.
    pub fn command(
        &self,
        e_dot: f64,
        s: f64,
        accel_ref: f64,
        drift: f64,
        gain: f64,
    ) -> Result<f64> {
        Ok(
            backstepping_term(self.k1, self.k3, e_dot, s, accel_ref, drift, gain, GAIN_FLOOR)?
                + smc_term(s, gain, self.k2, self.epsilon),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfig {
    pub strategy: Strategy,
    pub pitch: ChannelNlc,
    pub depth: ChannelNlc,
    pub pitch_pid: PidGains,
    pub depth_pid: PidGains,
    pub roll: RollPd,
    /// Natural frequency of the reference shaping, rad/s.
    pub reference_omega: f64,
    pub reference_zeta: f64,
    /// Remaining fraction of a step below which a channel counts as settled.
    pub transition_fraction: f64,
    pub hybrid: HybridConfig,
    /// Error normalizations for the hybrid innovation statistic.
    pub pitch_scale: f64,
    pub depth_scale: f64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        PilotConfig {
            strategy: Strategy::Nlc,
            pitch: ChannelNlc { k1: 1.0, k2: 0.1, k3: 1.5, epsilon: 0.1 },
            depth: ChannelNlc { k1: 0.6, k2: 0.15, k3: 0.8, epsilon: 0.3 },
            pitch_pid: PidGains {
                kp: 0.11,
                ki: 0.02,
                kd: 0.21,
                integrator_limit: 1.0,
                derivative_tau: 0.2,
            },
            depth_pid: PidGains {
                kp: 0.6,
                ki: 0.08,
                kd: 2.4,
                integrator_limit: 2.0,
                derivative_tau: 0.2,
            },
            roll: RollPd { kp: 2.0, kd: 1.0 },
            reference_omega: 0.5,
            reference_zeta: 1.0,
            transition_fraction: 0.05,
            hybrid: HybridConfig::default(),
            pitch_scale: 0.05,
            depth_scale: 0.1,
        }
    }
}

impl PilotConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for r in [
            self.pitch.validate("pitch"),
            self.depth.validate("depth"),
            self.pitch_pid.validate(),
            self.depth_pid.validate(),
            self.roll.validate(),
            self.hybrid.validate(),
        ] {
            if let Err(GliderError::Validation { problems: p }) = r {
                problems.extend(p);
            } else if let Err(e) = r {
                problems.push(e.to_string());
            }
        }
        if !(self.reference_omega.is_finite() && self.reference_omega > 0.0) {
            problems.push(format!("reference omega must be positive, got {}", self.reference_omega));
        }
        if !(self.reference_zeta.is_finite() && self.reference_zeta > 0.0) {
            problems.push(format!("reference zeta must be positive, got {}", self.reference_zeta));
        }
        if !(self.transition_fraction.is_finite() && (0.0..1.0).contains(&self.transition_fraction))
        {
            problems.push(format!(
                "transition fraction must be in [0, 1), got {}",
                self.transition_fraction
            ));
        }
        for (name, v) in [("pitch_scale", self.pitch_scale), ("depth_scale", self.depth_scale)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} must be positive, got {v}"));
            }
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// One row of the setpoint program: at time `t`, start steering toward these
/// targets.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointEntry {
    pub t: f64,
    pub theta: f64,
    pub z: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetpointSchedule {
    pub entries: Vec<SetpointEntry>,
}

impl SetpointSchedule {
    pub fn constant(theta: f64, z: f64, phi: f64) -> Self {
        SetpointSchedule { entries: vec![SetpointEntry { t: 0.0, theta, z, phi }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(GliderError::one_problem("setpoint schedule is empty"));
        }
        if self.entries[0].t != 0.0 {
            return Err(GliderError::one_problem("setpoint schedule must start at t = 0"));
        }
        for pair in self.entries.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(GliderError::one_problem(
                    "setpoint schedule times must increase strictly",
                ));
            }
        }
        for e in &self.entries {
            if !(e.t.is_finite() && e.theta.is_finite() && e.z.is_finite() && e.phi.is_finite()) {
                return Err(GliderError::one_problem("setpoint schedule has non-finite entries"));
            }
        }
        Ok(())
    }
}

/// The drift-canceling branch divides by the input gain; anything smaller
/// than this is treated as loss of authority rather than inverted.
pub const GAIN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GliderPilot {
    config: PilotConfig,
    params: VehicleParams,
    schedule: SetpointSchedule,
    next_entry: usize,
    theta_ref: ReferenceFilter,
    z_ref: ReferenceFilter,
    phi_ref: ReferenceFilter,
    pitch_pid: PidController,
    depth_pid: PidController,
    supervisor: HybridSupervisor,
    last_t: Option<f64>,
}

impl GliderPilot {
    pub fn new(
        config: PilotConfig,
        params: VehicleParams,
        schedule: SetpointSchedule,
        initial: &VehicleState,
    ) -> Result<Self> {
        config.validate()?;
        schedule.validate()?;
        let (omega, zeta) = (config.reference_omega, config.reference_zeta);
        Ok(GliderPilot {
            theta_ref: ReferenceFilter::new(omega, zeta, initial.angles.theta)?,
            z_ref: ReferenceFilter::new(omega, zeta, initial.pose.z)?,
            phi_ref: ReferenceFilter::new(omega, zeta, initial.angles.phi)?,
            pitch_pid: PidController::new(config.pitch_pid)?,
            depth_pid: PidController::new(config.depth_pid)?,
            supervisor: HybridSupervisor::new(config.hybrid)?,
            config,
            params,
            schedule,
            next_entry: 0,
            last_t: None,
        })
    }
}

impl Pilot for GliderPilot {
    fn tick(
        &mut self,
        t: f64,
        state: &VehicleState,
        act: &crate::vehicle::ActuatorState,
    ) -> Result<PilotOutput> {
        // Carry the shaped references forward over the elapsed interval, then
        // take on any setpoints that have come due.
        let dt = match self.last_t {
            Some(prev) => t - prev,
            None => 0.0,
        };
        if dt > 0.0 {
            self.theta_ref.advance(dt);
            self.z_ref.advance(dt);
            self.phi_ref.advance(dt);
        }
        self.last_t = Some(t);
        while self.next_entry < self.schedule.entries.len()
            && self.schedule.entries[self.next_entry].t <= t + 1e-9
        {
            let e = self.schedule.entries[self.next_entry];
            self.theta_ref.retarget(e.theta);
            self.z_ref.retarget(e.z);
            self.phi_ref.retarget(e.phi);
            self.next_entry += 1;
        }

        let angle_rates = euler_rates_from_body_rates(&state.angles, &state.nu.angular())?;
        let down = body_down_direction(&state.angles);
        let z_dot = down.dot(&state.nu.linear());

        let pitch_model = pitch_affine(state, act, &self.params)?;
        let depth_model = depth_affine(state, act, &self.params)?;

        let e_pitch = state.angles.theta - self.theta_ref.value();
        let ed_pitch = angle_rates[1] - self.theta_ref.rate();
        let s_pitch = sliding_surface(self.config.pitch.k1, e_pitch, ed_pitch);

        let e_depth = state.pose.z - self.z_ref.value();
        let ed_depth = z_dot - self.z_ref.rate();
        let s_depth = sliding_surface(self.config.depth.k1, e_depth, ed_depth);

        // Stability-bound diagnostics only: the combined law is stable for
        // any k2 > 0, but the log records whether the configured amplitude
        // would carry the pure switching law.
        let bound_pitch = k2_lower_bound(
            self.config.pitch.k1,
            ed_pitch,
            self.theta_ref.accel(),
            pitch_model.drift,
            pitch_model.gain,
        );
        let bound_depth = k2_lower_bound(
            self.config.depth.k1,
            ed_depth,
            self.z_ref.accel(),
            depth_model.drift,
            depth_model.gain,
        );

        // The baseline integrators run every tick regardless of who holds the
        // loop, so a hybrid handover is bumpless. The error sign is flipped
        // against the plant gain so positive PID gains stabilize either
        // channel.
        let pid_pitch =
            self.pitch_pid.update(-pitch_model.gain.signum() * e_pitch, dt);
        let pid_depth =
            self.depth_pid.update(-depth_model.gain.signum() * e_depth, dt);

        let frac = self.config.transition_fraction;
        let in_transition = self.theta_ref.in_transition(frac)
            || self.z_ref.in_transition(frac)
            || self.phi_ref.in_transition(frac);
        let innovation = ((e_pitch / self.config.pitch_scale).powi(2)
            + (e_depth / self.config.depth_scale).powi(2))
        .sqrt();

        let mode = match self.config.strategy {
            Strategy::Nlc => ControlMode::Nlc,
            Strategy::Pid => ControlMode::Pid,
            Strategy::Hybrid => self.supervisor.update(t, innovation, in_transition),
        };

        let (delta_rs, m_b) = match mode {
            ControlMode::Nlc => (
                self.config.pitch.command(
                    ed_pitch,
                    s_pitch,
                    self.theta_ref.accel(),
                    pitch_model.drift,
                    pitch_model.gain,
                )?,
                self.config.depth.command(
                    ed_depth,
                    s_depth,
                    self.z_ref.accel(),
                    depth_model.drift,
                    depth_model.gain,
                )?,
            ),
            ControlMode::Pid => (pid_pitch, pid_depth),
            ControlMode::Open => unreachable!("closed-loop strategies never select open loop"),
        };

        let gamma =
            self.config.roll.command(self.phi_ref.value(), state.angles.phi, angle_rates[0]);

        Ok(PilotOutput {
            gamma,
            delta_rs,
            m_b,
            mode,
            refs: ChannelRefs {
                theta: self.theta_ref.value(),
                z: self.z_ref.value(),
                phi: self.phi_ref.value(),
            },
            audit: Some(TickAudit {
                s_pitch,
                s_depth,
                lyapunov: lyapunov(&[s_pitch, s_depth]),
                k2_bound_pitch: bound_pitch,
                k2_bound_depth: bound_depth,
                in_transition,
            }),
        })
    }
}
