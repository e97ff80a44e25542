use nalgebra::Vector6;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GliderError, Result};
use crate::sim::disturbance::{sample_disturbance, DisturbanceSpec};
use crate::sim::integrator::rk4_step;
use crate::sim::trajectory::{ChannelRefs, ControlMode, Trajectory, TrajectorySample};
use crate::vehicle::{ActuatorRanges, ActuatorState, VehicleParams, VehicleState};

/// Fixed-step simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Plant integration step, s.
    pub dt: f64,
    /// Run length, s.
    pub duration: f64,
    /// Controller invocation rate, Hz. Commands are held between ticks.
    pub control_rate_hz: f64,
    /// Record every n-th plant step.
    pub log_decimation: usize,
    pub disturbance: DisturbanceSpec,
    /// Master seed for the run; the disturbance draws from a stream derived
    /// from it.
    pub seed: u64,
    pub initial_state: VehicleState,
    /// Raw initial actuator request (clamped before use): gamma, delta_rs, m_b.
    pub initial_actuators: [f64; 3],
    /// Abort band on depth, m. `None` disables the check.
    pub depth_bounds: Option<(f64, f64)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            duration: 10.0,
            control_rate_hz: 10.0,
            log_decimation: 10,
            disturbance: DisturbanceSpec::OFF,
            seed: 0,
            initial_state: VehicleState::default(),
            initial_actuators: [0.0; 3],
            depth_bounds: None,
        }
    }
}

/// Requires `period = 1/rate` to be an integer number of plant steps and
/// returns that number.
fn steps_per_period(rate_hz: f64, dt: f64, what: &str) -> Result<usize> {
    let steps = 1.0 / (rate_hz * dt);
    let rounded = steps.round();
    if rounded < 1.0 || (steps - rounded).abs() > 1e-6 * steps.max(1.0) {
        return Err(GliderError::one_problem(format!(
            "{what} period (1/{rate_hz} Hz) must be an integer multiple of dt = {dt}"
        )));
    }
    Ok(rounded as usize)
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            problems.push(format!("duration must cover at least one step, got {}", self.duration));
        }
        if self.log_decimation == 0 {
            problems.push("log_decimation must be at least 1".into());
        }
        if let Err(GliderError::Validation { problems: p }) = self.disturbance.validate() {
            problems.extend(p);
        }
        if self.dt > 0.0 {
            if let Err(e) = steps_per_period(self.control_rate_hz, self.dt, "control") {
                problems.push(e.to_string());
            }
            if let Err(e) = steps_per_period(self.disturbance.rate_hz, self.dt, "disturbance") {
                problems.push(e.to_string());
            }
        }
        if let Some((lo, hi)) = self.depth_bounds {
            if !(lo < hi) {
                problems.push(format!("depth bounds ({lo}, {hi}) must be ordered"));
            }
        }
        if !self.initial_state.is_finite() {
            problems.push("initial state has non-finite components".into());
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Per-tick controller internals captured for auditing closed-loop runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TickAudit {
    pub s_pitch: f64,
    pub s_depth: f64,
    /// Combined sliding-surface energy 0.5 (s_pitch^2 + s_depth^2).
    pub lyapunov: f64,
    pub k2_bound_pitch: f64,
    pub k2_bound_depth: f64,
    pub in_transition: bool,
}

/// What a control policy returns each tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotOutput {
    /// Requested actuator values (clamped by the runner).
    pub gamma: f64,
    pub delta_rs: f64,
    pub m_b: f64,
    pub mode: ControlMode,
    pub refs: ChannelRefs,
    pub audit: Option<TickAudit>,
}

/// A control policy: invoked at the control rate with the current state and
/// the actuator values actually in force (after clamping).
pub trait Pilot {
    fn tick(&mut self, t: f64, state: &VehicleState, act: &ActuatorState) -> Result<PilotOutput>;
}

/// Piecewise-constant actuator schedule for open-loop runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenLoopSchedule {
    /// (time, gamma, delta_rs, m_b), sorted by time, first entry at t = 0.
    pub entries: Vec<[f64; 4]>,
}

impl OpenLoopSchedule {
    pub fn constant(gamma: f64, delta_rs: f64, m_b: f64) -> Self {
        OpenLoopSchedule { entries: vec![[0.0, gamma, delta_rs, m_b]] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(GliderError::one_problem("actuator schedule is empty"));
        }
        if self.entries[0][0] != 0.0 {
            return Err(GliderError::one_problem("actuator schedule must start at t = 0"));
        }
        for pair in self.entries.windows(2) {
            if pair[1][0] <= pair[0][0] {
                return Err(GliderError::one_problem(
                    "actuator schedule times must increase strictly",
                ));
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> [f64; 3] {
        let mut current = &self.entries[0];
        for e in &self.entries {
            if e[0] <= t {
                current = e;
            } else {
                break;
            }
        }
        [current[1], current[2], current[3]]
    }
}

impl Pilot for OpenLoopSchedule {
    fn tick(&mut self, t: f64, _state: &VehicleState, _act: &ActuatorState) -> Result<PilotOutput> {
        let [gamma, delta_rs, m_b] = self.at(t);
        Ok(PilotOutput {
            gamma,
            delta_rs,
            m_b,
            mode: ControlMode::Open,
            refs: ChannelRefs::default(),
            audit: None,
        })
    }
}

/// A recorded change of control law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSwitch {
    pub t: f64,
    pub from: ControlMode,
    pub to: ControlMode,
}

/// Count of clamped commands per actuator channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct ClampCounts {
    pub gamma: usize,
    pub delta_rs: usize,
    pub m_b: usize,
}

impl ClampCounts {
    pub fn total(&self) -> usize {
        self.gamma + self.delta_rs + self.m_b
    }
}

/// Everything a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub final_state: VehicleState,
    pub mode_switches: Vec<ModeSwitch>,
    pub clamps: ClampCounts,
    pub audits: Vec<(f64, TickAudit)>,
}

/// Stream tags for RNG derivation, so different consumers of one master seed
/// never share a stream.
pub mod stream {
    pub const DISTURBANCE: u64 = 1;
    pub const CHAIN_BASE: u64 = 100;
    pub const RUN_BASE: u64 = 10_000;
}

/// Derives an independent stream seed from a master seed via SplitMix64
/// mixing; equal inputs give equal outputs, nearby inputs give decorrelated
/// streams.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(stream))
}

/// Runs the plant under `pilot` for the configured duration.
///
/// The control command and disturbance are zero-order held between their
/// respective refresh instants. Returns an error if the state stops being
/// finite, the attitude reaches the pitch singularity, or depth leaves the
/// configured band.
pub fn simulate(
    config: &SimConfig,
    pilot: &mut dyn Pilot,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
) -> Result<SimOutput> {
    config.validate()?;
    ranges.validate()?;

    let n_steps = config.n_steps();
    let ctrl_every = steps_per_period(config.control_rate_hz, config.dt, "control")?;
    let dist_every = steps_per_period(config.disturbance.rate_hz, config.dt, "disturbance")?;
    let mut dist_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(config.seed, stream::DISTURBANCE));

    let mut state = config.initial_state;
    let [g0, s0, b0] = config.initial_actuators;
    let (mut act, _) = ActuatorState::clamped(g0, s0, b0, ranges);
    let mut held_disturbance = Vector6::zeros();
    let mut refs = ChannelRefs::default();
    let mut mode = ControlMode::Open;

    let mut out = SimOutput {
        trajectory: Trajectory::default(),
        final_state: state,
        mode_switches: Vec::new(),
        clamps: ClampCounts::default(),
        audits: Vec::new(),
    };
    let mut first_tick = true;

    for k in 0..n_steps {
        let t = k as f64 * config.dt;

        if k % ctrl_every == 0 {
            let cmd = pilot.tick(t, &state, &act)?;
            let (new_act, clamp) = ActuatorState::clamped(cmd.gamma, cmd.delta_rs, cmd.m_b, ranges);
            if clamp.gamma {
                out.clamps.gamma += 1;
            }
            if clamp.delta_rs {
                out.clamps.delta_rs += 1;
            }
            if clamp.m_b {
                out.clamps.m_b += 1;
            }
            if clamp.any() {
                log::debug!("t={t:.3}: actuator command clamped ({clamp:?})");
            }
            if !first_tick && cmd.mode != mode {
                out.mode_switches.push(ModeSwitch { t, from: mode, to: cmd.mode });
            }
            first_tick = false;
            act = new_act;
            mode = cmd.mode;
            refs = cmd.refs;
            if let Some(audit) = cmd.audit {
                out.audits.push((t, audit));
            }
        }

        if k % dist_every == 0 {
            held_disturbance = sample_disturbance(&mut dist_rng, &config.disturbance);
        }

        if k % config.log_decimation == 0 {
            out.trajectory.push(TrajectorySample { t, state, act, mode, refs });
        }

        state = rk4_step(&state, &act, params, &held_disturbance, config.dt).map_err(|e| {
            GliderError::Diverged { t, detail: e.to_string() }
        })?;
        if !state.is_finite() {
            return Err(GliderError::Diverged { t, detail: "state left the finite range".into() });
        }
        if let Some((lo, hi)) = config.depth_bounds {
            if state.pose.z < lo || state.pose.z > hi {
                return Err(GliderError::DepthExcursion {
                    t: t + config.dt,
                    z: state.pose.z,
                    min: lo,
                    max: hi,
                });
            }
        }
    }

    out.trajectory.push(TrajectorySample {
        t: n_steps as f64 * config.dt,
        state,
        act,
        mode,
        refs,
    });
    out.final_state = state;
    out.trajectory.check_monotone()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{
        BodyVelocity, HydroCoefficients, InertiaModel, MassConfiguration, VehicleParams,
    };
    use nalgebra::{Matrix6, Vector3};

    pub(crate) fn test_params() -> VehicleParams {
        let mut m = Matrix6::identity();
        for (i, v) in [13.4, 24.0, 24.0, 0.18, 2.1, 2.1].iter().enumerate() {
            m[(i, i)] = *v;
        }
        VehicleParams {
            mass: MassConfiguration {
                m_total: 13.0,
                m_r: 2.0,
                m_s: 2.0,
                r_r: Vector3::new(0.0, 0.0, 0.02),
                r_s: Vector3::new(0.0, 0.0, 0.0),
                r_b: Vector3::new(0.15, 0.0, 0.0),
                r_sx0: 0.0,
                rotary_radius: 0.02,
                g: 9.81,
            },
            inertia: InertiaModel::new(m).unwrap(),
            hydro: HydroCoefficients {
                kd0: 8.0,
                kd: 35.0,
                kl0: 0.2,
                kl: 120.0,
                kbeta: -20.0,
                kmr: -3.0,
                kp: -4.0,
                km0: 0.0,
                km: -12.0,
                kq: -8.0,
                kmy: 12.0,
                kr: -6.0,
            },
        }
    }

    fn ranges() -> ActuatorRanges {
        ActuatorRanges {
            gamma_max: std::f64::consts::FRAC_PI_3,
            delta_rs_max: 0.05,
            m_b_max: 0.25,
            ballast_travel_gain: 0.1,
        }
    }

    #[test]
    fn seed_derivation_is_stable_and_spread() {
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
        assert_ne!(derive_seed(1, 2), derive_seed(2, 2));
    }

    #[test]
    fn heavy_ballast_descends_monotonically_after_transient() {
        let config = SimConfig {
            duration: 20.0,
            initial_state: VehicleState {
                nu: BodyVelocity::new(0.3, 0.0, 0.0, 0.0, 0.0, 0.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let mut pilot = OpenLoopSchedule::constant(0.0, 0.0, 0.2);
        let out = simulate(&config, &mut pilot, &test_params(), &ranges()).unwrap();
        let depths: Vec<f64> = out
            .trajectory
            .samples
            .iter()
            .filter(|s| s.t > 5.0)
            .map(|s| s.state.pose.z)
            .collect();
        assert!(depths.windows(2).all(|w| w[1] > w[0]), "depth must keep increasing");
        assert!(out.final_state.pose.z > 1.0);
    }

    #[test]
    fn effective_integration_order_is_at_least_three_point_five() {
        // Endpoint error of a smooth 10 s glide must shrink ~16x per dt halving.
        let params = test_params();
        let base = SimConfig {
            duration: 10.0,
            initial_state: VehicleState {
                nu: BodyVelocity::new(0.3, 0.0, 0.0, 0.0, 0.0, 0.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let endpoint = |dt: f64| {
            let config = SimConfig { dt, log_decimation: usize::MAX, ..base.clone() };
            let mut pilot = OpenLoopSchedule::constant(0.2, 0.01, 0.15);
            simulate(&config, &mut pilot, &params, &ranges()).unwrap().final_state
        };
        let a = endpoint(4e-3).to_array();
        let b = endpoint(2e-3).to_array();
        let c = endpoint(1e-3).to_array();
        let diff = |x: &[f64; 12], y: &[f64; 12]| {
            x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
        };
        let e_coarse = diff(&a, &b);
        let e_fine = diff(&b, &c);
        let order = (e_coarse / e_fine).log2();
        assert!(order >= 3.5, "observed convergence order {order:.2}");
    }

    #[test]
    fn identical_seeds_are_bit_identical_and_zero_sigma_matches_off() {
        let params = test_params();
        let mut config = SimConfig {
            duration: 3.0,
            disturbance: DisturbanceSpec { sigma: [0.02; 6], rate_hz: 10.0 },
            seed: 9,
            initial_state: VehicleState {
                nu: BodyVelocity::new(0.3, 0.0, 0.0, 0.0, 0.0, 0.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let run = |cfg: &SimConfig| {
            let mut pilot = OpenLoopSchedule::constant(0.1, 0.0, 0.1);
            simulate(cfg, &mut pilot, &params, &ranges()).unwrap()
        };
        let a = run(&config);
        let b = run(&config);
        assert_eq!(a.trajectory, b.trajectory);

        config.disturbance = DisturbanceSpec { sigma: [0.0; 6], rate_hz: 10.0 };
        let zero_sigma = run(&config);
        config.disturbance = DisturbanceSpec::OFF;
        let off = run(&config);
        assert_eq!(zero_sigma.trajectory, off.trajectory);
    }

    #[test]
    fn disturbance_changes_the_path_and_seeds_differ() {
        let params = test_params();
        let mk = |seed: u64, sigma: f64| {
            let config = SimConfig {
                duration: 2.0,
                disturbance: DisturbanceSpec { sigma: [sigma; 6], rate_hz: 10.0 },
                seed,
                ..Default::default()
            };
            let mut pilot = OpenLoopSchedule::constant(0.0, 0.0, 0.1);
            simulate(&config, &mut pilot, &params, &ranges()).unwrap().final_state
        };
        let clean = mk(1, 0.0);
        let noisy1 = mk(1, 0.05);
        let noisy2 = mk(2, 0.05);
        assert_ne!(clean, noisy1);
        assert_ne!(noisy1, noisy2);
    }

    #[test]
    fn depth_band_aborts_with_excursion_error() {
        let config = SimConfig {
            duration: 60.0,
            depth_bounds: Some((0.0, 0.5)),
            initial_state: VehicleState {
                nu: BodyVelocity::new(0.3, 0.0, 0.0, 0.0, 0.0, 0.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let mut pilot = OpenLoopSchedule::constant(0.0, 0.0, 0.25);
        let err = simulate(&config, &mut pilot, &test_params(), &ranges()).unwrap_err();
        assert!(matches!(err, GliderError::DepthExcursion { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_rate_combinations_are_rejected() {
        let config = SimConfig { dt: 3e-3, control_rate_hz: 10.0, ..Default::default() };
        // 0.1 s is not an integer multiple of 3 ms.
        assert!(config.validate().is_err());
    }

    #[test]
    fn schedule_lookup_is_step_hold() {
        let sched = OpenLoopSchedule {
            entries: vec![[0.0, 0.0, 0.0, 0.1], [1.0, 0.5, 0.01, -0.1]],
        };
        sched.validate().unwrap();
        assert_eq!(sched.at(0.5)[2], 0.1);
        assert_eq!(sched.at(1.0)[0], 0.5);
        assert_eq!(sched.at(5.0)[2], -0.1);
    }

    #[test]
    fn clamped_commands_are_counted() {
        let config = SimConfig { duration: 1.0, ..Default::default() };
        let mut pilot = OpenLoopSchedule::constant(10.0, 0.0, 0.0);
        let out = simulate(&config, &mut pilot, &test_params(), &ranges()).unwrap();
        assert_eq!(out.clamps.gamma, 10);
        assert_eq!(out.clamps.m_b, 0);
        let g = out.trajectory.samples[0].act.gamma;
        assert_eq!(g, std::f64::consts::FRAC_PI_3);
    }
}
