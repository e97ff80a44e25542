//! Single closed- or open-loop run described by a TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{GliderPilot, SetpointEntry, SetpointSchedule};
use crate::error::{GliderError, Result};
use crate::scenarios::controller::ControllerSection;
use crate::scenarios::{check_version, from_toml, SCENARIO_SCHEMA_VERSION};
use crate::sim::{
    compute_metrics, simulate, Channel, ClampCounts, DisturbanceSpec, OpenLoopSchedule,
    SimConfig, SimOutput, TrackingMetrics,
};
use crate::vehicle::{ActuatorRanges, VehicleParams, VehicleState};

/// Starting pose and motion. Units: m, rad, m/s, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "d_position")]
    pub position: [f64; 3],
    #[serde(default)]
    pub angles: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 6],
    /// Raw actuator request at t = 0: gamma, delta_rs, m_b.
    #[serde(default)]
    pub actuators: [f64; 3],
}

fn d_position() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            position: d_position(),
            angles: [0.0; 3],
            velocity: [0.0; 6],
            actuators: [0.0; 3],
        }
    }
}

impl InitialSection {
    pub fn state(&self) -> VehicleState {
        let p = self.position;
        let a = self.angles;
        let v = self.velocity;
        VehicleState::from_array(&[
            p[0], p[1], p[2], a[0], a[1], a[2], v[0], v[1], v[2], v[3], v[4], v[5],
        ])
    }
}

fn d_duration() -> f64 {
    60.0
}
fn d_dt() -> f64 {
    1e-3
}
fn d_control_rate() -> f64 {
    10.0
}
fn d_decimation() -> usize {
    10
}
fn d_window() -> f64 {
    0.25
}
fn d_setpoints() -> Vec<SetpointEntry> {
    vec![SetpointEntry { t: 0.0, theta: 0.0, z: 1.0, phi: 0.0 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateScenario {
    pub schema_version: u32,
    /// Optional vehicle description file; the stock platform otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<PathBuf>,
    #[serde(default = "d_duration")]
    pub duration: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_control_rate")]
    pub control_rate_hz: f64,
    #[serde(default = "d_decimation")]
    pub log_decimation: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub initial: InitialSection,
    /// Abort band on depth, m (min, max). Omit to disable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_bounds: Option<[f64; 2]>,
    #[serde(default)]
    pub controller: ControllerSection,
    /// Setpoint program for closed-loop strategies.
    #[serde(default = "d_setpoints")]
    pub setpoints: Vec<SetpointEntry>,
    /// Actuator program for `strategy = "open"`: rows of (t, gamma, delta_rs, m_b).
    #[serde(default)]
    pub open_loop: Vec<[f64; 4]>,
    /// Trailing fraction of the run that tracking metrics cover.
    #[serde(default = "d_window")]
    pub metrics_window: f64,
}

impl Default for SimulateScenario {
    fn default() -> Self {
        SimulateScenario {
            schema_version: SCENARIO_SCHEMA_VERSION,
            vehicle: None,
            duration: d_duration(),
            dt: d_dt(),
            control_rate_hz: d_control_rate(),
            log_decimation: d_decimation(),
            seed: 0,
            disturbance: DisturbanceSpec::OFF,
            initial: InitialSection::default(),
            depth_bounds: None,
            controller: ControllerSection::default(),
            setpoints: d_setpoints(),
            open_loop: Vec::new(),
            metrics_window: d_window(),
        }
    }
}

impl SimulateScenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let sc: SimulateScenario = from_toml(text, origin)?;
        check_version(sc.schema_version)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GliderError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            dt: self.dt,
            duration: self.duration,
            control_rate_hz: self.control_rate_hz,
            log_decimation: self.log_decimation,
            disturbance: self.disturbance,
            seed,
            initial_state: self.initial.state(),
            initial_actuators: self.initial.actuators,
            depth_bounds: self.depth_bounds.map(|[lo, hi]| (lo, hi)),
        }
    }
}

/// Per-channel tracking outcome against the last commanded target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelReport {
    pub target: f64,
    #[serde(flatten)]
    pub metrics: TrackingMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub strategy: String,
    pub duration: f64,
    pub samples: usize,
    pub mode_switches: usize,
    pub clamped_commands: ClampCounts,
    /// Absent for open-loop runs, which track nothing.
    pub pitch: Option<ChannelReport>,
    pub depth: Option<ChannelReport>,
    pub roll: Option<ChannelReport>,
    /// x, y, z, phi, theta, psi, u, v, w, p, q, r at the end of the run.
    pub final_state: [f64; 12],
}

/// Runs one scenario. `seed` is resolved by the caller (command line beats
/// the file value).
pub fn run_simulate(
    sc: &SimulateScenario,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
    seed: u64,
) -> Result<(SimOutput, SimulateReport)> {
    let config = sc.sim_config(seed);
    let strategy = sc.controller.strategy()?;

    let output = match strategy {
        None => {
            if sc.open_loop.is_empty() {
                return Err(GliderError::one_problem(
                    "strategy `open` needs a non-empty open_loop program",
                ));
            }
            let mut schedule = OpenLoopSchedule { entries: sc.open_loop.clone() };
            schedule.validate()?;
            simulate(&config, &mut schedule, params, ranges)?
        }
        Some(_) => {
            let pilot_config = sc.controller.pilot_config()?;
            let schedule = SetpointSchedule { entries: sc.setpoints.clone() };
            let mut pilot =
                GliderPilot::new(pilot_config, params.clone(), schedule, &config.initial_state)?;
            simulate(&config, &mut pilot, params, ranges)?
        }
    };

    let channel_report = |channel: Channel, target: f64| -> Result<Option<ChannelReport>> {
        if strategy.is_none() {
            return Ok(None);
        }
        let metrics = compute_metrics(&output.trajectory, channel, target, sc.metrics_window)?;
        Ok(Some(ChannelReport { target, metrics }))
    };
    let last = sc.setpoints.last().copied().unwrap_or(SetpointEntry {
        t: 0.0,
        theta: 0.0,
        z: 0.0,
        phi: 0.0,
    });

    let report = SimulateReport {
        strategy: sc.controller.strategy.clone(),
        duration: sc.duration,
        samples: output.trajectory.samples.len(),
        mode_switches: output.mode_switches.len(),
        clamped_commands: output.clamps,
        pitch: channel_report(Channel::Pitch, last.theta)?,
        depth: channel_report(Channel::Depth, last.z)?,
        roll: channel_report(Channel::Roll, last.phi)?,
        final_state: output.final_state.to_array(),
    };
    Ok((output, report))
}
