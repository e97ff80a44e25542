//! Head-to-head grid: the nonlinear law and the PID baseline fly the same
//! single-channel step cells under the same disturbance realization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{GliderPilot, SetpointSchedule, Strategy};
use crate::error::{GliderError, Result};
use crate::scenarios::controller::ControllerSection;
use crate::scenarios::{check_version, from_toml, SCENARIO_SCHEMA_VERSION};
use crate::sim::{
    compute_metrics, derive_seed, simulate, stream, Channel, DisturbanceSpec, SimConfig,
    TrackingMetrics,
};
use crate::vehicle::{ActuatorRanges, VehicleParams, VehicleState};

fn d_pitch_targets() -> Vec<f64> {
    [-45.0f64, -30.0, -10.0, 10.0, 30.0, 45.0].iter().map(|d| d.to_radians()).collect()
}
fn d_depth_targets() -> Vec<f64> {
    vec![0.0, 2.0, 4.0, 5.0]
}
fn d_initial_depth() -> f64 {
    1.0
}
fn d_pitch_duration() -> f64 {
    60.0
}
fn d_depth_duration() -> f64 {
    90.0
}
fn d_window() -> f64 {
    0.25
}
fn d_dt() -> f64 {
    1e-3
}
fn d_rate() -> f64 {
    10.0
}
fn d_decimation() -> usize {
    10
}
fn d_disturbance() -> DisturbanceSpec {
    DisturbanceSpec { sigma: [0.02, 0.02, 0.02, 0.005, 0.01, 0.005], rate_hz: 10.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareScenario {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Commanded pitch steps, rad (depth held at the start value).
    #[serde(default = "d_pitch_targets")]
    pub pitch_targets: Vec<f64>,
    /// Commanded depths, m (pitch held at zero).
    #[serde(default = "d_depth_targets")]
    pub depth_targets: Vec<f64>,
    #[serde(default = "d_initial_depth")]
    pub initial_depth: f64,
    #[serde(default = "d_pitch_duration")]
    pub pitch_duration: f64,
    #[serde(default = "d_depth_duration")]
    pub depth_duration: f64,
    /// Trailing fraction of each run scored.
    #[serde(default = "d_window")]
    pub metrics_window: f64,
    /// Shared disturbance: both laws see the identical realization per cell.
    #[serde(default = "d_disturbance")]
    pub disturbance: DisturbanceSpec,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_rate")]
    pub control_rate_hz: f64,
    #[serde(default = "d_decimation")]
    pub log_decimation: usize,
    /// Gains for both sides; `strategy` names the nonlinear law.
    #[serde(default)]
    pub controller: ControllerSection,
}

impl Default for CompareScenario {
    fn default() -> Self {
        CompareScenario {
            schema_version: SCENARIO_SCHEMA_VERSION,
            vehicle: None,
            seed: 0,
            pitch_targets: d_pitch_targets(),
            depth_targets: d_depth_targets(),
            initial_depth: d_initial_depth(),
            pitch_duration: d_pitch_duration(),
            depth_duration: d_depth_duration(),
            metrics_window: d_window(),
            disturbance: d_disturbance(),
            dt: d_dt(),
            control_rate_hz: d_rate(),
            log_decimation: d_decimation(),
            controller: ControllerSection::default(),
        }
    }
}

impl CompareScenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let sc: CompareScenario = from_toml(text, origin)?;
        check_version(sc.schema_version)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GliderError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// One grid cell before it is run.
#[derive(Debug, Clone, PartialEq)]
struct CellSpec {
    name: String,
    channel: Channel,
    target: f64,
    step: f64,
    schedule: SetpointSchedule,
    duration: f64,
    seed: u64,
}

/// Scores for one cell, same disturbance for both rows. A side that blew up
/// mid-run is recorded as `None` rather than sinking the whole grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub name: String,
    /// `pitch` or `depth`.
    pub channel: String,
    pub target: f64,
    /// Commanded step magnitude, used to normalize tail errors.
    pub step: f64,
    pub seed: u64,
    pub nlc: Option<TrackingMetrics>,
    pub pid: Option<TrackingMetrics>,
    /// Tail RMS ratio nlc/pid; below 1 means the nonlinear law tracked
    /// tighter. Absent unless both sides finished.
    pub rms_ratio: Option<f64>,
    /// False whenever either side diverged.
    pub nlc_better: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    /// Which nonlinear law was compared against PID.
    pub nlc_strategy: String,
    pub cells: Vec<CellOutcome>,
    pub nlc_wins: usize,
    pub all_nlc_better: bool,
}

fn run_cell(
    sc: &CompareScenario,
    cell: &CellSpec,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
) -> Result<CellOutcome> {
    let initial = VehicleState::from_array(&[
        0.0,
        0.0,
        sc.initial_depth,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ]);
    let config = SimConfig {
        dt: sc.dt,
        duration: cell.duration,
        control_rate_hz: sc.control_rate_hz,
        log_decimation: sc.log_decimation,
        disturbance: sc.disturbance,
        seed: cell.seed,
        initial_state: initial,
        initial_actuators: [0.0; 3],
        depth_bounds: None,
    };

    // A side that leaves the physical envelope is scored as diverged; any
    // other failure (bad gains, bad config) still aborts the grid.
    let side = |strategy_name: &str| -> Result<Option<TrackingMetrics>> {
        let section =
            ControllerSection { strategy: strategy_name.into(), ..sc.controller.clone() };
        let pilot_config = section.pilot_config()?;
        let mut pilot = GliderPilot::new(
            pilot_config,
            params.clone(),
            cell.schedule.clone(),
            &config.initial_state,
        )?;
        match simulate(&config, &mut pilot, params, ranges) {
            Ok(output) => Ok(Some(compute_metrics(
                &output.trajectory,
                cell.channel,
                cell.target,
                sc.metrics_window,
            )?)),
            Err(GliderError::Diverged { .. }) | Err(GliderError::DepthExcursion { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let nlc = side(&sc.controller.strategy)?;
    let pid = side("pid")?;
    let rms_ratio = match (&nlc, &pid) {
        (Some(n), Some(p)) if p.rms_error > 0.0 => Some(n.rms_error / p.rms_error),
        (Some(_), Some(_)) => Some(f64::INFINITY),
        _ => None,
    };
    let nlc_better =
        matches!((&nlc, &pid), (Some(n), Some(p)) if n.rms_error < p.rms_error);
    let diverged = nlc.is_none() || pid.is_none();
    Ok(CellOutcome {
        name: cell.name.clone(),
        channel: cell.channel.name().into(),
        target: cell.target,
        step: cell.step,
        seed: cell.seed,
        nlc,
        pid,
        rms_ratio,
        nlc_better,
        diverged,
    })
}

/// Runs the whole grid. Cell seeds derive from `seed`, and each cell's two
/// runs share one seed so the disturbance realization is identical.
pub fn run_compare(
    sc: &CompareScenario,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
    seed: u64,
) -> Result<CompareReport> {
    match sc.controller.strategy()? {
        Some(Strategy::Nlc) => {}
        _ => {
            return Err(GliderError::one_problem(format!(
                "compare needs strategy nlc for the nonlinear side, got `{}`",
                sc.controller.strategy
            )))
        }
    }
    if sc.pitch_targets.is_empty() && sc.depth_targets.is_empty() {
        return Err(GliderError::one_problem("compare grid has no cells"));
    }

    let mut cells: Vec<CellSpec> = Vec::new();
    for (i, &theta) in sc.pitch_targets.iter().enumerate() {
        cells.push(CellSpec {
            name: format!("pitch_{:+.0}deg", theta.to_degrees()),
            channel: Channel::Pitch,
            target: theta,
            step: theta.abs(),
            schedule: SetpointSchedule::constant(theta, sc.initial_depth, 0.0),
            duration: sc.pitch_duration,
            seed: derive_seed(seed, stream::RUN_BASE + i as u64),
        });
    }
    for (i, &z) in sc.depth_targets.iter().enumerate() {
        cells.push(CellSpec {
            name: format!("depth_{z:.1}m"),
            channel: Channel::Depth,
            target: z,
            step: (z - sc.initial_depth).abs(),
            schedule: SetpointSchedule::constant(0.0, z, 0.0),
            duration: sc.depth_duration,
            seed: derive_seed(seed, stream::RUN_BASE + (sc.pitch_targets.len() + i) as u64),
        });
    }

    #[cfg(feature = "parallel")]
    let outcomes: Result<Vec<CellOutcome>> = {
        use rayon::prelude::*;
        cells.par_iter().map(|c| run_cell(sc, c, params, ranges)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Result<Vec<CellOutcome>> =
        cells.iter().map(|c| run_cell(sc, c, params, ranges)).collect();
    let cells = outcomes?;

    let nlc_wins = cells.iter().filter(|c| c.nlc_better).count();
    let all = nlc_wins == cells.len();
    Ok(CompareReport {
        nlc_strategy: sc.controller.strategy.clone(),
        cells,
        nlc_wins,
        all_nlc_better: all,
    })
}
