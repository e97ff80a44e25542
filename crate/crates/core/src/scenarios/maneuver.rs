//! Banked turning flight built from yo-yo glide cycles.
//!
//! Each cycle is a descending leg followed by an ascending leg at a fixed
//! pitch magnitude while the rotary arm holds a bank. The tilted
//! hydrodynamic resultant curves the path one way while descending and the
//! other way while ascending, so heading travel accumulates leg after leg
//! while depth shuttles inside a fixed band. `circle` keeps one bank sign
//! for every leg; `s_curve` flips the bank sign on each cycle;
//! `circle_to_s` chains the two.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{GliderPilot, SetpointEntry, SetpointSchedule};
use crate::error::{GliderError, Result};
use crate::scenarios::controller::ControllerSection;
use crate::scenarios::{check_version, from_toml, SCENARIO_SCHEMA_VERSION};
use crate::sim::{simulate, ControlMode, DisturbanceSpec, SimConfig, SimOutput};
use crate::sysid::unwrap_angles;
use crate::vehicle::{ActuatorRanges, VehicleParams, VehicleState};

fn d_bank() -> f64 {
    0.25
}
fn d_pitch() -> f64 {
    0.26
}
fn d_cycles() -> usize {
    2
}
fn d_leg_duration() -> f64 {
    18.0
}
fn d_shallow() -> f64 {
    0.6
}
fn d_deep() -> f64 {
    2.2
}
fn d_initial_speed() -> f64 {
    0.2
}
fn d_dt() -> f64 {
    2e-3
}
fn d_rate() -> f64 {
    10.0
}
fn d_decimation() -> usize {
    10
}
fn d_controller() -> ControllerSection {
    ControllerSection::with_strategy("hybrid")
}
fn d_depth_bounds() -> Option<[f64; 2]> {
    Some([0.0, 6.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManeuverScenario {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// `circle`, `s_curve`, or `circle_to_s`.
    pub kind: String,
    /// Bank (roll) setpoint magnitude, rad.
    #[serde(default = "d_bank")]
    pub bank: f64,
    /// Glide pitch magnitude, rad: nose-down on descending legs, nose-up on
    /// ascending legs.
    #[serde(default = "d_pitch")]
    pub pitch: f64,
    /// Descend+ascend cycles per phase.
    #[serde(default = "d_cycles")]
    pub cycles: usize,
    /// Length of each descending or ascending leg, s.
    #[serde(default = "d_leg_duration")]
    pub leg_duration: f64,
    /// Top of the yo-yo band, m (also the starting depth).
    #[serde(default = "d_shallow")]
    pub shallow_depth: f64,
    /// Bottom of the yo-yo band, m.
    #[serde(default = "d_deep")]
    pub deep_depth: f64,
    /// Initial surge speed, m/s.
    #[serde(default = "d_initial_speed")]
    pub initial_speed: f64,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    /// Abort band for depth, m (surface and tank floor). `None` disables.
    #[serde(default = "d_depth_bounds")]
    pub depth_bounds: Option<[f64; 2]>,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_rate")]
    pub control_rate_hz: f64,
    #[serde(default = "d_decimation")]
    pub log_decimation: usize,
    #[serde(default = "d_controller")]
    pub controller: ControllerSection,
}

impl Default for ManeuverScenario {
    fn default() -> Self {
        ManeuverScenario {
            schema_version: SCENARIO_SCHEMA_VERSION,
            vehicle: None,
            seed: 0,
            kind: "circle".into(),
            bank: d_bank(),
            pitch: d_pitch(),
            cycles: d_cycles(),
            leg_duration: d_leg_duration(),
            shallow_depth: d_shallow(),
            deep_depth: d_deep(),
            initial_speed: d_initial_speed(),
            disturbance: DisturbanceSpec::OFF,
            depth_bounds: d_depth_bounds(),
            dt: d_dt(),
            control_rate_hz: d_rate(),
            log_decimation: d_decimation(),
            controller: d_controller(),
        }
    }
}

/// One glide leg of the program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Leg {
    /// `circle` or `s_curve`.
    pub phase: String,
    /// Cycle index within the phase.
    pub cycle: usize,
    pub descending: bool,
    pub t0: f64,
    pub t1: f64,
    /// Signed roll setpoint, rad.
    pub bank: f64,
    /// Signed pitch setpoint, rad.
    pub pitch: f64,
    /// Depth setpoint, m.
    pub z_target: f64,
}

impl ManeuverScenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let sc: ManeuverScenario = from_toml(text, origin)?;
        check_version(sc.schema_version)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GliderError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.cycles == 0 {
            problems.push("cycles must be at least 1".to_string());
        }
        if !(self.leg_duration.is_finite() && self.leg_duration > 0.0) {
            problems.push(format!("leg_duration must be positive, got {}", self.leg_duration));
        }
        for (name, v) in [("bank", self.bank), ("pitch", self.pitch)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.shallow_depth.is_finite() && self.shallow_depth > 0.0) {
            problems.push(format!(
                "shallow_depth must be positive, got {}",
                self.shallow_depth
            ));
        }
        if !(self.deep_depth.is_finite() && self.deep_depth > self.shallow_depth) {
            problems.push(format!(
                "deep_depth must exceed shallow_depth, got {} vs {}",
                self.deep_depth, self.shallow_depth
            ));
        }
        if let Some([lo, hi]) = self.depth_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                problems.push(format!("depth_bounds must satisfy lo < hi, got [{lo}, {hi}]"));
            } else if self.shallow_depth < lo || self.deep_depth > hi {
                problems.push(format!(
                    "yo-yo band [{}, {}] must sit inside depth_bounds [{lo}, {hi}]",
                    self.shallow_depth, self.deep_depth
                ));
            }
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }

    /// The glide legs implied by `kind`, in time order.
    pub fn legs(&self) -> Result<Vec<Leg>> {
        self.validate()?;
        let phase_legs = |phase: &str, alternate: bool, t0: f64, legs: &mut Vec<Leg>| {
            let mut t = t0;
            for cycle in 0..self.cycles {
                let sign = if alternate && cycle % 2 == 1 { -1.0 } else { 1.0 };
                for descending in [true, false] {
                    legs.push(Leg {
                        phase: phase.into(),
                        cycle,
                        descending,
                        t0: t,
                        t1: t + self.leg_duration,
                        bank: sign * self.bank,
                        pitch: if descending { -self.pitch } else { self.pitch },
                        z_target: if descending { self.deep_depth } else { self.shallow_depth },
                    });
                    t += self.leg_duration;
                }
            }
        };
        let mut legs = Vec::new();
        match self.kind.as_str() {
            "circle" => phase_legs("circle", false, 0.0, &mut legs),
            "s_curve" => phase_legs("s_curve", true, 0.0, &mut legs),
            "circle_to_s" => {
                phase_legs("circle", false, 0.0, &mut legs);
                let t = legs.last().unwrap().t1;
                phase_legs("s_curve", true, t, &mut legs);
            }
            other => {
                return Err(GliderError::one_problem(format!(
                    "unknown maneuver kind `{other}`; expected circle, s_curve or circle_to_s"
                )))
            }
        }
        Ok(legs)
    }

    pub fn duration(&self) -> Result<f64> {
        Ok(self.legs()?.last().unwrap().t1)
    }

    /// One setpoint row per leg.
    pub fn schedule(&self) -> Result<SetpointSchedule> {
        let entries = self
            .legs()?
            .iter()
            .map(|leg| SetpointEntry { t: leg.t0, theta: leg.pitch, z: leg.z_target, phi: leg.bank })
            .collect();
        let schedule = SetpointSchedule { entries };
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Heading and depth produced during one leg.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegOutcome {
    #[serde(flatten)]
    pub leg: Leg,
    /// Signed unwrapped heading change over the leg, rad.
    pub heading_change: f64,
    /// Accumulated |dpsi| over the leg, rad.
    pub heading_travel: f64,
    pub mean_speed: f64,
    pub depth_start: f64,
    pub depth_end: f64,
    /// Nonlinear law active somewhere in the leg's opening stretch.
    pub nlc_at_entry: bool,
    /// Baseline law active somewhere in the leg's settled tail.
    pub pid_in_tail: bool,
}

/// Per-phase rollup of the legs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub name: String,
    pub t0: f64,
    pub t1: f64,
    /// Signed unwrapped heading change over the phase, rad.
    pub heading_change: f64,
    /// Accumulated |dpsi| over the phase, rad.
    pub heading_travel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManeuverReport {
    pub kind: String,
    pub bank: f64,
    pub pitch: f64,
    pub duration: f64,
    pub legs: Vec<LegOutcome>,
    pub phases: Vec<PhaseSummary>,
    pub min_depth: f64,
    pub max_depth: f64,
    /// Accumulated |dpsi| over the whole run, rad.
    pub total_heading_travel: f64,
}

pub fn run_maneuver(
    sc: &ManeuverScenario,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
    seed: u64,
) -> Result<(SimOutput, ManeuverReport)> {
    let legs = sc.legs()?;
    let schedule = sc.schedule()?;
    let duration = sc.duration()?;

    let initial = VehicleState::from_array(&[
        0.0,
        0.0,
        sc.shallow_depth,
        0.0,
        0.0,
        0.0,
        sc.initial_speed,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ]);
    let config = SimConfig {
        dt: sc.dt,
        duration,
        control_rate_hz: sc.control_rate_hz,
        log_decimation: sc.log_decimation,
        disturbance: sc.disturbance,
        seed,
        initial_state: initial,
        initial_actuators: [0.0; 3],
        depth_bounds: sc.depth_bounds.map(|[lo, hi]| (lo, hi)),
    };
    let pilot_config = sc.controller.pilot_config()?;
    let mut pilot = GliderPilot::new(pilot_config, params.clone(), schedule, &initial)?;
    let output = simulate(&config, &mut pilot, params, ranges)?;

    let samples = &output.trajectory.samples;
    let psi_raw: Vec<f64> = samples.iter().map(|s| s.state.angles.psi).collect();
    let psi = unwrap_angles(&psi_raw);

    // Sample index window [first, last] covering a time span.
    let window = |t0: f64, t1: f64| -> Result<(usize, usize)> {
        let idx: Vec<usize> = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.t >= t0 - 1e-9 && s.t <= t1 + 1e-9)
            .map(|(i, _)| i)
            .collect();
        match (idx.first(), idx.last()) {
            (Some(&a), Some(&b)) if a != b => Ok((a, b)),
            _ => Err(GliderError::one_problem(format!(
                "no logged samples between t = {t0} and {t1}"
            ))),
        }
    };
    let travel = |a: usize, b: usize| psi[a..=b].windows(2).map(|w| (w[1] - w[0]).abs()).sum();

    let mut outcomes = Vec::with_capacity(legs.len());
    for leg in &legs {
        let (a, b) = window(leg.t0, leg.t1)?;
        let mean_speed = samples[a..=b]
            .iter()
            .map(|s| s.state.nu.linear().norm())
            .sum::<f64>()
            / (b - a + 1) as f64;
        // The opening stretch is where the fresh setpoints should pull in the
        // nonlinear law; the tail is where the references have settled.
        let entry_end = leg.t0 + 0.5 * (leg.t1 - leg.t0);
        let nlc_at_entry = samples[a..=b]
            .iter()
            .any(|s| s.t <= entry_end && s.mode == ControlMode::Nlc);
        let pid_in_tail = samples[a..=b]
            .iter()
            .any(|s| s.t > entry_end && s.mode == ControlMode::Pid);
        outcomes.push(LegOutcome {
            leg: leg.clone(),
            heading_change: psi[b] - psi[a],
            heading_travel: travel(a, b),
            mean_speed,
            depth_start: samples[a].state.pose.z,
            depth_end: samples[b].state.pose.z,
            nlc_at_entry,
            pid_in_tail,
        });
    }

    let mut phases = Vec::new();
    for name in ["circle", "s_curve"] {
        let span: Vec<&Leg> = legs.iter().filter(|l| l.phase == name).collect();
        if let (Some(first), Some(last)) = (span.first(), span.last()) {
            let (a, b) = window(first.t0, last.t1)?;
            phases.push(PhaseSummary {
                name: name.into(),
                t0: first.t0,
                t1: last.t1,
                heading_change: psi[b] - psi[a],
                heading_travel: travel(a, b),
            });
        }
    }

    let min_depth = samples.iter().map(|s| s.state.pose.z).fold(f64::MAX, f64::min);
    let max_depth = samples.iter().map(|s| s.state.pose.z).fold(f64::MIN, f64::max);
    let report = ManeuverReport {
        kind: sc.kind.clone(),
        bank: sc.bank,
        pitch: sc.pitch,
        duration,
        legs: outcomes,
        phases,
        min_depth,
        max_depth,
        total_heading_travel: travel(0, samples.len() - 1),
    };
    Ok((output, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_params;

    #[test]
    fn legs_encode_the_flight_program() {
        let sc = ManeuverScenario { kind: "circle_to_s".into(), ..ManeuverScenario::default() };
        let legs = sc.legs().unwrap();
        assert_eq!(legs.len(), 8);
        // Descend/ascend alternation with matching pitch signs and targets.
        for (j, leg) in legs.iter().enumerate() {
            assert_eq!(leg.descending, j % 2 == 0);
            assert_eq!(leg.pitch, if leg.descending { -sc.pitch } else { sc.pitch });
            let z = if leg.descending { sc.deep_depth } else { sc.shallow_depth };
            assert_eq!(leg.z_target, z);
            assert!((leg.t1 - leg.t0 - sc.leg_duration).abs() < 1e-12);
        }
        // Circle holds one bank sign; S flips per cycle.
        assert!(legs[..4].iter().all(|l| l.phase == "circle" && l.bank == sc.bank));
        assert!(legs[4..6].iter().all(|l| l.phase == "s_curve" && l.bank == sc.bank));
        assert!(legs[6..8].iter().all(|l| l.phase == "s_curve" && l.bank == -sc.bank));
        // One schedule row per leg, starting at t = 0.
        let schedule = sc.schedule().unwrap();
        assert_eq!(schedule.entries.len(), 8);
        assert_eq!(schedule.entries[0].t, 0.0);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let sc = ManeuverScenario { kind: "corkscrew".into(), ..ManeuverScenario::default() };
        assert!(sc.legs().is_err());
        let sc = ManeuverScenario { cycles: 0, ..ManeuverScenario::default() };
        assert!(sc.validate().is_err());
        let sc = ManeuverScenario {
            deep_depth: 0.4,
            shallow_depth: 0.6,
            ..ManeuverScenario::default()
        };
        assert!(sc.validate().is_err());
        let sc = ManeuverScenario { leg_duration: 0.0, ..ManeuverScenario::default() };
        assert!(sc.validate().is_err());
    }

    /// With one bank sign held, the descending and ascending legs curve the
    /// path in opposite directions: the tilted resultant flips with the
    /// ballast sign.
    #[test]
    fn yoyo_legs_turn_in_alternating_directions() {
        let (params, ranges) = default_params();
        let sc = ManeuverScenario { cycles: 1, ..ManeuverScenario::default() };
        let (_, report) = run_maneuver(&sc, &params, &ranges, 1).unwrap();
        assert_eq!(report.legs.len(), 2);
        let down = &report.legs[0];
        let up = &report.legs[1];
        assert!(down.heading_change.abs() > 0.5, "descending leg barely turned: {}", down.heading_change);
        assert!(up.heading_change.abs() > 0.5, "ascending leg barely turned: {}", up.heading_change);
        assert!(
            down.heading_change.signum() != up.heading_change.signum(),
            "legs turned the same way: {} vs {}",
            down.heading_change,
            up.heading_change
        );
        assert!(report.legs.iter().all(|l| l.mean_speed > 0.05));
        // The yo-yo actually shuttles: down leg ends deep, up leg comes back.
        assert!(down.depth_end > down.depth_start + 0.5);
        assert!(up.depth_end < down.depth_end - 0.5);
    }

    #[test]
    fn circle_heading_travel_approaches_a_full_turn() {
        let (params, ranges) = default_params();
        let sc = ManeuverScenario::default();
        let (_, report) = run_maneuver(&sc, &params, &ranges, 1).unwrap();
        let circle = &report.phases[0];
        let travel_deg = circle.heading_travel.to_degrees();
        assert!(
            (travel_deg - 360.0).abs() <= 20.0,
            "circle heading travel {travel_deg} deg is outside 360 +- 20"
        );
        assert!(report.max_depth < 6.0 && report.min_depth > 0.0);
    }

    #[test]
    fn s_cycles_flip_bank_and_hybrid_modes_bracket_each_leg() {
        let (params, ranges) = default_params();
        let sc = ManeuverScenario { kind: "s_curve".into(), ..ManeuverScenario::default() };
        let (out, report) = run_maneuver(&sc, &params, &ranges, 1).unwrap();
        // Roll sign alternates per cycle.
        let banks: Vec<f64> = report.legs.iter().map(|l| l.leg.bank).collect();
        assert_eq!(banks, vec![sc.bank, sc.bank, -sc.bank, -sc.bank]);
        // Every leg opens under the nonlinear law and settles into PID.
        for l in &report.legs {
            assert!(l.nlc_at_entry, "leg at t0 = {} never engaged NLC", l.leg.t0);
            assert!(l.pid_in_tail, "leg at t0 = {} never settled to PID", l.leg.t0);
        }
        assert!(!out.mode_switches.is_empty());
    }

    #[test]
    fn toml_round_trip_and_version_gate() {
        let sc = ManeuverScenario::default();
        let text = toml::to_string_pretty(&sc).unwrap();
        let back = ManeuverScenario::parse(&text, "mem").unwrap();
        assert_eq!(sc, back);
        let bad = text.replace("schema_version = 1", "schema_version = 7");
        assert!(ManeuverScenario::parse(&bad, "mem").is_err());
    }
}

