//! Synthetic identification corpus: a grid of short open-loop glides logged
//! the way a motion-capture rig would see them.
//!
//! Each run holds one actuator triple from a slider x ballast x rotary grid,
//! starts from a dithered moving initial condition, and is recorded as a
//! pose series (with optional measurement noise, angles wrapped to
//! [-pi, pi)) plus the matching actuator command log.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::{simulate, stream, derive_seed, DisturbanceSpec, OpenLoopSchedule, SimConfig};
use crate::sysid::{wrap_to_pi, ActuatorRecord, ActuatorSeries, MocapSample, MocapSeries};
use crate::vehicle::{ActuatorRanges, VehicleParams, VehicleState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    /// Slider offsets held per run, m.
    #[serde(default = "d_sliders")]
    pub slider_offsets: Vec<f64>,
    /// Ballast masses held per run, kg (negative = buoyant).
    #[serde(default = "d_ballast")]
    pub ballast_masses: Vec<f64>,
    /// Rotary angles held per run, rad.
    #[serde(default = "d_rotary")]
    pub rotary_angles: Vec<f64>,
    /// Length of each run, s.
    #[serde(default = "d_run_duration")]
    pub run_duration: f64,
    /// Plant step, s.
    #[serde(default = "d_dt")]
    pub dt: f64,
    /// Plant steps per recorded pose sample (10 -> 100 Hz at dt = 1 ms).
    #[serde(default = "d_decimation")]
    pub mocap_decimation: usize,
    /// Initial surge speed, m/s. Keeps the flow frame defined from t = 0.
    #[serde(default = "d_speed")]
    pub initial_speed: f64,
    /// Measurement noise on recorded positions, m (1 sigma).
    #[serde(default = "d_pos_noise")]
    pub position_noise: f64,
    /// Measurement noise on recorded angles, rad (1 sigma).
    #[serde(default = "d_angle_noise")]
    pub angle_noise: f64,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

fn d_sliders() -> Vec<f64> {
    vec![-0.02, 0.0, 0.02]
}
fn d_ballast() -> Vec<f64> {
    vec![-0.15, 0.0, 0.15]
}
fn d_rotary() -> Vec<f64> {
    vec![-0.6, -0.3, 0.0, 0.3, 0.6]
}
fn d_run_duration() -> f64 {
    9.0
}
fn d_dt() -> f64 {
    1e-3
}
fn d_decimation() -> usize {
    10
}
fn d_speed() -> f64 {
    0.3
}
fn d_pos_noise() -> f64 {
    1e-5
}
fn d_angle_noise() -> f64 {
    2e-5
}
fn d_seed() -> u64 {
    7
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            slider_offsets: d_sliders(),
            ballast_masses: d_ballast(),
            rotary_angles: d_rotary(),
            run_duration: d_run_duration(),
            dt: d_dt(),
            mocap_decimation: d_decimation(),
            initial_speed: d_speed(),
            position_noise: d_pos_noise(),
            angle_noise: d_angle_noise(),
            seed: d_seed(),
        }
    }
}

impl CorpusSpec {
    pub fn n_runs(&self) -> usize {
        self.slider_offsets.len() * self.ballast_masses.len() * self.rotary_angles.len()
    }
}

/// One logged run: what the capture rig and the actuator bus recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRun {
    pub name: String,
    pub mocap: MocapSeries,
    pub actuators: ActuatorSeries,
}

/// Simulates the whole grid. Deterministic for a given spec: run i draws its
/// dither and measurement noise from a stream derived from `seed` and i.
pub fn generate_corpus(
    spec: &CorpusSpec,
    params: &VehicleParams,
    ranges: &ActuatorRanges,
) -> Result<Vec<CorpusRun>> {
    let mut runs = Vec::with_capacity(spec.n_runs());
    let mut idx = 0u64;
    for &delta_rs in &spec.slider_offsets {
        for &m_b in &spec.ballast_masses {
            for &gamma in &spec.rotary_angles {
                let run_seed = derive_seed(spec.seed, stream::RUN_BASE + idx);
                let mut rng = ChaCha8Rng::seed_from_u64(run_seed);

                // Small attitude/velocity dither so no two runs repeat the
                // same arc even on coinciding grid cells.
                let mut init = [0.0f64; 12];
                init[2] = 1.0;
                for k in 3..6 {
                    init[k] = rng.random_range(-0.05..0.05);
                }
                init[6] = spec.initial_speed;
                for k in 7..9 {
                    init[k] = rng.random_range(-0.02..0.02);
                }
                let initial_state = VehicleState::from_array(&init);

                let config = SimConfig {
                    dt: spec.dt,
                    duration: spec.run_duration,
                    control_rate_hz: 10.0,
                    log_decimation: spec.mocap_decimation,
                    disturbance: DisturbanceSpec::OFF,
                    seed: run_seed,
                    initial_state,
                    initial_actuators: [gamma, delta_rs, m_b],
                    depth_bounds: None,
                };
                let mut schedule = OpenLoopSchedule::constant(gamma, delta_rs, m_b);
                let output = simulate(&config, &mut schedule, params, ranges)?;

                let mut mocap = MocapSeries::default();
                for s in &output.trajectory.samples {
                    let mut noise = [0.0f64; 6];
                    for n in &mut noise {
                        let z: f64 = rng.sample(StandardNormal);
                        *n = z;
                    }
                    mocap.samples.push(MocapSample {
                        t: s.t,
                        x: s.state.pose.x + spec.position_noise * noise[0],
                        y: s.state.pose.y + spec.position_noise * noise[1],
                        z: s.state.pose.z + spec.position_noise * noise[2],
                        phi: wrap_to_pi(s.state.angles.phi + spec.angle_noise * noise[3]),
                        theta: wrap_to_pi(s.state.angles.theta + spec.angle_noise * noise[4]),
                        psi: wrap_to_pi(s.state.angles.psi + spec.angle_noise * noise[5]),
                    });
                }

                let actuators = ActuatorSeries {
                    records: vec![ActuatorRecord { t: 0.0, gamma, delta_rs, m_b }],
                };

                runs.push(CorpusRun {
                    name: format!("run_{idx:02}"),
                    mocap,
                    actuators,
                });
                idx += 1;
            }
        }
    }
    Ok(runs)
}
