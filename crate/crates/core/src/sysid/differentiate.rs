//! Reconstruction of body-frame velocities and accelerations from capture
//! volume pose fixes.
//!
//! Pipeline: unwrap the attitude angles, smooth every pose series with a
//! short centered moving average, take central differences for inertial
//! velocities, map them into the body frame, then difference once more for
//! the accelerations the estimation objective fits against. Rows too close
//! to the pitch singularity are dropped and counted rather than silently
//! producing junk.

use nalgebra::{Vector3, Vector6};

use crate::error::{GliderError, Result};
use crate::sysid::mocap::{ActuatorSeries, MocapSeries};
use crate::vehicle::{
    body_rates_from_euler_rates, rotation_inertial_to_body, ActuatorState, BodyVelocity,
    EulerAngles, InertialPose, VehicleState,
};

/// Width of the centered moving average applied before differencing.
pub const SMOOTH_WINDOW: usize = 5;

/// Largest tolerated deviation of any sample interval from the median.
pub const MAX_JITTER_FRACTION: f64 = 0.05;

/// One fitted data point: the reconstructed state, the actuator values in
/// force, and the measured body acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t: f64,
    pub state: VehicleState,
    pub act: ActuatorState,
    pub nu_dot: Vector6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiationReport {
    pub observations: Vec<Observation>,
    /// Rows discarded because the attitude was inside the gimbal margin.
    pub dropped_gimbal: usize,
    pub median_dt: f64,
}

/// Maps an angle into [-pi, pi).
pub fn wrap_to_pi(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let y = (x + PI).rem_euclid(TAU);
    y - PI
}

/// Removes 2 pi jumps so the series is continuous and differentiable.
pub fn unwrap_angles(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut prev_out = match series.first() {
        Some(&v) => v,
        None => return out,
    };
    out.push(prev_out);
    for &v in &series[1..] {
        let prev_in = wrap_to_pi(prev_out);
        prev_out += wrap_to_pi(v - prev_in);
        out.push(prev_out);
    }
    out
}

/// Centered moving average; indices closer than half a window to either end
/// keep the raw value (they are trimmed away downstream anyway).
fn smooth(series: &[f64]) -> Vec<f64> {
    let h = SMOOTH_WINDOW / 2;
    let n = series.len();
    let mut out = series.to_vec();
    for i in h..n.saturating_sub(h) {
        out[i] = series[i - h..=i + h].iter().sum::<f64>() / SMOOTH_WINDOW as f64;
    }
    out
}

fn central_diff(series: &[f64], t: &[f64], i: usize) -> f64 {
    (series[i + 1] - series[i - 1]) / (t[i + 1] - t[i - 1])
}

fn check_time_grid(t: &[f64]) -> Result<f64> {
    for pair in t.windows(2) {
        if pair[1] <= pair[0] {
            return Err(GliderError::BadDataset {
                reason: format!("time must increase strictly, got {} then {}", pair[0], pair[1]),
            });
        }
    }
    let mut dts: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = dts[dts.len() / 2];
    for pair in t.windows(2) {
        let dt = pair[1] - pair[0];
        if ((dt - median) / median).abs() > MAX_JITTER_FRACTION {
            return Err(GliderError::BadDataset {
                reason: format!(
                    "sample interval {dt:.6} near t = {:.3} deviates more than {:.0}% from the \
                     median {median:.6}",
                    pair[0],
                    MAX_JITTER_FRACTION * 100.0
                ),
            });
        }
    }
    Ok(median)
}

/// Runs the full reconstruction. `ballast_travel_gain` converts logged
/// pumped mass into plunger travel, matching the plant model.
pub fn reconstruct_observations(
    mocap: &MocapSeries,
    schedule: &ActuatorSeries,
    ballast_travel_gain: f64,
) -> Result<DifferentiationReport> {
    let n = mocap.samples.len();
    let h = SMOOTH_WINDOW / 2;
    if n < SMOOTH_WINDOW + 5 {
        return Err(GliderError::BadDataset {
            reason: format!("need at least {} pose samples, got {n}", SMOOTH_WINDOW + 5),
        });
    }
    if schedule.records.is_empty() {
        return Err(GliderError::BadDataset { reason: "actuator log is empty".into() });
    }

    let t: Vec<f64> = mocap.samples.iter().map(|s| s.t).collect();
    let median_dt = check_time_grid(&t)?;

    let raw = |f: fn(&crate::sysid::mocap::MocapSample) -> f64| -> Vec<f64> {
        mocap.samples.iter().map(f).collect()
    };
    let series: [Vec<f64>; 6] = [
        smooth(&raw(|s| s.x)),
        smooth(&raw(|s| s.y)),
        smooth(&raw(|s| s.z)),
        smooth(&unwrap_angles(&raw(|s| s.phi))),
        smooth(&unwrap_angles(&raw(|s| s.theta))),
        smooth(&unwrap_angles(&raw(|s| s.psi))),
    ];

    // Body velocity at every index where the first differences exist and the
    // attitude is usable.
    let lo = h + 1;
    let hi = n - h - 2;
    let mut nu: Vec<Option<BodyVelocity>> = vec![None; n];
    let mut dropped_gimbal = 0usize;
    for i in lo..=hi {
        let angles = EulerAngles::new(series[3][i], series[4][i], series[5][i]);
        let pose_rate =
            Vector3::new(central_diff(&series[0], &t, i), central_diff(&series[1], &t, i), central_diff(&series[2], &t, i));
        let euler_rates =
            Vector3::new(central_diff(&series[3], &t, i), central_diff(&series[4], &t, i), central_diff(&series[5], &t, i));
        let omega = match body_rates_from_euler_rates(&angles, &euler_rates) {
            Ok(w) => w,
            Err(GliderError::GimbalLock { .. }) => {
                dropped_gimbal += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let vel = rotation_inertial_to_body(&angles).transpose() * pose_rate;
        nu[i] = Some(BodyVelocity::new(vel[0], vel[1], vel[2], omega[0], omega[1], omega[2]));
    }

    let mut observations = Vec::new();
    for i in lo + 1..hi {
        let (Some(prev), Some(here), Some(next)) = (nu[i - 1], nu[i], nu[i + 1]) else {
            continue;
        };
        let Some(rec) = schedule.at(t[i]) else {
            return Err(GliderError::BadDataset {
                reason: format!(
                    "actuator log starts at {:.3} s, after the first usable pose at {:.3} s",
                    schedule.records[0].t, t[i]
                ),
            });
        };
        let nu_dot = (next.as_vector() - prev.as_vector()) / (t[i + 1] - t[i - 1]);
        observations.push(Observation {
            t: t[i],
            state: VehicleState {
                pose: InertialPose::new(series[0][i], series[1][i], series[2][i]),
                angles: EulerAngles::new(series[3][i], series[4][i], series[5][i]),
                nu: here,
            },
            act: ActuatorState::from_recorded(
                rec.gamma,
                rec.delta_rs,
                rec.m_b,
                ballast_travel_gain,
            ),
            nu_dot,
        });
    }

    if observations.is_empty() {
        return Err(GliderError::BadDataset {
            reason: "no usable observations survived reconstruction".into(),
        });
    }
    Ok(DifferentiationReport { observations, dropped_gimbal, median_dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysid::mocap::{ActuatorRecord, MocapSample};
    use approx::assert_abs_diff_eq;

    /// Analytic pose program with hand-differentiated rates, kept well away
    /// from the pitch singularity.
    fn pose(t: f64) -> MocapSample {
        MocapSample {
            t,
            x: 0.5 * (0.3 * t).sin(),
            y: 0.3 * (0.4 * t).cos(),
            z: 0.05 * t + 0.1 * (0.5 * t).sin(),
            phi: 0.3 * (0.7 * t).sin(),
            theta: 0.35 * (0.2 * t).sin(),
            psi: -0.4 * (0.25 * t).cos(),
        }
    }

    fn pose_rates(t: f64) -> (Vector3<f64>, Vector3<f64>) {
        (
            Vector3::new(
                0.5 * 0.3 * (0.3 * t).cos(),
                -0.3 * 0.4 * (0.4 * t).sin(),
                0.05 + 0.1 * 0.5 * (0.5 * t).cos(),
            ),
            Vector3::new(
                0.3 * 0.7 * (0.7 * t).cos(),
                0.35 * 0.2 * (0.2 * t).cos(),
                0.4 * 0.25 * (0.25 * t).sin(),
            ),
        )
    }

    /// Exact body velocity from the analytic rates.
    fn exact_nu(t: f64) -> Vector6<f64> {
        let s = pose(t);
        let angles = EulerAngles::new(s.phi, s.theta, s.psi);
        let (pose_rate, euler_rates) = pose_rates(t);
        let vel = rotation_inertial_to_body(&angles).transpose() * pose_rate;
        let omega = body_rates_from_euler_rates(&angles, &euler_rates).unwrap();
        Vector6::new(vel[0], vel[1], vel[2], omega[0], omega[1], omega[2])
    }

    fn uniform_mocap(duration: f64, dt: f64) -> MocapSeries {
        let n = (duration / dt).round() as usize;
        MocapSeries { samples: (0..=n).map(|k| pose(k as f64 * dt)).collect() }
    }

    fn schedule() -> ActuatorSeries {
        ActuatorSeries {
            records: (0..400)
                .map(|k| ActuatorRecord {
                    t: k as f64 * 0.1,
                    gamma: 0.1 + 0.001 * k as f64,
                    delta_rs: 0.01,
                    m_b: 0.05,
                })
                .collect(),
        }
    }

    #[test]
    fn reconstructs_analytic_velocities_and_accelerations() {
        let report =
            reconstruct_observations(&uniform_mocap(20.0, 0.01), &schedule(), 0.1).unwrap();
        assert_eq!(report.dropped_gimbal, 0);
        assert!(report.observations.len() > 1900);
        assert_abs_diff_eq!(report.median_dt, 0.01, epsilon = 1e-12);

        let fd = 1e-5;
        for obs in report.observations.iter().step_by(97) {
            let expected_nu = exact_nu(obs.t);
            for (got, want) in obs.state.nu.as_vector().iter().zip(expected_nu.iter()) {
                assert_abs_diff_eq!(got, want, epsilon = 5e-4);
            }
            let expected_dot = (exact_nu(obs.t + fd) - exact_nu(obs.t - fd)) / (2.0 * fd);
            for (got, want) in obs.nu_dot.iter().zip(expected_dot.iter()) {
                assert_abs_diff_eq!(got, want, epsilon = 2e-3);
            }
        }
    }

    #[test]
    fn heading_wraps_are_unwrapped_before_differencing() {
        // Steady yaw rate at level attitude: psi crosses the -pi/pi seam many
        // times; r must come out flat, not spiked.
        let samples: Vec<MocapSample> = (0..3000)
            .map(|k| {
                let t = k as f64 * 0.01;
                MocapSample { t, x: 0.0, y: 0.0, z: 0.0, phi: 0.0, theta: 0.0, psi: wrap_to_pi(0.2 * t) }
            })
            .collect();
        let report =
            reconstruct_observations(&MocapSeries { samples }, &schedule(), 0.1).unwrap();
        for obs in &report.observations {
            assert_abs_diff_eq!(obs.state.nu.r, 0.2, epsilon = 1e-6);
            assert_abs_diff_eq!(obs.nu_dot[5], 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn unwrap_is_exact_on_wrapped_ramps() {
        let truth: Vec<f64> = (0..500).map(|k| -4.0 + 0.05 * k as f64).collect();
        let wrapped: Vec<f64> = truth.iter().map(|&v| wrap_to_pi(v)).collect();
        let un = unwrap_angles(&wrapped);
        // Unwrapping recovers the ramp up to the constant offset that places
        // the first sample in (-pi, pi].
        let offset = un[0] - truth[0];
        for (a, b) in un.iter().zip(&truth) {
            assert_abs_diff_eq!(a - offset, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn mild_jitter_is_tolerated_but_heavy_jitter_is_rejected() {
        let mk = |skew: f64| -> MocapSeries {
            let mut t = 0.0;
            let samples = (0..600)
                .map(|k| {
                    let s = pose(t);
                    t += if k % 2 == 0 { 0.01 * (1.0 + skew) } else { 0.01 * (1.0 - skew) };
                    s
                })
                .collect();
            MocapSeries { samples }
        };
        assert!(reconstruct_observations(&mk(0.02), &schedule(), 0.1).is_ok());
        let err = reconstruct_observations(&mk(0.10), &schedule(), 0.1).unwrap_err();
        assert!(matches!(err, GliderError::BadDataset { .. }));
    }

    #[test]
    fn gimbal_rows_are_dropped_and_counted() {
        // Pitch sweeps through vertical; rows inside the margin must vanish.
        let samples: Vec<MocapSample> = (0..1200)
            .map(|k| {
                let t = k as f64 * 0.01;
                MocapSample {
                    t,
                    x: 0.1 * t,
                    y: 0.0,
                    z: 0.0,
                    phi: 0.0,
                    theta: 0.3 * t, // crosses pi/2 near t = 5.2
                    psi: 0.0,
                }
            })
            .collect();
        let report =
            reconstruct_observations(&MocapSeries { samples }, &schedule(), 0.1).unwrap();
        assert!(report.dropped_gimbal > 0);
        for obs in &report.observations {
            assert!(
                (std::f64::consts::FRAC_PI_2 - obs.state.angles.theta.abs()).abs() > 1e-3,
                "row at theta = {} should have been dropped",
                obs.state.angles.theta
            );
        }
    }

    #[test]
    fn actuator_values_are_held_from_the_latest_record() {
        let report =
            reconstruct_observations(&uniform_mocap(5.0, 0.01), &schedule(), 0.1).unwrap();
        let obs = report
            .observations
            .iter()
            .find(|o| (o.t - 0.57).abs() < 1e-9)
            .expect("observation at 0.57 s");
        // Latest record at or before 0.57 s is the one at 0.5 s.
        assert_abs_diff_eq!(obs.act.gamma, 0.1 + 0.001 * 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(obs.act.delta_rb, 0.1 * 0.05, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let short = MocapSeries { samples: (0..6).map(|k| pose(k as f64 * 0.01)).collect() };
        assert!(reconstruct_observations(&short, &schedule(), 0.1).is_err());

        let mut backwards = uniform_mocap(1.0, 0.01);
        backwards.samples[40].t = backwards.samples[39].t - 0.001;
        assert!(reconstruct_observations(&backwards, &schedule(), 0.1).is_err());

        let late = ActuatorSeries {
            records: vec![ActuatorRecord { t: 100.0, gamma: 0.0, delta_rs: 0.0, m_b: 0.0 }],
        };
        let err = reconstruct_observations(&uniform_mocap(5.0, 0.01), &late, 0.1).unwrap_err();
        assert!(matches!(err, GliderError::BadDataset { .. }));
    }
}
