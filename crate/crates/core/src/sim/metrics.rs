use crate::error::{GliderError, Result};
use crate::sim::trajectory::{Trajectory, TrajectorySample};

/// Controlled output channels that metrics can be computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Pitch,
    Depth,
    Roll,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Pitch => "pitch",
            Channel::Depth => "depth",
            Channel::Roll => "roll",
        }
    }

    pub fn measured(&self, s: &TrajectorySample) -> f64 {
        match self {
            Channel::Pitch => s.state.angles.theta,
            Channel::Depth => s.state.pose.z,
            Channel::Roll => s.state.angles.phi,
        }
    }

    pub fn reference(&self, s: &TrajectorySample) -> f64 {
        match self {
            Channel::Pitch => s.refs.theta,
            Channel::Depth => s.refs.z,
            Channel::Roll => s.refs.phi,
        }
    }
}

/// Tracking-error summary over the tail window of a run. Errors are measured
/// against the filtered reference, which both control laws consume, so the
/// numbers isolate the control law rather than the reference shaping.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrackingMetrics {
    pub rms_error: f64,
    pub mean_abs_error: f64,
    /// Signed error of the final sample.
    pub final_error: f64,
    /// Mean absolute error as a percentage of the commanded target
    /// magnitude. When the target magnitude is (numerically) zero this holds
    /// the plain mean absolute error instead and `zero_target_fallback` is
    /// set.
    pub percent_error_of_target: f64,
    pub zero_target_fallback: bool,
    /// Start of the evaluation window, s.
    pub window_start: f64,
}

/// Target magnitudes below this are treated as zero for the percent metric.
const ZERO_TARGET_EPS: f64 = 1e-9;

/// Computes tracking metrics for `channel` against the recorded reference
/// over the trailing `window_fraction` of the run.
pub fn compute_metrics(
    traj: &Trajectory,
    channel: Channel,
    target: f64,
    window_fraction: f64,
) -> Result<TrackingMetrics> {
    if !(0.0 < window_fraction && window_fraction <= 1.0) {
        return Err(GliderError::one_problem(format!(
            "metrics window fraction must be in (0, 1], got {window_fraction}"
        )));
    }
    let last_t = traj
        .samples
        .last()
        .ok_or_else(|| GliderError::one_problem("metrics on an empty trajectory"))?
        .t;
    let first_t = traj.samples[0].t;
    let window_start = last_t - window_fraction * (last_t - first_t);
    let tail: Vec<&TrajectorySample> =
        traj.samples.iter().filter(|s| s.t >= window_start).collect();
    if tail.is_empty() {
        return Err(GliderError::one_problem("metrics window contains no samples"));
    }
    let errors: Vec<f64> =
        tail.iter().map(|s| channel.measured(s) - channel.reference(s)).collect();
    let n = errors.len() as f64;
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let mean_abs = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let final_error = *errors.last().unwrap();
    let zero_target = target.abs() < ZERO_TARGET_EPS;
    let percent = if zero_target { mean_abs } else { 100.0 * mean_abs / target.abs() };
    Ok(TrackingMetrics {
        rms_error: rms,
        mean_abs_error: mean_abs,
        final_error,
        percent_error_of_target: percent,
        zero_target_fallback: zero_target,
        window_start,
    })
}
