use nalgebra::Vector6;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::error::{GliderError, Result};

/// White acceleration noise held constant between refreshes.
///
/// Each refresh draws six independent zero-mean normal values (per-axis
/// standard deviations in `sigma`, m/s^2 for the translational axes and
/// rad/s^2 for the rotational ones) which are added directly to the body
/// acceleration until the next refresh.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub sigma: [f64; 6],
    /// Refresh rate, Hz. The plant step must divide the refresh period.
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
}

fn default_rate() -> f64 {
    10.0
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        DisturbanceSpec::OFF
    }
}

impl DisturbanceSpec {
    pub const OFF: DisturbanceSpec = DisturbanceSpec { sigma: [0.0; 6], rate_hz: 10.0 };

    pub fn is_off(&self) -> bool {
        self.sigma.iter().all(|s| *s == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (i, s) in self.sigma.iter().enumerate() {
            if !(s.is_finite() && *s >= 0.0) {
                problems.push(format!("disturbance sigma[{i}] must be >= 0, got {s}"));
            }
        }
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            problems.push(format!("disturbance rate must be positive, got {}", self.rate_hz));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// One refresh of the held disturbance. A spec with all-zero sigma returns an
/// exact zero vector without touching the generator, so disabled-disturbance
/// runs are bit-identical to runs with no disturbance plumbing at all.
pub fn sample_disturbance<R: Rng + ?Sized>(rng: &mut R, spec: &DisturbanceSpec) -> Vector6<f64> {
    if spec.is_off() {
        return Vector6::zeros();
    }
    let mut v = Vector6::zeros();
    for i in 0..6 {
        let n: f64 = rng.sample(StandardNormal);
        v[i] = spec.sigma[i] * n;
    }
    v
}
