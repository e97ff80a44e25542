//! Random-walk Metropolis-Hastings over the twelve coefficients.
//!
//! Target: Gaussian acceleration-residual likelihood inside a uniform prior
//! box, evaluated through the precomputed quadratic form. The proposal is an
//! independent Gaussian step per coordinate, sized as a fraction of the
//! prior range and multiplied by one global scale. During burn-in the scale
//! follows a Robbins-Monro recursion toward a target acceptance rate, then
//! freezes, so the recorded draws come from a fixed kernel.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GliderError, Result};
use crate::sysid::objective::QuadraticObjective;
use crate::vehicle::HydroCoefficients;

const DIM: usize = HydroCoefficients::DIM;

/// Uniform prior: an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorBox {
    pub lo: [f64; DIM],
    pub hi: [f64; DIM],
}

impl PriorBox {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for j in 0..DIM {
            if !(self.lo[j].is_finite() && self.hi[j].is_finite() && self.lo[j] < self.hi[j]) {
                problems.push(format!(
                    "prior box for {} must be a finite interval, got [{}, {}]",
                    HydroCoefficients::NAMES[j],
                    self.lo[j],
                    self.hi[j]
                ));
            }
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }

    pub fn contains(&self, tau: &[f64; DIM]) -> bool {
        tau.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| v.is_finite() && *lo <= *v && *v <= *hi)
    }

    pub fn range(&self, j: usize) -> f64 {
        self.hi[j] - self.lo[j]
    }

    /// Projects a point onto the box; used to turn an unconstrained
    /// least-squares solution into a valid chain start.
    pub fn project(&self, tau: &[f64; DIM]) -> [f64; DIM] {
        let mut out = *tau;
        for j in 0..DIM {
            out[j] = out[j].clamp(self.lo[j], self.hi[j]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    /// Total kernel steps, burn-in included.
    pub n_steps: usize,
    pub burn_in: usize,
    /// Residual noise scale in the Gaussian likelihood.
    pub sigma_noise: f64,
    /// Per-coordinate proposal sigma as a fraction of the prior range.
    pub proposal_fraction: f64,
    /// Adapt the global proposal scale during burn-in.
    pub adapt: bool,
    pub target_acceptance: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_steps: 50_000,
            burn_in: 10_000,
            sigma_noise: 1e-2,
            proposal_fraction: 0.02,
            adapt: true,
            target_acceptance: 0.3,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_steps == 0 || self.burn_in >= self.n_steps {
            problems.push(format!(
                "need burn_in < n_steps, got {} / {}",
                self.burn_in, self.n_steps
            ));
        }
        if !(self.sigma_noise.is_finite() && self.sigma_noise > 0.0) {
            problems.push(format!("sigma_noise must be positive, got {}", self.sigma_noise));
        }
        if !(self.proposal_fraction.is_finite() && self.proposal_fraction > 0.0) {
            problems.push(format!(
                "proposal_fraction must be positive, got {}",
                self.proposal_fraction
            ));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            problems.push(format!(
                "target_acceptance must be in (0, 1), got {}",
                self.target_acceptance
            ));
        }
        if problems.is_empty() { Ok(()) } else { Err(GliderError::validation(problems)) }
    }
}

/// One Gaussian random-walk step.
pub fn propose(
    rng: &mut ChaCha8Rng,
    current: &[f64; DIM],
    sigma: &[f64; DIM],
) -> [f64; DIM] {
    let mut out = *current;
    for j in 0..DIM {
        let n: f64 = rng.sample(StandardNormal);
        out[j] += sigma[j] * n;
    }
    out
}

/// Log of the unnormalized posterior density.
pub fn log_target(
    objective: &QuadraticObjective,
    prior: &PriorBox,
    sigma_noise: f64,
    tau: &[f64; DIM],
) -> f64 {
    if !prior.contains(tau) {
        return f64::NEG_INFINITY;
    }
    -objective.sum_squares(tau) / (2.0 * sigma_noise * sigma_noise)
}

/// Metropolis ratio for a symmetric proposal: min(1, exp(lp - lc)).
pub fn acceptance_probability(log_current: f64, log_proposed: f64) -> f64 {
    if log_proposed == f64::NEG_INFINITY {
        return 0.0;
    }
    (log_proposed - log_current).min(0.0).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Post-burn-in draws.
    pub samples: Vec<[f64; DIM]>,
    /// Accepted / proposed counts after burn-in.
    pub accepted: usize,
    pub proposed: usize,
    /// Global proposal scale in force when recording started.
    pub final_scale: f64,
    pub seed: u64,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 { 0.0 } else { self.accepted as f64 / self.proposed as f64 }
    }
}

/// Runs one chain from `init`, which must lie inside the prior box.
pub fn run_chain(
    objective: &QuadraticObjective,
    prior: &PriorBox,
    config: &McmcConfig,
    init: &[f64; DIM],
    seed: u64,
) -> Result<Chain> {
    config.validate()?;
    prior.validate()?;
    if !prior.contains(init) {
        return Err(GliderError::one_problem(format!(
            "chain start {init:?} lies outside the prior box"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma = [0.0; DIM];
    for j in 0..DIM {
        sigma[j] = config.proposal_fraction * prior.range(j);
    }
    let mut scale = 1.0f64;

    let mut current = *init;
    let mut log_current = log_target(objective, prior, config.sigma_noise, &current);
    let mut chain = Chain {
        samples: Vec::with_capacity(config.n_steps - config.burn_in),
        accepted: 0,
        proposed: 0,
        final_scale: 1.0,
        seed,
    };

    for k in 0..config.n_steps {
        let mut step_sigma = sigma;
        for s in step_sigma.iter_mut() {
            *s *= scale;
        }
        let candidate = propose(&mut rng, &current, &step_sigma);
        let log_candidate = log_target(objective, prior, config.sigma_noise, &candidate);
        let alpha = acceptance_probability(log_current, log_candidate);
        let u: f64 = rng.random();
        let accepted = u < alpha;
        if accepted {
            current = candidate;
            log_current = log_candidate;
        }

        if k < config.burn_in {
            if config.adapt {
                // Robbins-Monro on the log scale with a decaying step.
                let gamma = (k as f64 + 1.0).powf(-0.6);
                scale = (scale * (gamma * (alpha - config.target_acceptance)).exp())
                    .clamp(1e-3, 1e3);
            }
        } else {
            chain.proposed += 1;
            chain.accepted += accepted as usize;
            chain.samples.push(current);
        }
    }
    chain.final_scale = scale;
    Ok(chain)
}
