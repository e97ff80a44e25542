//! Coefficient estimation from logged runs: reconstruction, least squares,
//! then a small ensemble of Metropolis-Hastings chains.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GliderError, Result};
use crate::scenarios::corpus::{generate_corpus, CorpusSpec};
use crate::scenarios::{check_version, from_toml};
use crate::sim::{derive_seed, stream};
use crate::sysid::{
    reconstruct_observations, run_chain, summarize, ActuatorSeries, Chain, McmcConfig,
    MocapSeries, Observation, PosteriorSummary, PriorBox, QuadraticObjective,
};
use crate::vehicle::{ActuatorRanges, HydroCoefficients, VehicleParams};

/// Engineering bounds for the twelve coefficients, wide enough for any
/// reasonable hull of this scale and sign-constrained where physics fixes
/// the sign (drag positive, rate damping negative).
pub fn default_prior() -> PriorBox {
    PriorBox {
        //    kd0   kd     kl0    kl    kbeta  kmr   kp    km0   km      kq    kmy    kr
        lo: [0.0, 0.0, -10.0, 0.0, -200.0, -50.0, -50.0, -5.0, -100.0, -50.0, -100.0, -50.0],
        hi: [50.0, 300.0, 10.0, 500.0, 0.0, 50.0, 0.0, 5.0, 100.0, 0.0, 100.0, 0.0],
    }
}

fn d_steps() -> usize {
    50_000
}
fn d_burn() -> usize {
    10_000
}
fn d_chains() -> usize {
    4
}
fn d_fraction() -> f64 {
    0.02
}
fn d_true() -> bool {
    true
}
fn d_acceptance() -> f64 {
    0.3
}
fn d_sigma() -> f64 {
    1e-2
}

/// Sampler section of an estimation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    #[serde(default = "d_steps")]
    pub n_steps: usize,
    #[serde(default = "d_burn")]
    pub burn_in: usize,
    #[serde(default = "d_chains")]
    pub n_chains: usize,
    #[serde(default = "d_fraction")]
    pub proposal_fraction: f64,
    #[serde(default = "d_true")]
    pub adapt: bool,
    #[serde(default = "d_acceptance")]
    pub target_acceptance: f64,
    /// Fit the likelihood noise scale from the least-squares residual.
    #[serde(default = "d_true")]
    pub auto_noise: bool,
    /// Noise scale used when `auto_noise` is off.
    #[serde(default = "d_sigma")]
    pub sigma_noise: f64,
}

impl Default for McmcSection {
    fn default() -> Self {
        McmcSection {
            n_steps: d_steps(),
            burn_in: d_burn(),
            n_chains: d_chains(),
            proposal_fraction: d_fraction(),
            adapt: d_true(),
            target_acceptance: d_acceptance(),
            auto_noise: d_true(),
            sigma_noise: d_sigma(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub lo: [f64; 12],
    pub hi: [f64; 12],
}

impl Default for PriorSection {
    fn default() -> Self {
        let p = default_prior();
        PriorSection { lo: p.lo, hi: p.hi }
    }
}

impl PriorSection {
    pub fn to_box(&self) -> PriorBox {
        PriorBox { lo: self.lo, hi: self.hi }
    }
}

/// One recorded run on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPaths {
    pub mocap: PathBuf,
    pub actuators: PathBuf,
}

/// Where the data comes from: a generated corpus or files on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    /// `synthetic` or `files`.
    #[serde(default = "d_kind")]
    pub kind: String,
    #[serde(default)]
    pub synthetic: CorpusSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunPaths>,
}

fn d_kind() -> String {
    "synthetic".into()
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection { kind: d_kind(), synthetic: CorpusSpec::default(), runs: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateScenario {
    pub schema_version: u32,
    /// Mass and inertia are taken from this vehicle file (hydro coefficients
    /// in it are ignored: they are what is being estimated).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub prior: PriorSection,
}

impl Default for EstimateScenario {
    fn default() -> Self {
        EstimateScenario {
            schema_version: crate::scenarios::SCENARIO_SCHEMA_VERSION,
            vehicle: None,
            seed: 0,
            source: SourceSection::default(),
            mcmc: McmcSection::default(),
            prior: PriorSection::default(),
        }
    }
}

impl EstimateScenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let sc: EstimateScenario = from_toml(text, origin)?;
        check_version(sc.schema_version)?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GliderError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Produces the run set: simulated corpus or loaded files.
    pub fn assemble_runs(
        &self,
        params: &VehicleParams,
        ranges: &ActuatorRanges,
    ) -> Result<Vec<(MocapSeries, ActuatorSeries)>> {
        match self.source.kind.as_str() {
            "synthetic" => Ok(generate_corpus(&self.source.synthetic, params, ranges)?
                .into_iter()
                .map(|r| (r.mocap, r.actuators))
                .collect()),
            "files" => {
                if self.source.runs.is_empty() {
                    return Err(GliderError::one_problem(
                        "source kind `files` needs at least one mocap/actuator pair",
                    ));
                }
                self.source
                    .runs
                    .iter()
                    .map(|r| {
                        Ok((
                            MocapSeries::load_csv(&r.mocap)?,
                            ActuatorSeries::load_csv(&r.actuators)?,
                        ))
                    })
                    .collect()
            }
            other => Err(GliderError::one_problem(format!(
                "unknown source kind `{other}`; expected synthetic or files"
            ))),
        }
    }
}

/// Everything the estimation pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOutcome {
    pub summary: PosteriorSummary,
    pub chains: Vec<Chain>,
    /// Unconstrained least-squares solution.
    pub ls_solution: [f64; 12],
    /// Chain start: the least-squares solution projected into the prior.
    pub start: [f64; 12],
    /// Noise scale actually used in the likelihood.
    pub sigma_noise: f64,
    pub n_runs: usize,
    pub n_observations: usize,
    pub dropped_gimbal: usize,
}

impl EstimationOutcome {
    pub fn mean(&self) -> HydroCoefficients {
        self.summary.mean_coefficients()
    }
}

/// Reconstructs accelerations from every run, folds them into the quadratic
/// objective, and samples the posterior with `n_chains` independent chains
/// seeded from `master_seed`.
pub fn run_estimation(
    runs: &[(MocapSeries, ActuatorSeries)],
    params: &VehicleParams,
    ranges: &ActuatorRanges,
    prior: &PriorBox,
    mcmc: &McmcSection,
    master_seed: u64,
) -> Result<EstimationOutcome> {
    if runs.is_empty() {
        return Err(GliderError::BadDataset { reason: "no runs to estimate from".into() });
    }
    if mcmc.n_chains == 0 {
        return Err(GliderError::one_problem("n_chains must be at least 1"));
    }
    prior.validate()?;

    let mut observations: Vec<Observation> = Vec::new();
    let mut dropped_gimbal = 0;
    for (mocap, acts) in runs {
        let report = reconstruct_observations(mocap, acts, ranges.ballast_travel_gain)?;
        dropped_gimbal += report.dropped_gimbal;
        observations.extend(report.observations);
    }

    let objective = QuadraticObjective::build(&observations, params)?;
    let ls = objective.least_squares()?;
    let start = prior.project(&ls);

    let sigma_noise = if mcmc.auto_noise {
        // Maximum-likelihood noise scale from the residual at the optimum,
        // floored so a near-perfect fit cannot freeze the sampler.
        let dof = (6 * objective.n_observations).saturating_sub(12).max(1);
        (objective.sum_squares(&ls) / dof as f64).sqrt().max(1e-6)
    } else {
        mcmc.sigma_noise
    };

    let config = McmcConfig {
        n_steps: mcmc.n_steps,
        burn_in: mcmc.burn_in,
        sigma_noise,
        proposal_fraction: mcmc.proposal_fraction,
        adapt: mcmc.adapt,
        target_acceptance: mcmc.target_acceptance,
    };

    // Chain i always draws from the stream derived for i, so the ensemble is
    // identical whether the chains run on one thread or many.
    let seeds: Vec<u64> = (0..mcmc.n_chains)
        .map(|i| derive_seed(master_seed, stream::CHAIN_BASE + i as u64))
        .collect();
    #[cfg(feature = "parallel")]
    let chains: Vec<Chain> = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&seed| run_chain(&objective, prior, &config, &start, seed))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let chains: Vec<Chain> = seeds
        .iter()
        .map(|&seed| run_chain(&objective, prior, &config, &start, seed))
        .collect::<Result<_>>()?;
    let summary = summarize(&chains)?;

    Ok(EstimationOutcome {
        summary,
        chains,
        ls_solution: ls,
        start,
        sigma_noise,
        n_runs: runs.len(),
        n_observations: objective.n_observations,
        dropped_gimbal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_params;

    #[test]
    fn default_prior_contains_the_stock_coefficients() {
        let (params, _) = default_params();
        let prior = default_prior();
        assert!(prior.validate().is_ok());
        assert!(prior.contains(&params.hydro.to_array()));
    }

    #[test]
    fn scenario_parses_with_defaults_and_rejects_junk() {
        let sc = EstimateScenario::parse("schema_version = 1\n", "mem").unwrap();
        assert_eq!(sc.source.kind, "synthetic");
        assert_eq!(sc.mcmc.n_chains, 4);
        assert!(EstimateScenario::parse("schema_version = 1\nblah = 2\n", "mem").is_err());

        let files = "schema_version = 1\n[source]\nkind = \"files\"\n";
        let sc = EstimateScenario::parse(files, "mem").unwrap();
        let (params, ranges) = default_params();
        assert!(sc.assemble_runs(&params, &ranges).is_err());

        let odd = "schema_version = 1\n[source]\nkind = \"telepathy\"\n";
        let sc = EstimateScenario::parse(odd, "mem").unwrap();
        assert!(sc.assemble_runs(&params, &ranges).is_err());
    }

    /// End-to-end on a small corpus: the posterior mean should land close to
    /// the coefficients that generated the data.
    #[test]
    fn small_corpus_recovers_dominant_coefficients() {
        let (params, ranges) = default_params();
        let spec = CorpusSpec {
            slider_offsets: vec![-0.02, 0.02],
            ballast_masses: vec![-0.1, 0.1],
            rotary_angles: vec![-0.5, 0.0, 0.5],
            run_duration: 6.0,
            position_noise: 0.0,
            angle_noise: 0.0,
            ..CorpusSpec::default()
        };
        let runs: Vec<_> = generate_corpus(&spec, &params, &ranges)
            .unwrap()
            .into_iter()
            .map(|r| (r.mocap, r.actuators))
            .collect();

        let mcmc = McmcSection { n_steps: 4000, burn_in: 1500, n_chains: 2, ..Default::default() };
        let out =
            run_estimation(&runs, &params, &ranges, &default_prior(), &mcmc, 42).unwrap();

        assert_eq!(out.n_runs, 12);
        assert!(out.n_observations > 5000);
        assert_eq!(out.chains.len(), 2);
        assert_eq!(out.chains[0].samples.len(), 2500);

        // Noise-free data: least squares alone should be extremely close.
        let truth = params.hydro.to_array();
        for (j, (est, tru)) in out.ls_solution.iter().zip(&truth).enumerate() {
            let scale = tru.abs().max(1.0);
            assert!(
                (est - tru).abs() / scale < 0.05,
                "ls coefficient {j}: {est} vs {tru}"
            );
        }
        // Posterior mean tracks the same optimum.
        let mean = out.mean().to_array();
        for (j, (est, tru)) in mean.iter().zip(&truth).enumerate() {
            let scale = tru.abs().max(1.0);
            assert!(
                (est - tru).abs() / scale < 0.10,
                "posterior mean {j}: {est} vs {tru}"
            );
        }
        assert!(out.sigma_noise > 0.0);
    }

    #[test]
    fn estimation_is_reproducible_for_a_seed() {
        let (params, ranges) = default_params();
        let spec = CorpusSpec {
            slider_offsets: vec![0.02],
            ballast_masses: vec![0.1],
            rotary_angles: vec![-0.4, 0.4],
            run_duration: 4.0,
            ..CorpusSpec::default()
        };
        let runs: Vec<_> = generate_corpus(&spec, &params, &ranges)
            .unwrap()
            .into_iter()
            .map(|r| (r.mocap, r.actuators))
            .collect();
        let mcmc = McmcSection { n_steps: 800, burn_in: 300, n_chains: 2, ..Default::default() };
        let a = run_estimation(&runs, &params, &ranges, &default_prior(), &mcmc, 9).unwrap();
        let b = run_estimation(&runs, &params, &ranges, &default_prior(), &mcmc, 9).unwrap();
        assert_eq!(a.chains, b.chains);
        let c = run_estimation(&runs, &params, &ranges, &default_prior(), &mcmc, 10).unwrap();
        assert_ne!(a.chains, c.chains);
    }
}
