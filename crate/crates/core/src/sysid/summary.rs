//! Posterior reporting: pooled per-coefficient statistics and histograms.

use crate::error::{GliderError, Result};
use crate::sysid::mcmc::Chain;
use crate::vehicle::HydroCoefficients;

const DIM: usize = HydroCoefficients::DIM;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CoefficientSummary {
    pub name: &'static str,
    pub mean: f64,
    pub std: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PosteriorSummary {
    pub coefficients: Vec<CoefficientSummary>,
    pub n_chains: usize,
    pub n_samples: usize,
    /// Pooled post-burn-in acceptance rate.
    pub acceptance_rate: f64,
}

impl PosteriorSummary {
    pub fn mean_coefficients(&self) -> HydroCoefficients {
        let mut a = [0.0; DIM];
        for (slot, c) in a.iter_mut().zip(&self.coefficients) {
            *slot = c.mean;
        }
        HydroCoefficients::from_array(&a)
    }
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(GliderError::one_problem("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GliderError::one_problem(format!("quantile level {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] * (1.0 - frac) + sorted[hi] * frac)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// bins + 1 edges, equally spaced over the sample range.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() || bins == 0 {
        return Err(GliderError::one_problem("histogram needs samples and at least one bin"));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(GliderError::one_problem("histogram input has non-finite values"));
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    Ok(Histogram { edges, counts })
}

/// Pools every chain's draws and reports per-coefficient statistics.
pub fn summarize(chains: &[Chain]) -> Result<PosteriorSummary> {
    let n_samples: usize = chains.iter().map(|c| c.samples.len()).sum();
    if n_samples == 0 {
        return Err(GliderError::one_problem("no posterior draws to summarize"));
    }
    let mut coefficients = Vec::with_capacity(DIM);
    for j in 0..DIM {
        let marginal: Vec<f64> =
            chains.iter().flat_map(|c| c.samples.iter().map(move |s| s[j])).collect();
        let mean = marginal.iter().sum::<f64>() / marginal.len() as f64;
        let var = if marginal.len() > 1 {
            marginal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (marginal.len() - 1) as f64
        } else {
            0.0
        };
        coefficients.push(CoefficientSummary {
            name: HydroCoefficients::NAMES[j],
            mean,
            std: var.sqrt(),
            q05: quantile(&marginal, 0.05)?,
            q50: quantile(&marginal, 0.50)?,
            q95: quantile(&marginal, 0.95)?,
        });
    }
    let proposed: usize = chains.iter().map(|c| c.proposed).sum();
    let accepted: usize = chains.iter().map(|c| c.accepted).sum();
    Ok(PosteriorSummary {
        coefficients,
        n_chains: chains.len(),
        n_samples,
        acceptance_rate: if proposed == 0 { 0.0 } else { accepted as f64 / proposed as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain_with(samples: Vec<[f64; DIM]>, accepted: usize, proposed: usize) -> Chain {
        Chain { samples, accepted, proposed, final_scale: 1.0, seed: 0 }
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let v: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        assert_relative_eq!(quantile(&v, 0.0).unwrap(), 0.0);
        assert_relative_eq!(quantile(&v, 0.5).unwrap(), 50.0);
        assert_relative_eq!(quantile(&v, 0.95).unwrap(), 95.0);
        assert_relative_eq!(quantile(&v, 1.0).unwrap(), 100.0);
        let w = [1.0, 2.0];
        assert_relative_eq!(quantile(&w, 0.25).unwrap(), 1.25);
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&w, 1.5).is_err());
    }

    #[test]
    fn histogram_counts_every_sample_once() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64 / 999.0).collect();
        let h = histogram(&v, 10).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 1000);
        assert_eq!(h.edges.len(), 11);
        assert_relative_eq!(h.edges[0], 0.0);
        assert_relative_eq!(*h.edges.last().unwrap(), 1.0);
        for c in &h.counts {
            assert_eq!(*c, 100);
        }
    }

    #[test]
    fn constant_samples_land_in_one_bin() {
        let h = histogram(&[2.5; 40], 5).unwrap();
        assert_eq!(h.counts[0], 40);
        assert_eq!(h.counts.iter().sum::<usize>(), 40);
    }

    #[test]
    fn summary_pools_chains_and_acceptance() {
        let mut a = vec![[0.0; DIM]; 50];
        let mut b = vec![[0.0; DIM]; 50];
        for (i, s) in a.iter_mut().enumerate() {
            s[0] = i as f64;
        }
        for (i, s) in b.iter_mut().enumerate() {
            s[0] = (i + 50) as f64;
        }
        let chains = [chain_with(a, 10, 50), chain_with(b, 30, 50)];
        let summary = summarize(&chains).unwrap();
        assert_eq!(summary.n_chains, 2);
        assert_eq!(summary.n_samples, 100);
        assert_relative_eq!(summary.acceptance_rate, 0.4);
        let c0 = &summary.coefficients[0];
        assert_eq!(c0.name, "kd0");
        assert_relative_eq!(c0.mean, 49.5);
        assert_relative_eq!(c0.q50, 49.5);
        let c1 = &summary.coefficients[1];
        assert_relative_eq!(c1.mean, 0.0);
        assert_relative_eq!(c1.std, 0.0);
    }

    #[test]
    fn mean_coefficients_map_back_in_name_order() {
        let mut s = vec![[0.0; DIM]; 3];
        for (j, sample) in [[1.0; DIM], [2.0; DIM], [3.0; DIM]].iter().enumerate() {
            s[j] = *sample;
        }
        let summary = summarize(&[chain_with(s, 1, 3)]).unwrap();
        let k = summary.mean_coefficients();
        assert_relative_eq!(k.kd0, 2.0);
        assert_relative_eq!(k.kr, 2.0);
    }

    #[test]
    fn empty_chains_are_rejected() {
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[chain_with(vec![], 0, 0)]).is_err());
    }
}
