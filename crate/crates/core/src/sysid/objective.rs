//! Sum-of-squares acceleration objective for coefficient estimation.
//!
//! The body acceleration is affine in the twelve hydrodynamic coefficients,
//! so the objective over a whole dataset collapses exactly into a quadratic
//! form `f(tau) = c - 2 b.tau + tau.H tau`. Building (H, b, c) costs thirteen
//! dynamics evaluations per observation once; evaluating a candidate
//! afterwards is a 12x12 product, which is what makes long sampling chains
//! cheap.
//!
//! Accumulation runs over fixed-size chunks whose partial sums are folded in
//! index order, so the parallel and sequential builds produce bit-identical
//! results.

use nalgebra::{SMatrix, SVector, Vector6};

use crate::error::{GliderError, Result};
use crate::sysid::differentiate::Observation;
use crate::vehicle::{state_derivative, HydroCoefficients, VehicleParams};

const DIM: usize = HydroCoefficients::DIM;

/// Observations per accumulation chunk; fixed so the reduction order never
/// depends on thread count.
const CHUNK: usize = 1024;

type Partial = (SMatrix<f64, DIM, DIM>, SVector<f64, DIM>, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    h: SMatrix<f64, DIM, DIM>,
    b: SVector<f64, DIM>,
    c: f64,
    pub n_observations: usize,
}

/// Model acceleration split into its coefficient-free part and the columns
/// contributed by each unit coefficient.
fn acceleration_basis(
    obs: &Observation,
    params: &VehicleParams,
) -> Result<(Vector6<f64>, [Vector6<f64>; DIM])> {
    let extra = Vector6::zeros();
    let zero = VehicleParams {
        hydro: HydroCoefficients::from_array(&[0.0; DIM]),
        ..params.clone()
    };
    let a0 = state_derivative(&obs.state, &obs.act, &zero, &extra)?.nu_dot;
    let mut columns = [Vector6::zeros(); DIM];
    for (j, column) in columns.iter_mut().enumerate() {
        let mut unit = [0.0; DIM];
        unit[j] = 1.0;
        let with_unit = VehicleParams {
            hydro: HydroCoefficients::from_array(&unit),
            ..params.clone()
        };
        *column = state_derivative(&obs.state, &obs.act, &with_unit, &extra)?.nu_dot - a0;
    }
    Ok((a0, columns))
}

fn partial(chunk: &[Observation], params: &VehicleParams) -> Result<Partial> {
    let mut h = SMatrix::<f64, DIM, DIM>::zeros();
    let mut b = SVector::<f64, DIM>::zeros();
    let mut c = 0.0;
    for obs in chunk {
        let (a0, columns) = acceleration_basis(obs, params)?;
        let y = obs.nu_dot - a0;
        for j in 0..DIM {
            b[j] += columns[j].dot(&y);
            for i in 0..DIM {
                h[(i, j)] += columns[i].dot(&columns[j]);
            }
        }
        c += y.dot(&y);
    }
    Ok((h, b, c))
}

#[cfg(feature = "parallel")]
fn chunk_partials(observations: &[Observation], params: &VehicleParams) -> Result<Vec<Partial>> {
    use rayon::prelude::*;
    observations.par_chunks(CHUNK).map(|chunk| partial(chunk, params)).collect()
}

#[cfg(not(feature = "parallel"))]
fn chunk_partials(observations: &[Observation], params: &VehicleParams) -> Result<Vec<Partial>> {
    observations.chunks(CHUNK).map(|chunk| partial(chunk, params)).collect()
}

fn fold_partials(partials: Vec<Partial>, n: usize) -> QuadraticObjective {
    let mut h = SMatrix::<f64, DIM, DIM>::zeros();
    let mut b = SVector::<f64, DIM>::zeros();
    let mut c = 0.0;
    for (ph, pb, pc) in partials {
        h += ph;
        b += pb;
        c += pc;
    }
    QuadraticObjective { h, b, c, n_observations: n }
}

impl QuadraticObjective {
    /// Accumulates the quadratic form, in parallel when the crate is built
    /// with the `parallel` feature. The hydro block of `params` is ignored;
    /// only the mass layout and inertia matter.
    pub fn build(observations: &[Observation], params: &VehicleParams) -> Result<Self> {
        if observations.is_empty() {
            return Err(GliderError::BadDataset { reason: "no observations to fit".into() });
        }
        Ok(fold_partials(chunk_partials(observations, params)?, observations.len()))
    }

    /// Same accumulation forced onto one thread; exists so the two paths can
    /// be compared directly.
    pub fn build_sequential(observations: &[Observation], params: &VehicleParams) -> Result<Self> {
        if observations.is_empty() {
            return Err(GliderError::BadDataset { reason: "no observations to fit".into() });
        }
        let partials: Result<Vec<Partial>> =
            observations.chunks(CHUNK).map(|chunk| partial(chunk, params)).collect();
        Ok(fold_partials(partials?, observations.len()))
    }

    /// Assembles an objective from precomputed moments.
    pub fn from_parts(
        h: SMatrix<f64, DIM, DIM>,
        b: SVector<f64, DIM>,
        c: f64,
        n_observations: usize,
    ) -> Self {
        QuadraticObjective { h, b, c, n_observations }
    }

    /// Total squared acceleration residual at a candidate coefficient set.
    pub fn sum_squares(&self, tau: &[f64; DIM]) -> f64 {
        let t = SVector::<f64, DIM>::from_row_slice(tau);
        (self.c - 2.0 * self.b.dot(&t) + (self.h * t).dot(&t)).max(0.0)
    }

    /// Minimizer of the quadratic form.
    pub fn least_squares(&self) -> Result<[f64; DIM]> {
        let chol = self.h.cholesky().ok_or_else(|| GliderError::BadDataset {
            reason: "objective is rank-deficient; the dataset does not excite every coefficient"
                .into(),
        })?;
        let solution = chol.solve(&self.b);
        let mut out = [0.0; DIM];
        for (slot, v) in out.iter_mut().zip(solution.iter()) {
            *slot = *v;
        }
        Ok(out)
    }
}

/// Reference implementation that recomputes every residual from the full
/// dynamics; the quadratic form must agree with this to rounding error.
pub fn direct_sum_squares(
    observations: &[Observation],
    params: &VehicleParams,
    tau: &[f64; DIM],
) -> Result<f64> {
    let candidate = VehicleParams {
        hydro: HydroCoefficients::from_array(tau),
        ..params.clone()
    };
    let extra = Vector6::zeros();
    let mut total = 0.0;
    for obs in observations {
        let model = state_derivative(&obs.state, &obs.act, &candidate, &extra)?.nu_dot;
        let r = obs.nu_dot - model;
        total += r.dot(&r);
    }
    Ok(total)
}
