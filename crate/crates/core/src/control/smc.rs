//! Nonlinear tracking primitives for a channel modeled as `x_ddot = f + g u`.
//!
//! The tracking law works on the surface `s = k1 e + e_dot` with
//! `e = x - x_ref` and is the sum of two branches: a backstepping term that
//! cancels the drift exactly and imposes `s_dot = -k3 s`, plus a switching
//! term `-k2 sat(s/eps) sat(g/eps)` that dominates what the model misses.
//! Together V = s^2/2 obeys V_dot = -k3 s^2 - k2 |s||g| <= 0 in the
//! saturated regime.

use crate::error::{GliderError, Result};

/// Unit saturation: the continuous stand-in for sign() inside a boundary
/// layer.
pub fn saturate(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn sliding_surface(k1: f64, e: f64, e_dot: f64) -> f64 {
    k1 * e + e_dot
}

/// Squared-surface energy 0.5 sum(s^2); decreasing along trajectories while
/// tracking is converging.
pub fn lyapunov(surfaces: &[f64]) -> f64 {
    0.5 * surfaces.iter().map(|s| s * s).sum::<f64>()
}

/// Switching branch `-k2 sat(s/eps) sat(g/eps)`.
///
/// The second factor carries the sign of the input gain so the term always
/// pushes the surface down, and fades the command out instead of flipping it
/// abruptly where the gain crosses zero.
pub fn smc_term(s: f64, gain: f64, k2: f64, epsilon: f64) -> f64 {
    -k2 * saturate(s / epsilon) * saturate(gain / epsilon)
}

/// Backstepping branch `(1/g)(-k1 e_dot + x_ddot_ref - f - k3 s)`.
///
/// Exact cancellation needs to divide by the gain, so a gain inside
/// `gain_floor` is an error rather than an enormous command.
pub fn backstepping_term(
    k1: f64,
    k3: f64,
    e_dot: f64,
    s: f64,
    accel_ref: f64,
    drift: f64,
    gain: f64,
    gain_floor: f64,
) -> Result<f64> {
    if gain.abs() < gain_floor {
        return Err(GliderError::DegenerateGain { gain, floor: gain_floor });
    }
    Ok((-k1 * e_dot + accel_ref - drift - k3 * s) / gain)
}

/// Smallest switching amplitude that keeps the pure switching law stable:
/// `|(k1 e_dot + f - x_ddot_ref) / g|`.
///
/// The combined law is stable for any k2 > 0; this is logged per tick as a
/// diagnostic that the configured k2 would carry the loop on its own.
pub fn k2_lower_bound(k1: f64, e_dot: f64, accel_ref: f64, drift: f64, gain: f64) -> f64 {
    ((k1 * e_dot + drift - accel_ref) / gain).abs()
}
