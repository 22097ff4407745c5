//! Exact finite-T moments of the per-series statistics and samplers for the
//! Wiener functionals that appear as univariate limits.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
#[cfg(test)]
use crate::regime::RegimeKind;
use crate::regime::{limit_law, RegimeSpec};
use crate::rng::substream;

/// Below this `|ρ² - 1|` the unit-root branch is used.
const NEAR_UNIT: f64 = 1e-12;

/// `scale · Σ_{t=1}^{T} E[y²_{t-1}]` with `E[y²_{t-1}] = (1 - ρ^{2(t-1)})/(1 - ρ²)`
/// (`= t - 1` at `ρ² = 1`).
pub fn scaled_lag_variance_sum(rho: f64, t_len: usize, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    scale.signum() * ln_scaled_lag_variance_sum(rho, t_len, scale.abs().ln())
}

/// Same sum with the scale given by its logarithm, so that a scale below the
/// smallest double still gives the right answer when `ρ^{2T}` makes up for it.
pub fn ln_scaled_lag_variance_sum(rho: f64, t_len: usize, ln_scale: f64) -> f64 {
    let t = t_len as f64;
    let d = (rho - 1.0) * (rho + 1.0);
    if d.abs() < NEAR_UNIT {
        return ln_scale.exp() * t * (t - 1.0) / 2.0;
    }
    let growth = t * d.ln_1p();
    if growth < 700.0 && ln_scale > -700.0 {
        ln_scale.exp() * ((growth.exp_m1() / d - t) / d)
    } else {
        // (ρ^{2T} - 1 - T d) / d², with ρ^{2T} folded into the scale.
        ((ln_scale + growth).exp() - ln_scale.exp() * (1.0 + t * d)) / (d * d)
    }
}

/// Exact moments of `A^T = P Σ y_{t-1} ε_t` and `B^T = Q Σ y²_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    /// `E[A^T]`, zero for every model.
    pub e_a: f64,
    /// `E[(A^T)²]`.
    pub var_a: f64,
    /// `E[B^T]`.
    pub e_b: f64,
    /// `E[(Σ y_{t-1} ε_t)²]` before normalization.
    pub raw_num_second_moment: f64,
    /// `E[Σ y²_{t-1}]` before normalization; equals `raw_num_second_moment`.
    pub raw_den_mean: f64,
}

pub fn exact_second_moment(rho: f64, t_len: usize, p_of_t: f64, q_of_t: f64) -> ExactMoments {
    exact_second_moment_ln(rho, t_len, p_of_t.abs().ln(), q_of_t.ln())
}

/// As [`exact_second_moment`] with `ln P(T)` and `ln Q(T)`.
pub fn exact_second_moment_ln(rho: f64, t_len: usize, ln_p: f64, ln_q: f64) -> ExactMoments {
    // E[(Σ y_{t-1} ε_t)²] = Σ E[y²_{t-1}] because the cross terms are
    // martingale increments.
    let raw = ln_scaled_lag_variance_sum(rho, t_len, 0.0);
    ExactMoments {
        e_a: 0.0,
        var_a: ln_scaled_lag_variance_sum(rho, t_len, 2.0 * ln_p),
        e_b: ln_scaled_lag_variance_sum(rho, t_len, ln_q),
        raw_num_second_moment: raw,
        raw_den_mean: raw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub e_a: f64,
    pub var_a: f64,
    pub e_b: f64,
    pub limit_var_a: f64,
    pub limit_e_b: f64,
}

/// Exact moments at `T` next to their limits, for one regime.
pub fn moment_report(spec: &RegimeSpec, t_len: usize) -> Result<MomentReport> {
    let law = limit_law(spec, 1, t_len)?;
    let m = exact_second_moment_ln(law.rho, t_len, law.ln_p_of_t, law.ln_q_of_t);
    Ok(MomentReport {
        e_a: m.e_a,
        var_a: m.var_a,
        e_b: m.e_b,
        limit_var_a: law.limit_var_a,
        limit_e_b: law.limit_mean_b,
    })
}

fn check_grid(grid_steps: usize) -> Result<()> {
    if grid_steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid_steps must be >= 100, got {grid_steps}"
        )));
    }
    Ok(())
}

fn brownian_increments<R: Rng>(rng: &mut R, grid_steps: usize, out: &mut Vec<f64>) {
    let sd = (1.0 / grid_steps as f64).sqrt();
    out.clear();
    out.extend((0..grid_steps).map(|_| sd * rng.sample::<f64, _>(StandardNormal)));
}

/// `((W(1)² - 1)/2, ∫₀¹ W² dt)` on the path with the given increments,
/// integral by left-endpoint Riemann sum.
pub fn unit_root_functionals_from_increments(increments: &[f64]) -> (f64, f64) {
    let dt = 1.0 / increments.len() as f64;
    let mut w = 0.0;
    let mut integral = 0.0;
    for &dw in increments {
        integral += w * w * dt;
        w += dw;
    }
    (0.5 * (w * w - 1.0), integral)
}

/// `((b/2c) ∫ (1+bt)^{-1} W dW, (b/2c)² ∫ (1+bt)^{-2} W² dt)` with `b = e^{2c} - 1`,
/// the stochastic integral by the left-endpoint (Itô) sum.
pub fn local_to_unity_functionals_from_increments(c: f64, increments: &[f64]) -> (f64, f64) {
    let m = increments.len();
    let dt = 1.0 / m as f64;
    let b = (2.0 * c).exp_m1();
    let lead = b / (2.0 * c);
    let mut w = 0.0;
    let mut ito = 0.0;
    let mut integral = 0.0;
    for (k, &dw) in increments.iter().enumerate() {
        let f = 1.0 / (1.0 + b * k as f64 * dt);
        ito += f * w * dw;
        integral += f * f * w * w * dt;
        w += dw;
    }
    (lead * ito, lead * lead * integral)
}

fn sample_paths<F>(
    grid_steps: usize,
    replications: usize,
    seed: u64,
    functional: F,
) -> Vec<(f64, f64)>
where
    F: Fn(&[f64]) -> (f64, f64) + Sync,
{
    (0..replications)
        .into_par_iter()
        .map_init(Vec::new, |buf, r| {
            let mut rng = substream(seed, r as u64);
            brownian_increments(&mut rng, grid_steps, buf);
            functional(buf)
        })
        .collect()
}

/// Draws of `((W(1)² - 1)/2, ∫₀¹ W² dt)`; draw `r` uses substream `(seed, r)`.
pub fn sample_unit_root_functionals(
    grid_steps: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_grid(grid_steps)?;
    Ok(sample_paths(
        grid_steps,
        replications,
        seed,
        unit_root_functionals_from_increments,
    ))
}

/// Draws of the local-to-unity limit pair for `c ≠ 0`.
pub fn sample_local_to_unity_functionals(
    c: f64,
    grid_steps: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_grid(grid_steps)?;
    if !c.is_finite() || c == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "c must be finite and nonzero, got {c}"
        )));
    }
    Ok(sample_paths(grid_steps, replications, seed, |inc| {
        local_to_unity_functionals_from_increments(c, inc)
    }))
}

/// Draws of `(XY, Y²)` with `X, Y` independent `N(0, 1/(-2c))`, `c < 0`.
pub fn mildly_explosive_limit_sample(
    c: f64,
    replications: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !(c.is_finite() && c < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c must be negative, got {c}"
        )));
    }
    let sd = (-0.5 / c).sqrt();
    Ok((0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let x = sd * rng.sample::<f64, _>(StandardNormal);
            let y = sd * rng.sample::<f64, _>(StandardNormal);
            (x * y, y * y)
        })
        .collect())
}
