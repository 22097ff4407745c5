//! Replication engine for verifying the limit laws and the normal
//! approximation rate.
//!
//! Replication `r` simulates the panel keyed by `child_seed(seed, r)`, exactly
//! the panel `simulate_panel` would produce for that seed, and reduces it to
//! one statistic. Replications run in parallel; results are collected by index
//! so every report is independent of the worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::exact_second_moment_ln;
use crate::error::{Error, Result};
use crate::estimate::{
    lag_innovation, lag_square, rescaled_error_sums, s_and_r, standardizers, GrowthTable,
    Standardization,
};
use crate::innovations::{InnovationSampler, InnovationSpec};
use crate::panel::simulate_section;
use crate::regime::{limit_law, LimitLaw, RegimeSpec};
use crate::rng::child_seed;
use crate::stats::{mean, normal_cdf, normal_quantile, quantile_sorted, variance};
use crate::summation::pairwise_sum;

/// Probabilities of the reported quantile pairs.
pub const QUANTILE_PROBS: [f64; 9] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99];

/// The per-replication statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `rate · (ρ̂ - ρ)`, limit `N(0, limit_variance)`.
    #[default]
    ScaledError,
    /// `S_N^T / R_N^T`, limit `N(0, 1)`.
    SOverR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub regime: RegimeSpec,
    #[serde(default)]
    pub innovations: InnovationSpec,
    pub n: usize,
    pub t_len: usize,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub standardization: Standardization,
    #[serde(default)]
    pub statistic: Statistic,
}

impl McConfig {
    pub fn new(regime: RegimeSpec, n: usize, t_len: usize, replications: usize, seed: u64) -> Self {
        Self {
            regime,
            innovations: InnovationSpec::StandardNormal,
            n,
            t_len,
            replications,
            seed,
            standardization: Standardization::ExactFiniteT,
            statistic: Statistic::ScaledError,
        }
    }

    pub fn with_innovations(mut self, innovations: InnovationSpec) -> Self {
        self.innovations = innovations;
        self
    }

    pub fn with_statistic(mut self, statistic: Statistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.regime.validate()?;
        self.innovations.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.t_len < 2 {
            return Err(Error::InvalidArgument("t_len must be at least 2".into()));
        }
        if self.replications < 2 {
            return Err(Error::InvalidArgument(
                "replications must be at least 2".into(),
            ));
        }
        // Surfaces DegenerateT and normalizer overflow before any simulation.
        limit_law(&self.regime, self.n, self.t_len)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePair {
    pub prob: f64,
    pub empirical: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    /// Resolved ρ.
    pub rho: f64,
    pub rate: f64,
    /// Variance of the limiting normal of the statistic.
    pub limit_variance: f64,
    /// `Var(A_1^T) / E[B_1^T]²` at the simulated `T` (1 for `s_over_r`).
    pub finite_t_variance: f64,
    pub scaled_stats: Vec<f64>,
    pub empirical_mean: f64,
    pub empirical_var: f64,
    /// KS distance to `N(0, limit_variance)`.
    pub ks_to_limit: f64,
    /// KS distance to `N(0, finite_t_variance)`.
    pub ks_to_finite_t: f64,
    pub quantile_pairs: Vec<QuantilePair>,
    pub runtime_seconds: f64,
}

/// Everything a replication needs, prepared once per run.
struct Replicator {
    cfg: McConfig,
    law: LimitLaw,
    sampler: InnovationSampler,
    growth: Option<GrowthTable>,
    p: f64,
    q: f64,
    rate: f64,
    var_a: f64,
    mean_b: f64,
}

#[derive(Default)]
struct Scratch {
    y: Vec<f64>,
    eps: Vec<f64>,
    w: Vec<f64>,
    num: Vec<f64>,
    den: Vec<f64>,
}

impl Replicator {
    fn new(cfg: &McConfig) -> Result<Self> {
        cfg.validate()?;
        let law = limit_law(&cfg.regime, cfg.n, cfg.t_len)?;
        let (growth, p, q, rate) = match law.rescaled {
            Some(g) => (Some(GrowthTable::new(law.rho, cfg.t_len)), g.p, g.q, g.rate),
            None => (None, law.p_of_t, law.q_of_t, law.rate),
        };
        let (var_a, mean_b) = standardizers(&law, cfg.standardization)?;
        Ok(Self {
            cfg: *cfg,
            law,
            sampler: cfg.innovations.sampler()?,
            growth,
            p,
            q,
            rate,
            var_a,
            mean_b,
        })
    }

    fn replicate(&self, index: usize, s: &mut Scratch) -> Result<f64> {
        let (n, t_len) = (self.cfg.n, self.cfg.t_len);
        let seed = child_seed(self.cfg.seed, index as u64);
        s.y.resize(t_len + 1, 0.0);
        s.eps.resize(t_len, 0.0);
        s.num.clear();
        s.den.clear();
        for i in 0..n {
            simulate_section(self.law.rho, &self.sampler, seed, i, &mut s.y, &mut s.eps);
            let (num, den) = match &self.growth {
                Some(table) => rescaled_error_sums(table, &s.eps, &mut s.w),
                None => (lag_innovation(&s.y, &s.eps), lag_square(&s.y)),
            };
            s.num.push(num);
            s.den.push(den);
        }
        let wrap = |source: Error| Error::Replication {
            index,
            source: Box::new(source),
        };
        let value = match self.cfg.statistic {
            Statistic::ScaledError => {
                let den = pairwise_sum(&s.den);
                if den == 0.0 {
                    return Err(wrap(Error::ZeroDenominator));
                }
                self.rate * (pairwise_sum(&s.num) / den)
            }
            Statistic::SOverR => {
                let (sv, rv) = s_and_r(&s.num, &s.den, self.p, self.q, self.var_a, self.mean_b);
                if rv == 0.0 {
                    return Err(wrap(Error::ZeroDenominator));
                }
                sv / rv
            }
        };
        if !value.is_finite() {
            return Err(wrap(Error::NumericalRange(format!("statistic is {value}"))));
        }
        Ok(value)
    }

    fn run(&self) -> Result<Vec<f64>> {
        let results: Vec<Result<f64>> = (0..self.cfg.replications)
            .into_par_iter()
            .map_init(Scratch::default, |scratch, r| self.replicate(r, scratch))
            .collect();
        results.into_iter().collect()
    }
}

/// Simulates `R` panels and summarizes the chosen statistic.
pub fn run_replications(cfg: &McConfig) -> Result<McReport> {
    let start = Instant::now();
    let rep = Replicator::new(cfg)?;
    let stats = rep.run()?;

    let (limit_variance, finite_t_variance) = match cfg.statistic {
        Statistic::ScaledError => {
            let law = &rep.law;
            let m = exact_second_moment_ln(law.rho, cfg.t_len, law.ln_p_of_t, law.ln_q_of_t);
            (rep.law.limit_variance, m.var_a / (m.e_b * m.e_b))
        }
        Statistic::SOverR => (1.0, 1.0),
    };
    let mut sorted = stats.clone();
    sorted.sort_by(f64::total_cmp);
    let limit_sd = limit_variance.sqrt();
    let quantile_pairs = QUANTILE_PROBS
        .iter()
        .map(|&prob| QuantilePair {
            prob,
            empirical: quantile_sorted(&sorted, prob),
            limit: limit_sd * normal_quantile(prob),
        })
        .collect();

    Ok(McReport {
        config: *cfg,
        rho: rep.law.rho,
        rate: rep.law.rate,
        limit_variance,
        finite_t_variance,
        empirical_mean: mean(&stats),
        empirical_var: variance(&stats),
        ks_to_limit: ks_sorted(&sorted, limit_variance),
        ks_to_finite_t: ks_sorted(&sorted, finite_t_variance),
        quantile_pairs,
        scaled_stats: stats,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

fn ks_sorted(sorted: &[f64], variance: f64) -> f64 {
    let n = sorted.len() as f64;
    let sd = variance.sqrt();
    sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = normal_cdf(x / sd);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// One-sample Kolmogorov–Smirnov statistic against `N(0, variance)`.
pub fn ks_distance(sample: &[f64], variance: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ks_sorted(&sorted, variance))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenPoint {
    pub n: usize,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenCurve {
    pub points: Vec<BerryEsseenPoint>,
    /// Least-squares slope of `ln ks` on `ln N`.
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    /// Least-squares fit of `ks ≈ c1 N^{-1/2} + c2 N^{-1/3}`.
    pub c1: f64,
    pub c2: f64,
}

fn check_grid(grid: &[usize], required: usize) -> Result<()> {
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.len() < required || !increasing {
        return Err(Error::InsufficientGrid {
            required,
            got: grid.len(),
        });
    }
    Ok(())
}

/// KS distance of `S_N^T / R_N^T` to `Φ` along a grid of `N`, with the fitted
/// decay exponent.
pub fn berry_esseen_curve(base_cfg: &McConfig, n_grid: &[usize]) -> Result<BerryEsseenCurve> {
    check_grid(n_grid, 4)?;
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let cfg = McConfig {
            n,
            seed: child_seed(base_cfg.seed, n as u64),
            statistic: Statistic::SOverR,
            ..*base_cfg
        };
        let report = run_replications(&cfg)?;
        points.push(BerryEsseenPoint {
            n,
            ks: report.ks_to_limit,
        });
    }

    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ks.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;

    // Normal equations for ks = c1 u + c2 v with u = N^{-1/2}, v = N^{-1/3}.
    let (mut suu, mut suv, mut svv, mut suk, mut svk) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &points {
        let n = p.n as f64;
        let (u, v) = (n.powf(-0.5), n.powf(-1.0 / 3.0));
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suk += u * p.ks;
        svk += v * p.ks;
    }
    let det = suu * svv - suv * suv;
    Ok(BerryEsseenCurve {
        points,
        fitted_slope: slope,
        fitted_intercept: my - slope * mx,
        c1: (svv * suk - suv * svk) / det,
        c2: (suu * svk - suv * suk) / det,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub t_len: usize,
    pub empirical_var: f64,
    pub limit_var: f64,
    pub finite_t_var: f64,
}

/// Empirical variance of the scaled estimator error along a grid of `T`.
pub fn variance_convergence(
    spec: &RegimeSpec,
    innovations: &InnovationSpec,
    t_grid: &[usize],
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<VariancePoint>> {
    check_grid(t_grid, 3)?;
    let cfgs: Vec<McConfig> = t_grid
        .iter()
        .map(|&t| {
            McConfig::new(*spec, n, t, replications, child_seed(seed, t as u64))
                .with_innovations(*innovations)
        })
        .collect();
    for cfg in &cfgs {
        cfg.validate()?;
    }
    cfgs.iter()
        .map(|cfg| {
            let r = run_replications(cfg)?;
            Ok(VariancePoint {
                t_len: cfg.t_len,
                empirical_var: r.empirical_var,
                limit_var: r.limit_variance,
                finite_t_var: r.finite_t_variance,
            })
        })
        .collect()
}
