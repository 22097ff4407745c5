//! Regimes of the autoregressive coefficient and their Gaussian limit laws.
//!
//! Every regime admits a pair of normalizers `P(T)`, `Q(T)` such that the
//! per-series numerator `P(T) Σ y_{t-1} ε_t` and denominator
//! `Q(T) Σ y_{t-1}²` are bounded in probability. Pooling `N` independent series
//! then gives `√N P(T)/Q(T) (ρ̂ - ρ) ⇒ N(0, Var(A) / E[B]²)`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// The six regimes of ρ, without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Stationary,
    UnitRoot,
    LocalToUnity,
    MildlyIntegrated,
    MildlyExplosive,
    Explosive,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 6] = [
        RegimeKind::Stationary,
        RegimeKind::UnitRoot,
        RegimeKind::LocalToUnity,
        RegimeKind::MildlyIntegrated,
        RegimeKind::MildlyExplosive,
        RegimeKind::Explosive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeKind::Stationary => "stationary",
            RegimeKind::UnitRoot => "unit_root",
            RegimeKind::LocalToUnity => "local_to_unity",
            RegimeKind::MildlyIntegrated => "mildly_integrated",
            RegimeKind::MildlyExplosive => "mildly_explosive",
            RegimeKind::Explosive => "explosive",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A regime together with its parameters.
///
/// `alpha` is the exponent of the sequence `k_T = T^alpha` used by the mildly
/// integrated and mildly explosive regimes, `ρ_T = 1 - c / k_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeSpec {
    Stationary { rho: f64 },
    UnitRoot,
    LocalToUnity { c: f64 },
    MildlyIntegrated { c: f64, alpha: f64 },
    MildlyExplosive { c: f64, alpha: f64 },
    Explosive { rho: f64 },
}

impl RegimeSpec {
    pub fn kind(&self) -> RegimeKind {
        match self {
            RegimeSpec::Stationary { .. } => RegimeKind::Stationary,
            RegimeSpec::UnitRoot => RegimeKind::UnitRoot,
            RegimeSpec::LocalToUnity { .. } => RegimeKind::LocalToUnity,
            RegimeSpec::MildlyIntegrated { .. } => RegimeKind::MildlyIntegrated,
            RegimeSpec::MildlyExplosive { .. } => RegimeKind::MildlyExplosive,
            RegimeSpec::Explosive { .. } => RegimeKind::Explosive,
        }
    }

    /// Checks the parameter constraints of the regime.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRegime(msg));
        match *self {
            RegimeSpec::Stationary { rho } => {
                if !(rho.is_finite() && rho.abs() < 1.0) {
                    return bad(format!("stationary requires |rho| < 1, got {rho}"));
                }
            }
            RegimeSpec::UnitRoot => {}
            RegimeSpec::LocalToUnity { c } => {
                if !c.is_finite() || c == 0.0 {
                    return bad(format!("local-to-unity requires finite c != 0, got {c}"));
                }
            }
            RegimeSpec::MildlyIntegrated { c, alpha } => {
                if !(c.is_finite() && c > 0.0) {
                    return bad(format!("mildly integrated requires c > 0, got {c}"));
                }
                check_alpha(alpha)?;
            }
            RegimeSpec::MildlyExplosive { c, alpha } => {
                if !(c.is_finite() && c < 0.0) {
                    return bad(format!("mildly explosive requires c < 0, got {c}"));
                }
                check_alpha(alpha)?;
            }
            RegimeSpec::Explosive { rho } => {
                if !(rho.is_finite() && rho.abs() > 1.0) {
                    return bad(format!("explosive requires |rho| > 1, got {rho}"));
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRegime(format!(
            "k_T exponent must lie in (0, 1), got {alpha}"
        )))
    }
}

/// `k_T = T^alpha`.
pub fn k_t(t_len: usize, alpha: f64) -> f64 {
    (t_len as f64).powf(alpha)
}

/// The autoregressive coefficient the regime prescribes at horizon `t_len`.
pub fn resolve_rho(spec: &RegimeSpec, t_len: usize) -> Result<f64> {
    spec.validate()?;
    if t_len == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    let t = t_len as f64;
    let rho = match *spec {
        RegimeSpec::Stationary { rho } | RegimeSpec::Explosive { rho } => rho,
        RegimeSpec::UnitRoot => 1.0,
        RegimeSpec::LocalToUnity { c } => 1.0 - c / t,
        RegimeSpec::MildlyIntegrated { c, alpha } => {
            let rho = 1.0 - c / k_t(t_len, alpha);
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::DegenerateT {
                    t: t_len,
                    rho,
                    regime: "mildly_integrated",
                });
            }
            rho
        }
        RegimeSpec::MildlyExplosive { c, alpha } => {
            let rho = 1.0 - c / k_t(t_len, alpha);
            if !(rho > 1.0 && rho.is_finite()) {
                return Err(Error::DegenerateT {
                    t: t_len,
                    rho,
                    regime: "mildly_explosive",
                });
            }
            rho
        }
    };
    Ok(rho)
}

/// `2c - 1 + e^{-2c}`, evaluated without cancellation near `c = 0`.
pub fn local_to_unity_kernel(c: f64) -> f64 {
    let x = 2.0 * c;
    if x.abs() < 1e-3 {
        // e^{-x} - 1 + x = x²/2 - x³/6 + x⁴/24 - x⁵/120 + ...
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0 + x2 * x2 / 720.0)
    } else {
        (-x).exp_m1() + x
    }
}

/// Limiting variance of `√N T (ρ̂_T - ρ_T)` when `ρ_T = 1 - c/T`.
pub fn local_to_unity_variance(c: f64) -> f64 {
    4.0 * c * c / local_to_unity_kernel(c)
}

/// Normalizers, composite rate and limiting variance of one regime at `(N, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub kind: RegimeKind,
    /// Resolved autoregressive coefficient.
    pub rho: f64,
    pub n: usize,
    pub t_len: usize,
    /// Numerator normalizer `P(T)`.
    pub p_of_t: f64,
    /// Denominator normalizer `Q(T)`.
    pub q_of_t: f64,
    /// `ln P(T)`, finite even where `P(T)` underflows.
    pub ln_p_of_t: f64,
    /// `ln Q(T)`.
    pub ln_q_of_t: f64,
    /// `√N P(T) / Q(T)`.
    pub rate: f64,
    /// Variance of the limiting normal of `rate * (ρ̂ - ρ)`.
    pub limit_variance: f64,
    /// `lim Var(A_1^T)`.
    pub limit_var_a: f64,
    /// `lim E[B_1^T]`.
    pub limit_mean_b: f64,
    /// Normalizers of the growth-rescaled sums, for `|ρ| > 1`.
    pub rescaled: Option<GrowthNormalizers>,
}

/// Normalizers applied to `β^{T-2} Σ y_{t-1} ε_t` and `β^{2(T-2)} Σ y²_{t-1}`
/// (`β = 1/ρ`) instead of the raw sums: `p = P ρ^{T-2}`, `q = Q ρ^{2(T-2)}`,
/// `rate = √N p / q = rate · β^{T-2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthNormalizers {
    pub p: f64,
    pub q: f64,
    pub rate: f64,
}

impl LimitLaw {
    /// `rate * error`, the statistic whose limit is `N(0, limit_variance)`.
    pub fn scale(&self, error: f64) -> f64 {
        self.rate * error
    }
}

/// Limit law of the pooled least-squares estimator in the given regime.
///
/// The explosive regime keeps the rate `√N ρ^{T-2}` (signed for `ρ < -1`);
/// its limiting variance is `(1 - ρ^{-2})²`, the ratio of the limits of
/// `Var(β^{T-2} Σ y_{t-1} ε_t)` and `E[β^{2(T-2)} Σ y_{t-1}²]` with `β = 1/ρ`.
pub fn limit_law(spec: &RegimeSpec, n: usize, t_len: usize) -> Result<LimitLaw> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if t_len < 2 {
        return Err(Error::InvalidArgument("T must be at least 2".into()));
    }
    let rho = resolve_rho(spec, t_len)?;
    let t = t_len as f64;
    let sqrt_n = (n as f64).sqrt();

    // Normalizers are built in log space; only the rate has to be finite.
    let (ln_p, ln_q, var_a, mean_b, rescaled) = match *spec {
        RegimeSpec::Stationary { .. } => {
            let ln_g = (1.0 - rho * rho).ln();
            (0.5 * (ln_g - t.ln()), ln_g - t.ln(), 1.0, 1.0, None)
        }
        RegimeSpec::UnitRoot => (-t.ln(), -2.0 * t.ln(), 0.5, 0.5, None),
        RegimeSpec::LocalToUnity { c } => {
            let v = local_to_unity_kernel(c) / (4.0 * c * c);
            (-t.ln(), -2.0 * t.ln(), v, v, None)
        }
        RegimeSpec::MildlyIntegrated { c, alpha } => {
            let ln_tk = (t * k_t(t_len, alpha)).ln();
            let v = 1.0 / (2.0 * c);
            (-0.5 * ln_tk, -ln_tk, v, v, None)
        }
        RegimeSpec::MildlyExplosive { c, alpha } => {
            let k = k_t(t_len, alpha);
            let ln_p = -(t * rho.ln() + k.ln());
            let v = 1.0 / (4.0 * c * c);
            let pr = 1.0 / (k * rho * rho);
            (ln_p, 2.0 * ln_p, v, v, Some((pr, pr * pr)))
        }
        RegimeSpec::Explosive { .. } => {
            let beta = 1.0 / rho;
            let ln_p = -(t - 2.0) * rho.abs().ln();
            let v = 1.0 / (1.0 - beta * beta).powi(2);
            (ln_p, 2.0 * ln_p, v, v, Some((1.0, 1.0)))
        }
    };

    let ln_rate = 0.5 * (n as f64).ln() + ln_p - ln_q;
    let mut rate = ln_rate.exp();
    let mut p = ln_p.exp();
    if let RegimeSpec::Explosive { .. } = spec {
        if rho < 0.0 && t_len % 2 == 1 {
            // ρ^{T-2} is negative for odd T - 2.
            rate = -rate;
            p = -p;
        }
    }
    let q = ln_q.exp();
    if !(rate.is_finite() && rate != 0.0) {
        return Err(Error::NumericalRange(format!(
            "normalizers overflow for {} at T={t_len}",
            spec.kind()
        )));
    }
    Ok(LimitLaw {
        kind: spec.kind(),
        rho,
        n,
        t_len,
        p_of_t: p,
        q_of_t: q,
        ln_p_of_t: ln_p,
        ln_q_of_t: ln_q,
        rate,
        limit_variance: var_a / (mean_b * mean_b),
        limit_var_a: var_a,
        limit_mean_b: mean_b,
        rescaled: rescaled.map(|(p, q)| GrowthNormalizers {
            p,
            q,
            rate: sqrt_n * p / q,
        }),
    })
}
