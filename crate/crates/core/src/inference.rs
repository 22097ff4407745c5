//! Regime-conditional confidence intervals and the panel unit-root test.
//!
//! The regime is always declared by the caller. Rates differ by orders of
//! magnitude across ρ = 1 and there is no way to pick the right one from a
//! single panel, so nothing here tries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::lse;
use crate::panel::PanelData;
use crate::regime::{limit_law, RegimeKind, RegimeSpec};
use crate::stats::{normal_cdf, normal_quantile, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `ρ < 1`.
    StationarySide,
    /// `ρ > 1`.
    ExplosiveSide,
}

/// Drift parameters for the regimes whose root depends on `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RegimeParams {
    pub c: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub rho_hat: f64,
    pub regime_assumed: RegimeKind,
    pub rate: f64,
    pub limit_variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub test_statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub alternative: Option<Alternative>,
    pub n: usize,
    pub t_len: usize,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1), got {level}"
        )))
    }
}

fn declared_spec(kind: RegimeKind, params: Option<RegimeParams>) -> Result<RegimeSpec> {
    let p = params.unwrap_or_default();
    let need_c = || {
        p.c.ok_or_else(|| Error::MissingParameters(format!("{kind} requires c")))
    };
    let need_alpha = || {
        p.alpha
            .ok_or_else(|| Error::MissingParameters(format!("{kind} requires alpha")))
    };
    let spec = match kind {
        RegimeKind::LocalToUnity => RegimeSpec::LocalToUnity { c: need_c()? },
        RegimeKind::MildlyIntegrated => RegimeSpec::MildlyIntegrated {
            c: need_c()?,
            alpha: need_alpha()?,
        },
        RegimeKind::MildlyExplosive => RegimeSpec::MildlyExplosive {
            c: need_c()?,
            alpha: need_alpha()?,
        },
        _ => unreachable!("fixed-root regimes are handled by the caller"),
    };
    spec.validate()?;
    Ok(spec)
}

/// Rate and limit variance of `rate · (ρ̂ - ρ)` for the declared regime.
pub fn declared_rate(
    kind: RegimeKind,
    rho_hat: f64,
    n: usize,
    t_len: usize,
    params: Option<RegimeParams>,
) -> Result<(f64, f64)> {
    let sqrt_n = (n as f64).sqrt();
    let t = t_len as f64;
    let (rate, var) = match kind {
        RegimeKind::Stationary => {
            if rho_hat.abs() >= 1.0 {
                return Err(Error::RegimeMismatch(format!(
                    "stationary declared but |rho_hat| = {} is not below 1",
                    rho_hat.abs()
                )));
            }
            ((n as f64 * t / (1.0 - rho_hat * rho_hat)).sqrt(), 1.0)
        }
        RegimeKind::UnitRoot => (sqrt_n * t, 2.0),
        RegimeKind::Explosive => {
            let a = rho_hat.abs();
            if a <= 1.0 {
                return Err(Error::RegimeMismatch(format!(
                    "explosive declared but |rho_hat| = {a} is not above 1"
                )));
            }
            let beta2 = (a * a).recip();
            (sqrt_n * a.powf(t - 2.0), (1.0 - beta2) * (1.0 - beta2))
        }
        _ => {
            let law = limit_law(&declared_spec(kind, params)?, n, t_len)?;
            (law.rate, law.limit_variance)
        }
    };
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::NumericalRange(format!(
            "rate {rate} for {kind} at T = {t_len}"
        )));
    }
    Ok((rate, var))
}

/// Interval around an already computed estimate.
pub fn interval_from_estimate(
    rho_hat: f64,
    kind: RegimeKind,
    n: usize,
    t_len: usize,
    level: f64,
    params: Option<RegimeParams>,
) -> Result<InferenceResult> {
    check_level(level)?;
    let (rate, limit_variance) = declared_rate(kind, rho_hat, n, t_len, params)?;
    let half = normal_quantile(0.5 + level / 2.0) * limit_variance.sqrt() / rate;
    Ok(InferenceResult {
        rho_hat,
        regime_assumed: kind,
        rate,
        limit_variance,
        ci_low: rho_hat - half,
        ci_high: rho_hat + half,
        level,
        test_statistic: None,
        p_value: None,
        alternative: None,
        n,
        t_len,
    })
}

pub fn confidence_interval(
    panel: &PanelData,
    kind: RegimeKind,
    level: f64,
    params: Option<RegimeParams>,
) -> Result<InferenceResult> {
    check_level(level)?;
    let est = lse(panel)?;
    interval_from_estimate(est.rho_hat, kind, panel.n(), panel.t_len(), level, params)
}

/// `Z = √N T (ρ̂ - 1) / √2` with its normal p-value, plus the 95% unit-root
/// interval.
pub fn unit_root_test_from_estimate(
    rho_hat: f64,
    n: usize,
    t_len: usize,
    alternative: Alternative,
) -> Result<InferenceResult> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "unit-root test needs N >= 2, got {n}"
        )));
    }
    let mut res = interval_from_estimate(rho_hat, RegimeKind::UnitRoot, n, t_len, 0.95, None)?;
    let z = res.rate * (rho_hat - 1.0) / res.limit_variance.sqrt();
    let p = match alternative {
        Alternative::TwoSided => (2.0 * normal_sf(z.abs())).min(1.0),
        Alternative::StationarySide => normal_cdf(z),
        Alternative::ExplosiveSide => normal_sf(z),
    };
    res.test_statistic = Some(z);
    res.p_value = Some(p);
    res.alternative = Some(alternative);
    Ok(res)
}

pub fn unit_root_test(panel: &PanelData, alternative: Alternative) -> Result<InferenceResult> {
    if panel.n() < 2 {
        return Err(Error::InvalidArgument(format!(
            "unit-root test needs N >= 2, got {}",
            panel.n()
        )));
    }
    let est = lse(panel)?;
    unit_root_test_from_estimate(est.rho_hat, panel.n(), panel.t_len(), alternative)
}
