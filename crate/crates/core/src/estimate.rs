//! Pooled least-squares estimation and the per-series statistics `A_i^T`, `B_i^T`.

use serde::{Deserialize, Serialize};

use crate::asymptotics::exact_second_moment_ln;
use crate::error::{Error, Result};
use crate::panel::PanelData;
use crate::regime::LimitLaw;
use crate::summation::{pairwise_sum, pairwise_sum_by};

/// Source of the per-series numerators `Σ_t y_{t-1} ε_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumeratorMode {
    /// The true innovations attached to a simulated panel.
    TrueInnovations,
    /// Residuals `y_t - ρ̂ y_{t-1}`; the only option for observed data.
    Residuals,
}

/// How `Var(A_1^T)` and `E[B_1^T]` are obtained when standardizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Closed-form moments at the actual `T`.
    #[default]
    ExactFiniteT,
    /// The limits as `T → ∞`.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LseResult {
    pub rho_hat: f64,
    /// `Σ_i Σ_t y_it y_i,t-1`.
    pub numerator: f64,
    /// `Σ_i Σ_t y²_i,t-1`.
    pub denominator: f64,
    /// `Σ_t y_i,t-1 ε_it` per series (true innovations or residuals, see `mode`).
    pub per_section_num: Vec<f64>,
    /// `Σ_t y²_i,t-1` per series.
    pub per_section_den: Vec<f64>,
    pub mode: NumeratorMode,
}

impl LseResult {
    /// `ρ̂ - ρ` computed as `Σ y_{t-1} ε_t / Σ y²_{t-1}`, free of the
    /// cancellation in `rho_hat - rho`. Only available with true innovations.
    pub fn estimation_error(&self) -> Option<f64> {
        (self.mode == NumeratorMode::TrueInnovations)
            .then(|| pairwise_sum(&self.per_section_num) / self.denominator)
    }
}

#[inline]
pub(crate) fn lag_cross(y: &[f64]) -> f64 {
    pairwise_sum_by(y.len() - 1, |k| y[k + 1] * y[k])
}

#[inline]
pub(crate) fn lag_square(y: &[f64]) -> f64 {
    pairwise_sum_by(y.len() - 1, |k| y[k] * y[k])
}

#[inline]
pub(crate) fn lag_innovation(y: &[f64], eps: &[f64]) -> f64 {
    pairwise_sum_by(eps.len(), |k| y[k] * eps[k])
}

/// Pooled least-squares estimate of ρ.
pub fn lse(panel: &PanelData) -> Result<LseResult> {
    let n = panel.n();
    let cross: Vec<f64> = (0..n).map(|i| lag_cross(panel.series(i))).collect();
    let per_section_den: Vec<f64> = (0..n).map(|i| lag_square(panel.series(i))).collect();
    let numerator = pairwise_sum(&cross);
    let denominator = pairwise_sum(&per_section_den);
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if !(numerator.is_finite() && denominator.is_finite()) {
        return Err(Error::NumericalRange("lagged sums overflow".into()));
    }
    let rho_hat = numerator / denominator;

    let (per_section_num, mode) = if panel.has_innovations() {
        let num = (0..n)
            .map(|i| lag_innovation(panel.series(i), panel.innovations(i).unwrap()))
            .collect();
        (num, NumeratorMode::TrueInnovations)
    } else {
        let num = (0..n)
            .map(|i| {
                let y = panel.series(i);
                pairwise_sum_by(y.len() - 1, |k| y[k] * (y[k + 1] - rho_hat * y[k]))
            })
            .collect();
        (num, NumeratorMode::Residuals)
    };

    Ok(LseResult {
        rho_hat,
        numerator,
        denominator,
        per_section_num,
        per_section_den,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionStats {
    /// `A_i^T = P(T) Σ_t y_i,t-1 ε_it`.
    pub a: Vec<f64>,
    /// `B_i^T = Q(T) Σ_t y²_i,t-1`.
    pub b: Vec<f64>,
    /// `S_N^T = N^{-1/2} Σ_i A_i^T / √Var(A_1^T)`.
    pub s: f64,
    /// `R_N^T = N^{-1} Σ_i B_i^T / E[B_1^T]`.
    pub r: f64,
    pub var_a_used: f64,
    pub mean_b_used: f64,
    pub mode: NumeratorMode,
    pub standardization: Standardization,
}

impl CrossSectionStats {
    /// `(S/R) √Var(A) / E[B]`, which equals `√N P/Q (ρ̂ - ρ)` identically.
    pub fn recombined(&self) -> f64 {
        self.s / self.r * self.var_a_used.sqrt() / self.mean_b_used
    }
}

/// `Var(A_1^T)` and `E[B_1^T]` under the chosen standardization.
pub(crate) fn standardizers(
    law: &LimitLaw,
    standardization: Standardization,
) -> Result<(f64, f64)> {
    let (var_a, mean_b) = match standardization {
        Standardization::ExactFiniteT => {
            let m = exact_second_moment_ln(law.rho, law.t_len, law.ln_p_of_t, law.ln_q_of_t);
            (m.var_a, m.e_b)
        }
        Standardization::Asymptotic => (law.limit_var_a, law.limit_mean_b),
    };
    if !(var_a > 0.0 && var_a.is_finite()) {
        return Err(Error::ZeroVariance);
    }
    if !(mean_b > 0.0 && mean_b.is_finite()) {
        return Err(Error::NumericalRange(format!("E[B] = {mean_b}")));
    }
    Ok((var_a, mean_b))
}

/// `S_N^T` and `R_N^T` from per-series sums.
pub(crate) fn s_and_r(
    num: &[f64],
    den: &[f64],
    p_of_t: f64,
    q_of_t: f64,
    var_a: f64,
    mean_b: f64,
) -> (f64, f64) {
    let n = num.len() as f64;
    let sum_a = pairwise_sum_by(num.len(), |i| p_of_t * num[i]);
    let sum_b = pairwise_sum_by(den.len(), |i| q_of_t * den[i]);
    let s = sum_a / (n.sqrt() * var_a.sqrt());
    let r = sum_b / (n * mean_b);
    (s, r)
}

/// Per-series statistics and their standardized cross-sectional averages.
///
/// Without attached innovations the numerators are residual based, which
/// must be requested explicitly with `accept_residuals`.
pub fn cross_section_stats(
    panel: &PanelData,
    law: &LimitLaw,
    standardization: Standardization,
    accept_residuals: bool,
) -> Result<CrossSectionStats> {
    if !panel.has_innovations() && !accept_residuals {
        return Err(Error::MissingInnovations);
    }
    if law.n != panel.n() || law.t_len != panel.t_len() {
        return Err(Error::InvalidArgument(format!(
            "limit law is for N={}, T={} but panel is N={}, T={}",
            law.n,
            law.t_len,
            panel.n(),
            panel.t_len()
        )));
    }
    let est = lse(panel)?;
    let (var_a, mean_b) = standardizers(law, standardization)?;
    let (s, r) = s_and_r(
        &est.per_section_num,
        &est.per_section_den,
        law.p_of_t,
        law.q_of_t,
        var_a,
        mean_b,
    );
    Ok(CrossSectionStats {
        a: est.per_section_num.iter().map(|x| law.p_of_t * x).collect(),
        b: est.per_section_den.iter().map(|x| law.q_of_t * x).collect(),
        s,
        r,
        var_a_used: var_a,
        mean_b_used: mean_b,
        mode: est.mode,
        standardization,
    })
}

/// Powers `β^k`, `k = 0..=T`, of `β = 1/ρ` for `|ρ| > 1`.
#[derive(Debug, Clone)]
pub(crate) struct GrowthTable {
    rho: f64,
    powers: Vec<f64>,
}

impl GrowthTable {
    pub(crate) fn new(rho: f64, t_len: usize) -> Self {
        let beta = 1.0 / rho;
        let powers = (0..=t_len).map(|k| beta.powi(k as i32)).collect();
        Self { rho, powers }
    }

    /// `β^k` for `k >= -1`.
    #[inline]
    fn pow(&self, k: isize) -> f64 {
        if k < 0 {
            self.rho
        } else {
            self.powers[k as usize]
        }
    }
}

/// `(β^{T-2} Σ_t y_{t-1} ε_t, β^{2(T-2)} Σ_t y²_{t-1})` for one series,
/// computed from `w_t = β^t y_t` so nothing overflows for long explosive paths.
pub(crate) fn rescaled_error_sums(
    table: &GrowthTable,
    eps: &[f64],
    w: &mut Vec<f64>,
) -> (f64, f64) {
    let t_len = eps.len();
    w.clear();
    w.push(0.0);
    let mut acc = 0.0;
    for (t, &e) in eps.iter().enumerate() {
        acc += table.pow(t as isize + 1) * e;
        w.push(acc);
    }
    let t = t_len as isize;
    // Index k is period t = k + 1, scaled by β^{T-1-t} = β^{T-2-k}.
    let num = pairwise_sum_by(t_len, |k| table.pow(t - 2 - k as isize) * w[k] * eps[k]);
    let den = pairwise_sum_by(t_len, |k| {
        let x = table.pow(t - 2 - k as isize) * w[k];
        x * x
    });
    (num, den)
}

/// Quantities of the explosive-regime decomposition into `u_iT`, `v_iT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplosiveUvStats {
    /// `N^{-1} Σ_i u_iT v_iT`.
    pub mean_uv: f64,
    /// `N^{-1} Σ_i u²_iT`.
    pub mean_u2: f64,
    /// `|β^{T-2} N^{-1} ΣΣ y_{i,t-1} ε_it - mean_uv|`.
    pub num_residual: f64,
    /// `|β^{2(T-2)} N^{-1} ΣΣ y²_{i,t-1} - mean_u2|`.
    pub den_residual: f64,
    /// `|β^{2(T-2)} N^{-1} ΣΣ y²_{i,t-1} - mean_u2 Σ_{t=1}^{T} β^{2(T-t)}|`, the
    /// approximation of the denominator that does vanish.
    pub den_residual_geometric: f64,
}

/// `u_iT = Σ_{s=1}^{T-1} β^{s-1} ε_is` and `v_iT = Σ_{s=1}^{T} β^{T-s} ε_is`
/// averaged over series, with the residuals of the numerator and denominator
/// approximations.
pub fn explosive_uv_stats(panel: &PanelData) -> Result<ExplosiveUvStats> {
    let rho = panel
        .rho_used()
        .ok_or_else(|| Error::WrongRegime("panel carries no generating rho".into()))?;
    if rho.is_nan() || rho.abs() <= 1.0 {
        return Err(Error::WrongRegime(format!(
            "requires |rho| > 1, panel has rho = {rho}"
        )));
    }
    if !panel.has_innovations() {
        return Err(Error::MissingInnovations);
    }
    let (n, t_len) = (panel.n(), panel.t_len());
    let table = GrowthTable::new(rho, t_len);
    let mut scratch = Vec::with_capacity(t_len + 1);
    let mut uv = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    let mut num_s = Vec::with_capacity(n);
    let mut den_s = Vec::with_capacity(n);
    for i in 0..n {
        let e = panel.innovations(i).unwrap();
        let u = pairwise_sum_by(t_len - 1, |k| table.pow(k as isize) * e[k]);
        let v = pairwise_sum_by(t_len, |k| table.pow((t_len - 1 - k) as isize) * e[k]);
        uv.push(u * v);
        u2.push(u * u);
        let (a, b) = rescaled_error_sums(&table, e, &mut scratch);
        num_s.push(a);
        den_s.push(b);
    }
    let nf = n as f64;
    let mean_uv = pairwise_sum(&uv) / nf;
    let mean_u2 = pairwise_sum(&u2) / nf;
    let mean_num = pairwise_sum(&num_s) / nf;
    let mean_den = pairwise_sum(&den_s) / nf;
    let geometric = pairwise_sum_by(t_len, |k| table.pow(k as isize).powi(2));
    Ok(ExplosiveUvStats {
        mean_uv,
        mean_u2,
        num_residual: (mean_num - mean_uv).abs(),
        den_residual: (mean_den - mean_u2).abs(),
        den_residual_geometric: (mean_den - mean_u2 * geometric).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::InnovationSpec;
    use crate::panel::simulate_panel;
    use crate::regime::{limit_law, RegimeSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rademacher_two_period_enumeration() {
        let rho = 0.3;
        let mut errors = Vec::new();
        for e1 in [-1.0, 1.0] {
            for e2 in [-1.0, 1.0] {
                let p = PanelData::from_innovations(rho, 1, 2, vec![e1, e2]).unwrap();
                let est = lse(&p).unwrap();
                assert_eq!(est.denominator, e1 * e1);
                assert_eq!(est.estimation_error().unwrap(), e2 / e1);
                errors.push(est.estimation_error().unwrap());
            }
        }
        errors.sort_by(f64::total_cmp);
        assert_eq!(errors, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn single_period_has_zero_denominator() {
        let p = PanelData::from_observations(1, 1, vec![0.0, 2.5]).unwrap();
        assert_eq!(lse(&p), Err(Error::ZeroDenominator));
    }

    #[test]
    fn decomposition_identities() {
        let spec = RegimeSpec::Stationary { rho: 0.7 };
        let p = simulate_panel(&spec, &InnovationSpec::StandardNormal, 30, 40, 3, true).unwrap();
        let est = lse(&p).unwrap();
        assert_eq!(est.rho_hat, est.numerator / est.denominator);
        assert_eq!(est.denominator, pairwise_sum(&est.per_section_den));
        let sum_num = pairwise_sum(&est.per_section_num);
        assert_relative_eq!(
            est.numerator - 0.7 * est.denominator,
            sum_num,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            est.rho_hat - 0.7,
            est.estimation_error().unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn residual_mode_without_innovations() {
        let p = PanelData::from_observations(2, 3, vec![0.0, 1.0, 0.5, 1.5, 0.0, -1.0, -0.2, 0.1])
            .unwrap();
        let est = lse(&p).unwrap();
        assert_eq!(est.mode, NumeratorMode::Residuals);
        assert!(est.estimation_error().is_none());
        // Residuals are orthogonal to the lag at ρ̂.
        assert!(pairwise_sum(&est.per_section_num).abs() < 1e-12);
        let law = limit_law(&RegimeSpec::UnitRoot, 2, 3).unwrap();
        assert_eq!(
            cross_section_stats(&p, &law, Standardization::ExactFiniteT, false),
            Err(Error::MissingInnovations)
        );
        let stats = cross_section_stats(&p, &law, Standardization::ExactFiniteT, true).unwrap();
        assert_eq!(stats.mode, NumeratorMode::Residuals);
    }

    #[test]
    fn unit_root_standardizers() {
        let p = simulate_panel(
            &RegimeSpec::UnitRoot,
            &InnovationSpec::StandardNormal,
            5,
            10,
            1,
            true,
        )
        .unwrap();
        let law = limit_law(&RegimeSpec::UnitRoot, 5, 10).unwrap();
        let exact = cross_section_stats(&p, &law, Standardization::ExactFiniteT, false).unwrap();
        assert_relative_eq!(exact.var_a_used, 0.45, max_relative = 1e-12);
        assert_relative_eq!(exact.mean_b_used, 0.45, max_relative = 1e-12);
        let asym = cross_section_stats(&p, &law, Standardization::Asymptotic, false).unwrap();
        assert_eq!((asym.var_a_used, asym.mean_b_used), (0.5, 0.5));
    }

    #[test]
    fn composite_identity_across_regimes() {
        let specs = [
            RegimeSpec::Stationary { rho: -0.4 },
            RegimeSpec::UnitRoot,
            RegimeSpec::LocalToUnity { c: -3.0 },
            RegimeSpec::MildlyIntegrated { c: 1.0, alpha: 0.6 },
            RegimeSpec::MildlyExplosive {
                c: -1.0,
                alpha: 0.5,
            },
            RegimeSpec::Explosive { rho: -1.3 },
        ];
        for (k, spec) in specs.iter().enumerate() {
            let (n, t) = (25, 80);
            let p =
                simulate_panel(spec, &InnovationSpec::Rademacher, n, t, k as u64, true).unwrap();
            let law = limit_law(spec, n, t).unwrap();
            let est = lse(&p).unwrap();
            for std in [Standardization::ExactFiniteT, Standardization::Asymptotic] {
                let stats = cross_section_stats(&p, &law, std, false).unwrap();
                assert!(stats.r >= 0.0);
                let lhs = law.scale(est.estimation_error().unwrap());
                assert_relative_eq!(lhs, stats.recombined(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn uv_hand_example() {
        // ρ = 2, T = 3, ε = (1, 1, 1): u = 1 + β, v = 1 + β + β².
        let p = PanelData::from_innovations(2.0, 1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let uv = explosive_uv_stats(&p).unwrap();
        assert_relative_eq!(uv.mean_u2, 1.5 * 1.5, max_relative = 1e-15);
        assert_relative_eq!(uv.mean_uv, 1.5 * 1.75, max_relative = 1e-15);
        // y = (0, 1, 3, 7): Σ y_{t-1} ε_t = 4, Σ y²_{t-1} = 10, β^{T-2} = 1/2.
        assert_relative_eq!(
            uv.num_residual,
            (2.0 - 2.625f64).abs(),
            max_relative = 1e-14
        );
        assert_relative_eq!(uv.den_residual, (2.5 - 2.25f64).abs(), max_relative = 1e-14);
    }

    #[test]
    fn uv_requires_explosive_panel_with_innovations() {
        let p = simulate_panel(
            &RegimeSpec::UnitRoot,
            &InnovationSpec::StandardNormal,
            2,
            5,
            0,
            true,
        )
        .unwrap();
        assert!(matches!(explosive_uv_stats(&p), Err(Error::WrongRegime(_))));
        let q = simulate_panel(
            &RegimeSpec::Explosive { rho: 1.5 },
            &InnovationSpec::StandardNormal,
            2,
            5,
            0,
            false,
        )
        .unwrap();
        assert_eq!(explosive_uv_stats(&q), Err(Error::MissingInnovations));
    }

    #[test]
    fn u_second_moment_limit() {
        // E[u²] = (1 - β^{2(T-1)})/(1 - β²) ≈ 4/3 at ρ = 2; Var(u²) = 2 E[u²]²,
        // so N = 10⁵ puts the ±0.02 band beyond 3 standard errors.
        let p = simulate_panel(
            &RegimeSpec::Explosive { rho: 2.0 },
            &InnovationSpec::StandardNormal,
            100_000,
            50,
            8,
            true,
        )
        .unwrap();
        let uv = explosive_uv_stats(&p).unwrap();
        assert!((uv.mean_u2 - 4.0 / 3.0).abs() < 0.02, "{}", uv.mean_u2);
        assert!(uv.mean_uv.abs() < 0.02);
    }

    #[test]
    fn explosive_residuals_vanish() {
        let p = simulate_panel(
            &RegimeSpec::Explosive { rho: 1.5 },
            &InnovationSpec::StandardNormal,
            1000,
            60,
            21,
            true,
        )
        .unwrap();
        let uv = explosive_uv_stats(&p).unwrap();
        assert!(uv.num_residual < 0.01, "{uv:?}");
        assert!(uv.den_residual_geometric < 0.01, "{uv:?}");
        // The plain u² approximation misses the factor Σ β^{2(T-t)} = 1/(1-β²).
        let beta2 = 1.0 / 2.25;
        let gap = uv.den_residual / uv.mean_u2;
        assert_relative_eq!(gap, beta2 / (1.0 - beta2), max_relative = 1e-3);
    }

    #[test]
    fn rescaled_sums_match_raw_sums() {
        let rho = -1.2;
        let p = simulate_panel(
            &RegimeSpec::Explosive { rho },
            &InnovationSpec::StandardNormal,
            3,
            60,
            4,
            true,
        )
        .unwrap();
        let table = GrowthTable::new(rho, 60);
        let mut w = Vec::new();
        let scale = (1.0 / rho).powi(58);
        for i in 0..3 {
            let (num, den) = rescaled_error_sums(&table, p.innovations(i).unwrap(), &mut w);
            let y = p.series(i);
            assert_relative_eq!(
                num,
                scale * lag_innovation(y, p.innovations(i).unwrap()),
                max_relative = 1e-9
            );
            assert_relative_eq!(den, scale * scale * lag_square(y), max_relative = 1e-9);
        }
    }

    #[test]
    fn rescaled_sums_survive_overflowing_paths() {
        let (rho, t) = (2.0, 1500);
        let p = simulate_panel(
            &RegimeSpec::Explosive { rho },
            &InnovationSpec::StandardNormal,
            2,
            t,
            4,
            true,
        )
        .unwrap();
        assert!(lse(&p).is_err());
        let table = GrowthTable::new(rho, t);
        let (num, den) = rescaled_error_sums(&table, p.innovations(0).unwrap(), &mut Vec::new());
        assert!(num.is_finite() && den.is_finite() && den > 0.0);
    }

    proptest! {
        #[test]
        fn rho_hat_is_scale_invariant(seed in 0u64..1000, lambda in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
            let p = simulate_panel(&RegimeSpec::Stationary { rho: 0.5 }, &InnovationSpec::StandardNormal, 4, 30, seed, false).unwrap();
            let scaled = PanelData::from_observations(4, 30, p.observations().iter().map(|y| y * lambda).collect()).unwrap();
            let a = lse(&p).unwrap().rho_hat;
            let b = lse(&scaled).unwrap().rho_hat;
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }
    }
}
