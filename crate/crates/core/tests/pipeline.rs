use approx::assert_relative_eq;
use panel_ar::inference::{interval_from_estimate, RegimeParams};
use panel_ar::stats::{mean, variance};
use panel_ar::{
    berry_esseen_curve, confidence_interval, cross_section_stats, ingest_panel, limit_law, lse,
    run_replications, simulate_panel, InferenceResult, InnovationSpec, LimitLaw, McConfig,
    McReport, PanelData, PanelFormat, RegimeKind, RegimeSpec, Standardization, Statistic,
};
use proptest::prelude::*;
use std::io::Write;

fn write_long(panel: &PanelData, path: &std::path::Path) {
    let mut f = std::fs::File::create(path).unwrap();
    writeln!(f, "i,t,y").unwrap();
    for i in 0..panel.n() {
        for (t, y) in panel.series(i).iter().enumerate() {
            writeln!(f, "{},{t},{y}", i + 1).unwrap();
        }
    }
}

fn write_wide(panel: &PanelData, path: &std::path::Path, with_zero_column: bool) {
    let mut f = std::fs::File::create(path).unwrap();
    let start = usize::from(!with_zero_column);
    let header: Vec<String> = (start..=panel.t_len()).map(|t| format!("y{t}")).collect();
    writeln!(f, "{}", header.join(",")).unwrap();
    for i in 0..panel.n() {
        let row: Vec<String> = panel.series(i)[start..]
            .iter()
            .map(f64::to_string)
            .collect();
        writeln!(f, "{}", row.join(",")).unwrap();
    }
}

#[test]
fn csv_round_trip_preserves_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = RegimeSpec::LocalToUnity { c: 1.0 };
    let panel = simulate_panel(&spec, &InnovationSpec::Rademacher, 25, 40, 3, false).unwrap();
    let rho_hat = lse(&panel).unwrap().rho_hat;

    let long = dir.path().join("long.csv");
    write_long(&panel, &long);
    let back = ingest_panel(&long, PanelFormat::LongCsv).unwrap();
    assert_eq!(back.observations(), panel.observations());
    assert_eq!(lse(&back).unwrap().rho_hat, rho_hat);

    let wide = dir.path().join("wide.csv");
    write_wide(&panel, &wide, false);
    let back = ingest_panel(&wide, PanelFormat::WideCsv).unwrap();
    assert_eq!(back.observations(), panel.observations());
    assert_eq!(back.warnings().len(), 1);

    write_wide(&panel, &wide, true);
    let back = ingest_panel(&wide, PanelFormat::WideCsv).unwrap();
    assert!(back.warnings().is_empty());
    let p = Some(RegimeParams {
        c: Some(1.0),
        alpha: None,
    });
    let ci = confidence_interval(&back, RegimeKind::LocalToUnity, 0.9, p).unwrap();
    assert_eq!(ci.rho_hat, rho_hat);
}

#[test]
fn reports_round_trip_through_json() {
    let report = run_replications(&McConfig::new(
        RegimeSpec::Explosive { rho: -1.3 },
        5,
        12,
        4,
        1,
    ))
    .unwrap();
    let back: McReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(back, report);

    let law = limit_law(
        &RegimeSpec::MildlyExplosive {
            c: -1.0,
            alpha: 0.5,
        },
        10,
        100,
    )
    .unwrap();
    let back: LimitLaw = serde_json::from_str(&serde_json::to_string(&law).unwrap()).unwrap();
    assert_eq!(back, law);

    let r = interval_from_estimate(0.99, RegimeKind::UnitRoot, 10, 50, 0.9, None).unwrap();
    let back: InferenceResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);

    let spec: RegimeSpec =
        serde_json::from_str(r#"{"kind":"mildly_integrated","c":1.0,"alpha":0.5}"#).unwrap();
    assert_eq!(spec, RegimeSpec::MildlyIntegrated { c: 1.0, alpha: 0.5 });
    assert!(
        serde_json::from_str::<RegimeSpec>(r#"{"kind":"stationary","rho":0.5,"c":1}"#).is_err()
    );
}

#[test]
fn scaled_statistic_is_centered_in_every_regime() {
    let specs = [
        RegimeSpec::Stationary { rho: -0.4 },
        RegimeSpec::UnitRoot,
        RegimeSpec::LocalToUnity { c: -1.0 },
        RegimeSpec::MildlyIntegrated { c: 2.0, alpha: 0.6 },
        RegimeSpec::MildlyExplosive {
            c: -0.5,
            alpha: 0.5,
        },
        RegimeSpec::Explosive { rho: 1.1 },
    ];
    for (k, spec) in specs.into_iter().enumerate() {
        for statistic in [Statistic::ScaledError, Statistic::SOverR] {
            let cfg = McConfig::new(spec, 40, 80, 400, 50 + k as u64).with_statistic(statistic);
            let r = run_replications(&cfg).unwrap();
            let bound = 4.0 * (r.empirical_var / 400.0).sqrt();
            assert!(
                r.empirical_mean.abs() <= bound,
                "{spec:?} {statistic:?}: {}",
                r.empirical_mean
            );
            assert_eq!(r.empirical_mean, mean(&r.scaled_stats));
            assert_eq!(r.empirical_var, variance(&r.scaled_stats));
        }
    }
}

#[test]
fn ks_shrinks_along_the_berry_esseen_grid() {
    let base =
        McConfig::new(RegimeSpec::UnitRoot, 1, 50, 3000, 77).with_statistic(Statistic::SOverR);
    let curve = berry_esseen_curve(&base, &[4, 16, 64, 256]).unwrap();
    assert!(
        curve.points.last().unwrap().ks < curve.points[0].ks,
        "{curve:?}"
    );
}

#[test]
fn asymptotic_and_exact_standardization_share_the_identity() {
    let spec = RegimeSpec::MildlyIntegrated { c: 1.0, alpha: 0.5 };
    let panel = simulate_panel(
        &spec,
        &InnovationSpec::UniformStandardized,
        30,
        100,
        9,
        true,
    )
    .unwrap();
    let law = limit_law(&spec, 30, 100).unwrap();
    let err = lse(&panel).unwrap().estimation_error().unwrap();
    for std in [Standardization::ExactFiniteT, Standardization::Asymptotic] {
        let cs = cross_section_stats(&panel, &law, std, false).unwrap();
        assert_relative_eq!(cs.recombined(), law.scale(err), max_relative = 1e-12);
        assert!(cs.r >= 0.0);
    }
}

fn any_spec() -> impl Strategy<Value = RegimeSpec> {
    prop_oneof![
        (-0.95f64..0.95).prop_map(|rho| RegimeSpec::Stationary { rho }),
        Just(RegimeSpec::UnitRoot),
        (0.1f64..5.0).prop_map(|c| RegimeSpec::LocalToUnity { c }),
        (0.2f64..3.0, 0.2f64..0.8).prop_map(|(c, alpha)| RegimeSpec::MildlyIntegrated { c, alpha }),
        (-3.0f64..-0.2, 0.2f64..0.8)
            .prop_map(|(c, alpha)| RegimeSpec::MildlyExplosive { c, alpha }),
        (1.05f64..1.5).prop_map(|rho| RegimeSpec::Explosive { rho }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn estimator_invariants(spec in any_spec(), n in 1usize..20, t in 8usize..60, seed in any::<u64>()) {
        prop_assume!(limit_law(&spec, n, t).is_ok());
        let panel = simulate_panel(&spec, &InnovationSpec::StandardNormal, n, t, seed, true).unwrap();
        let est = lse(&panel).unwrap();
        prop_assert_eq!(est.rho_hat, est.numerator / est.denominator);
        prop_assert!(est.denominator > 0.0);
        let law = limit_law(&spec, n, t).unwrap();
        let cs = cross_section_stats(&panel, &law, Standardization::ExactFiniteT, false).unwrap();
        let direct = law.scale(est.estimation_error().unwrap());
        prop_assert!((cs.recombined() - direct).abs() <= 1e-9 * direct.abs().max(1e-300) + 1e-300);
        prop_assert!(panel.recursion_holds());
    }

    #[test]
    fn declared_intervals_contain_the_estimate(spec in any_spec(), n in 2usize..20, t in 8usize..60, seed in any::<u64>(), level in 0.5f64..0.999) {
        prop_assume!(limit_law(&spec, n, t).is_ok());
        let panel = simulate_panel(&spec, &InnovationSpec::StandardNormal, n, t, seed, false).unwrap();
        let (c, alpha) = match spec {
            RegimeSpec::LocalToUnity { c } => (Some(c), None),
            RegimeSpec::MildlyIntegrated { c, alpha } | RegimeSpec::MildlyExplosive { c, alpha } => (Some(c), Some(alpha)),
            _ => (None, None),
        };
        let params = Some(RegimeParams { c, alpha });
        match confidence_interval(&panel, spec.kind(), level, params) {
            Ok(r) => {
                prop_assert!(r.ci_low <= r.rho_hat && r.rho_hat <= r.ci_high);
                prop_assert!(r.rate > 0.0 && r.limit_variance > 0.0);
            }
            // Fixed-root regimes refuse estimates on the wrong side of one.
            Err(panel_ar::Error::RegimeMismatch(_)) => {
                prop_assert!(matches!(spec.kind(), RegimeKind::Stationary | RegimeKind::Explosive));
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
