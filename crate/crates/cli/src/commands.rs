//! Validation and execution of each command.

use std::path::{Path, PathBuf};

use panel_ar::asymptotics::{
    mildly_explosive_limit_sample, sample_local_to_unity_functionals, sample_unit_root_functionals,
};
use panel_ar::inference::{interval_from_estimate, unit_root_test_from_estimate, InferenceResult};
use panel_ar::montecarlo::{BerryEsseenCurve, VariancePoint};
use panel_ar::regime::local_to_unity_kernel;
use panel_ar::stats::{mean, mean_se, variance, variance_se};
use panel_ar::{
    berry_esseen_curve, ingest_panel, limit_law, lse, run_replications, simulate_panel,
    variance_convergence, McConfig, McReport, PanelData, PanelFormat, RegimeKind,
};
use serde::{Deserialize, Serialize};

use crate::config::{Command, EmitFormat, RunConfig, WienerKind};
use crate::emit::{
    emit_report, output_path, render_csv, write_atomic, CsvTable, Envelope, Tabular,
};
use crate::error::{CliError, CliResult};

pub(crate) fn mc_stats_table(report: &McReport) -> Option<CsvTable> {
    Some(CsvTable::numeric(
        &["scaled_stat"],
        report.scaled_stats.iter().map(|&x| vec![x]),
    ))
}

pub(crate) fn mc_quantile_table(report: &McReport) -> Option<CsvTable> {
    Some(CsvTable::numeric(
        &["prob", "empirical", "limit"],
        report
            .quantile_pairs
            .iter()
            .map(|q| vec![q.prob, q.empirical, q.limit]),
    ))
}

impl Tabular for McReport {
    fn stats_table(&self) -> Option<CsvTable> {
        mc_stats_table(self)
    }

    fn quantile_table(&self) -> Option<CsvTable> {
        mc_quantile_table(self)
    }
}

impl Tabular for BerryEsseenCurve {
    fn stats_table(&self) -> Option<CsvTable> {
        Some(CsvTable::numeric(
            &["n", "ks", "fitted_ks"],
            self.points.iter().map(|p| {
                let n = p.n as f64;
                vec![
                    n,
                    p.ks,
                    self.c1 * n.powf(-0.5) + self.c2 * n.powf(-1.0 / 3.0),
                ]
            }),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurveReport {
    pub points: Vec<VariancePoint>,
}

impl Tabular for VarianceCurveReport {
    fn stats_table(&self) -> Option<CsvTable> {
        Some(CsvTable::numeric(
            &["t_len", "empirical_var", "limit_var", "finite_t_var"],
            self.points
                .iter()
                .map(|p| vec![p.t_len as f64, p.empirical_var, p.limit_var, p.finite_t_var]),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub n: usize,
    pub t_len: usize,
    pub rho_used: f64,
    pub seed: u64,
    pub rho_hat: f64,
    pub panel_file: PathBuf,
    pub panel_format: PanelFormat,
    pub innovations_file: Option<PathBuf>,
    pub recursion_holds: Option<bool>,
}

impl Tabular for SimulateReport {
    fn stats_table(&self) -> Option<CsvTable> {
        None
    }
}

/// An interval computed as if the named regime were the true one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalInterval {
    pub regime: RegimeKind,
    pub result: Option<InferenceResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferReport {
    pub n: usize,
    pub t_len: usize,
    pub warnings: Vec<String>,
    pub rho_hat: f64,
    pub interval: InferenceResult,
    pub unit_root_test: Option<InferenceResult>,
    /// Every regime's interval, each valid only if that regime is the true one.
    pub conditional_intervals: Vec<ConditionalInterval>,
}

impl Tabular for InferReport {
    fn stats_table(&self) -> Option<CsvTable> {
        let mut rows = vec![row("declared", &self.interval)];
        if let Some(t) = &self.unit_root_test {
            rows.push(row("unit_root_test", t));
        }
        for c in &self.conditional_intervals {
            if let Some(r) = &c.result {
                rows.push(row("conditional", r));
            }
        }
        Some(CsvTable {
            header: [
                "role",
                "regime",
                "rho_hat",
                "rate",
                "limit_variance",
                "level",
                "ci_low",
                "ci_high",
                "test_statistic",
                "p_value",
            ]
            .map(String::from)
            .to_vec(),
            rows,
        })
    }
}

fn row(role: &str, r: &InferenceResult) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    vec![
        role.to_owned(),
        r.regime_assumed.name().to_owned(),
        r.rho_hat.to_string(),
        r.rate.to_string(),
        r.limit_variance.to_string(),
        r.level.to_string(),
        r.ci_low.to_string(),
        r.ci_high.to_string(),
        opt(r.test_statistic),
        opt(r.p_value),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerReport {
    pub kind: WienerKind,
    pub c: Option<f64>,
    pub grid_steps: Option<usize>,
    pub replications: usize,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub mean_first: f64,
    pub var_first: f64,
    pub var_first_se: f64,
    pub mean_second: f64,
    pub mean_second_se: f64,
    /// Exact variance of the first functional.
    pub reference_var_first: f64,
    /// Exact mean of the second functional.
    pub reference_mean_second: f64,
}

impl Tabular for WienerReport {
    fn stats_table(&self) -> Option<CsvTable> {
        Some(CsvTable::numeric(
            &["first", "second"],
            self.first
                .iter()
                .zip(&self.second)
                .map(|(&a, &b)| vec![a, b]),
        ))
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn mc_config(cfg: &RunConfig) -> McConfig {
    McConfig {
        regime: cfg.regime,
        innovations: cfg.innovations,
        n: cfg.n,
        t_len: cfg.t_len,
        replications: cfg.replications,
        seed: cfg.seed,
        standardization: cfg.standardization,
        statistic: cfg.statistic,
    }
}

fn check_increasing(name: &str, grid: &[usize], required: usize) -> CliResult<()> {
    if grid.len() < required || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "{name} needs at least {required} strictly increasing values, got {grid:?}"
        )));
    }
    Ok(())
}

/// Rejects anything the command would fail on before running it.
pub fn validate(command: Command, cfg: &RunConfig) -> CliResult<()> {
    if cfg.emit.is_empty() {
        return Err(invalid("emit lists no output format"));
    }
    if cfg.output.is_none() && cfg.emit.iter().any(|&f| f != EmitFormat::Json) {
        return Err(invalid("CSV output needs an output path (--out or output)"));
    }
    match command {
        Command::Simulate => {
            cfg.regime.validate().map_err(invalid)?;
            cfg.innovations.validate().map_err(invalid)?;
            if cfg.n == 0 {
                return Err(invalid("n must be at least 1"));
            }
            limit_law(&cfg.regime, cfg.n, cfg.t_len).map_err(invalid)?;
            if cfg.output.is_none() {
                return Err(invalid(
                    "simulate writes a panel file and needs an output path",
                ));
            }
            if cfg.emit.iter().any(|&f| f != EmitFormat::Json) {
                return Err(invalid("simulate only emits json next to the panel file"));
            }
        }
        Command::Mc => mc_config(cfg).validate().map_err(invalid)?,
        Command::BerryEsseen => {
            check_increasing("berry_esseen.n_grid", &cfg.berry_esseen.n_grid, 4)?;
            for &n in &cfg.berry_esseen.n_grid {
                McConfig {
                    n,
                    ..mc_config(cfg)
                }
                .validate()
                .map_err(invalid)?;
            }
        }
        Command::VarianceCurve => {
            check_increasing("variance_curve.t_grid", &cfg.variance_curve.t_grid, 3)?;
            for &t_len in &cfg.variance_curve.t_grid {
                McConfig {
                    t_len,
                    ..mc_config(cfg)
                }
                .validate()
                .map_err(invalid)?;
            }
        }
        Command::Infer => {
            let opts = &cfg.infer;
            if opts.input.is_none() {
                return Err(invalid("infer.input is required"));
            }
            if !(opts.level > 0.0 && opts.level < 1.0) {
                return Err(invalid(format!(
                    "infer.level must lie in (0, 1), got {}",
                    opts.level
                )));
            }
            let needs_c = matches!(
                opts.regime,
                RegimeKind::LocalToUnity
                    | RegimeKind::MildlyIntegrated
                    | RegimeKind::MildlyExplosive
            );
            let needs_alpha = matches!(
                opts.regime,
                RegimeKind::MildlyIntegrated | RegimeKind::MildlyExplosive
            );
            if needs_c && opts.c.is_none() || needs_alpha && opts.alpha.is_none() {
                return Err(invalid(format!(
                    "declared regime {} needs infer.c{}",
                    opts.regime,
                    if needs_alpha { " and infer.alpha" } else { "" }
                )));
            }
        }
        Command::Wiener => {
            let w = &cfg.wiener;
            if cfg.replications < 2 {
                return Err(invalid("replications must be at least 2"));
            }
            match w.kind {
                WienerKind::UnitRoot | WienerKind::LocalToUnity if w.grid_steps < 100 => {
                    return Err(invalid(format!(
                        "wiener.grid_steps must be >= 100, got {}",
                        w.grid_steps
                    )));
                }
                WienerKind::LocalToUnity if !w.c.is_some_and(|c| c.is_finite() && c != 0.0) => {
                    return Err(invalid(
                        "wiener.c must be set and nonzero for local_to_unity",
                    ));
                }
                WienerKind::MildlyExplosive if !w.c.is_some_and(|c| c.is_finite() && c < 0.0) => {
                    return Err(invalid(
                        "wiener.c must be set and negative for mildly_explosive",
                    ));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Validates, runs and emits one command; returns the files written.
pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    validate(command, cfg)?;
    let stem = cfg.output.as_deref();
    match command {
        Command::Simulate => {
            let report = simulate(cfg, stem.expect("validated"))?;
            emit(command, cfg, report)
        }
        Command::Mc => emit(command, cfg, run_replications(&mc_config(cfg))?),
        Command::BerryEsseen => emit(
            command,
            cfg,
            berry_esseen_curve(&mc_config(cfg), &cfg.berry_esseen.n_grid)?,
        ),
        Command::VarianceCurve => {
            let points = variance_convergence(
                &cfg.regime,
                &cfg.innovations,
                &cfg.variance_curve.t_grid,
                cfg.n,
                cfg.replications,
                cfg.seed,
            )?;
            emit(command, cfg, VarianceCurveReport { points })
        }
        Command::Infer => emit(command, cfg, infer(cfg)?),
        Command::Wiener => emit(command, cfg, wiener(cfg)?),
    }
}

fn emit<T: Serialize + Tabular>(
    command: Command,
    cfg: &RunConfig,
    report: T,
) -> CliResult<Vec<PathBuf>> {
    emit_report(
        &Envelope::new(command, cfg, report),
        &cfg.emit,
        cfg.output.as_deref(),
    )
}

fn panel_csv(panel: &PanelData, format: PanelFormat) -> CsvTable {
    let t_len = panel.t_len();
    match format {
        PanelFormat::LongCsv => {
            CsvTable {
                header: ["i", "t", "y"].map(String::from).to_vec(),
                rows: (0..panel.n())
                    .flat_map(|i| {
                        panel.series(i).iter().enumerate().map(move |(t, y)| {
                            vec![(i + 1).to_string(), t.to_string(), y.to_string()]
                        })
                    })
                    .collect(),
            }
        }
        PanelFormat::WideCsv => CsvTable {
            header: (0..=t_len).map(|t| format!("y{t}")).collect(),
            rows: (0..panel.n())
                .map(|i| panel.series(i).iter().map(f64::to_string).collect())
                .collect(),
        },
    }
}

fn simulate(cfg: &RunConfig, stem: &Path) -> CliResult<SimulateReport> {
    let keep = cfg.simulate.keep_innovations;
    let panel = simulate_panel(
        &cfg.regime,
        &cfg.innovations,
        cfg.n,
        cfg.t_len,
        cfg.seed,
        keep,
    )?;
    let rho_hat = lse(&panel)?.rho_hat;
    let base = output_path(stem, EmitFormat::Json).with_extension("");
    let sibling = |suffix: &str| {
        let mut name = base.file_name().unwrap_or_default().to_os_string();
        name.push(suffix);
        base.with_file_name(name)
    };
    let panel_file = sibling("_panel.csv");
    write_atomic(
        &panel_file,
        &render_csv(&panel_csv(&panel, cfg.simulate.format))?,
    )?;
    let innovations_file = if keep {
        let path = sibling("_innovations.csv");
        let table = CsvTable {
            header: (1..=cfg.t_len).map(|t| format!("e{t}")).collect(),
            rows: (0..panel.n())
                .map(|i| {
                    panel
                        .innovations(i)
                        .unwrap()
                        .iter()
                        .map(f64::to_string)
                        .collect()
                })
                .collect(),
        };
        write_atomic(&path, &render_csv(&table)?)?;
        Some(path)
    } else {
        None
    };
    Ok(SimulateReport {
        n: panel.n(),
        t_len: panel.t_len(),
        rho_used: panel.rho_used().expect("simulated panels record rho"),
        seed: cfg.seed,
        rho_hat,
        panel_file,
        panel_format: cfg.simulate.format,
        innovations_file,
        recursion_holds: keep.then(|| panel.recursion_holds()),
    })
}

fn infer(cfg: &RunConfig) -> CliResult<InferReport> {
    let opts = &cfg.infer;
    let panel = ingest_panel(opts.input.as_deref().expect("validated"), opts.format)?;
    let rho_hat = lse(&panel)?.rho_hat;
    let (n, t_len) = (panel.n(), panel.t_len());
    let interval =
        interval_from_estimate(rho_hat, opts.regime, n, t_len, opts.level, opts.params())?;
    let unit_root_test = if opts.unit_root_test && n >= 2 {
        Some(unit_root_test_from_estimate(
            rho_hat,
            n,
            t_len,
            opts.alternative,
        )?)
    } else {
        None
    };
    let conditional_intervals = if opts.all_regimes {
        RegimeKind::ALL
            .iter()
            .map(|&regime| {
                match interval_from_estimate(rho_hat, regime, n, t_len, opts.level, opts.params()) {
                    Ok(r) => ConditionalInterval {
                        regime,
                        result: Some(r),
                        error: None,
                    },
                    Err(e) => ConditionalInterval {
                        regime,
                        result: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(InferReport {
        n,
        t_len,
        warnings: panel.warnings().to_vec(),
        rho_hat,
        interval,
        unit_root_test,
        conditional_intervals,
    })
}

fn wiener(cfg: &RunConfig) -> CliResult<WienerReport> {
    let w = &cfg.wiener;
    let r = cfg.replications;
    let (draws, grid_steps, reference_var_first, reference_mean_second) = match w.kind {
        WienerKind::UnitRoot => (
            sample_unit_root_functionals(w.grid_steps, r, cfg.seed)?,
            Some(w.grid_steps),
            0.5,
            0.5,
        ),
        WienerKind::LocalToUnity => {
            let c = w.c.expect("validated");
            let v = local_to_unity_kernel(c) / (4.0 * c * c);
            (
                sample_local_to_unity_functionals(c, w.grid_steps, r, cfg.seed)?,
                Some(w.grid_steps),
                v,
                v,
            )
        }
        WienerKind::MildlyExplosive => {
            let c = w.c.expect("validated");
            (
                mildly_explosive_limit_sample(c, r, cfg.seed)?,
                None,
                1.0 / (4.0 * c * c),
                -0.5 / c,
            )
        }
    };
    let (first, second): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    Ok(WienerReport {
        kind: w.kind,
        c: w.c,
        grid_steps,
        replications: r,
        mean_first: mean(&first),
        var_first: variance(&first),
        var_first_se: variance_se(&first),
        mean_second: mean(&second),
        mean_second_se: mean_se(&second),
        reference_var_first,
        reference_mean_second,
        first,
        second,
    })
}
