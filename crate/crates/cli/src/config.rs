//! Run configuration: built-in defaults, a TOML file on top, then dotted
//! `key=value` overrides.

use std::path::{Path, PathBuf};

use panel_ar::inference::{Alternative, RegimeParams};
use panel_ar::{InnovationSpec, PanelFormat, RegimeKind, RegimeSpec, Standardization, Statistic};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Mc,
    BerryEsseen,
    VarianceCurve,
    Infer,
    Wiener,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Mc => "mc",
            Command::BerryEsseen => "berry_esseen",
            Command::VarianceCurve => "variance_curve",
            Command::Infer => "infer",
            Command::Wiener => "wiener",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EmitFormat {
    #[value(name = "json")]
    Json,
    #[value(name = "csv_stats")]
    CsvStats,
    #[value(name = "csv_quantiles")]
    CsvQuantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    /// Layout of the written panel.
    pub format: PanelFormat,
    /// Also write the innovations (wide layout).
    pub keep_innovations: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            format: PanelFormat::LongCsv,
            keep_innovations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerryEsseenOptions {
    pub n_grid: Vec<usize>,
}

impl Default for BerryEsseenOptions {
    fn default() -> Self {
        Self {
            n_grid: vec![25, 50, 100, 200, 400],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceCurveOptions {
    pub t_grid: Vec<usize>,
}

impl Default for VarianceCurveOptions {
    fn default() -> Self {
        Self {
            t_grid: vec![50, 100, 200, 400],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferOptions {
    pub input: Option<PathBuf>,
    pub format: PanelFormat,
    /// Declared regime; never inferred from the data.
    pub regime: RegimeKind,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub level: f64,
    pub alternative: Alternative,
    pub unit_root_test: bool,
    /// Also report the interval under every other regime, each conditional on
    /// that regime being the true one.
    pub all_regimes: bool,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self {
            input: None,
            format: PanelFormat::LongCsv,
            regime: RegimeKind::UnitRoot,
            c: None,
            alpha: None,
            level: 0.95,
            alternative: Alternative::TwoSided,
            unit_root_test: true,
            all_regimes: false,
        }
    }
}

impl InferOptions {
    pub fn params(&self) -> Option<RegimeParams> {
        (self.c.is_some() || self.alpha.is_some()).then_some(RegimeParams {
            c: self.c,
            alpha: self.alpha,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WienerKind {
    UnitRoot,
    LocalToUnity,
    MildlyExplosive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WienerOptions {
    pub kind: WienerKind,
    pub c: Option<f64>,
    pub grid_steps: usize,
}

impl Default for WienerOptions {
    fn default() -> Self {
        Self {
            kind: WienerKind::UnitRoot,
            c: None,
            grid_steps: 10_000,
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub n: usize,
    pub t_len: usize,
    pub replications: usize,
    pub regime: RegimeSpec,
    pub innovations: InnovationSpec,
    pub standardization: Standardization,
    pub statistic: Statistic,
    /// Output stem; files are `<stem>.json`, `<stem>_stats.csv`, ...
    pub output: Option<PathBuf>,
    pub emit: Vec<EmitFormat>,
    pub simulate: SimulateOptions,
    pub berry_esseen: BerryEsseenOptions,
    pub variance_curve: VarianceCurveOptions,
    pub infer: InferOptions,
    pub wiener: WienerOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 42,
            n: 200,
            t_len: 100,
            replications: 2000,
            regime: RegimeSpec::UnitRoot,
            innovations: InnovationSpec::StandardNormal,
            standardization: Standardization::ExactFiniteT,
            statistic: Statistic::ScaledError,
            output: None,
            emit: vec![EmitFormat::Json],
            simulate: SimulateOptions::default(),
            berry_esseen: BerryEsseenOptions::default(),
            variance_curve: VarianceCurveOptions::default(),
            infer: InferOptions::default(),
            wiener: WienerOptions::default(),
        }
    }
}

fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back to
/// a bare string so `regime.kind=stationary` works unquoted.
fn parse_override_value(raw: &str) -> Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| Value::String(raw.to_owned())),
        Err(_) => Value::String(raw.to_owned()),
    }
}

/// Applies one `a.b.c=value` override.
pub fn apply_override(tree: &mut Table, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::ConfigParse(format!(
            "override {assignment:?} is not of the form key=value"
        ))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::UnknownKey(path.to_owned()));
    }
    let (last, parents) = keys.split_last().unwrap();
    let mut node = tree;
    for key in parents {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::UnknownKey(path.to_owned())),
        };
    }
    node.insert(last.to_string(), parse_override_value(raw));
    Ok(())
}

/// First key of `input` that does not survive a round trip through the typed
/// config. Catches fields that serde accepts and drops, such as parameters
/// attached to a regime kind that takes none.
fn dropped_key(input: &Table, kept: &Table, prefix: &str) -> Option<String> {
    input.iter().find_map(|(key, value)| {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (value, kept.get(key)) {
            (_, None) => Some(path),
            (Value::Table(a), Some(Value::Table(b))) => dropped_key(a, b, &path),
            _ => None,
        }
    })
}

fn from_tree(tree: Table) -> CliResult<RunConfig> {
    let cfg = Value::Table(tree.clone())
        .try_into::<RunConfig>()
        .map_err(|e| {
            let msg = e.to_string();
            if msg.contains("unknown field") {
                CliError::UnknownKey(msg.trim().to_owned())
            } else {
                CliError::ConfigParse(msg.trim().to_owned())
            }
        })?;
    let kept = Table::try_from(&cfg).map_err(|e| CliError::ConfigParse(e.to_string()))?;
    match dropped_key(&tree, &kept, "") {
        Some(key) => Err(CliError::UnknownKey(key)),
        None => Ok(cfg),
    }
}

/// Defaults, then the file, then the overrides in order.
pub fn resolve_config(file: Option<&Path>, overrides: &[String]) -> CliResult<RunConfig> {
    let mut tree =
        Table::try_from(RunConfig::default()).map_err(|e| CliError::ConfigParse(e.to_string()))?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let parsed: Table = text.parse().map_err(|e: toml::de::Error| {
            CliError::ConfigParse(format!("{}: {}", path.display(), e.message()))
        })?;
        merge(&mut tree, parsed);
    }
    for assignment in overrides {
        apply_override(&mut tree, assignment)?;
    }
    from_tree(tree)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }
}
