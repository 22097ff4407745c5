//! CSV ingestion of balanced panels.
//!
//! Long format: one observation per row with columns `i` (series id ≥ 1),
//! `t` (period ≥ 0) and `y`. Wide format: one series per row, `T+1` values
//! starting at `t = 0`. A header is detected by a non-numeric first row.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::PanelData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelFormat {
    LongCsv,
    WideCsv,
}

pub fn ingest_panel(path: &Path, format: PanelFormat) -> Result<PanelData> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(file, format)
}

pub fn ingest_reader<R: Read>(reader: R, format: PanelFormat) -> Result<PanelData> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_owned).collect::<Vec<_>>()));
    }
    let header = match rows.first() {
        Some((_, fields)) if fields.iter().any(|f| f.parse::<f64>().is_err()) => {
            Some(rows.remove(0).1)
        }
        _ => None,
    };
    match format {
        PanelFormat::LongCsv => parse_long(header, rows),
        PanelFormat::WideCsv => parse_wide(header, rows),
    }
}

fn malformed(line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        line,
        reason: reason.into(),
    }
}

fn parse_value(line: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| malformed(line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("non-finite value: {field:?}")));
    }
    Ok(v)
}

fn parse_long(header: Option<Vec<String>>, rows: Vec<(u64, Vec<String>)>) -> Result<PanelData> {
    let (ci, ct, cy) = match &header {
        Some(h) => {
            let find = |name: &str| {
                h.iter()
                    .position(|c| c.eq_ignore_ascii_case(name))
                    .ok_or_else(|| malformed(1, format!("header lacks column {name:?}")))
            };
            (find("i")?, find("t")?, find("y")?)
        }
        None => (0, 1, 2),
    };
    let width = ci.max(ct).max(cy) + 1;

    let mut series: BTreeMap<u64, BTreeMap<u64, f64>> = BTreeMap::new();
    for (line, fields) in rows {
        if fields.len() < width {
            return Err(malformed(
                line,
                format!("expected at least {width} fields, got {}", fields.len()),
            ));
        }
        let id: u64 = fields[ci].parse().map_err(|_| {
            malformed(
                line,
                format!("series id must be an integer, got {:?}", fields[ci]),
            )
        })?;
        if id == 0 {
            return Err(malformed(line, "series id must be >= 1"));
        }
        let t: u64 = fields[ct].parse().map_err(|_| {
            malformed(
                line,
                format!(
                    "period must be a non-negative integer, got {:?}",
                    fields[ct]
                ),
            )
        })?;
        let y = parse_value(line, &fields[cy])?;
        if series.entry(id).or_default().insert(t, y).is_some() {
            return Err(malformed(
                line,
                format!("duplicate observation (i={id}, t={t})"),
            ));
        }
    }
    if series.is_empty() {
        return Err(Error::UnbalancedPanel("no observations".into()));
    }

    let first_t = *series.values().next().unwrap().keys().next().unwrap();
    let last_t = *series.values().next().unwrap().keys().next_back().unwrap();
    for (id, obs) in &series {
        let lo = *obs.keys().next().unwrap();
        let hi = *obs.keys().next_back().unwrap();
        if lo != first_t || hi != last_t {
            return Err(Error::UnbalancedPanel(format!(
                "series {id} covers t={lo}..={hi}, expected t={first_t}..={last_t}"
            )));
        }
        if obs.len() as u64 != hi - lo + 1 {
            let missing = (lo..=hi).find(|t| !obs.contains_key(t)).unwrap();
            return Err(Error::UnbalancedPanel(format!(
                "series {id} has no observation at t={missing}"
            )));
        }
    }
    if first_t > 1 {
        return Err(Error::UnbalancedPanel(format!(
            "periods must start at t=0 (or t=1), found t={first_t}"
        )));
    }
    let prepend = first_t == 1;
    let t_len = last_t as usize;

    let n = series.len();
    let mut y = Vec::with_capacity(n * (t_len + 1));
    for (id, obs) in &series {
        if prepend {
            y.push(0.0);
        } else if obs[&0] != 0.0 {
            return Err(Error::NonzeroInitial {
                series: *id as usize,
                value: obs[&0],
            });
        }
        y.extend(obs.values());
    }
    let mut panel = PanelData::from_observations(n, t_len, y)?;
    if prepend {
        panel.push_warning("no observations at t=0; prepended y_i0 = 0 for every series".into());
    }
    Ok(panel)
}

/// Trailing integer of a header label such as `t1`, `y_0` or `3`.
fn label_period(label: &str) -> Option<u64> {
    let digits: String = label
        .chars()
        .rev()
        .take_while(char::is_ascii_digit)
        .collect();
    digits.chars().rev().collect::<String>().parse().ok()
}

fn parse_wide(header: Option<Vec<String>>, rows: Vec<(u64, Vec<String>)>) -> Result<PanelData> {
    if rows.is_empty() {
        return Err(Error::UnbalancedPanel("no observations".into()));
    }
    let prepend = header
        .as_ref()
        .and_then(|h| h.first())
        .and_then(|l| label_period(l))
        .is_some_and(|p| p == 1);
    let width = rows[0].1.len();
    if let Some(h) = &header {
        if h.len() != width {
            return Err(Error::UnbalancedPanel(format!(
                "header has {} columns but first row has {width}",
                h.len()
            )));
        }
    }
    let t_len = if prepend {
        width
    } else {
        width.saturating_sub(1)
    };
    if t_len == 0 {
        return Err(Error::UnbalancedPanel(
            "rows need at least two values (t=0 and t=1)".into(),
        ));
    }
    let mut y = Vec::with_capacity(rows.len() * (t_len + 1));
    for (row, (line, fields)) in rows.iter().enumerate() {
        if fields.len() != width {
            return Err(Error::UnbalancedPanel(format!(
                "row at line {line} has {} values, expected {width}",
                fields.len()
            )));
        }
        let start = y.len();
        if prepend {
            y.push(0.0);
        }
        for f in fields {
            y.push(parse_value(*line, f)?);
        }
        if y[start] != 0.0 {
            return Err(Error::NonzeroInitial {
                series: row + 1,
                value: y[start],
            });
        }
    }
    let mut panel = PanelData::from_observations(rows.len(), t_len, y)?;
    if prepend {
        panel.push_warning("header starts at t=1; prepended y_i0 = 0 for every series".into());
    }
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long(s: &str) -> Result<PanelData> {
        ingest_reader(s.as_bytes(), PanelFormat::LongCsv)
    }

    fn wide(s: &str) -> Result<PanelData> {
        ingest_reader(s.as_bytes(), PanelFormat::WideCsv)
    }

    #[test]
    fn long_basic() {
        let p = long("i,t,y\n1,0,0\n1,1,0.5\n1,2,1.0\n").unwrap();
        assert_eq!((p.n(), p.t_len()), (1, 2));
        assert_eq!(p.series(0), &[0.0, 0.5, 1.0]);
        assert!(p.rho_used().is_none() && !p.has_innovations());
        // Unordered rows and no header.
        let q = long("1,2,1.0\n1,0,0\n1,1,0.5\n").unwrap();
        assert_eq!(p.observations(), q.observations());
    }

    #[test]
    fn long_columns_by_header_name() {
        let p = long("y,i,t\n0,1,0\n2,1,1\n0,2,0\n3,2,1\n").unwrap();
        assert_eq!(p.series(1), &[0.0, 3.0]);
    }

    #[test]
    fn wide_basic() {
        let p = wide("0,1,2,3\n0,-1,-2,-3\n").unwrap();
        assert_eq!((p.n(), p.t_len()), (2, 3));
        assert_eq!(p.series(1), &[0.0, -1.0, -2.0, -3.0]);
        let h = wide("y0,y1,y2\n0,1,2\n").unwrap();
        assert_eq!((h.n(), h.t_len()), (1, 2));
    }

    #[test]
    fn missing_period_is_unbalanced() {
        let err = long("i,t,y\n1,0,0\n1,1,1\n1,2,2\n2,0,0\n2,2,5\n").unwrap_err();
        assert!(matches!(err, Error::UnbalancedPanel(_)), "{err}");
        let err = long("1,0,0\n1,1,1\n2,0,0\n").unwrap_err();
        assert!(matches!(err, Error::UnbalancedPanel(_)));
        assert!(matches!(
            wide("0,1,2\n0,1\n"),
            Err(Error::UnbalancedPanel(_))
        ));
    }

    #[test]
    fn missing_initial_column_is_prepended_with_warning() {
        let p = long("i,t,y\n1,1,0.5\n1,2,1.0\n2,1,-1\n2,2,0\n").unwrap();
        assert_eq!((p.n(), p.t_len()), (2, 2));
        assert_eq!(p.series(0), &[0.0, 0.5, 1.0]);
        assert_eq!(p.warnings().len(), 1);
        let w = wide("t1,t2\n0.5,1.0\n").unwrap();
        assert_eq!(w.series(0), &[0.0, 0.5, 1.0]);
        assert_eq!(w.warnings().len(), 1);
    }

    #[test]
    fn nonzero_initial_rejected() {
        assert!(matches!(
            long("1,0,0.1\n1,1,1\n"),
            Err(Error::NonzeroInitial { series: 1, .. })
        ));
        assert!(matches!(
            wide("0,1\n2,1\n"),
            Err(Error::NonzeroInitial { series: 2, .. })
        ));
    }

    #[test]
    fn malformed_rows_report_line() {
        match long("i,t,y\n1,0,0\n1,1,abc\n") {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            long("1,0,0\n1,0,0\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(long("0,0,0\n"), Err(Error::MalformedRow { .. })));
        assert!(matches!(long("1,-1,0\n"), Err(Error::MalformedRow { .. })));
        assert!(matches!(
            wide("0,1\n0,x\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
    }
}
