//! Borda-style comparison of selectors from per-instance time files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::borda_table;

/// Times of several selectors on a common, sorted set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorTimes {
    pub selectors: Vec<String>,
    pub instances: Vec<String>,
    /// `times[s][i]`: time of selector `s` on instance `i`.
    pub times: Vec<Vec<f64>>,
}

/// Reads a two-column CSV `instance_id, seconds`. A header row is recognized by a
/// non-numeric second field; `#` lines are comments.
pub fn read_times_csv(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(n + 1, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let seconds = match record[1].parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => t,
            Ok(_) => {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid time `{}`", &record[1]),
                })
            }
            Err(_) if n == 0 => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid time `{}`", &record[1]),
                })
            }
        };
        if out.insert(record[0].to_string(), seconds).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate instance `{}`", &record[0]),
            });
        }
    }
    Ok(out)
}

impl SelectorTimes {
    /// Combines named time tables; every table must cover the same instances.
    pub fn from_tables(tables: Vec<(String, BTreeMap<String, f64>)>) -> Result<Self> {
        let Some((_, first)) = tables.first() else {
            return Err(Error::InvalidArgument("no selectors to compare".into()));
        };
        let instances: Vec<String> = first.keys().cloned().collect();
        for (name, table) in &tables {
            if table.len() != instances.len() || !instances.iter().all(|i| table.contains_key(i)) {
                return Err(Error::InvalidArgument(format!(
                    "selector `{name}` does not cover the same instances as `{}`",
                    tables[0].0
                )));
            }
        }
        let mut selectors = Vec::with_capacity(tables.len());
        let mut times = Vec::with_capacity(tables.len());
        for (name, table) in tables {
            if selectors.contains(&name) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate selector `{name}`"
                )));
            }
            selectors.push(name);
            times.push(table.into_values().collect());
        }
        Ok(SelectorTimes {
            selectors,
            instances,
            times,
        })
    }

    /// Loads one file per selector, named by file stem.
    pub fn load(paths: &[impl AsRef<Path>]) -> Result<Self> {
        let tables = paths
            .iter()
            .map(|p| {
                let p = p.as_ref();
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string());
                let text = std::fs::read_to_string(p)?;
                Ok((name, read_times_csv(&text)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_tables(tables)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub delta: f64,
    pub selector: String,
    pub score: f64,
}

/// Normalized Borda-δ score of every selector for every δ, rows ordered by δ as given
/// and then by selector.
pub fn scoreboard(times: &SelectorTimes, cutoff: f64, deltas: &[f64]) -> Result<Vec<ScoreRow>> {
    let mut rows = Vec::with_capacity(deltas.len() * times.selectors.len());
    for &delta in deltas {
        let scores = borda_table(&times.times, cutoff, delta)?;
        rows.extend(
            times
                .selectors
                .iter()
                .zip(scores)
                .map(|(s, score)| ScoreRow {
                    delta,
                    selector: s.clone(),
                    score,
                }),
        );
    }
    Ok(rows)
}

/// Distinct absolute time differences between pairs of selectors that both finished
/// below the cutoff on the same instance, ascending: the only δ values at which a
/// Borda-δ score can change.
pub fn delta_breakpoints(times: &SelectorTimes, cutoff: f64) -> Vec<f64> {
    let mut gaps = Vec::new();
    for i in 0..times.instances.len() {
        for a in 0..times.times.len() {
            for b in a + 1..times.times.len() {
                let (x, y) = (times.times[a][i], times.times[b][i]);
                if x < cutoff && y < cutoff {
                    gaps.push((x - y).abs());
                }
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();
    gaps
}
