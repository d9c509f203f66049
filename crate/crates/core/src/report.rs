//! Deterministic CSV and JSON renderings of experiment results.
//!
//! Every CSV starts with a `# seed=<seed>` comment line. Wall-clock times only appear
//! in the separate timings table so the other files are reproducible byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::DistributionRow;
use crate::comparison::ScoreRow;
use crate::error::Result;
use crate::metrics::{AggregateScores, SimulationOutcome};
use crate::scenario::Scenario;
use crate::sunny::Schedule;
use crate::training::ExperimentReport;

fn optional(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn csv_text<F>(seed: u64, header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut buf = format!("# seed={seed}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// One row per repetition and fold.
pub fn folds_csv(report: &ExperimentReport) -> Result<String> {
    csv_text(
        report.config.seed,
        &[
            "repetition",
            "fold",
            "status",
            "closed_gap",
            "par10",
            "par1",
            "solved_fraction",
            "m_sbs",
            "m_vbs",
            "sbs",
            "n_test",
            "n_prepared",
            "k",
            "features",
            "backup",
            "validation_score",
            "evaluations",
            "jaccard",
            "wrong_solvers",
            "insufficient_time",
            "schedule_size_mean",
            "schedule_size_std",
        ],
        |w| {
            for f in &report.folds {
                w.write_record([
                    f.repetition.to_string(),
                    f.fold.to_string(),
                    f.status.as_str().to_string(),
                    optional(f.closed_gap),
                    f.par10.to_string(),
                    f.par1.to_string(),
                    f.solved_fraction.to_string(),
                    f.m_sbs.to_string(),
                    f.m_vbs.to_string(),
                    f.sbs.clone(),
                    f.n_test.to_string(),
                    f.n_prepared.to_string(),
                    f.k.to_string(),
                    f.features.join(";"),
                    f.backup.clone(),
                    optional(f.validation_score),
                    f.evaluations.to_string(),
                    f.jaccard.to_string(),
                    f.unsolved.wrong_solvers.to_string(),
                    f.unsolved.insufficient_time.to_string(),
                    f.schedule_size.mean.to_string(),
                    f.schedule_size.std.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

fn outcome_fields(scenario: &Scenario, o: &SimulationOutcome, penalty: f64) -> [String; 6] {
    [
        scenario.instance_ids()[o.instance].clone(),
        o.solved.to_string(),
        o.effective_time.to_string(),
        o.par(scenario.cutoff(), penalty).to_string(),
        o.solving_algorithm
            .map_or_else(String::new, |a| scenario.algorithm_ids()[a].clone()),
        o.failure_kind.map_or("", |k| k.as_str()).to_string(),
    ]
}

const OUTCOME_HEADER: [&str; 6] = ["instance_id", "solved", "time", "par", "solver", "failure"];

/// Per-instance simulation results of every fold.
pub fn outcomes_csv(scenario: &Scenario, report: &ExperimentReport) -> Result<String> {
    let mut header = vec!["repetition", "fold"];
    header.extend(OUTCOME_HEADER);
    csv_text(report.config.seed, &header, |w| {
        for f in &report.folds {
            for o in &f.outcomes {
                let mut row = vec![f.repetition.to_string(), f.fold.to_string()];
                row.extend(outcome_fields(scenario, o, report.config.penalty));
                w.write_record(&row)?;
            }
        }
        Ok(())
    })
}

/// Wall-clock seconds per fold; the only non-reproducible output.
pub fn timings_csv(report: &ExperimentReport) -> Result<String> {
    csv_text(
        report.config.seed,
        &["repetition", "fold", "wall_seconds"],
        |w| {
            for f in &report.folds {
                w.write_record([
                    f.repetition.to_string(),
                    f.fold.to_string(),
                    f.wall_seconds.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    scenario: &'a str,
    config: &'a crate::training::TrainingConfig,
    n_folds: usize,
    timeouts: usize,
    mean_closed_gap: Option<f64>,
    repetition_closed_gap: &'a [Option<f64>],
    mean_par10: f64,
    mean_solved_fraction: f64,
    mean_jaccard: f64,
    repetition_jaccard: &'a [f64],
    unsolved: &'a crate::analysis::UnsolvedBreakdown,
    schedule_size: &'a crate::analysis::ScheduleSizeStats,
    indicators: &'a crate::analysis::ScenarioIndicators,
}

/// Aggregated diagnostics of the experiment.
pub fn summary_json(report: &ExperimentReport) -> Result<String> {
    let summary = Summary {
        seed: report.config.seed,
        scenario: &report.scenario,
        config: &report.config,
        n_folds: report.folds.len(),
        timeouts: report.timeouts,
        mean_closed_gap: report.mean_closed_gap,
        repetition_closed_gap: &report.repetition_closed_gap,
        mean_par10: report.mean_par10,
        mean_solved_fraction: report.mean_solved_fraction,
        mean_jaccard: report.mean_jaccard,
        repetition_jaccard: &report.repetition_jaccard,
        unsolved: &report.unsolved,
        schedule_size: &report.schedule_size,
        indicators: &report.indicators,
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}

/// Writes `folds.csv`, `outcomes.csv`, `summary.json` and `timings.csv` into `dir`.
pub fn write_cv_reports(
    dir: &Path,
    scenario: &Scenario,
    report: &ExperimentReport,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        ("folds.csv", folds_csv(report)?),
        ("outcomes.csv", outcomes_csv(scenario, report)?),
        ("summary.json", summary_json(report)?),
        ("timings.csv", timings_csv(report)?),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Simulation results of a held-out evaluation.
pub fn evaluation_outcomes_csv(
    scenario: &Scenario,
    outcomes: &[SimulationOutcome],
    schedules: &[Schedule],
    penalty: f64,
    seed: u64,
) -> Result<String> {
    let mut header = OUTCOME_HEADER.to_vec();
    header.push("schedule");
    csv_text(seed, &header, |w| {
        for (o, s) in outcomes.iter().zip(schedules) {
            let mut row = outcome_fields(scenario, o, penalty).to_vec();
            row.push(s.to_json(scenario).to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// `instance_id, seconds` pairs (τ when unsolved), the input format of the comparison.
pub fn times_csv(scenario: &Scenario, outcomes: &[SimulationOutcome], seed: u64) -> Result<String> {
    csv_text(seed, &["instance_id", "seconds"], |w| {
        for o in outcomes {
            let t = if o.solved {
                o.effective_time
            } else {
                scenario.cutoff()
            };
            w.write_record([scenario.instance_ids()[o.instance].clone(), t.to_string()])?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct EvaluationSummary<'a> {
    seed: u64,
    scenario: &'a str,
    scores: &'a AggregateScores,
}

pub fn evaluation_json(scenario: &Scenario, scores: &AggregateScores, seed: u64) -> Result<String> {
    let doc = EvaluationSummary {
        seed,
        scenario: scenario.name(),
        scores,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn distribution_csv(rows: &[DistributionRow], seed: u64) -> Result<String> {
    csv_text(
        seed,
        &[
            "rank",
            "sbs",
            "sbs_solved",
            "vbs",
            "vbs_solved",
            "selector",
            "selector_solved",
        ],
        |w| {
            for r in rows {
                w.write_record([
                    r.rank.to_string(),
                    r.sbs.to_string(),
                    r.sbs_solved.to_string(),
                    r.vbs.to_string(),
                    r.vbs_solved.to_string(),
                    r.selector.to_string(),
                    r.selector_solved.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

pub fn scoreboard_csv(rows: &[ScoreRow], seed: u64) -> Result<String> {
    csv_text(seed, &["delta", "selector", "score"], |w| {
        for r in rows {
            w.write_record([r.delta.to_string(), r.selector.clone(), r.score.to_string()])?;
        }
        Ok(())
    })
}

/// `instance_id, jaccard` rows.
pub fn jaccard_csv(
    scenario: &Scenario,
    per_instance: &[(usize, f64)],
    seed: u64,
) -> Result<String> {
    csv_text(seed, &["instance_id", "jaccard"], |w| {
        for &(i, j) in per_instance {
            w.write_record([scenario.instance_ids()[i].clone(), j.to_string()])?;
        }
        Ok(())
    })
}
