use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use sunny_as2::analysis::{
    classify_unsolved, jaccard_neighborhoods, runtime_distribution, scenario_indicators,
    schedule_size_stats, ScenarioIndicators, ScheduleSizeStats, UnsolvedBreakdown,
};
use sunny_as2::comparison::{delta_breakpoints, scoreboard, SelectorTimes};
use sunny_as2::metrics::AggregateScores;
use sunny_as2::scenario::write_scenario;
use sunny_as2::synthetic::{generate, SyntheticConfig};
use sunny_as2::training::{
    evaluate_model, run_nested_cv, train_model, LearnedModel, ModelDocument,
};
use sunny_as2::{fixtures, load_scenario, report, Scenario, TrainingConfig};

fn load(dir: &Path) -> Result<Scenario> {
    load_scenario(dir).with_context(|| format!("loading scenario {}", dir.display()))
}

fn load_model(path: &Path, scenario: &Scenario) -> Result<(ModelDocument, LearnedModel)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    let doc = ModelDocument::from_json(&text)
        .with_context(|| format!("parsing model {}", path.display()))?;
    let model = LearnedModel::from_document(&doc, scenario)
        .with_context(|| format!("model {} does not fit the scenario", path.display()))?;
    Ok((doc, model))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn lookup(scenario: &Scenario, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| {
            scenario
                .instance_index(id)
                .with_context(|| format!("unknown instance `{id}`"))
        })
        .collect()
}

/// The requested instances, or every instance the model was not trained on.
fn held_out(scenario: &Scenario, doc: &ModelDocument, ids: &[String]) -> Result<Vec<usize>> {
    if !ids.is_empty() {
        return lookup(scenario, ids);
    }
    let trained: HashSet<&str> = doc.training_instances.iter().map(String::as_str).collect();
    let rest: Vec<usize> = (0..scenario.n_instances())
        .filter(|&i| !trained.contains(scenario.instance_ids()[i].as_str()))
        .collect();
    if rest.is_empty() {
        log::warn!("every instance was used for training; scoring all of them");
        return Ok((0..scenario.n_instances()).collect());
    }
    Ok(rest)
}

fn fmt_gap(gap: Option<f64>) -> String {
    gap.map_or_else(|| "undefined".into(), |g| format!("{g:.4}"))
}

pub fn train(config: &TrainingConfig, scenario_dir: &Path, out: &Path) -> Result<()> {
    let scenario = load(scenario_dir)?;
    let started = Instant::now();
    let all: Vec<usize> = (0..scenario.n_instances()).collect();
    let trained = train_model(&scenario, &all, config)?;
    if trained.timed_out {
        log::warn!("training hit the time cap; the model is the best found so far");
    }
    let doc = trained.model.to_document(&scenario);
    write_file(out, &(doc.to_json()? + "\n"))?;
    println!("features: {}", doc.features.join(", "));
    println!("k: {}", doc.k);
    println!("backup: {}", doc.backup);
    println!("training instances: {}", doc.training_instances.len());
    println!("elapsed: {:.2} s", started.elapsed().as_secs_f64());
    println!("model written to {}", out.display());
    Ok(())
}

pub fn predict(
    model: &Path,
    scenario_dir: &Path,
    ids: &[String],
    out: Option<&Path>,
) -> Result<()> {
    let scenario = load(scenario_dir)?;
    let (_, model) = load_model(model, &scenario)?;
    let instances = if ids.is_empty() {
        (0..scenario.n_instances()).collect()
    } else {
        lookup(&scenario, ids)?
    };
    let mut text = String::new();
    for i in instances {
        let schedule = model.make_schedule(&scenario, i)?;
        let line = serde_json::json!({
            "instance_id": scenario.instance_ids()[i],
            "schedule": schedule.to_json(&scenario),
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    emit(out, &text)
}

fn print_scores(scores: &AggregateScores) {
    println!("closed gap: {}", fmt_gap(scores.closed_gap));
    println!(
        "PAR10: {:.2} (SBS {} {:.2}, VBS {:.2})",
        scores.par, scores.sbs, scores.m_sbs, scores.m_vbs
    );
    println!("solved: {:.2}%", 100.0 * scores.solved_fraction);
}

pub fn evaluate(
    config: &TrainingConfig,
    model_path: &Path,
    scenario_dir: &Path,
    ids: &[String],
    out: &Path,
) -> Result<()> {
    let scenario = load(scenario_dir)?;
    let (doc, model) = load_model(model_path, &scenario)?;
    let instances = held_out(&scenario, &doc, ids)?;
    let eval = evaluate_model(
        &scenario,
        &model,
        &instances,
        config.penalty,
        config.charge_feature_cost,
    )?;
    let seed = config.seed;
    fs::create_dir_all(out)?;
    write_file(
        &out.join("evaluation.json"),
        &report::evaluation_json(&scenario, &eval.scores, seed)?,
    )?;
    write_file(
        &out.join("outcomes.csv"),
        &report::evaluation_outcomes_csv(
            &scenario,
            &eval.outcomes,
            &eval.schedules,
            config.penalty,
            seed,
        )?,
    )?;
    write_file(
        &out.join("times.csv"),
        &report::times_csv(&scenario, &eval.outcomes, seed)?,
    )?;
    println!("instances: {}", instances.len());
    print_scores(&eval.scores);
    Ok(())
}

pub fn cv(config: &TrainingConfig, scenario_dir: &Path, out: &Path) -> Result<()> {
    let scenario = load(scenario_dir)?;
    let started = Instant::now();
    let report = run_nested_cv(&scenario, config)?;
    report::write_cv_reports(out, &scenario, &report)?;
    println!(
        "{} folds ({} timed out), mean closed gap {}",
        report.folds.len(),
        report.timeouts,
        fmt_gap(report.mean_closed_gap)
    );
    println!(
        "mean PAR10 {:.2}, solved {:.2}%",
        report.mean_par10,
        100.0 * report.mean_solved_fraction
    );
    println!("elapsed: {:.2} s", started.elapsed().as_secs_f64());
    println!("reports written to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct Analysis<'a> {
    seed: u64,
    scenario: &'a str,
    instances: usize,
    jaccard_k: Option<usize>,
    mean_jaccard: Option<f64>,
    unsolved: UnsolvedBreakdown,
    schedule_size: ScheduleSizeStats,
    indicators: ScenarioIndicators,
}

pub fn analyze(
    config: &TrainingConfig,
    model_path: &Path,
    scenario_dir: &Path,
    ids: &[String],
    out: &Path,
) -> Result<()> {
    let scenario = load(scenario_dir)?;
    let (doc, model) = load_model(model_path, &scenario)?;
    let instances = held_out(&scenario, &doc, ids)?;
    let seed = config.seed;
    let eval = evaluate_model(
        &scenario,
        &model,
        &instances,
        config.penalty,
        config.charge_feature_cost,
    )?;
    fs::create_dir_all(out)?;

    let training = model.model.training();
    let jaccard_k = (training.len() > 1).then(|| model.k().min(training.len() - 1));
    let jaccard = match jaccard_k {
        Some(k) => {
            let r = jaccard_neighborhoods(&scenario, &model.model, training, k)?;
            write_file(
                &out.join("jaccard.csv"),
                &report::jaccard_csv(&scenario, &r.per_instance, seed)?,
            )?;
            Some(r.mean)
        }
        None => None,
    };
    let rows = runtime_distribution(&scenario, &eval.outcomes, config.penalty);
    write_file(
        &out.join("distribution.csv"),
        &report::distribution_csv(&rows, seed)?,
    )?;
    let analysis = Analysis {
        seed,
        scenario: scenario.name(),
        instances: instances.len(),
        jaccard_k,
        mean_jaccard: jaccard,
        unsolved: classify_unsolved(&eval.outcomes),
        schedule_size: schedule_size_stats(&eval.schedules)?,
        indicators: scenario_indicators(&scenario, &instances, config.penalty),
    };
    write_file(
        &out.join("analysis.json"),
        &(serde_json::to_string_pretty(&analysis)? + "\n"),
    )?;
    if let Some(j) = jaccard {
        println!("mean Jaccard index: {j:.4}");
    }
    println!(
        "unsolved: {} wrong solvers, {} insufficient time",
        analysis.unsolved.wrong_solvers, analysis.unsolved.insufficient_time
    );
    println!(
        "schedule size: {:.2} ± {:.2}",
        analysis.schedule_size.mean, analysis.schedule_size.std
    );
    Ok(())
}

pub fn compare(
    files: &[std::path::PathBuf],
    cutoff: f64,
    deltas: &[f64],
    sweep: bool,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        bail!("cutoff must be positive");
    }
    let times = SelectorTimes::load(files)?;
    let mut deltas = deltas.to_vec();
    if sweep {
        deltas.push(0.0);
        deltas.extend(delta_breakpoints(&times, cutoff));
        deltas.push(cutoff);
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let rows = scoreboard(&times, cutoff, &deltas)?;
    emit(out, &report::scoreboard_csv(&rows, seed)?)
}

pub fn synth(config: &SyntheticConfig, out: &Path) -> Result<()> {
    let scenario = generate(config)?;
    write_scenario(&scenario, out)?;
    println!(
        "{} instances, {} algorithms, {} features written to {}",
        scenario.n_instances(),
        scenario.n_algorithms(),
        scenario.n_features(),
        out.display()
    );
    Ok(())
}

pub fn synth_example_one(out: &Path) -> Result<()> {
    let scenario = fixtures::example_one();
    write_scenario(&scenario, out)?;
    let model = fixtures::example_one_model(&scenario)?;
    let path = out.join("model.json");
    write_file(&path, &(model.to_document(&scenario).to_json()? + "\n"))?;
    println!(
        "worked example written to {}; its model is {}",
        out.display(),
        path.display()
    );
    Ok(())
}
