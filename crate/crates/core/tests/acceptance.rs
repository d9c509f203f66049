//! Acceptance criteria, one pass/fail line each. Run with
//! `cargo test -p sunny-as2 --test acceptance`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sunny_as2::comparison::{delta_breakpoints, SelectorTimes};
use sunny_as2::metrics::{aggregate, borda_table, cmp_delta, simulate_schedule, vbs_par};
use sunny_as2::sunny::{allocate_and_order, select_subset_exhaustive};
use sunny_as2::synthetic::{self, SyntheticConfig};
use sunny_as2::training::{
    evaluate_model, learn_fk, run_nested_cv, ScoringContext, ScoringOptions,
};
use sunny_as2::{
    fixtures, load_scenario, report, Engine, FailureKind, LearnedModel, LearningMode, Scenario,
    ScenarioParts, Schedule, SunnyModel, SunnyParams, TrainingConfig,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 1. The worked example yields the documented schedule.
fn worked_example_schedule() -> Outcome {
    let s = fixtures::example_one();
    let hood = fixtures::example_one_neighbors();
    let start = Instant::now();
    let selected = select_subset_exhaustive(&s, &hood);
    let schedule = allocate_and_order(&s, &hood, &selected, 2, fixtures::EXAMPLE_ONE_CUTOFF)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = Schedule::from_named(
        &s,
        &[("A4", 600.0), ("A1", 600.0), ("A3", 300.0), ("A2", 300.0)],
    )
    .unwrap();
    check(schedule == expected, || format!("got {schedule}"))?;
    check(elapsed < Duration::from_millis(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{:?} in {elapsed:?}", schedule.to_named(&s)))
}

fn random_matrix(rng: &mut ChaCha8Rng) -> (Scenario, Vec<usize>) {
    let m = rng.gen_range(2..=4);
    let n = rng.gen_range(1..=8);
    let cutoff = 100.0;
    let mut runtime = Vec::new();
    let mut solved = Vec::new();
    for _ in 0..n {
        let mut rt = Vec::new();
        let mut ok = Vec::new();
        for _ in 0..m {
            if rng.gen::<f64>() < 0.3 {
                rt.push(cutoff);
                ok.push(false);
            } else {
                // a small integer grid makes runtime ties frequent
                rt.push(rng.gen_range(1..=20) as f64);
                ok.push(true);
            }
        }
        runtime.push(rt);
        solved.push(ok);
    }
    let s = Scenario::new(ScenarioParts {
        name: "oracle".into(),
        instance_ids: (0..n).map(|i| format!("i{i}")).collect(),
        algorithm_ids: (0..m).map(|a| format!("a{a}")).collect(),
        runtime,
        solved,
        feature_names: vec!["f".into()],
        features: (0..n).map(|i| vec![Some(i as f64)]).collect(),
        feature_cost: None,
        cutoff,
    })
    .unwrap();
    (s, (0..n).collect())
}

/// Brute force over all 2^m subsets: max coverage, then min size, then min runtime,
/// then the lexicographically smallest sorted index list.
fn oracle_subset(s: &Scenario, hood: &[usize]) -> Vec<usize> {
    let m = s.n_algorithms();
    let mut best: Option<(usize, usize, f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|a| mask & (1 << a) != 0).collect();
        let coverage = hood
            .iter()
            .filter(|&&i| subset.iter().any(|&a| s.is_solved(i, a)))
            .count();
        let runtime: f64 = hood
            .iter()
            .map(|&i| {
                let mut t = s.cutoff();
                for &a in &subset {
                    if s.is_solved(i, a) && s.runtime(i, a) < t {
                        t = s.runtime(i, a);
                    }
                }
                t
            })
            .sum();
        let key = (coverage, subset.len(), runtime, subset);
        let better = match &best {
            None => true,
            Some((c, n, r, sub)) => {
                key.0 > *c
                    || (key.0 == *c && key.1 < *n)
                    || (key.0 == *c && key.1 == *n && key.2 < *r)
                    || (key.0 == *c && key.1 == *n && key.2 == *r && key.3 < *sub)
            }
        };
        if better {
            best = Some(key);
        }
    }
    best.unwrap().3
}

/// 2. Exhaustive selection agrees with an independent brute force.
fn subset_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 2000;
    for t in 0..trials {
        let (s, hood) = random_matrix(&mut rng);
        let got = select_subset_exhaustive(&s, &hood);
        let want = oracle_subset(&s, &hood);
        check(got == want, || {
            format!("trial {t}: {got:?} vs oracle {want:?}")
        })?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{trials}/{trials} trials agree in {elapsed:?}"))
}

/// 3. cmp(1, 2) = 2/3 and cmp is complementary away from the cutoff.
fn cmp_fidelity() -> Outcome {
    let tau = 1200.0;
    let v = cmp_delta(1.0, 2.0, tau, 0.0);
    check((v - 2.0 / 3.0).abs() <= 1e-12, || format!("cmp(1,2) = {v}"))?;
    let w = cmp_delta(2.0, 1.0, tau, 0.0);
    check((w - 1.0 / 3.0).abs() <= 1e-12, || format!("cmp(2,1) = {w}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let t = rng.gen_range(0.0..tau);
        let u = rng.gen_range(0.0..tau);
        let delta = if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.0..tau)
        };
        let sum = cmp_delta(t, u, tau, delta) + cmp_delta(u, t, tau, delta);
        check((sum - 1.0).abs() <= 1e-12, || {
            format!("cmp({t},{u}) + reverse = {sum}")
        })?;
    }
    Ok(format!("cmp(1,2) = {v:.12}, 10000 reversal pairs sum to 1"))
}

/// 4. Simulating the worked schedule classifies every instance correctly.
fn simulation_taxonomy() -> Outcome {
    let s = fixtures::example_one();
    let schedule = Schedule::from_named(
        &s,
        &[("A4", 600.0), ("A1", 600.0), ("A3", 300.0), ("A2", 300.0)],
    )
    .unwrap();
    let outcomes: Vec<_> = (0..5)
        .map(|i| simulate_schedule(&schedule, &s, i, false).unwrap())
        .collect();
    let solved: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.solved)
        .map(|o| s.instance_ids()[o.instance].as_str())
        .collect();
    check(solved == ["x3", "x4", "x5"], || {
        format!("solved {solved:?}")
    })?;
    check(
        outcomes[1].failure_kind == Some(FailureKind::InsufficientTime),
        || format!("x2: {:?}", outcomes[1].failure_kind),
    )?;
    check(
        outcomes[0].failure_kind == Some(FailureKind::WrongSolvers),
        || format!("x1: {:?}", outcomes[0].failure_kind),
    )?;
    Ok("solved {x3,x4,x5}; x2 insufficient time; x1 wrong solvers".into())
}

/// 5. Closed gap never exceeds 1 and no selector beats the VBS.
fn closed_gap_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gaps = 0;
    for seed in 0..100u64 {
        let config = SyntheticConfig {
            unsolvable_fraction: rng.gen_range(0.0..0.2),
            dominance: rng.gen_range(0.5..1.0),
            missing_fraction: rng.gen_range(0.0..0.1),
            feature_costs: rng.gen_bool(0.5),
            ..SyntheticConfig::new(
                rng.gen_range(20..60),
                rng.gen_range(2..6),
                rng.gen_range(2..8),
                rng.gen_range(10.0..5000.0),
                seed,
            )
        };
        let s = synthetic::generate(&config).map_err(|e| e.to_string())?;
        let n = s.n_instances();
        let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|_| rng.gen_bool(0.6));
        if train.is_empty() || test.is_empty() {
            continue;
        }
        let Ok(transform) = sunny_as2::preprocess::FeatureTransform::fit(&s, &train) else {
            continue;
        };
        let pool = transform.kept_features().to_vec();
        let mut features: Vec<usize> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if features.is_empty() {
            features.push(pool[0]);
        }
        let params = SunnyParams {
            k: rng.gen_range(1..=train.len()),
            selected_features: features,
            backup: rng.gen_range(0..s.n_algorithms()),
            schedule_limit: rng.gen_range(1..=s.n_algorithms()),
            engine: if rng.gen_bool(0.5) {
                Engine::Greedy
            } else {
                Engine::Exhaustive
            },
        };
        let model = LearnedModel {
            scenario: s.name().into(),
            mode: LearningMode::None,
            model: SunnyModel::with_transform(&s, &train, transform, params)
                .map_err(|e| e.to_string())?,
            seed,
            seed_lineage: vec![],
            validation_score: None,
        };
        let charge = rng.gen_bool(0.5);
        let eval = evaluate_model(&s, &model, &test, 10.0, charge).map_err(|e| e.to_string())?;
        let m_vbs = vbs_par(&s, &test, 10.0);
        check(eval.scores.par >= m_vbs, || {
            format!("seed {seed}: PAR10 {} below VBS {m_vbs}", eval.scores.par)
        })?;
        let again = aggregate(&s, &eval.outcomes, 10.0);
        if let Some(g) = again.closed_gap {
            gaps += 1;
            check(g <= 1.0, || format!("seed {seed}: closed gap {g}"))?;
        }
    }
    Ok(format!(
        "100 scenarios, {gaps} defined closed gaps, all <= 1"
    ))
}

fn fk_vs_none() -> Result<(String, sunny_as2::training::ExperimentReport), String> {
    let s = synthetic::generate(&SyntheticConfig::planted_fixture()).map_err(|e| e.to_string())?;
    let fk = TrainingConfig::default();
    let none = TrainingConfig {
        learning_mode: LearningMode::None,
        ..TrainingConfig::default()
    };
    let report_fk = run_nested_cv(&s, &fk).map_err(|e| e.to_string())?;
    let report_none = run_nested_cv(&s, &none).map_err(|e| e.to_string())?;
    let gap_fk = report_fk.mean_closed_gap.ok_or("FK closed gap undefined")?;
    let gap_none = report_none
        .mean_closed_gap
        .ok_or("None closed gap undefined")?;
    let hits = report_fk
        .folds
        .iter()
        .filter(|f| f.features.iter().any(|n| synthetic::is_informative(n)))
        .count();
    check(report_fk.folds.len() == 25, || {
        format!("{} folds", report_fk.folds.len())
    })?;
    check(gap_fk > gap_none, || {
        format!("FK {gap_fk:.4} vs None {gap_none:.4}")
    })?;
    check(hits >= 20, || {
        format!("informative feature in {hits}/25 folds")
    })?;
    Ok((
        format!("closed gap FK {gap_fk:.4} > None {gap_none:.4}; informative feature in {hits}/25 folds"),
        report_fk,
    ))
}

/// 7. learn_fk never scores more than maxF * |pool| * maxK configurations.
fn greedy_bound() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..6u64 {
        let s = synthetic::generate(&SyntheticConfig {
            n_informative: 3,
            n_noise: 5 + seed as usize,
            ..SyntheticConfig::new(90, 3, 8, 100.0, seed)
        })
        .map_err(|e| e.to_string())?;
        let train: Vec<usize> = (0..90).filter(|i| i % 4 != 0).collect();
        let validation: Vec<usize> = (0..90).filter(|i| i % 4 == 0).collect();
        for (max_k, max_f) in [(5, 1), (10, 3), (20, 8)] {
            let ctx = ScoringContext::new(&s, &train, &validation, ScoringOptions::default())
                .map_err(|e| e.to_string())?;
            learn_fk(&ctx, max_k, max_f, None).map_err(|e| e.to_string())?;
            let bound = max_f * ctx.pool().len() * max_k;
            check(ctx.calls() <= bound, || {
                format!("seed {seed}: {} calls > bound {bound}", ctx.calls())
            })?;
            worst = worst.max(ctx.calls() as f64 / bound as f64);
        }
    }
    Ok(format!(
        "18 runs within bound (max {:.0}% of it)",
        worst * 100.0
    ))
}

/// 8. Identical configuration and seed give byte-identical reports.
fn determinism(first: &sunny_as2::training::ExperimentReport) -> Outcome {
    let s = synthetic::generate(&SyntheticConfig::planted_fixture()).map_err(|e| e.to_string())?;
    let second = run_nested_cv(&s, &first.config).map_err(|e| e.to_string())?;
    let render = |r: &sunny_as2::training::ExperimentReport| -> Result<Vec<String>, String> {
        Ok(vec![
            report::folds_csv(r).map_err(|e| e.to_string())?,
            report::outcomes_csv(&s, r).map_err(|e| e.to_string())?,
            report::summary_json(r).map_err(|e| e.to_string())?,
        ])
    };
    let a = render(first)?;
    let b = render(&second)?;
    for (name, (x, y)) in ["folds.csv", "outcomes.csv", "summary.json"]
        .iter()
        .zip(a.iter().zip(&b))
    {
        check(x == y, || format!("{name} differs"))?;
    }
    let bytes: usize = a.iter().map(String::len).sum();
    Ok(format!("two runs, {bytes} identical report bytes"))
}

/// Published counts of the runtime scenarios: algorithms, features, cutoff.
const KNOWN_SCENARIOS: [(&str, usize, usize, f64); 8] = [
    ("caren", 8, 95, 1200.0),
    ("mira", 5, 143, 7200.0),
    ("magnus", 19, 37, 1800.0),
    ("monty", 18, 37, 1800.0),
    ("quill", 24, 46, 1800.0),
    ("bado", 8, 86, 28800.0),
    ("svea", 31, 115, 4800.0),
    ("sora", 10, 483, 5000.0),
];

/// 9. Optional: a downloaded scenario loads with its published counts.
fn real_scenario() -> Option<Outcome> {
    let dir = std::env::var_os("ASLIB_SCENARIO_DIR")?;
    let dir = std::path::PathBuf::from(dir);
    let run = || -> Outcome {
        let s = load_scenario(&dir).map_err(|e| e.to_string())?;
        let counts = (s.n_algorithms(), s.n_features(), s.cutoff());
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        match KNOWN_SCENARIOS
            .iter()
            .find(|k| name.contains(k.0) || s.name().eq_ignore_ascii_case(k.0))
        {
            Some(&(k, a, f, t)) => {
                check(counts == (a, f, t), || {
                    format!("{k}: loaded {counts:?}, published ({a}, {f}, {t})")
                })?;
                Ok(format!("{k}: {a} algorithms, {f} features, {t} s"))
            }
            None => Ok(format!(
                "{}: {} algorithms, {} features, {} s (no published counts to compare)",
                s.name(),
                counts.0,
                counts.1,
                counts.2
            )),
        }
    };
    Some(run())
}

/// 10. Borda-δ scores only change at observed pairwise gaps; δ = τ saturates.
fn borda_sweep() -> Outcome {
    let times = fixtures::borda_toy();
    let tau = fixtures::BORDA_TOY_CUTOFF;
    let table = SelectorTimes {
        selectors: vec!["s1".into(), "s2".into(), "s3".into()],
        instances: vec!["i1".into(), "i2".into()],
        times: times.clone(),
    };
    let breaks = delta_breakpoints(&table, tau);
    check(breaks == [1.0, 8.0, 9.0, 200.0], || {
        format!("breakpoints {breaks:?}")
    })?;
    let at = |d: f64| borda_table(&times, tau, d).unwrap();
    // probe a fine grid plus both sides of every breakpoint
    let mut grid: BTreeSet<u64> = (0..=4 * tau as u64)
        .map(|q| (q as f64 / 4.0).to_bits())
        .collect();
    for &b in &breaks {
        for d in [b - 1e-9, b, b + 1e-9] {
            grid.insert(d.to_bits());
        }
    }
    let mut grid: Vec<f64> = grid.into_iter().map(f64::from_bits).collect();
    grid.sort_by(f64::total_cmp);
    let mut changes = 0;
    for w in grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if at(lo) != at(hi) {
            changes += 1;
            // the step must sit at a gap g with lo < g <= hi
            check(breaks.iter().any(|&g| lo < g && g <= hi), || {
                format!("score changes between {lo} and {hi}")
            })?;
        }
    }
    check(changes == breaks.len(), || {
        format!("{changes} changes for {} gaps", breaks.len())
    })?;
    for i in 0..2 {
        for (a, row_a) in times.iter().enumerate() {
            for (b, row_b) in times.iter().enumerate() {
                let (x, y) = (row_a[i], row_b[i]);
                if a != b && x < tau && y < tau {
                    let c = cmp_delta(x, y, tau, tau);
                    check(c == 0.5, || format!("cmp({x},{y}) at δ=τ is {c}"))?;
                }
            }
        }
    }
    Ok(format!(
        "{} probes, steps only at gaps {breaks:?}, saturated at δ = τ",
        grid.len()
    ))
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let wanted = |n: usize| filter.is_empty() || filter.iter().any(|f| f == &n.to_string());
    let mut failed = 0;
    let mut report =
        |n: usize, name: &str, outcome: Option<Outcome>, elapsed: Duration| match outcome {
            Some(Ok(detail)) => println!(
                "PASS [{n:>2}] {name}: {detail} ({:.2}s)",
                elapsed.as_secs_f64()
            ),
            Some(Err(detail)) => {
                failed += 1;
                println!(
                    "FAIL [{n:>2}] {name}: {detail} ({:.2}s)",
                    elapsed.as_secs_f64()
                );
            }
            None => {
                println!("SKIP [{n:>2}] {name}: set ASLIB_SCENARIO_DIR to a scenario directory")
            }
        };
    let timed = |f: &dyn Fn() -> Option<Outcome>| {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed())
    };

    type Criterion = (usize, &'static str, fn() -> Outcome);
    let simple: [Criterion; 6] = [
        (1, "worked example schedule", worked_example_schedule),
        (2, "exhaustive selection matches brute force", subset_oracle),
        (3, "cmp fidelity", cmp_fidelity),
        (4, "simulation failure taxonomy", simulation_taxonomy),
        (5, "closed gap bounded by 1", closed_gap_bounds),
        (7, "learn_fk evaluation bound", greedy_bound),
    ];
    for (n, name, f) in simple {
        if wanted(n) {
            let (out, t) = timed(&|| Some(f()));
            report(n, name, out, t);
        }
    }

    if wanted(6) || wanted(8) {
        let start = Instant::now();
        let result = fk_vs_none();
        let t6 = start.elapsed();
        let limit = Duration::from_secs(300);
        let six = match &result {
            Ok((detail, _)) if t6 <= limit => Ok(detail.clone()),
            Ok((detail, _)) => Err(format!("{detail}, but took {t6:?} > 5 min")),
            Err(e) => Err(e.clone()),
        };
        if wanted(6) {
            report(
                6,
                "learning beats no learning on the planted fixture",
                Some(six),
                t6,
            );
        }
        if wanted(8) {
            let start = Instant::now();
            let eight = match &result {
                Ok((_, first)) => determinism(first),
                Err(e) => Err(format!("first run failed: {e}")),
            };
            report(
                8,
                "cv reports are reproducible",
                Some(eight),
                start.elapsed(),
            );
        }
    }

    if wanted(9) {
        let (out, t) = timed(&real_scenario);
        report(9, "real scenario counts", out, t);
    }
    if wanted(10) {
        let (out, t) = timed(&|| Some(borda_sweep()));
        report(10, "Borda-δ sweep", out, t);
    }

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
