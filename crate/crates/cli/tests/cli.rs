use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sunny-as2"));
    // keep the caller's environment from leaking into the runs
    for (key, _) in std::env::vars() {
        if key.starts_with("SUNNY_AS2_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn synth(dir: &Path, args: &[&str]) {
    run(bin().arg("synth").arg("--out").arg(dir).args(args));
}

fn model_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn worked_example_prediction() {
    let tmp = tempfile::tempdir().unwrap();
    let ex = tmp.path().join("ex");
    run(bin().args(["synth", "--example-one", "--out"]).arg(&ex));
    let predict = || {
        run(bin()
            .args(["predict", "--instance", "x", "--model"])
            .arg(ex.join("model.json"))
            .arg("--scenario")
            .arg(&ex))
        .stdout
    };
    let first = predict();
    assert_eq!(
        String::from_utf8(first.clone()).unwrap(),
        "{\"instance_id\":\"x\",\"schedule\":[[\"A4\",600],[\"A1\",600],[\"A3\",300],[\"A2\",300]]}\n"
    );
    assert_eq!(first, predict());
}

#[test]
fn untrained_model_uses_every_feature_and_the_default_k() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    synth(
        &s,
        &[
            "--instances",
            "66",
            "--algorithms",
            "3",
            "--informative",
            "3",
            "--noise",
            "2",
        ],
    );
    let model = tmp.path().join("m.json");
    run(bin()
        .args([
            "train",
            "--mode",
            "none",
            "--instance-limit",
            "100",
            "--scenario",
        ])
        .arg(&s)
        .arg("--out")
        .arg(&model));
    let doc = model_json(&model);
    assert_eq!(doc["features"].as_array().unwrap().len(), 5);
    // round(sqrt(66)) = 8
    assert_eq!(doc["k"], 8);
    assert_eq!(doc["training_instances"].as_array().unwrap().len(), 66);
}

#[test]
fn learned_model_respects_the_bounds_and_evaluates() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    synth(&s, &["--instances", "90", "--noise", "6"]);
    let model = tmp.path().join("m.json");
    run(bin()
        .args(["train", "--mode", "fk", "--inner-folds", "4", "--scenario"])
        .arg(&s)
        .arg("--out")
        .arg(&model));
    let doc = model_json(&model);
    let n = doc["features"].as_array().unwrap().len();
    assert!((1..=5).contains(&n));
    let k = doc["k"].as_u64().unwrap();
    assert!((1..=30).contains(&k));

    let ev = tmp.path().join("ev");
    let out = run(bin()
        .args(["evaluate", "--instance", "inst_00,inst_01", "--model"])
        .arg(&model)
        .arg("--scenario")
        .arg(&s)
        .arg("--out")
        .arg(&ev));
    assert!(String::from_utf8_lossy(&out.stdout).contains("closed gap"));
    let times = fs::read_to_string(ev.join("times.csv")).unwrap();
    assert_eq!(times.lines().count(), 4);
    assert!(times.starts_with("# seed=100\n"));

    let an = tmp.path().join("an");
    run(bin()
        .args(["--seed", "5", "analyze", "--model"])
        .arg(&model)
        .arg("--scenario")
        .arg(&s)
        .arg("--out")
        .arg(&an));
    let analysis: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(an.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(analysis["seed"], 5);
    assert!(fs::read_to_string(an.join("jaccard.csv"))
        .unwrap()
        .starts_with("# seed=5\n"));
    assert!(an.join("distribution.csv").exists());
}

#[test]
fn cv_is_repeatable_and_has_one_row_per_fold() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    synth(&s, &["--instances", "60", "--noise", "4"]);
    let none = tmp.path().join("none");
    run(bin()
        .args(["cv", "--mode", "none", "--scenario"])
        .arg(&s)
        .arg("--out")
        .arg(&none));
    let folds = fs::read_to_string(none.join("folds.csv")).unwrap();
    // seed comment, header, 5 x 5 folds
    assert_eq!(folds.lines().count(), 2 + 25);

    let mut dirs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        run(bin()
            .args([
                "cv",
                "--seed",
                "100",
                "--repetitions",
                "2",
                "--outer-folds",
                "3",
            ])
            .args(["--inner-folds", "3", "--k-max", "8", "--scenario"])
            .arg(&s)
            .arg("--out")
            .arg(&dir));
        dirs.push(dir);
    }
    for file in ["folds.csv", "outcomes.csv", "summary.json"] {
        assert_eq!(
            fs::read(dirs[0].join(file)).unwrap(),
            fs::read(dirs[1].join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn flags_override_environment_which_overrides_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    synth(&s, &["--instances", "40", "--noise", "2"]);
    let config = tmp.path().join("run.conf");
    fs::write(
        &config,
        "# quick run\nrepetitions = 1\nouter_folds = 3\nlearning_mode = none\n",
    )
    .unwrap();
    let rows = |extra: &[&str], env: Option<(&str, &str)>| {
        let out = tmp
            .path()
            .join(format!("out{}", extra.len() + env.map_or(0, |_| 10)));
        let mut cmd = bin();
        cmd.arg("--config").arg(&config).arg("cv").args(extra);
        if let Some((k, v)) = env {
            cmd.env(k, v);
        }
        run(cmd.arg("--scenario").arg(&s).arg("--out").arg(&out));
        fs::read_to_string(out.join("folds.csv"))
            .unwrap()
            .lines()
            .count()
            - 2
    };
    assert_eq!(rows(&[], None), 3);
    assert_eq!(rows(&[], Some(("SUNNY_AS2_REPETITIONS", "2"))), 6);
    assert_eq!(
        rows(
            &["--repetitions", "3"],
            Some(("SUNNY_AS2_REPETITIONS", "2"))
        ),
        9
    );
}

#[test]
fn compare_scores_the_toy_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s.csv");
    let t = tmp.path().join("t.csv");
    fs::write(&s, "instance_id,seconds\ni1,1\ni2,10\n").unwrap();
    fs::write(&t, "i1,2\ni2,10\n").unwrap();
    let out = run(bin()
        .args(["compare", "--cutoff", "10", "--delta", "0,10"])
        .arg(&s)
        .arg(&t));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# seed=100");
    assert_eq!(lines[1], "delta,selector,score");
    assert!(lines[2].starts_with("0,s,0.333333333333333"));
    assert!(lines[3].starts_with("0,t,0.166666666666666"));
    assert_eq!(&lines[4..], ["10,s,0.25", "10,t,0.25"]);

    let single = run(bin().args(["compare", "--cutoff", "10", "--sweep"]).arg(&s));
    let text = String::from_utf8(single.stdout).unwrap();
    assert!(text.lines().skip(2).all(|l| l.ends_with(",0")));
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let ex = tmp.path().join("ex");
    run(bin().args(["synth", "--example-one", "--out"]).arg(&ex));
    let out = bin()
        .args(["predict", "--instance", "nope", "--model"])
        .arg(ex.join("model.json"))
        .arg("--scenario")
        .arg(&ex)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));

    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    fs::write(&a, "i1,1\n").unwrap();
    fs::write(&b, "i2,1\n").unwrap();
    let out = bin()
        .args(["compare", "--cutoff", "10"])
        .arg(&a)
        .arg(&b)
        .output()
        .unwrap();
    assert!(!out.status.success());

    let bad = tmp.path().join("bad.conf");
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = bin()
        .arg("--config")
        .arg(&bad)
        .args(["cv", "--scenario"])
        .arg(&ex)
        .args(["--out"])
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}
