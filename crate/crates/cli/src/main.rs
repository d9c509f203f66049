use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use sunny_as2::TrainingConfig;

mod commands;

/// Algorithm scheduling for runtime algorithm-selection scenarios.
///
/// Every option can also be given through an environment variable named
/// `SUNNY_AS2_<OPTION>` (for example `SUNNY_AS2_JOBS=4`). Precedence, lowest first:
/// built-in defaults, the config file, environment variables, command-line flags.
#[derive(Parser, Debug)]
#[command(name = "sunny-as2", version)]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, env = "SUNNY_AS2_JOBS")]
    jobs: Option<usize>,

    /// Flat `key = value` configuration file with training settings.
    #[arg(long, global = true, env = "SUNNY_AS2_CONFIG")]
    config: Option<PathBuf>,

    /// Base seed of every random choice; written into every report.
    #[arg(long, global = true, env = "SUNNY_AS2_SEED")]
    seed: Option<u64>,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Training settings shared by the commands that learn or score models.
#[derive(Args, Debug, Default)]
struct TrainingArgs {
    /// What to learn: fk, f, k or none.
    #[arg(long, env = "SUNNY_AS2_MODE")]
    mode: Option<String>,
    /// How validation folds are formed: rank, random or stratified.
    #[arg(long, env = "SUNNY_AS2_SPLIT")]
    split: Option<String>,
    #[arg(long, env = "SUNNY_AS2_INSTANCE_LIMIT")]
    instance_limit: Option<usize>,
    /// Maximum number of selected features.
    #[arg(long, env = "SUNNY_AS2_FEATURE_LIMIT")]
    feature_limit: Option<usize>,
    /// Largest neighborhood size tried.
    #[arg(long, env = "SUNNY_AS2_K_MAX")]
    k_max: Option<usize>,
    /// Maximum number of solvers in a greedy schedule.
    #[arg(long, env = "SUNNY_AS2_SCHEDULE_LIMIT")]
    schedule_limit: Option<usize>,
    /// Training time cap in seconds.
    #[arg(long, env = "SUNNY_AS2_TIME_CAP")]
    time_cap: Option<f64>,
    /// Subset selection while learning: greedy or exhaustive.
    #[arg(long, env = "SUNNY_AS2_ENGINE_TRAIN")]
    engine_train: Option<String>,
    /// Subset selection of the final model: greedy or exhaustive.
    #[arg(long, env = "SUNNY_AS2_ENGINE_TEST")]
    engine_test: Option<String>,
    #[arg(long, env = "SUNNY_AS2_OUTER_FOLDS")]
    outer_folds: Option<usize>,
    #[arg(long, env = "SUNNY_AS2_INNER_FOLDS")]
    inner_folds: Option<usize>,
    #[arg(long, env = "SUNNY_AS2_REPETITIONS")]
    repetitions: Option<usize>,
    /// PAR penalty factor.
    #[arg(long, env = "SUNNY_AS2_PENALTY")]
    penalty: Option<f64>,
    /// Whether feature computation time counts against the timeout.
    #[arg(long, env = "SUNNY_AS2_CHARGE_FEATURE_COST")]
    charge_feature_cost: Option<bool>,
}

impl TrainingArgs {
    fn apply(&self, config: &mut TrainingConfig) -> sunny_as2::Result<()> {
        let pairs: [(&str, Option<String>); 14] = [
            ("learning_mode", self.mode.clone()),
            ("split_mode", self.split.clone()),
            ("instance_limit", self.instance_limit.map(|v| v.to_string())),
            ("feature_limit", self.feature_limit.map(|v| v.to_string())),
            ("k_max", self.k_max.map(|v| v.to_string())),
            ("schedule_limit", self.schedule_limit.map(|v| v.to_string())),
            ("time_cap", self.time_cap.map(|v| v.to_string())),
            ("engine_train", self.engine_train.clone()),
            ("engine_test", self.engine_test.clone()),
            ("outer_folds", self.outer_folds.map(|v| v.to_string())),
            ("inner_folds", self.inner_folds.map(|v| v.to_string())),
            ("repetitions", self.repetitions.map(|v| v.to_string())),
            ("penalty", self.penalty.map(|v| v.to_string())),
            (
                "charge_feature_cost",
                self.charge_feature_cost.map(|v| v.to_string()),
            ),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        Ok(())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a model on every instance of a scenario and save it as JSON.
    Train {
        #[arg(long, env = "SUNNY_AS2_SCENARIO")]
        scenario: PathBuf,
        /// Model file to write.
        #[arg(long, short, default_value = "model.json")]
        out: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Print one schedule per instance as newline-delimited JSON.
    Predict {
        #[arg(long, env = "SUNNY_AS2_MODEL")]
        model: PathBuf,
        #[arg(long, env = "SUNNY_AS2_SCENARIO")]
        scenario: PathBuf,
        /// Instance ids to schedule; all instances when omitted.
        #[arg(long = "instance", value_delimiter = ',')]
        instances: Vec<String>,
        /// Write to this file instead of standard output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score a saved model on held-out instances.
    Evaluate {
        #[arg(long, env = "SUNNY_AS2_MODEL")]
        model: PathBuf,
        #[arg(long, env = "SUNNY_AS2_SCENARIO")]
        scenario: PathBuf,
        /// Instance ids to score; defaults to every instance the model was not trained on.
        #[arg(long = "instance", value_delimiter = ',')]
        instances: Vec<String>,
        /// Directory for evaluation.json, outcomes.csv and times.csv.
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Run the repeated nested cross-validation and write its reports.
    Cv {
        #[arg(long, env = "SUNNY_AS2_SCENARIO")]
        scenario: PathBuf,
        /// Directory for folds.csv, outcomes.csv, summary.json and timings.csv.
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Neighborhood overlap, unsolved breakdown and runtime distribution of a model.
    Analyze {
        #[arg(long, env = "SUNNY_AS2_MODEL")]
        model: PathBuf,
        #[arg(long, env = "SUNNY_AS2_SCENARIO")]
        scenario: PathBuf,
        /// Instance ids to schedule; defaults to every instance the model was not trained on.
        #[arg(long = "instance", value_delimiter = ',')]
        instances: Vec<String>,
        /// Directory for analysis.json, jaccard.csv and distribution.csv.
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Borda scoreboard of several selectors from `instance_id, seconds` files.
    Compare {
        /// One time file per selector, named after the file stem.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Timeout in seconds; times at or above it count as unsolved.
        #[arg(long, env = "SUNNY_AS2_CUTOFF")]
        cutoff: f64,
        /// Tie thresholds in seconds.
        #[arg(long = "delta", value_delimiter = ',', default_value = "0")]
        deltas: Vec<f64>,
        /// Also score at every threshold where a score can change, plus the cutoff.
        #[arg(long)]
        sweep: bool,
        /// Write to this file instead of standard output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic scenario in ASlib layout.
    Synth {
        /// Scenario directory to create.
        #[arg(long, short)]
        out: PathBuf,
        /// The worked five-instance example plus a matching model.json.
        #[arg(long, conflicts_with = "planted")]
        example_one: bool,
        /// The desk-scale fixture: 200 instances, 4 algorithms, 5 + 20 features.
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 4)]
        algorithms: usize,
        #[arg(long, default_value_t = 5)]
        informative: usize,
        #[arg(long, default_value_t = 20)]
        noise: usize,
        #[arg(long, default_value_t = 1800.0)]
        cutoff: f64,
        /// Probability that a non-dominant algorithm times out on a cluster instance.
        #[arg(long, default_value_t = 0.95)]
        dominance: f64,
        /// Fraction of instances no algorithm solves.
        #[arg(long, default_value_t = 0.0)]
        unsolvable: f64,
        /// Jitter around cluster centroids.
        #[arg(long, default_value_t = 0.05)]
        spread: f64,
        /// Fraction of missing feature values.
        #[arg(long, default_value_t = 0.0)]
        missing: f64,
        /// Record feature computation costs.
        #[arg(long)]
        feature_costs: bool,
    },
}

fn resolve_config(cli: &Cli, training: Option<&TrainingArgs>) -> Result<TrainingConfig> {
    let mut config = TrainingConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        config
            .apply_text(&text)
            .with_context(|| format!("in config file {}", path.display()))?;
    }
    if let Some(t) = training {
        t.apply(&mut config)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Train {
            scenario,
            out,
            training,
        } => commands::train(&resolve_config(&cli, Some(training))?, scenario, out),
        Command::Predict {
            model,
            scenario,
            instances,
            out,
        } => commands::predict(model, scenario, instances, out.as_deref()),
        Command::Evaluate {
            model,
            scenario,
            instances,
            out,
            training,
        } => commands::evaluate(
            &resolve_config(&cli, Some(training))?,
            model,
            scenario,
            instances,
            out,
        ),
        Command::Cv {
            scenario,
            out,
            training,
        } => commands::cv(&resolve_config(&cli, Some(training))?, scenario, out),
        Command::Analyze {
            model,
            scenario,
            instances,
            out,
            training,
        } => commands::analyze(
            &resolve_config(&cli, Some(training))?,
            model,
            scenario,
            instances,
            out,
        ),
        Command::Compare {
            files,
            cutoff,
            deltas,
            sweep,
            out,
        } => {
            let seed = resolve_config(&cli, None)?.seed;
            commands::compare(files, *cutoff, deltas, *sweep, seed, out.as_deref())
        }
        Command::Synth {
            out,
            example_one,
            planted,
            instances,
            algorithms,
            informative,
            noise,
            cutoff,
            dominance,
            unsolvable,
            spread,
            missing,
            feature_costs,
        } => {
            if *example_one {
                return commands::synth_example_one(out);
            }
            let seed = resolve_config(&cli, None)?.seed;
            let config = if *planted {
                sunny_as2::synthetic::SyntheticConfig {
                    seed,
                    ..sunny_as2::synthetic::SyntheticConfig::planted_fixture()
                }
            } else {
                sunny_as2::synthetic::SyntheticConfig {
                    n_instances: *instances,
                    n_algorithms: *algorithms,
                    n_informative: *informative,
                    n_noise: *noise,
                    cutoff: *cutoff,
                    dominance: *dominance,
                    unsolvable_fraction: *unsolvable,
                    cluster_spread: *spread,
                    missing_fraction: *missing,
                    feature_costs: *feature_costs,
                    seed,
                }
            };
            commands::synth(&config, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SUNNY_AS2_LOG", level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
