use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use currseq::curriculum::{curriculum_space_size, Metric};
use currseq::harness::{learn_task, Experiment, ExperimentReport, REPORT_FILE};
use currseq::learner::LearnerConfig;
use currseq::mdp::load_task_file;
use currseq::optimizers::Algorithm;
use currseq::Error;

const THREADS_VAR: &str = "CURRSEQ_THREADS";

#[derive(Parser)]
#[command(name = "currseq", version, about = "Search for task curricula that speed up reinforcement learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of curricula over n tasks with length at most L, including the empty one.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long = "max-len")]
        max_len: usize,
    },
    /// Learn a single map from scratch and print its greedy learning curve.
    Learn {
        map: PathBuf,
        /// Experiment config whose [learner] section to use.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "eval-interval", default_value_t = 10)]
        eval_interval: usize,
    },
    /// Evaluate one curriculum under the configured metric.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Task ids joined by `>`; empty for no curriculum.
        #[arg(long, allow_hyphen_values = true)]
        curriculum: String,
    },
    /// Run the configured optimizers and write the report.
    Optimize(RunArgs),
    /// Enumerate the whole curriculum space and write the report.
    Exhaustive(RunArgs),
    /// Render a saved report as a table.
    Report {
        /// A report.json file or the directory holding one.
        path: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_parser = parse_metric)]
    metric: Option<Metric>,
    /// Output directory; defaults to the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse::<Metric>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownAlgorithm(_) | Error::SpaceTooLarge { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl RunArgs {
    fn experiment(&self) -> Result<Experiment, Failure> {
        let mut exp = Experiment::load(&self.config)?;
        if let Some(seed) = self.seed {
            exp.config.seed = seed;
        }
        if let Some(trials) = self.trials {
            exp.config.trials = trials;
        }
        if let Some(metric) = self.metric {
            exp.config.metric.name = metric;
        }
        Ok(exp)
    }

    fn output_dir(&self, exp: &Experiment) -> PathBuf {
        self.out.clone().unwrap_or_else(|| exp.output_dir())
    }
}

#[derive(Serialize)]
struct EvaluationLine<'a> {
    curriculum: &'a str,
    metric: Metric,
    mean: f64,
    ci_lo: f64,
    ci_hi: f64,
    values: &'a [f64],
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Count { n, max_len } => {
            if max_len > n {
                return Err(Failure::Usage(format!(
                    "--max-len {max_len} exceeds --n {n}: a curriculum cannot repeat tasks"
                )));
            }
            println!("{}", curriculum_space_size(n, max_len)?);
        }
        Command::Learn {
            map,
            config,
            seed,
            eval_interval,
        } => {
            let learner = match config {
                Some(path) => Experiment::load(&path)?.config.learner,
                None => LearnerConfig::default(),
            };
            let task = load_task_file(&map)?;
            let summary = learn_task(&task, &learner, eval_interval, seed)?;
            println!("{}", to_json(&summary));
        }
        Command::Evaluate { run, curriculum } => {
            let exp = run.experiment()?;
            let problem = exp.build_problem()?;
            let evaluation = problem.evaluate_encoded(&curriculum)?;
            let line = EvaluationLine {
                curriculum: curriculum.trim(),
                metric: exp.config.metric.name,
                mean: evaluation.mean,
                ci_lo: evaluation.ci_lo,
                ci_hi: evaluation.ci_hi,
                values: &evaluation.values,
            };
            println!("{}", to_json(&line));
        }
        Command::Optimize(run) => optimize(&run, None)?,
        Command::Exhaustive(run) => optimize(&run, Some(Algorithm::Exhaustive))?,
        Command::Report { path } => {
            let file = if path.is_dir() { path.join(REPORT_FILE) } else { path };
            print!("{}", ExperimentReport::load(&file)?.render_table());
        }
    }
    Ok(())
}

fn optimize(args: &RunArgs, only: Option<Algorithm>) -> Result<(), Failure> {
    let mut exp = args.experiment()?;
    if let Some(alg) = only {
        exp.config.algorithms = vec![alg];
        exp.config.comparison_mode = false;
    }
    let out_dir = args.output_dir(&exp);
    let output = exp.run()?;
    output.write(&out_dir)?;
    print!("{}", output.report.render_table());
    eprintln!("wrote {}", display(&out_dir.join(REPORT_FILE)));
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
