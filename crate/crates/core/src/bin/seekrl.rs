//! Operator CLI: dataset tagging, rollout collection, evaluation, toy
//! RL training, behavior statistics, and report emission.
//!
//! Exit codes: 0 success, 1 config error, 2 backend failure, 3 data
//! validation failure.

use clap::{Parser, Subcommand};
use seekrl::agent::Trajectory;
use seekrl::config::RunConfig;
use seekrl::dataset::{read_jsonl, read_records, write_jsonl, write_records, QARecord};
use seekrl::error::Error;
use seekrl::eval::report::write_report_artifacts;
use seekrl::eval::{behavior_stats, collect_rollouts, evaluate, EvalReport};
use seekrl::grpo::{train_toy, TrainingLog};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "seekrl", version, about = "search-and-reason agent harness")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides the configured one).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag record difficulty via four graded attempts per record.
    Tag {
        /// Records file (line-delimited JSON).
        #[arg(long)]
        input: PathBuf,
    },
    /// Collect n trajectories per record.
    Rollout {
        #[arg(long)]
        input: PathBuf,
        /// Rollouts per record.
        #[arg(short, default_value_t = 1)]
        n: usize,
    },
    /// Strict-grader evaluation with search-intensity metrics.
    Eval {
        #[arg(long)]
        input: PathBuf,
        /// Runs per record.
        #[arg(long, default_value_t = 3)]
        runs: usize,
    },
    /// Train the tabular policy on the toy seek environment.
    TrainToy {
        /// Override the configured number of optimization steps.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Count reasoning behaviors over dumped trajectories.
    Behaviors {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        records: PathBuf,
    },
    /// Emit plots and summary files from logs and reports.
    Report {
        /// Training log (line-delimited JSON).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Evaluation report (JSON).
        #[arg(long)]
        eval_report: Option<PathBuf>,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::Backend(_) | Error::Search(_) | Error::Grade(_) => 2,
        Error::Data(_) | Error::Json(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| {
        seekrl::error::ConfigError::new("--config", "a config file is required")
    })?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    Ok(config)
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, Error> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| seekrl::error::ConfigError::new("output_dir", "no output directory set"))?;
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = load_config(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| seekrl::error::ConfigError::new("workers", e.to_string()))?;
    let out = out_dir(&config)?;
    pool.install(|| dispatch(&cli.command, &config, &out))
}

fn dispatch(command: &Command, config: &RunConfig, out: &Path) -> Result<(), Error> {
    match command {
        Command::Tag { input } => cmd_tag(config, input, out),
        Command::Rollout { input, n } => cmd_rollout(config, input, *n, out),
        Command::Eval { input, runs } => cmd_eval(config, input, *runs, out),
        Command::TrainToy { steps } => cmd_train_toy(config, *steps, out),
        Command::Behaviors {
            trajectories,
            records,
        } => cmd_behaviors(config, trajectories, records, out),
        Command::Report { log, eval_report } => {
            cmd_report(log.as_deref(), eval_report.as_deref(), out)
        }
    }
}

fn cmd_tag(config: &RunConfig, input: &Path, out: &Path) -> Result<(), Error> {
    let records = read_records(input)?;
    let model = config.build_model()?;
    let search = config.build_search()?;
    let judge = config.build_judge()?;
    let outcome = seekrl::dataset::run_tagging(
        &records,
        &config.agent,
        model.as_ref(),
        search.as_ref(),
        judge.as_ref(),
    );
    print_warnings(&outcome.warnings);
    let tagged_path = out.join("tagged.jsonl");
    let audit_path = out.join("tag_audit.jsonl");
    write_records(&tagged_path, &outcome.records)?;
    write_jsonl(&audit_path, &outcome.audits)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &outcome.records {
        *counts
            .entry(r.difficulty.map(|d| d.as_str()).unwrap_or("untagged"))
            .or_default() += 1;
    }
    println!(
        "tagged {} records -> {} (easy {}, medium {}, hard {}, outlier {})",
        outcome.records.len(),
        tagged_path.display(),
        counts.get("easy").copied().unwrap_or(0),
        counts.get("medium").copied().unwrap_or(0),
        counts.get("hard").copied().unwrap_or(0),
        counts.get("outlier").copied().unwrap_or(0),
    );
    Ok(())
}

fn cmd_rollout(config: &RunConfig, input: &Path, n: usize, out: &Path) -> Result<(), Error> {
    let records = read_records(input)?;
    let model = config.build_model()?;
    let search = config.build_search()?;
    let trajectories =
        collect_rollouts(&records, model.as_ref(), search.as_ref(), &config.agent, n);
    let path = out.join("trajectories.jsonl");
    write_jsonl(&path, &trajectories)?;
    let answered = trajectories
        .iter()
        .filter(|t| t.final_answer.is_some())
        .count();
    println!(
        "collected {} trajectories over {} records -> {} ({} answered)",
        trajectories.len(),
        records.len(),
        path.display(),
        answered
    );
    Ok(())
}

fn cmd_eval(config: &RunConfig, input: &Path, runs: usize, out: &Path) -> Result<(), Error> {
    let records = read_records(input)?;
    let model = config.build_model()?;
    let search = config.build_search()?;
    let judge = config.build_judge()?;
    let run = evaluate(
        &records,
        model.as_ref(),
        search.as_ref(),
        &config.agent,
        judge.as_ref(),
        runs,
    );
    print_warnings(&run.warnings);
    let report_path = out.join("eval_report.json");
    std::fs::write(
        &report_path,
        serde_json::to_string_pretty(&run.report)? + "\n",
    )?;
    let csv_path = out.join("eval_records.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.write_record([
        "id",
        "run",
        "correct",
        "search_rounds",
        "search_queries",
        "terminated_by",
    ])
    .and_then(|_| {
        for o in &run.outcomes {
            w.write_record([
                o.id.clone(),
                o.run.to_string(),
                o.correct.to_string(),
                o.search_rounds.to_string(),
                o.search_queries.to_string(),
                o.terminated_by.clone(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)
    })
    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    println!(
        "evaluated {} records x {} runs: accuracy {:.4}, avg search rounds {:.2} -> {}",
        run.report.n,
        run.report.runs,
        run.report.accuracy,
        run.report.avg_search_rounds,
        report_path.display()
    );
    Ok(())
}

fn cmd_train_toy(config: &RunConfig, steps: Option<u64>, out: &Path) -> Result<(), Error> {
    let env = config.build_toy_env();
    let steps = steps.unwrap_or(config.toy_env.train_steps);
    let log = train_toy(&env, &config.grpo, steps, config.seed)?;
    let path = out.join("train_log.jsonl");
    log.write_jsonl(&path)?;
    let first = log.steps.first();
    let last = log.steps.last();
    println!(
        "trained {} steps on {} tasks: reward {:.3} -> {:.3}, search rate {:.3} -> {:.3} -> {}",
        steps,
        env.tasks.len(),
        first.map(|s| s.mean_reward).unwrap_or(0.0),
        last.map(|s| s.mean_reward).unwrap_or(0.0),
        first.map(|s| s.search_rate).unwrap_or(0.0),
        last.map(|s| s.search_rate).unwrap_or(0.0),
        path.display()
    );
    Ok(())
}

fn cmd_behaviors(
    config: &RunConfig,
    trajectories_path: &Path,
    records_path: &Path,
    out: &Path,
) -> Result<(), Error> {
    let trajectories: Vec<Trajectory> = read_jsonl(trajectories_path)?;
    let records = read_records(records_path)?;
    let by_id: HashMap<String, QARecord> = records
        .into_iter()
        .map(|r| (r.id.to_string(), r))
        .collect();
    let judge = config.build_judge()?;
    let (counts, warnings) = behavior_stats(&trajectories, &by_id, judge.as_ref())?;
    print_warnings(&warnings);
    let path = out.join("behavior_counts.json");
    std::fs::write(&path, serde_json::to_string_pretty(&counts)? + "\n")?;
    println!(
        "behavior means over {} trajectories: reflection {:.2}, conflict {:.2}, verification {:.2} -> {}",
        trajectories.len(),
        counts.reflection_correction,
        counts.conflict_resolution,
        counts.verification_denoising,
        path.display()
    );
    Ok(())
}

fn cmd_report(log: Option<&Path>, eval_report: Option<&Path>, out: &Path) -> Result<(), Error> {
    let training_log = match log {
        Some(path) => Some(TrainingLog::read_jsonl(path)?),
        None => None,
    };
    let report: Option<EvalReport> = match eval_report {
        Some(path) => Some(serde_json::from_str(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    if training_log.is_none() && report.is_none() {
        return Err(
            seekrl::error::ConfigError::new("report", "provide --log and/or --eval-report").into(),
        );
    }
    let written = write_report_artifacts(out, training_log.as_ref(), report.as_ref())?;
    println!(
        "wrote {} report artifacts under {}",
        written.len(),
        out.display()
    );
    Ok(())
}
