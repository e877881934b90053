use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use combandit_core::constrained_elim::{kappa_exact, DecisionSet};
use combandit_core::environments::{build_gap_instance, build_ucb_failure_instance, Instance};
use combandit_core::graph_elimination::log_width_param;
use combandit_core::harness::{
    load_sidecars, summarize, write_trace, Experiment, ExperimentConfig, InstanceRef, PolicySpec, RegretTrace,
};
use combandit_core::{Error, FeedbackGraph};

const OUT_DIR_ENV: &str = "COMBANDIT_OUT_DIR";

#[derive(Parser)]
#[command(name = "combandit", version, about = "Combinatorial bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (seed, horizon) cell and write one trace per cell.
    Run(RunArgs),
    /// Like `run`, then fit regret against the horizon grid.
    Sweep(RunArgs),
    /// Instance generators.
    Instance {
        #[command(subcommand)]
        command: InstanceCommand,
    },
    /// Feedback graph utilities.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Fit scaling models to the trace sidecars in a directory.
    Summarize {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// comb-elim, comb-ucb, hier-elim, constrained-elim or oracle.
    #[arg(long)]
    policy: Option<String>,
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Comma-separated horizons, e.g. `1000,4000,16000`.
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    /// Comma-separated seeds or a half-open range `a..b`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// UCB width `L` (comb-ucb only).
    #[arg(long)]
    ucb_width: Option<f64>,
    /// Decision list JSON (constrained-elim only).
    #[arg(long)]
    decisions: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    out: PathBuf,
    /// Keep every ⌈T/1000⌉-th round in written traces.
    #[arg(long)]
    subsample: bool,
    /// Also write the policy's per-round debug columns.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceKind {
    Gap,
    UcbFailure,
}

#[derive(Subcommand)]
enum InstanceCommand {
    /// Write a named construction as instance JSON.
    Make {
        #[arg(long, value_enum)]
        kind: InstanceKind,
        #[arg(long)]
        alpha: usize,
        #[arg(long = "budget", short = 'S')]
        budget: usize,
        #[arg(long = "arms", short = 'K')]
        arms: usize,
        /// Margin Δ* (gap).
        #[arg(long, default_value_t = 0.1)]
        gap: f64,
        /// 1-based optimal index u (gap); defaults to S.
        #[arg(long)]
        optimal_index: Option<usize>,
        /// Horizon T (ucb-failure).
        #[arg(long, default_value_t = 20000)]
        horizon: usize,
        /// Width L (ucb-failure); defaults to sqrt(ln(2KT/δ)).
        #[arg(long)]
        width_l: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Arm count, edge count, independence and dominating numbers.
    Stats {
        file: PathBuf,
        /// Also report kappa for this decision list.
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
}

fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a >= b {
            bail!("empty seed range {text}");
        }
        return Ok((a..b).collect());
    }
    text.split(',').map(|s| Ok(s.trim().parse()?)).collect()
}

fn build_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    // Paths given on the command line are relative to the working directory,
    // paths inside a config file to the file's directory.
    let cwd = std::env::current_dir()?;
    let decisions = args.decisions.as_ref().map(|p| cwd.join(p));
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => {
            let policy = args.policy.as_deref().ok_or_else(|| Error::Config("--policy or --config required".into()))?;
            let instance = args.instance.clone().ok_or_else(|| Error::Config("--instance or --config required".into()))?;
            let horizons = args.horizons.clone().ok_or_else(|| Error::Config("--horizons or --config required".into()))?;
            ExperimentConfig::new(
                PolicySpec::from_id(policy, args.ucb_width, decisions.clone())?,
                InstanceRef::Path(instance),
                horizons,
                vec![0],
            )
        }
    };
    if args.config.is_some() {
        if let Some(policy) = &args.policy {
            config.policy = PolicySpec::from_id(policy, args.ucb_width, decisions.clone())?;
        } else if let (PolicySpec::CombUcb { width_l }, Some(l)) = (&mut config.policy, args.ucb_width) {
            *width_l = Some(l);
        }
        if let Some(instance) = &args.instance {
            config.instance = InstanceRef::Path(cwd.join(instance));
        }
        if let Some(h) = &args.horizons {
            config.horizons = h.clone();
        }
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = parse_seeds(seeds).map_err(|e| Error::Config(format!("bad --seeds: {e}")))?;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    config.subsample |= args.subsample;
    config.trace |= args.trace;
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    Ok(config)
}

fn run(args: &RunArgs) -> anyhow::Result<(Vec<RegretTrace>, PathBuf)> {
    let config = build_config(args)?;
    let out = config.output.clone().filter(|_| args.out == Path::new("results")).unwrap_or_else(|| args.out.clone());
    let subsample = config.subsample;
    let experiment = Experiment::from_config(config)?;
    let traces = experiment.run_all()?;
    for trace in &traces {
        let path = write_trace(&out, trace, subsample)?;
        log::info!("wrote {}", path.display());
        say(&format!(
            "{} T={} seed={} final_regret={:.4}",
            trace.meta.policy,
            trace.meta.horizon,
            trace.meta.seed,
            trace.final_regret()
        ))?;
    }
    Ok((traces, out))
}

/// Prints a line; a closed pipe (e.g. `| head`) ends output quietly.
fn say(line: &str) -> anyhow::Result<()> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(json: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => say(json)?,
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            run(&args)?;
        }
        Command::Sweep(args) => {
            let (traces, out) = run(&args)?;
            let metas: Vec<_> = traces.into_iter().map(|t| t.meta).collect();
            let json = serde_json::to_string_pretty(&summarize(&metas))?;
            fs::write(out.join("summary.json"), &json)?;
            say(&json)?;
        }
        Command::Summarize { dir } => {
            let metas = load_sidecars(&dir)?;
            if metas.is_empty() {
                bail!(Error::Config(format!("no trace sidecars in {}", dir.display())));
            }
            say(&serde_json::to_string_pretty(&summarize(&metas))?)?;
        }
        Command::Graph { command: GraphCommand::Stats { file, decisions } } => {
            let graph = FeedbackGraph::load(&file)?;
            let mut value = serde_json::to_value(graph.stats())?;
            if let Some(path) = decisions {
                let set = DecisionSet::load(&path, graph.num_arms())?;
                value["kappa"] = match kappa_exact(&set, &graph) {
                    Ok(k) => k.to_string().into(),
                    Err(e) => format!("unavailable: {e}").into(),
                };
            }
            say(&serde_json::to_string_pretty(&value)?)?;
        }
        Command::Instance {
            command:
                InstanceCommand::Make { kind, alpha, budget, arms, gap, optimal_index, horizon, width_l, delta, out },
        } => {
            let inst = match kind {
                InstanceKind::Gap => build_gap_instance(alpha, budget, arms, gap, optimal_index.unwrap_or(budget))?,
                InstanceKind::UcbFailure => {
                    let l = match width_l {
                        Some(l) => l,
                        None => log_width_param(arms, horizon, delta)?.sqrt(),
                    };
                    build_ucb_failure_instance(budget, alpha, arms, horizon, l)?
                }
            };
            let json = serde_json::to_string_pretty(&Instance::Graph(inst).to_file_spec())?;
            emit(&json, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
