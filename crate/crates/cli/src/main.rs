use clap::{Parser, Subcommand};
use spatial_bench_cli::config::RunConfig;
use spatial_bench_cli::{commands, serve, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spatial-bench", version, about = "Spatial-reasoning puzzle benchmark")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset.
    Gen {
        /// Comma-separated task names, or `all`.
        #[arg(long)]
        task: Option<String>,
        /// Comma-separated tiers (easy, medium, hard), or `all`.
        #[arg(long)]
        tier: Option<String>,
        /// Instances per tier.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// standard, human-baseline or delta-token.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Evaluate a gateway over a dataset.
    Eval {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// mock:oracle, mock:random, mock:garbage or http.
        #[arg(long)]
        gateway: Option<String>,
        /// Comma-separated modalities (TQA, VQA, VTQA), or `all`.
        #[arg(long)]
        modality: Option<String>,
        /// Comma-separated parser chain, e.g. `deterministic,llm`.
        #[arg(long)]
        parser: Option<String>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        token_cap: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize training data.
    Synth {
        /// 1, 2 or all.
        #[arg(long)]
        stage: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset whose instances must not appear in the output.
        #[arg(long)]
        benchmark: Option<PathBuf>,
        /// Stage-1 samples per task.
        #[arg(long)]
        per_task: Option<usize>,
        /// Stage-2 trajectory count.
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Serve the human-play API.
    Serve {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        addr: Option<String>,
        /// Built web page directory.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long)]
        session_log: Option<PathBuf>,
    },
}

fn list(s: String) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).collect()
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

async fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Gen { task, tier, count, seed, out, profile } => {
            let g = &mut cfg.gen;
            set(&mut g.tasks, task.map(list));
            set(&mut g.tiers, tier.map(list));
            set(&mut g.count, count);
            set(&mut g.seed, seed);
            set(&mut g.out, out);
            set(&mut g.profile, profile);
            let manifest = commands::gen(g)?;
            println!("{}", manifest.display());
        }
        Command::Eval { dataset, gateway, modality, parser, parallelism, token_cap, seed, out } => {
            let e = &mut cfg.eval;
            set(&mut e.dataset, dataset);
            set(&mut e.gateway, gateway);
            set(&mut e.modalities, modality.map(list));
            set(&mut e.parsers, parser.map(list));
            set(&mut e.parallelism, parallelism);
            set(&mut e.token_cap, token_cap);
            set(&mut e.seed, seed);
            set(&mut e.out, out);
            let report = commands::eval(e).await?;
            for line in commands::eval_summary(&report) {
                println!("{line}");
            }
            println!("report written to {}", e.out.display());
        }
        Command::Synth { stage, out, seed, benchmark, per_task, trajectories } => {
            let s = &mut cfg.synth;
            set(&mut s.stage, stage);
            set(&mut s.out, out);
            set(&mut s.seed, seed);
            if benchmark.is_some() {
                s.benchmark = benchmark;
            }
            set(&mut s.stage1_per_task, per_task);
            set(&mut s.stage2_count, trajectories);
            for r in commands::synth(s)? {
                println!("{r}");
            }
        }
        Command::Serve { dataset, addr, static_dir, session_log } => {
            let s = &mut cfg.serve;
            set(&mut s.dataset, dataset);
            set(&mut s.addr, addr);
            if static_dir.is_some() {
                s.static_dir = static_dir;
            }
            set(&mut s.session_log, session_log);
            serve::run(&s.addr, s.dataset.clone(), s.static_dir.clone(), s.session_log.clone(), s.time_limit_ms)
                .await?;
        }
    }
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
