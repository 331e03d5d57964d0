use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdcon::RestartVariant;
use mdcon_cli::{run, Algorithm, HarnessError, OneOrMany, RunConfig};

#[derive(Parser)]
#[command(name = "solver", version, about = "Adaptive mirror descent for constrained convex problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration, or a sweep when several eps/algorithms are given.
    Run(RunArgs),
    /// List the built-in problems.
    Problems,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// JSON problem description instead of a built-in id.
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// md, restart_md or md_fixed_baseline; repeat for a comparison.
    #[arg(long = "algo")]
    algo: Vec<Algorithm>,
    /// Target accuracy; repeat for a sweep.
    #[arg(long)]
    eps: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output root (default: $MDCON_OUTPUT_DIR, else ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_variant)]
    restart_variant: Option<RestartVariant>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Record wall-clock times (outputs are then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

fn parse_variant(s: &str) -> Result<RestartVariant, String> {
    s.parse().map_err(|e: mdcon::Error| e.to_string())
}

fn build_config(args: RunArgs) -> Result<RunConfig, HarnessError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => {
            let eps = *args
                .eps
                .first()
                .ok_or_else(|| HarnessError::Config("--eps is required without --config".into()))?;
            RunConfig::new(String::new(), Algorithm::Md, eps)
        }
    };
    if args.config.is_none() {
        config.problem = None;
    }
    if let Some(p) = args.problem {
        config.problem = Some(p);
        config.problem_file = None;
    }
    if let Some(p) = args.problem_file {
        config.problem_file = Some(p);
    }
    if !args.algo.is_empty() {
        config.algorithm = OneOrMany::Many(args.algo);
    }
    if !args.eps.is_empty() {
        config.eps = OneOrMany::Many(args.eps);
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(o) = args.out {
        config.output_dir = Some(o);
    }
    if let Some(v) = args.restart_variant {
        config.restart_variant = v;
    }
    if let Some(m) = args.max_iters {
        config.max_iters = Some(m);
    }
    config.record_timing |= args.timing;
    Ok(config)
}

fn report_error(e: &HarnessError, root: Option<PathBuf>) -> ExitCode {
    let record = serde_json::to_string_pretty(&e.record()).expect("error records serialize");
    eprintln!("{record}");
    if let Some(root) = root {
        if std::fs::create_dir_all(&root).is_ok() {
            let _ = std::fs::write(root.join("error.json"), format!("{record}\n"));
        }
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Problems => {
            for p in mdcon::builtin_problems() {
                let opt = p
                    .known_opt
                    .as_ref()
                    .map(|k| format!("f* = {}", k.value))
                    .unwrap_or_default();
                println!("{:<24} dim {}  {}", p.id, p.dim(), opt);
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let config = match build_config(args) {
                Ok(c) => c,
                Err(e) => return report_error(&e, None),
            };
            let root = config.output_root();
            match run(&config) {
                Ok(outcome) => {
                    for r in &outcome.runs {
                        match &r.outcome {
                            Ok(s) => println!(
                                "{} eps={} n_calls={} effective_m={:.6} f_gap={} -> {}",
                                r.algorithm.as_str(),
                                r.eps,
                                s.n_calls,
                                s.effective_m,
                                s.f_gap.map_or("n/a".to_string(), |g| format!("{g:.3e}")),
                                r.dir.display()
                            ),
                            Err(e) => eprintln!(
                                "{} eps={} failed ({}): {}",
                                r.algorithm.as_str(),
                                r.eps,
                                e.kind,
                                e.message
                            ),
                        }
                    }
                    if let Some(c) = &outcome.comparison {
                        println!("comparison: {}", c.display());
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => report_error(&e, Some(root)),
            }
        }
    }
}
