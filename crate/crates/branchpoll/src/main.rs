use branchpoll::config::ExperimentSpec;
use branchpoll::experiment::run_experiment;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Branching-process and polling-system experiment runner.
///
/// The experiment (command, environment, replication settings) lives in the
/// TOML config; the flags override its seed, replicate count, worker count
/// and output directory.
#[derive(Parser, Debug)]
#[command(name = "branchpoll", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override mc.seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override mc.replicates.
    #[arg(long)]
    replicates: Option<u64>,

    /// Override mc.workers (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory (default: output.dir from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> branchpoll::Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&cli.config)?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(seed) = cli.seed {
        spec.mc.seed = seed;
    }
    if let Some(replicates) = cli.replicates {
        spec.mc.replicates = replicates;
    }
    if let Some(workers) = cli.workers {
        spec.mc.workers = workers;
    }
    spec.validate()?;
    if spec.mc.workers > 0 {
        // Results do not depend on the pool size; this only bounds it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.mc.workers)
            .build_global();
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| spec.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    run_experiment(&spec, &out_dir)
}
