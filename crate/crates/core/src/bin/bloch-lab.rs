use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bloch_lab::experiment::{cmd_classify, cmd_norm, cmd_oracle, cmd_sweep, cmd_verify_lemmas, ExperimentConfig};
use bloch_lab::holo::DEFAULT_DEGREE_CAP;
use bloch_lab::sampling::SamplingPlan;

/// Bloch-type norms and composition-operator criteria on the polydisk.
#[derive(Parser)]
#[command(name = "bloch-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate B^p norms (and Lipschitz norms for p < 1) of a spec.
    Norm(Common),
    /// Run the boundedness and compactness criteria on a self-map spec.
    Classify(Common),
    /// Check every invariant over the built-in corpus or the given specs.
    VerifyLemmas(Common),
    /// Compare primary values against finite-difference and uniform-grid oracles.
    Oracle(Common),
    /// Classify maps over a grid of exponents.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Function or map specification file (repeatable).
    #[arg(long)]
    spec: Vec<PathBuf>,
    /// Bloch exponent(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Target exponent(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Classification rule ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    theorems: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    degree_cap: usize,
    /// Attach oracle cross-checks to norm and classify.
    #[arg(long)]
    oracle: bool,
}

impl Common {
    fn config(self) -> ExperimentConfig {
        let d = SamplingPlan::default();
        let plan = SamplingPlan {
            levels: self.levels.unwrap_or(d.levels),
            angular_count: self.angles.unwrap_or(d.angular_count),
            max_rounds: self.rounds.unwrap_or(d.max_rounds),
            budget: self.budget.unwrap_or(d.budget),
            seed: self.seed,
            ..d
        };
        ExperimentConfig {
            specs: self.spec,
            p: self.p,
            q: self.q,
            plan,
            out_json: self.out_json,
            out_csv: self.out_csv,
            theorems: self.theorems,
            degree_cap: self.degree_cap,
            oracle: self.oracle,
            ..ExperimentConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("BLOCH_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    let (config, run): (ExperimentConfig, fn(&ExperimentConfig) -> _) = match cli.command {
        Command::Norm(c) => (c.config(), cmd_norm),
        Command::Classify(c) => (c.config(), cmd_classify),
        Command::VerifyLemmas(c) => (c.config(), |c| cmd_verify_lemmas(c, None)),
        Command::Oracle(c) => (c.config(), cmd_oracle),
        Command::Sweep(c) => (c.config(), cmd_sweep),
    };
    let output = match run(&config).and_then(|out| out.write(&config).map(|_| out)) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("bloch-lab: {e}");
            return ExitCode::from(2);
        }
    };
    if config.out_json.is_none() {
        println!("{}", serde_json::to_string_pretty(&output.json).expect("JSON value serializes"));
    }
    if output.failures > 0 {
        eprintln!("bloch-lab: {} failure(s)", output.failures);
    }
    ExitCode::from(output.exit_code() as u8)
}
