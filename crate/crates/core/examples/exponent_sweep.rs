//! The `sweep` command from the library, with CSV on stdout.
use bloch_lab::experiment::{cmd_sweep, ExperimentConfig};

fn main() -> bloch_lab::Result<()> {
    let config = ExperimentConfig { p: vec![0.3, 0.5, 0.7], q: vec![0.3, 0.5, 0.7], ..ExperimentConfig::default() };
    let out = cmd_sweep(&config)?;
    print!("{}", out.csv.unwrap_or_default());
    Ok(())
}
