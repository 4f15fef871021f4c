use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use secmimo::experiment::{self, CsvOutput, ExperimentConfig};
use secmimo::Error;

#[derive(Parser)]
#[command(
    name = "secmimo",
    version,
    about = "Secure massive-MIMO precoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Secrecy and rates versus antenna count (Monte Carlo and closed form).
    SweepN(Common),
    /// Closed-form secrecy over the power split for each RF-chain count.
    SweepPhi(Common),
    /// Optimal power split per scheme and RF-chain count.
    OptimizePhi(Common),
    /// Invariant and agreement checks; exits 3 if any check fails.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> secmimo::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        Ok(c)
    }

    fn emit(&self, text: &str) -> secmimo::Result<()> {
        match &self.out {
            Some(p) => experiment::write_atomic(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn finish(common: &Common, out: CsvOutput) -> secmimo::Result<()> {
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    common.emit(&out.csv)?;
    for s in &out.summary {
        if common.out.is_some() {
            println!("{s}");
        } else {
            eprintln!("{s}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> secmimo::Result<u8> {
    match cli.cmd {
        Cmd::SweepN(c) => finish(&c, experiment::sweep_n(&c.load()?)?)?,
        Cmd::SweepPhi(c) => finish(&c, experiment::sweep_phi(&c.load()?)?)?,
        Cmd::OptimizePhi(c) => finish(&c, experiment::optimize(&c.load()?)?)?,
        Cmd::Validate(c) => {
            let rep = experiment::validate(&c.load()?)?;
            let text = rep.text();
            if c.out.is_some() {
                c.emit(&text)?;
            }
            print!("{text}");
            if !rep.passed() {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Error::exit_code(&e) as u8)
        }
    }
}
