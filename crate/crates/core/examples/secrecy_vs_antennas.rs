//! Ergodic secrecy rate of all five schemes versus the number of antennas.
//! Pass a trial count as the first argument (default 500).

use secmimo::experiment::{sweep_n, ExperimentConfig};

fn main() -> secmimo::Result<()> {
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/secrecy_vs_antennas.conf"))?;
    if let Some(t) = std::env::args().nth(1) {
        cfg.trials = t.parse().map_err(|_| secmimo::Error::InvalidArgument(t))?;
    } else {
        cfg.trials = 500;
    }
    print!("{}", sweep_n(&cfg)?.csv);
    Ok(())
}
