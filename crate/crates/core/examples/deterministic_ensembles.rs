//! Same seed, different thread counts: identical ensemble results.

use secmimo::{run_ensemble, EnsembleSpec, Scheme, SystemConfig};

fn main() -> secmimo::Result<()> {
    let spec = EnsembleSpec::new(SystemConfig::new(64, 10, 3, 5), Scheme::Ana, 500, 42);
    let one = run_ensemble(&spec.clone().with_workers(1))?;
    let four = run_ensemble(&spec.with_workers(4))?;
    println!(
        "trial 0 channel digest: {:016x}",
        one.trial0_digest.unwrap()
    );
    println!(
        "secrecy (1 worker):  {:?}",
        one.rate_report.mean_secrecy_mc()
    );
    println!(
        "secrecy (4 workers): {:?}",
        four.rate_report.mean_secrecy_mc()
    );
    assert_eq!(format!("{one:?}"), format!("{four:?}"));
    println!("identical");
    Ok(())
}
