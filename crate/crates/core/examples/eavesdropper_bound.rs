//! Eavesdropper ergodic capacity against its closed-form upper bound as the
//! number of eavesdropper antennas grows.

use secmimo::{eve_capacity_bound, run_ensemble, EnsembleSpec, Scheme, SystemConfig};

fn main() -> secmimo::Result<()> {
    println!("{:>3} {:>10} {:>10}", "M", "mc", "bound");
    for m in 1..=8 {
        let cfg = SystemConfig::new(128, 12, 3, m);
        let r = run_ensemble(&EnsembleSpec::new(cfg.clone(), Scheme::Hzf, 1000, 3).with_eve(true))?;
        let mc = r.rate_report.mean_eve_mc().unwrap();
        println!("{m:>3} {mc:>10.4} {:>10.4}", eve_capacity_bound(&cfg)?);
    }
    Ok(())
}
