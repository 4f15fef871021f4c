//! Phase-only analog beams: measured signal amplitude against `√(πNλ)/2`.

use secmimo::{run_ensemble, EnsembleSpec, Scheme, SystemConfig};

fn main() -> secmimo::Result<()> {
    let lambda = 0.75;
    println!("{:>5} {:>10} {:>10} {:>9}", "N", "mc", "oracle", "rel err");
    for n in [32, 64, 128, 256] {
        let cfg = SystemConfig::new(n, 10, 3, 5).with_lambda(lambda);
        let r = run_ensemble(&EnsembleSpec::new(cfg, Scheme::Ana, 2000, 1).with_eve(false))?;
        let mc = r.stats.iter().map(|s| s.signal_amp).sum::<f64>() / r.stats.len() as f64;
        let oracle = (std::f64::consts::PI * n as f64 * lambda).sqrt() / 2.0;
        println!(
            "{n:>5} {mc:>10.4} {oracle:>10.4} {:>9.4}",
            (mc - oracle).abs() / oracle
        );
    }
    Ok(())
}
