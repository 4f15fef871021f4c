//! Constant-modulus artificial noise by alternating projections (INS).

use secmimo::channel::generate_channels;
use secmimo::precoder::build_analog_an_ins;
use secmimo::{InsOptions, RngStream, SystemConfig};

fn main() -> secmimo::Result<()> {
    let cfg = SystemConfig::new(128, 10, 3, 5);
    let opts = InsOptions::default();
    let mut iters = Vec::new();
    let mut worst: f64 = 0.0;
    for t in 0..200 {
        let mut rng = RngStream::new(5, t);
        let ch = generate_channels(&cfg, &mut rng)?;
        let (a, rep) = build_analog_an_ins(&ch.h_hat, cfg.an_streams(), opts, &mut rng)?;
        assert_eq!(a.ncols(), cfg.an_streams());
        iters.extend(rep.iterations.iter().copied());
        worst = worst.max(rep.worst_leakage());
    }
    iters.sort_unstable();
    println!("columns: {}", iters.len());
    println!(
        "iterations: median {}, max {}",
        iters[iters.len() / 2],
        iters[iters.len() - 1]
    );
    println!(
        "worst leakage |H^H a|^2: {worst:.3e} (target {:.0e})",
        opts.tol
    );
    Ok(())
}
