//! Optimal data/AN power split for hybrid ZF and MF as the RF-chain count grows.

use secmimo::optimizer::{optimize_phi, PhiSearchSpec};
use secmimo::{Scheme, SystemConfig};

fn main() -> secmimo::Result<()> {
    println!("{:>3} {:>6} {:>8} {:>10}", "L", "scheme", "phi*", "secrecy");
    for l in [9, 10, 12, 16, 24] {
        for s in [Scheme::Hzf, Scheme::Hmf] {
            let mut spec = PhiSearchSpec::new(SystemConfig::new(128, l, 3, 5), s);
            spec.refine = true;
            let opt = optimize_phi(&spec)?;
            println!(
                "{l:>3} {:>6} {:>8.4} {:>10.4}",
                s.as_str(),
                opt.phi_star,
                opt.secrecy_star
            );
        }
    }
    Ok(())
}
