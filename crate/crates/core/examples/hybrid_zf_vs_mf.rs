//! Hybrid ZF and MF baseband precoders over the same RF stage: ensemble
//! terms next to their closed-form approximations.

use std::f64::consts::PI;

use secmimo::{closed_form_sinr, run_ensemble, EnsembleSpec, Scheme, SystemConfig};

fn main() -> secmimo::Result<()> {
    let lam = 0.75;
    let cfg = SystemConfig::new(128, 10, 3, 5).with_lambda(lam);
    let l3 = cfg.an_streams() as f64;
    for s in [Scheme::Hzf, Scheme::Hmf] {
        let r = run_ensemble(&EnsembleSpec::new(cfg.clone(), s, 3000, 2).with_eve(false))?;
        let t = &r.stats[0];
        let (gain_cf, int_cf) = match s {
            Scheme::Hzf => ((PI / 4.0 * lam * 127.0).sqrt(), 1.0 - lam),
            _ => ((PI / 4.0 * lam * 127.0 + 10.0).sqrt(), 2.0),
        };
        println!("{s}");
        println!(
            "  |h^H F w_k|      mc {:.4}  closed form {gain_cf:.4}",
            t.signal_amp
        );
        println!(
            "  |h^H F w_l|^2    mc {:.4}  closed form {int_cf:.4}",
            t.interference[0]
        );
        println!(
            "  AN leakage       mc {:.4}  closed form {:.4}",
            t.an_leakage,
            l3 * (1.0 - lam)
        );
        println!(
            "  SINR             mc {:.4}  closed form {:.4}",
            r.rate_report.users[0].sinr_mc,
            closed_form_sinr(s, &cfg, 0)?
        );
    }
    Ok(())
}
