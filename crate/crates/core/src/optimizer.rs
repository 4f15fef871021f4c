//! One-dimensional search for the power split `φ*` maximizing the
//! closed-form secrecy bound.

use rayon::prelude::*;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::metrics::{closed_form_sinr, eve_capacity_bound, rate_bits};
use crate::precoder::Scheme;

#[derive(Debug, Clone)]
pub struct PhiSearchSpec {
    /// `phi` is ignored.
    pub cfg: SystemConfig,
    pub scheme: Scheme,
    pub grid_step: f64,
    /// Golden-section refinement within one grid step of the best point.
    pub refine: bool,
}

impl PhiSearchSpec {
    pub fn new(cfg: SystemConfig, scheme: Scheme) -> Self {
        Self {
            cfg,
            scheme,
            grid_step: 0.01,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiOptimum {
    pub phi_star: f64,
    pub secrecy_star: f64,
    /// `(φ, secrecy)` on the grid, in increasing `φ`.
    pub curve: Vec<(f64, f64)>,
    /// Every grid point gave zero secrecy.
    pub zero_secrecy: bool,
}

/// MT-averaged secrecy bound at a given `φ`.
pub fn secrecy_at(cfg: &SystemConfig, scheme: Scheme, phi: f64) -> Result<f64> {
    let mut c = cfg.clone();
    c.phi = phi;
    let eve = eve_capacity_bound(&c)?;
    let mut acc = 0.0;
    for k in 0..c.users {
        acc += (rate_bits(closed_form_sinr(scheme, &c, k)?) - eve).max(0.0);
    }
    Ok(acc / c.users as f64)
}

/// Grid points `step, 2·step, …` strictly below 1.
pub fn phi_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step + 1e-9).floor() as usize;
    (1..=n)
        .map(|i| i as f64 * step)
        .filter(|&p| p < 1.0 - 1e-12)
        .collect()
}

pub fn optimize_phi(spec: &PhiSearchSpec) -> Result<PhiOptimum> {
    if !(spec.grid_step > 0.0 && spec.grid_step <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "grid_step must be in (0, 0.1], got {}",
            spec.grid_step
        )));
    }
    let mut probe = spec.cfg.clone();
    probe.phi = 0.5;
    probe.check(true)?;

    let grid = phi_grid(spec.grid_step);
    let values = grid
        .par_iter()
        .map(|&p| secrecy_at(&spec.cfg, spec.scheme, p))
        .collect::<Result<Vec<_>>>()?;
    let curve: Vec<(f64, f64)> = grid.into_iter().zip(values).collect();

    let (mut phi_star, mut secrecy_star) = curve[0];
    for &(p, s) in &curve[1..] {
        if s > secrecy_star {
            phi_star = p;
            secrecy_star = s;
        }
    }
    let zero_secrecy = secrecy_star <= 0.0;
    if zero_secrecy {
        return Ok(PhiOptimum {
            phi_star,
            secrecy_star: 0.0,
            curve,
            zero_secrecy,
        });
    }

    if spec.refine {
        let lo = (phi_star - spec.grid_step).max(spec.grid_step * 1e-3);
        let hi = (phi_star + spec.grid_step).min(1.0 - spec.grid_step * 1e-3);
        let (p, s) = golden_max(|p| secrecy_at(&spec.cfg, spec.scheme, p), lo, hi, 1e-9)?;
        if s > secrecy_star {
            phi_star = p;
            secrecy_star = s;
        }
    }
    Ok(PhiOptimum {
        phi_star,
        secrecy_star,
        curve,
        zero_secrecy,
    })
}

fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(l: usize) -> SystemConfig {
        let mut cfg = SystemConfig::new(128, l, 3, 5);
        cfg.phi = 0.5;
        cfg
    }

    #[test]
    fn grid_excludes_endpoints() {
        let g = phi_grid(0.01);
        assert_eq!(g.len(), 99);
        assert_eq!(g[0], 0.01);
        assert!((g[98] - 0.99).abs() < 1e-12);
        assert_eq!(phi_grid(0.1).len(), 9);
    }

    #[test]
    fn no_eavesdropper_puts_optimum_at_grid_top() {
        let mut cfg = fig2(10);
        cfg.eve_antennas = 0;
        let opt = optimize_phi(&PhiSearchSpec::new(cfg, Scheme::Hzf)).unwrap();
        assert!((opt.phi_star - 0.99).abs() < 1e-12);
    }

    #[test]
    fn zf_allocates_more_data_power_than_mf() {
        for l in [9, 10, 12, 16] {
            let z = optimize_phi(&PhiSearchSpec::new(fig2(l), Scheme::Hzf)).unwrap();
            let m = optimize_phi(&PhiSearchSpec::new(fig2(l), Scheme::Hmf)).unwrap();
            assert!(z.phi_star > m.phi_star, "L={l}");
        }
    }

    #[test]
    fn refinement_never_loses() {
        let mut spec = PhiSearchSpec::new(fig2(12), Scheme::Hmf);
        let coarse = optimize_phi(&spec).unwrap();
        spec.refine = true;
        let fine = optimize_phi(&spec).unwrap();
        assert!(fine.secrecy_star >= coarse.secrecy_star);
        assert!((fine.phi_star - coarse.phi_star).abs() <= 0.01 + 1e-12);
    }

    #[test]
    fn bound_domain_is_enforced() {
        assert!(matches!(
            optimize_phi(&PhiSearchSpec::new(fig2(8), Scheme::Hzf)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_step_rejected() {
        let mut spec = PhiSearchSpec::new(fig2(10), Scheme::Hzf);
        spec.grid_step = 0.2;
        assert!(optimize_phi(&spec).is_err());
        spec.grid_step = 0.0;
        assert!(optimize_phi(&spec).is_err());
    }

    #[test]
    fn all_zero_curve_is_flagged() {
        let mut cfg = SystemConfig::new(16, 14, 3, 10);
        cfg.total_power = 0.01;
        let opt = optimize_phi(&PhiSearchSpec::new(cfg, Scheme::Hmf)).unwrap();
        assert!(opt.zero_secrecy);
        assert_eq!(opt.secrecy_star, 0.0);
        assert_eq!(opt.phi_star, 0.01);
    }
}
