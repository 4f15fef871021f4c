use secmimo::channel::generate_channels;
use secmimo::{run_ensemble, EnsembleSpec, RngStream, Scheme, SystemConfig};

#[test]
fn channel_second_moments_follow_lambda() {
    let mut cfg = SystemConfig::new(64, 10, 3, 5).with_lambda(0.6);
    cfg.eve_path_loss = 0.5;
    let (mut hh, mut ee, mut gg, mut cross) = (0.0, 0.0, 0.0, 0.0);
    let trials = 400;
    for t in 0..trials {
        let ch = generate_channels(&cfg, &mut RngStream::new(9, t)).unwrap();
        hh += ch.h_hat.norm_squared();
        ee += ch.error.norm_squared();
        gg += ch.g_eve.norm_squared();
        cross += ch
            .h_hat
            .adjoint()
            .component_mul(&ch.error.adjoint())
            .iter()
            .map(|z| z.re)
            .sum::<f64>();
    }
    let n = trials as f64;
    assert!((hh / n / (64.0 * 3.0) - 0.6).abs() < 0.01);
    assert!((ee / n / (64.0 * 3.0) - 0.4).abs() < 0.01);
    assert!((gg / n / (64.0 * 5.0) - 0.5).abs() < 0.01);
    assert!((cross / n / (64.0 * 3.0)).abs() < 0.01);
}

#[test]
fn full_digital_terms_match_closed_forms() {
    let lam = 0.75;
    let cfg = SystemConfig::new(256, 10, 3, 5).with_lambda(lam);
    let fzf = run_ensemble(&EnsembleSpec::new(cfg.clone(), Scheme::Fzf, 1500, 4).with_eve(false))
        .unwrap();
    let fmf = run_ensemble(&EnsembleSpec::new(cfg, Scheme::Fmf, 1500, 4).with_eve(false)).unwrap();
    for k in 0..3 {
        let g = fzf.stats[k].signal_amp;
        assert!((g * g / (lam * 253.0) - 1.0).abs() < 0.03, "FZF gain {g}");
        let i = fzf.stats[k].total_interference();
        assert!(
            (i / (2.0 * (1.0 - lam)) - 1.0).abs() < 0.08,
            "FZF interference {i}"
        );
        let m = fmf.stats[k].signal_amp;
        assert!((m * m / (lam * 256.0) - 1.0).abs() < 0.03, "FMF gain {m}");
        assert!((fmf.stats[k].total_interference() / 2.0 - 1.0).abs() < 0.08);
        assert!((fmf.stats[k].an_leakage / (7.0 * (1.0 - lam)) - 1.0).abs() < 0.08);
    }
}

#[test]
fn neglected_variance_shrinks_with_antennas() {
    use secmimo::montecarlo::estimate_footnote_term;
    let small = SystemConfig::new(32, 10, 3, 5);
    let large = SystemConfig::new(256, 10, 3, 5);
    for s in [Scheme::Ana, Scheme::Hzf] {
        let a = estimate_footnote_term(&EnsembleSpec::new(small.clone(), s, 800, 5)).unwrap();
        let b = estimate_footnote_term(&EnsembleSpec::new(large.clone(), s, 800, 5)).unwrap();
        assert!(b[0] < a[0], "{s}: {} vs {}", a[0], b[0]);
        assert!(b[0] < 0.05, "{s}: {}", b[0]);
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = SystemConfig::new(64, 10, 3, 5);
    for s in Scheme::ALL {
        let spec = EnsembleSpec::new(cfg.clone(), s, 64, 11);
        let a = run_ensemble(&spec.clone().with_workers(1)).unwrap();
        let b = run_ensemble(&spec.with_workers(3)).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn schemes_share_channels_under_one_seed() {
    let cfg = SystemConfig::new(64, 10, 3, 5);
    let digests: Vec<_> = Scheme::ALL
        .iter()
        .map(|&s| {
            run_ensemble(&EnsembleSpec::new(cfg.clone(), s, 2, 8))
                .unwrap()
                .trial0_digest
        })
        .collect();
    assert!(digests.windows(2).all(|w| w[0] == w[1] && w[0].is_some()));
}
