//! Monte Carlo ensemble engine.
//!
//! Trial `t` draws its channel from `RngStream::new(master_seed, t)` and its
//! precoder randomness from a fork of that stream, so two schemes run with the
//! same seed see identical channels. Trials run in parallel; per-trial records
//! are collected in trial order and reduced on one thread, which makes the
//! result bit-identical for any worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::channel::{generate_channels, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    closed_form_sinr, eve_capacity_bound, eve_sinr_all, rate_bits, sinr_from_terms, RateReport,
    TermStats, UserRates,
};
use crate::numkernel::{all_finite, RngStream};
use crate::precoder::{build_precoders, InsOptions, Scheme};

/// Default ensemble size.
pub const DEFAULT_TRIALS: usize = 5000;

/// Largest tolerated fraction of dropped trials before a result is flagged.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

const PRECODER_SALT: u64 = 0x7072_6563_6f64_6572;

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub cfg: SystemConfig,
    pub scheme: Scheme,
    pub n_trials: usize,
    pub master_seed: u64,
    pub ins: InsOptions,
    /// Simulate the eavesdropper (needs `L−K>M` and `φ<1`).
    pub eve_metrics: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(cfg: SystemConfig, scheme: Scheme, n_trials: usize, master_seed: u64) -> Self {
        let eve_metrics = cfg.an_streams() > cfg.eve_antennas && cfg.phi < 1.0;
        Self {
            cfg,
            scheme,
            n_trials,
            master_seed,
            ins: InsOptions::default(),
            eve_metrics,
            workers: None,
        }
    }

    pub fn with_eve(mut self, on: bool) -> Self {
        self.eve_metrics = on;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Worst-case per-trial checks over the retained trials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// `max |‖FW‖²−K|, |‖AV‖²−L₃|`.
    pub max_power_error: f64,
    /// `max ||[F]_ij| − 1/√N|` over RF stages.
    pub max_modulus_error: f64,
    /// `max ‖ĤᴴAV‖_F / (‖Ĥ‖_F‖AV‖_F)`.
    pub max_an_residual: f64,
    /// `max |ĥ_kᴴFw_l| / |ĥ_kᴴFw_k|`, `l≠k`.
    pub max_zf_offdiag: f64,
    /// Largest single-trial `|h_kᴴFw_l|²` (true channel).
    pub max_interference: f64,
    /// Largest single-trial `h_kᴴAVVᴴAᴴh_k` (true channel).
    pub max_an_leakage: f64,
    pub ins_columns: usize,
    pub ins_converged_columns: usize,
    /// Worst `‖Ĥᴴa‖²` among converged INS columns.
    pub ins_worst_converged_leakage: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FailureSummary {
    pub count: usize,
    pub reasons: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub scheme: Scheme,
    pub n_trials: usize,
    pub retained: usize,
    /// One entry per MT.
    pub stats: Vec<TermStats>,
    /// `E|ĥ_kᴴFw_k|` per MT with standard error (the realized `γ_ZF` for ZF).
    pub estimated_gain: Vec<(f64, f64)>,
    /// `E[log₂(1+γ_e)]` per MT with standard error.
    pub eve_capacity_mc: Option<Vec<(f64, f64)>>,
    pub rate_report: RateReport,
    pub failures: FailureSummary,
    pub diagnostics: Diagnostics,
    pub trial0_digest: Option<u64>,
    /// More than 1% of trials were dropped.
    pub unreliable: bool,
}

struct TrialRecord {
    signal: Vec<f64>,
    est_gain: Vec<f64>,
    /// Row-major `K×(K−1)`, `l≠k`.
    interference: Vec<f64>,
    leakage: Vec<f64>,
    eve: Option<Vec<f64>>,
    digest: Option<u64>,
    diag: Diagnostics,
}

fn run_trial(spec: &EnsembleSpec, t: u64) -> std::result::Result<TrialRecord, String> {
    let cfg = &spec.cfg;
    let k = cfg.users;
    let mut rng = RngStream::new(spec.master_seed, t);
    let ch = generate_channels(cfg, &mut rng).map_err(|e| format!("channel: {e}"))?;
    let mut pre_rng = rng.fork(PRECODER_SALT);
    let built = build_precoders(spec.scheme, cfg, &ch.h_hat, spec.ins, &mut pre_rng).map_err(
        |e| match e {
            Error::RankDeficient { .. } => "rank deficiency".to_string(),
            Error::Singular { .. } => "singular gram".to_string(),
            other => format!("precoder: {other}"),
        },
    )?;

    let mut diag = Diagnostics::default();
    if let Some(rep) = &built.ins {
        diag.ins_columns = rep.converged.len();
        diag.ins_converged_columns = rep.converged.iter().filter(|&&c| c).count();
        diag.ins_worst_converged_leakage = rep
            .leakage
            .iter()
            .zip(&rep.converged)
            .filter(|(_, &c)| c)
            .map(|(&l, _)| l)
            .fold(0.0, f64::max);
        if !rep.all_converged() {
            return Err("INS non-convergence".into());
        }
    }
    let set = &built.set;
    let fw = set.data_precoder();
    let av = set.an_precoder();
    if !all_finite(fw) || !all_finite(av) {
        return Err("non-finite precoder".into());
    }
    diag.max_power_error = set.power_error();
    diag.max_modulus_error = set.modulus_error();

    let h_adj = ch.h.adjoint();
    let hh_adj = ch.h_hat.adjoint();
    let gains = &h_adj * fw;
    let est_gains = &hh_adj * fw;
    let an_true = &h_adj * av;
    diag.max_an_residual = if av.ncols() == 0 {
        0.0
    } else {
        (&hh_adj * av).norm() / (ch.h_hat.norm() * av.norm())
    };

    let mut signal = Vec::with_capacity(k);
    let mut est_gain = Vec::with_capacity(k);
    let mut interference = Vec::with_capacity(k * k.saturating_sub(1));
    let mut leakage = Vec::with_capacity(k);
    for i in 0..k {
        signal.push(gains[(i, i)].norm());
        let g = est_gains[(i, i)].norm();
        est_gain.push(g);
        for l in (0..k).filter(|&l| l != i) {
            let p = gains[(i, l)].norm_sqr();
            interference.push(p);
            diag.max_interference = diag.max_interference.max(p);
            diag.max_zf_offdiag = diag.max_zf_offdiag.max(est_gains[(i, l)].norm() / g);
        }
        let leak = an_true.row(i).norm_squared();
        diag.max_an_leakage = diag.max_an_leakage.max(leak);
        leakage.push(leak);
    }

    let eve = if spec.eve_metrics {
        let g = eve_sinr_all(set, &ch.g_eve, cfg).map_err(|e| match e {
            Error::Singular { .. } => "singular eavesdropper gram".to_string(),
            other => format!("eavesdropper: {other}"),
        })?;
        Some(g.into_iter().map(rate_bits).collect::<Vec<_>>())
    } else {
        None
    };

    let finite = signal
        .iter()
        .chain(&interference)
        .chain(&leakage)
        .chain(eve.iter().flatten())
        .all(|x| x.is_finite());
    if !finite {
        return Err("non-finite statistic".into());
    }
    Ok(TrialRecord {
        signal,
        est_gain,
        interference,
        leakage,
        eve,
        digest: (t == 0).then(|| ch.digest()),
        diag,
    })
}

/// Mean and standard error (two-pass sample variance).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

/// Runs the ensemble described by `spec`.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    if spec.n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    spec.cfg.check(spec.eve_metrics)?;
    if spec.eve_metrics && !(spec.cfg.phi < 1.0) {
        return Err(Error::Domain("eavesdropper metrics need phi < 1".into()));
    }

    let run = || {
        (0..spec.n_trials as u64)
            .into_par_iter()
            .map(|t| run_trial(spec, t))
            .collect::<Vec<_>>()
    };
    let outcomes = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Ensemble(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = FailureSummary::default();
    let mut diagnostics = Diagnostics::default();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(reason) => {
                failures.count += 1;
                *failures.reasons.entry(reason).or_insert(0) += 1;
            }
        }
    }
    // INS column counts include dropped trials; everything else only retained ones.
    for r in &records {
        let d = &r.diag;
        let m = &mut diagnostics;
        m.max_power_error = m.max_power_error.max(d.max_power_error);
        m.max_modulus_error = m.max_modulus_error.max(d.max_modulus_error);
        m.max_an_residual = m.max_an_residual.max(d.max_an_residual);
        m.max_zf_offdiag = m.max_zf_offdiag.max(d.max_zf_offdiag);
        m.max_interference = m.max_interference.max(d.max_interference);
        m.max_an_leakage = m.max_an_leakage.max(d.max_an_leakage);
        m.ins_columns += d.ins_columns;
        m.ins_converged_columns += d.ins_converged_columns;
        m.ins_worst_converged_leakage = m
            .ins_worst_converged_leakage
            .max(d.ins_worst_converged_leakage);
    }
    if spec.scheme == Scheme::Ana {
        let dropped_cols = failures
            .reasons
            .get("INS non-convergence")
            .copied()
            .unwrap_or(0)
            * spec.cfg.an_streams();
        // Dropped INS trials contribute their columns as attempted; the
        // converged count of those trials is not retained, so count them as failed.
        diagnostics.ins_columns += dropped_cols;
    }
    if records.is_empty() {
        return Err(Error::Ensemble(format!(
            "all {} trials failed: {:?}",
            spec.n_trials, failures.reasons
        )));
    }

    let cfg = &spec.cfg;
    let k = cfg.users;
    let t = records.len();
    let col = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();

    let mut stats = Vec::with_capacity(k);
    let mut estimated_gain = Vec::with_capacity(k);
    // Per-MT columns kept for the jackknife.
    let mut sig_cols = Vec::with_capacity(k);
    let mut int_cols = Vec::with_capacity(k);
    let mut leak_cols = Vec::with_capacity(k);
    for i in 0..k {
        let sig = col(&|r| r.signal[i]);
        let (signal_amp, signal_amp_stderr) = mean_stderr(&sig);
        let signal_power = sig.iter().map(|x| x * x).sum::<f64>() / t as f64;
        let mut interference = Vec::with_capacity(k.saturating_sub(1));
        let mut interference_stderr = Vec::with_capacity(k.saturating_sub(1));
        for j in 0..k.saturating_sub(1) {
            let (m, s) = mean_stderr(&col(&|r| r.interference[i * (k - 1) + j]));
            interference.push(m);
            interference_stderr.push(s);
        }
        let leak = col(&|r| r.leakage[i]);
        let (an_leakage, an_leakage_stderr) = mean_stderr(&leak);
        stats.push(TermStats {
            signal_amp,
            signal_amp_stderr,
            signal_power,
            interference,
            interference_stderr,
            an_leakage,
            an_leakage_stderr,
        });
        estimated_gain.push(mean_stderr(&col(&|r| r.est_gain[i])));
        let ints = col(&|r| r.interference[i * (k - 1)..(i + 1) * (k - 1)].iter().sum());
        sig_cols.push(sig);
        int_cols.push(ints);
        leak_cols.push(leak);
    }

    let eve_cols: Option<Vec<Vec<f64>>> = spec.eve_metrics.then(|| {
        (0..k)
            .map(|i| col(&|r| r.eve.as_ref().unwrap()[i]))
            .collect()
    });
    let eve_capacity_mc = eve_cols
        .as_ref()
        .map(|cols| cols.iter().map(|c| mean_stderr(c)).collect::<Vec<_>>());

    let eve_bound = eve_capacity_bound(cfg).ok();
    let mut users = Vec::with_capacity(k);
    for i in 0..k {
        let sinr_cf = closed_form_sinr(spec.scheme, cfg, i)?;
        let rate_cf = rate_bits(sinr_cf);
        let sinr_mc = crate::metrics::mt_sinr_from_stats(&stats[i], cfg, i)?;
        let rate_mc = rate_bits(sinr_mc);
        let eve = eve_capacity_mc.as_ref().map(|e| e[i]);
        users.push(UserRates {
            sinr_cf,
            rate_cf,
            sinr_mc,
            rate_mc,
            eve_mc: eve.map(|e| e.0),
            eve_mc_stderr: eve.map(|e| e.1),
            secrecy_cf: eve_bound.map(|b| (rate_cf - b).max(0.0)),
            secrecy_mc: eve.map(|e| (rate_mc - e.0).max(0.0)),
        });
    }

    let jack = Jackknife {
        cfg,
        sig: &sig_cols,
        int: &int_cols,
        leak: &leak_cols,
        eve: eve_cols.as_deref(),
    };
    let rate_mc_stderr = jack.stderr(false)?;
    let secrecy_mc_stderr = match eve_cols {
        Some(_) => Some(jack.stderr(true)?),
        None => None,
    };

    let rate_report = RateReport {
        scheme: spec.scheme,
        phi: cfg.phi,
        users,
        eve_bound,
        secrecy_mc_stderr,
        rate_mc_stderr,
    };

    let trial0_digest = records.first().and_then(|r| r.digest);
    Ok(EnsembleResult {
        scheme: spec.scheme,
        n_trials: spec.n_trials,
        retained: t,
        stats,
        estimated_gain,
        eve_capacity_mc,
        rate_report,
        unreliable: failures.count as f64 > MAX_FAILURE_FRACTION * spec.n_trials as f64,
        failures,
        diagnostics,
        trial0_digest,
    })
}

/// Delete-one jackknife of the MT-averaged MC rate (or secrecy rate).
struct Jackknife<'a> {
    cfg: &'a SystemConfig,
    sig: &'a [Vec<f64>],
    int: &'a [Vec<f64>],
    leak: &'a [Vec<f64>],
    eve: Option<&'a [Vec<f64>]>,
}

impl Jackknife<'_> {
    fn stderr(&self, secrecy: bool) -> Result<f64> {
        let t = self.sig[0].len();
        if t < 2 {
            return Ok(f64::NAN);
        }
        let k = self.sig.len();
        let sums = |cols: &[Vec<f64>]| {
            cols.iter()
                .map(|c| c.iter().sum::<f64>())
                .collect::<Vec<_>>()
        };
        let (s_sig, s_int, s_leak) = (sums(self.sig), sums(self.int), sums(self.leak));
        let s_eve = self.eve.map(sums);
        let denom = (t - 1) as f64;

        let mut thetas = Vec::with_capacity(t);
        for n in 0..t {
            let mut acc = 0.0;
            for i in 0..k {
                let sig = (s_sig[i] - self.sig[i][n]) / denom;
                let int = (s_int[i] - self.int[i][n]) / denom;
                let leak = (s_leak[i] - self.leak[i][n]) / denom;
                let rate = rate_bits(sinr_from_terms(self.cfg, i, sig, int, leak)?);
                acc += if secrecy {
                    let eve = self.eve.unwrap();
                    let e = (s_eve.as_ref().unwrap()[i] - eve[i][n]) / denom;
                    (rate - e).max(0.0)
                } else {
                    rate
                };
            }
            thetas.push(acc / k as f64);
        }
        let mean = thetas.iter().sum::<f64>() / t as f64;
        let ss: f64 = thetas.iter().map(|x| (x - mean) * (x - mean)).sum();
        Ok((ss * denom / t as f64).sqrt())
    }
}

/// Neglected-variance ratio per MT (see [`TermStats::neglected_variance_ratio`]).
pub fn estimate_footnote_term(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    if spec.n_trials < 2 {
        return Err(Error::InvalidArgument(
            "variance term needs at least 2 trials".into(),
        ));
    }
    let res = run_ensemble(&spec.clone().with_eve(false))?;
    Ok(res
        .stats
        .iter()
        .map(TermStats::neglected_variance_ratio)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_stderr_basics() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (1.666_666_666_666_666_7f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_stderr(&[1.0]).1.is_nan());
    }

    #[test]
    fn single_trial_is_reproducible() {
        let cfg = SystemConfig::new(32, 10, 3, 5);
        let spec = EnsembleSpec::new(cfg, Scheme::Hzf, 1, 77);
        let a = run_ensemble(&spec).unwrap();
        let b = run_ensemble(&spec).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a.retained, 1);
        assert!(a.rate_report.rate_mc_stderr.is_nan());
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SystemConfig::new(32, 10, 3, 5);
        assert!(run_ensemble(&EnsembleSpec::new(cfg, Scheme::Hzf, 0, 1)).is_err());
    }

    #[test]
    fn footnote_needs_two_trials() {
        let cfg = SystemConfig::new(32, 10, 3, 5);
        assert!(estimate_footnote_term(&EnsembleSpec::new(cfg, Scheme::Ana, 1, 1)).is_err());
    }

    #[test]
    fn eve_request_outside_domain_is_config_error() {
        let cfg = SystemConfig::new(64, 8, 3, 5);
        let spec = EnsembleSpec::new(cfg, Scheme::Hzf, 4, 1).with_eve(true);
        assert!(matches!(run_ensemble(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn ins_failures_are_dropped_and_flagged() {
        let cfg = SystemConfig::new(64, 10, 3, 5);
        let mut spec = EnsembleSpec::new(cfg, Scheme::Ana, 20, 3);
        spec.ins = InsOptions {
            tol: 1e-30,
            max_iter: 2,
        };
        match run_ensemble(&spec) {
            Err(Error::Ensemble(msg)) => assert!(msg.contains("INS")),
            other => panic!("expected total failure, got {other:?}"),
        }
    }
}
