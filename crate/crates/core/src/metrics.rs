//! SINR, eavesdropper capacity and secrecy-rate evaluation.
//!
//! Two routes compute the same quantities: closed forms that depend only on
//! [`SystemConfig`], and Monte Carlo assembly from ensemble statistics
//! ([`TermStats`]) through the same SINR expression.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numkernel::{hermitian_inverse, CMatrix};
use crate::precoder::{PrecoderSet, Scheme};

/// Ensemble estimates of the expectation terms of MT `k`'s SINR, in
/// small-scale units.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStats {
    /// `E[|h_kᴴFw_k|]`.
    pub signal_amp: f64,
    pub signal_amp_stderr: f64,
    /// `E[|h_kᴴFw_k|²]`, kept for the neglected variance term.
    pub signal_power: f64,
    /// `E[|h_kᴴFw_l|²]` for `l ≠ k`, in increasing `l`.
    pub interference: Vec<f64>,
    pub interference_stderr: Vec<f64>,
    /// `E[h_kᴴAVVᴴAᴴh_k]`.
    pub an_leakage: f64,
    pub an_leakage_stderr: f64,
}

impl TermStats {
    pub fn total_interference(&self) -> f64 {
        self.interference.iter().sum()
    }

    /// `(E|x|² − E[|x|]²) / E[|x|]²`: the variance term left out of the SINR
    /// denominator, relative to the SINR numerator.
    pub fn neglected_variance_ratio(&self) -> f64 {
        let m2 = self.signal_amp * self.signal_amp;
        if m2 == 0.0 {
            return f64::NAN;
        }
        (self.signal_power - m2) / m2
    }
}

/// SINR of MT `k` from ensemble statistics.
pub fn mt_sinr_from_stats(stats: &TermStats, cfg: &SystemConfig, k: usize) -> Result<f64> {
    sinr_from_terms(
        cfg,
        k,
        stats.signal_amp,
        stats.total_interference(),
        stats.an_leakage,
    )
}

pub(crate) fn sinr_from_terms(
    cfg: &SystemConfig,
    k: usize,
    signal_amp: f64,
    interference_sum: f64,
    an_leakage: f64,
) -> Result<f64> {
    let data = cfg.phi * cfg.total_power / cfg.users as f64;
    let l3 = cfg.an_streams();
    let an = if l3 == 0 {
        0.0
    } else {
        (1.0 - cfg.phi) * cfg.total_power / l3 as f64
    };
    let num = data * signal_amp * signal_amp;
    let den = data * interference_sum + an * an_leakage + cfg.effective_noise(k);
    if !(den > 0.0) {
        return Err(Error::InvalidArgument(format!("SINR denominator is {den}")));
    }
    Ok(num / den)
}

/// Eavesdropper SINR against MT `k` for one channel draw.
pub fn eve_sinr(pre: &PrecoderSet, g_eve: &CMatrix, cfg: &SystemConfig, k: usize) -> Result<f64> {
    Ok(eve_sinr_all(pre, g_eve, cfg)?[k])
}

/// Eavesdropper SINR against every MT, sharing one `M×M` inverse.
pub fn eve_sinr_all(pre: &PrecoderSet, g_eve: &CMatrix, cfg: &SystemConfig) -> Result<Vec<f64>> {
    let m = g_eve.ncols();
    let l3 = pre.an_streams;
    if l3 < m {
        return Err(Error::Domain(format!(
            "eavesdropper SINR needs L3 >= M, got L3={l3}, M={m}"
        )));
    }
    if !(cfg.phi < 1.0) {
        return Err(Error::Domain("eavesdropper SINR needs phi < 1".into()));
    }
    let k = pre.data_precoder().ncols();
    if m == 0 {
        return Ok(vec![0.0; k]);
    }
    let g_adj = g_eve.adjoint();
    let noise_dir = &g_adj * pre.an_precoder();
    let gram = &noise_dir * noise_dir.adjoint();
    let inv = hermitian_inverse(&gram)?;
    let data_dir = &g_adj * pre.data_precoder();
    let weight = l3 as f64 * cfg.phi / (k as f64 * (1.0 - cfg.phi));
    Ok((0..k)
        .map(|j| {
            let x = data_dir.column(j);
            let q: Complex64 = x.dotc(&(&inv * x));
            weight * q.re
        })
        .collect())
}

/// Closed-form SINR of MT `k` for each scheme.
pub fn closed_form_sinr(scheme: Scheme, cfg: &SystemConfig, k: usize) -> Result<f64> {
    cfg.check(false)?;
    let lam = cfg.lambda(k);
    let n = cfg.antennas as f64;
    let l = cfg.rf_chains as f64;
    let users = cfg.users as f64;
    let data = cfg.phi * cfg.total_power / users;
    let an = (1.0 - cfg.phi) * cfg.total_power * (1.0 - lam);
    let noise = cfg.effective_noise(k);

    let (gain, interference) = match scheme {
        Scheme::Ana => (PI / 4.0 * lam * n, users - 1.0),
        Scheme::Hmf => (PI / 4.0 * lam * (n - 1.0) + l, 2.0 * (users - 1.0)),
        Scheme::Hzf => (PI / 4.0 * lam * (n - 1.0), (users - 1.0) * (1.0 - lam)),
        Scheme::Fmf => (lam * n, users - 1.0),
        Scheme::Fzf => (lam * (n - users), (users - 1.0) * (1.0 - lam)),
    };
    Ok(data * gain / (data * interference + an + noise))
}

/// Upper bound on the eavesdropper's ergodic capacity, in bits/s/Hz.
pub fn eve_capacity_bound(cfg: &SystemConfig) -> Result<f64> {
    let l3 = cfg.an_streams();
    let m = cfg.eve_antennas;
    if l3 <= m {
        return Err(Error::Domain(format!(
            "capacity bound needs L−K>M, got L−K={l3}, M={m}"
        )));
    }
    if !(cfg.phi > 0.0 && cfg.phi < 1.0) {
        return Err(Error::Domain(format!(
            "capacity bound needs phi in (0,1), got {}",
            cfg.phi
        )));
    }
    let m = m as f64;
    let snr = cfg.phi * m / (cfg.users as f64 * (1.0 - cfg.phi) * (1.0 - m / l3 as f64));
    Ok((1.0 + snr).log2())
}

/// `[log₂(1 + γ_k) − C̄_E]⁺` with the closed-form SINR.
pub fn secrecy_rate_bound(scheme: Scheme, cfg: &SystemConfig, k: usize) -> Result<f64> {
    let rate = closed_form_sinr(scheme, cfg, k)?.ln_1p() / std::f64::consts::LN_2;
    let eve = eve_capacity_bound(cfg)?;
    Ok((rate - eve).max(0.0))
}

/// `log₂(1 + x)`.
pub fn rate_bits(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    /// Closed-form SINR in `Scheme::ALL` order.
    pub sinr: [(Scheme, f64); 5],
    /// `γ_FZF > γ_HZF > γ_ANA`.
    pub zf_chain: bool,
    /// `γ_FMF > γ_ANA > γ_HMF`.
    pub mf_chain: bool,
    pub hzf_beats_hmf: bool,
    /// `L / ((1+λ)(K−1))`.
    pub hzf_threshold: f64,
    /// Whether `γ_HZF` exceeds the threshold.
    pub above_threshold: bool,
}

impl OrderingReport {
    pub fn sinr_of(&self, scheme: Scheme) -> f64 {
        self.sinr
            .iter()
            .find(|(s, _)| *s == scheme)
            .map(|x| x.1)
            .unwrap()
    }

    /// The threshold criterion agrees with the direct HZF/HMF comparison.
    pub fn threshold_consistent(&self) -> bool {
        self.above_threshold == self.hzf_beats_hmf
    }
}

/// Evaluates all five closed forms for MT `0` and reports the claimed orderings.
///
/// The orderings are asymptotic statements; at small `N` they may fail, which
/// is reported rather than treated as an error.
pub fn ordering_check(cfg: &SystemConfig) -> Result<OrderingReport> {
    let k = 0;
    let mut sinr = [(Scheme::Ana, 0.0); 5];
    for (slot, s) in sinr.iter_mut().zip(Scheme::ALL) {
        *slot = (s, closed_form_sinr(s, cfg, k)?);
    }
    let get = |s: Scheme| sinr.iter().find(|(x, _)| *x == s).unwrap().1;
    let (ana, hmf, hzf, fmf, fzf) = (
        get(Scheme::Ana),
        get(Scheme::Hmf),
        get(Scheme::Hzf),
        get(Scheme::Fmf),
        get(Scheme::Fzf),
    );
    let lam = cfg.lambda(k);
    let hzf_threshold = cfg.rf_chains as f64 / ((1.0 + lam) * (cfg.users as f64 - 1.0));
    Ok(OrderingReport {
        sinr,
        zf_chain: fzf > hzf && hzf > ana,
        mf_chain: fmf > ana && ana > hmf,
        hzf_beats_hmf: hzf > hmf,
        hzf_threshold,
        above_threshold: hzf > hzf_threshold,
    })
}

/// Closed-form and Monte Carlo rates of one MT.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRates {
    pub sinr_cf: f64,
    pub rate_cf: f64,
    pub sinr_mc: f64,
    pub rate_mc: f64,
    /// `E[log₂(1+γ_e)]` against this MT, if evaluated.
    pub eve_mc: Option<f64>,
    pub eve_mc_stderr: Option<f64>,
    /// `[rate_cf − C̄_E]⁺`, if the bound is defined.
    pub secrecy_cf: Option<f64>,
    /// `[rate_mc − eve_mc]⁺`, if Eve was simulated.
    pub secrecy_mc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    pub phi: f64,
    pub users: Vec<UserRates>,
    /// `C̄_E`; `None` outside `L−K>M`, `0<φ<1`.
    pub eve_bound: Option<f64>,
    /// Jackknife standard error of the MT-averaged MC secrecy rate.
    pub secrecy_mc_stderr: Option<f64>,
    pub rate_mc_stderr: f64,
}

impl RateReport {
    fn mean_of(&self, f: impl Fn(&UserRates) -> Option<f64>) -> Option<f64> {
        let vals: Option<Vec<f64>> = self.users.iter().map(f).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn mean_rate_cf(&self) -> f64 {
        self.mean_of(|u| Some(u.rate_cf)).unwrap()
    }

    pub fn mean_rate_mc(&self) -> f64 {
        self.mean_of(|u| Some(u.rate_mc)).unwrap()
    }

    pub fn mean_secrecy_cf(&self) -> Option<f64> {
        self.mean_of(|u| u.secrecy_cf)
    }

    pub fn mean_secrecy_mc(&self) -> Option<f64> {
        self.mean_of(|u| u.secrecy_mc)
    }

    pub fn mean_eve_mc(&self) -> Option<f64> {
        self.mean_of(|u| u.eve_mc)
    }
}
