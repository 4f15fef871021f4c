//! System parameters, MMSE estimation quality and per-trial channel draws.
//!
//! Channels are small-scale (unit variance per entry). The path loss `β_k`
//! only reaches the rate expressions through the effective noise `σ²/β_k`.

use std::fmt;

use crate::error::{Error, Result};
use crate::numkernel::{sample_complex_gaussian, CMatrix, RngStream};

/// Scalar system parameters. Powers are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antennas `N`.
    pub antennas: usize,
    /// RF chains `L`.
    pub rf_chains: usize,
    /// Mobile terminals `K`.
    pub users: usize,
    /// Eavesdropper antennas `M`.
    pub eve_antennas: usize,
    /// Total transmit power `P`.
    pub total_power: f64,
    /// Fraction of `P` spent on data; the rest goes to artificial noise.
    pub phi: f64,
    pub pilot_power: f64,
    pub pilot_len: usize,
    pub noise_power: f64,
    /// Per-MT path loss `β_k`.
    pub path_loss: Vec<f64>,
    pub eve_path_loss: f64,
}

impl SystemConfig {
    /// Defaults: `P = 10 dB`, `φ = 0.5`, `p_τ = 0 dB`, `τ = K`, `σ² = 1`, `β_k = 1`.
    pub fn new(antennas: usize, rf_chains: usize, users: usize, eve_antennas: usize) -> Self {
        Self {
            antennas,
            rf_chains,
            users,
            eve_antennas,
            total_power: 10.0,
            phi: 0.5,
            pilot_power: 1.0,
            pilot_len: users,
            noise_power: 1.0,
            path_loss: vec![1.0; users],
            eve_path_loss: 1.0,
        }
    }

    /// Number of AN streams `L₃ = L − K`.
    pub fn an_streams(&self) -> usize {
        self.rf_chains.saturating_sub(self.users)
    }

    /// CSI quality `λ_k` of MT `k`.
    pub fn lambda(&self, k: usize) -> f64 {
        derive_lambda(self.pilot_power, self.pilot_len, self.path_loss[k])
            .expect("path loss validated positive")
    }

    pub fn lambdas(&self) -> Vec<f64> {
        (0..self.users).map(|k| self.lambda(k)).collect()
    }

    /// Effective noise `σ²/β_k` seen in small-scale units.
    pub fn effective_noise(&self, k: usize) -> f64 {
        self.noise_power / self.path_loss[k]
    }

    /// Adjusts `p_τ` so that every MT with unit path loss sees the given `λ`.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        assert!((0.0..1.0).contains(&lambda), "lambda must lie in [0, 1)");
        self.path_loss = vec![1.0; self.users];
        self.pilot_power = lambda / (1.0 - lambda) / self.pilot_len as f64;
        self
    }

    /// Returns `Err(Error::Config)` listing every violated constraint.
    pub fn check(&self, need_eve_bound: bool) -> Result<()> {
        let v = validate_config(self, need_eve_bound);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// A violated configuration constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    /// `K < L` (data streams need RF chains, plus at least one AN stream).
    UsersBelowRfChains {
        users: usize,
        rf_chains: usize,
    },
    /// `L < N`.
    RfChainsBelowAntennas {
        rf_chains: usize,
        antennas: usize,
    },
    /// `τ ≥ K` for orthogonal pilots.
    PilotTooShort {
        pilot_len: usize,
        users: usize,
    },
    /// `L − K > M`, needed for the eavesdropper capacity bound.
    EveBoundDomain {
        an_streams: usize,
        eve_antennas: usize,
    },
    PhiOutOfRange(f64),
    NegativePower {
        name: &'static str,
        value: f64,
    },
    PathLossCount {
        expected: usize,
        got: usize,
    },
    NonPositivePathLoss {
        index: Option<usize>,
        value: f64,
    },
    NoUsers,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConfigViolation::*;
        match self {
            UsersBelowRfChains { users, rf_chains } => {
                write!(f, "K < L violated (K={users}, L={rf_chains})")
            }
            RfChainsBelowAntennas {
                rf_chains,
                antennas,
            } => {
                write!(f, "L < N violated (L={rf_chains}, N={antennas})")
            }
            PilotTooShort { pilot_len, users } => {
                write!(f, "tau >= K violated (tau={pilot_len}, K={users})")
            }
            EveBoundDomain {
                an_streams,
                eve_antennas,
            } => write!(f, "L−K>M violated (L−K={an_streams}, M={eve_antennas})"),
            PhiOutOfRange(p) => write!(f, "phi in (0,1] violated (phi={p})"),
            NegativePower { name, value } => write!(f, "{name} >= 0 violated ({value})"),
            PathLossCount { expected, got } => {
                write!(f, "beta needs {expected} entries, got {got}")
            }
            NonPositivePathLoss {
                index: Some(k),
                value,
            } => {
                write!(f, "beta_{k} > 0 violated ({value})")
            }
            NonPositivePathLoss { index: None, value } => {
                write!(f, "beta_eve > 0 violated ({value})")
            }
            NoUsers => write!(f, "K >= 1 violated"),
        }
    }
}

/// `λ = p_τ·τ·β / (1 + p_τ·τ·β)`.
pub fn derive_lambda(pilot_power: f64, pilot_len: usize, path_loss: f64) -> Result<f64> {
    if !(path_loss > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "path loss must be positive, got {path_loss}"
        )));
    }
    if !(pilot_power >= 0.0) || pilot_len == 0 {
        return Err(Error::InvalidArgument(format!(
            "need p_tau >= 0 and tau >= 1, got p_tau={pilot_power}, tau={pilot_len}"
        )));
    }
    let x = pilot_power * pilot_len as f64 * path_loss;
    Ok(x / (1.0 + x))
}

/// Every violated invariant of `cfg`; empty means valid.
pub fn validate_config(cfg: &SystemConfig, need_eve_bound: bool) -> Vec<ConfigViolation> {
    use ConfigViolation::*;
    let mut out = Vec::new();
    if cfg.users == 0 {
        out.push(NoUsers);
    }
    if cfg.users >= cfg.rf_chains {
        out.push(UsersBelowRfChains {
            users: cfg.users,
            rf_chains: cfg.rf_chains,
        });
    }
    if cfg.rf_chains >= cfg.antennas {
        out.push(RfChainsBelowAntennas {
            rf_chains: cfg.rf_chains,
            antennas: cfg.antennas,
        });
    }
    if cfg.pilot_len < cfg.users {
        out.push(PilotTooShort {
            pilot_len: cfg.pilot_len,
            users: cfg.users,
        });
    }
    if need_eve_bound && cfg.an_streams() <= cfg.eve_antennas {
        out.push(EveBoundDomain {
            an_streams: cfg.an_streams(),
            eve_antennas: cfg.eve_antennas,
        });
    }
    if !(cfg.phi > 0.0 && cfg.phi <= 1.0) {
        out.push(PhiOutOfRange(cfg.phi));
    }
    for (name, value) in [
        ("P", cfg.total_power),
        ("p_tau", cfg.pilot_power),
        ("sigma2", cfg.noise_power),
    ] {
        if !(value >= 0.0) {
            out.push(NegativePower { name, value });
        }
    }
    if cfg.path_loss.len() != cfg.users {
        out.push(PathLossCount {
            expected: cfg.users,
            got: cfg.path_loss.len(),
        });
    }
    for (k, &b) in cfg.path_loss.iter().enumerate() {
        if !(b > 0.0) {
            out.push(NonPositivePathLoss {
                index: Some(k),
                value: b,
            });
        }
    }
    if !(cfg.eve_path_loss > 0.0) {
        out.push(NonPositivePathLoss {
            index: None,
            value: cfg.eve_path_loss,
        });
    }
    out
}

/// One draw of the MT and eavesdropper channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Estimated channels `Ĥ` (N×K), column `k` ~ CN(0, λ_k I).
    pub h_hat: CMatrix,
    /// Estimation errors (N×K), column `k` ~ CN(0, (1−λ_k) I).
    pub error: CMatrix,
    /// True small-scale channels `H = Ĥ + E`.
    pub h: CMatrix,
    /// Eavesdropper channel `G_E` (N×M), entries CN(0, β_eve).
    pub g_eve: CMatrix,
    pub lambda: Vec<f64>,
}

impl ChannelRealization {
    /// FNV-1a over the bit patterns of all channel entries.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for m in [&self.h_hat, &self.error, &self.g_eve] {
            for z in m.iter() {
                for w in [z.re.to_bits(), z.im.to_bits()] {
                    for b in w.to_le_bytes() {
                        h ^= b as u64;
                        h = h.wrapping_mul(0x0000_0100_0000_01b3);
                    }
                }
            }
        }
        h
    }
}

/// Draws `Ĥ`, `E` and `G_E` (in that order) from `rng`.
pub fn generate_channels(cfg: &SystemConfig, rng: &mut RngStream) -> Result<ChannelRealization> {
    cfg.check(false)?;
    let (n, k) = (cfg.antennas, cfg.users);
    let lambda = cfg.lambdas();

    let mut h_hat = sample_complex_gaussian(n, k, 1.0, rng)?;
    let mut error = sample_complex_gaussian(n, k, 1.0, rng)?;
    for (j, &l) in lambda.iter().enumerate() {
        h_hat.column_mut(j).scale_mut(l.sqrt());
        error.column_mut(j).scale_mut((1.0 - l).sqrt());
    }
    let g_eve = sample_complex_gaussian(n, cfg.eve_antennas, cfg.eve_path_loss, rng)?;
    let h = &h_hat + &error;
    Ok(ChannelRealization {
        h_hat,
        error,
        h,
        g_eve,
        lambda,
    })
}
