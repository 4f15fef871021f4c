//! Data and artificial-noise precoders for the five transmit schemes.
//!
//! A scheme is a pair of cascades: data `F·W` (RF phase shifters then
//! baseband) and AN `A·V`. Power is normalized per realization so that
//! `‖F·W‖_F² = K` and `‖A·V‖_F² = L₃`.
//!
//! | scheme | `F`                  | `W`        | `A`            | `V`                 |
//! |--------|----------------------|------------|----------------|---------------------|
//! | ANA    | conjugate phases N×K | `I_K`      | INS phases     | `I_{L₃}`            |
//! | HMF    | hybrid RF N×L        | MF L×K     | `= F`          | null(ĤᴴA), L×L₃     |
//! | HZF    | hybrid RF N×L        | ZF L×K     | `= F`          | null(ĤᴴA), L×L₃     |
//! | FMF    | pass-through         | MF N×K     | pass-through   | null(Ĥᴴ), N×L₃      |
//! | FZF    | pass-through         | ZF N×K     | pass-through   | null(Ĥᴴ), N×L₃      |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numkernel::{
    hermitian_inverse, null_space_basis, null_space_columns, numerical_rank, phase_only_project,
    random_phase_matrix, unit_phase, CMatrix, RngStream, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Pure analog: conjugate-phase data beams and phase-only INS noise.
    Ana,
    /// Hybrid matched filter.
    Hmf,
    /// Hybrid zero forcing.
    Hzf,
    /// Full-digital matched filter.
    Fmf,
    /// Full-digital zero forcing.
    Fzf,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Ana,
        Scheme::Hmf,
        Scheme::Hzf,
        Scheme::Fmf,
        Scheme::Fzf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ana => "ANA",
            Scheme::Hmf => "HMF",
            Scheme::Hzf => "HZF",
            Scheme::Fmf => "FMF",
            Scheme::Fzf => "FZF",
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, Scheme::Hmf | Scheme::Hzf)
    }

    pub fn is_full_digital(self) -> bool {
        matches!(self, Scheme::Fmf | Scheme::Fzf)
    }

    pub fn is_zero_forcing(self) -> bool {
        matches!(self, Scheme::Hzf | Scheme::Fzf)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ANA" => Ok(Scheme::Ana),
            "HMF" => Ok(Scheme::Hmf),
            "HZF" => Ok(Scheme::Hzf),
            "FMF" => Ok(Scheme::Fmf),
            "FZF" => Ok(Scheme::Fzf),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// RF stage of a cascade.
#[derive(Debug, Clone, PartialEq)]
pub enum RfStage {
    /// Phase-shifter network, every entry of modulus `1/√N`.
    PhaseShifters(CMatrix),
    /// Full-digital pass-through (identity of size N).
    PassThrough(usize),
}

impl RfStage {
    pub fn apply(&self, baseband: &CMatrix) -> CMatrix {
        match self {
            RfStage::PhaseShifters(f) => f * baseband,
            RfStage::PassThrough(_) => baseband.clone(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            RfStage::PhaseShifters(f) => f.clone(),
            RfStage::PassThrough(n) => CMatrix::identity(*n, *n),
        }
    }

    pub fn phase_shifters(&self) -> Option<&CMatrix> {
        match self {
            RfStage::PhaseShifters(f) => Some(f),
            RfStage::PassThrough(_) => None,
        }
    }
}

/// The four precoding matrices of one scheme, plus the cascaded products.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub scheme: Scheme,
    pub rf_data: RfStage,
    pub baseband_data: CMatrix,
    pub rf_an: RfStage,
    pub baseband_an: CMatrix,
    pub an_streams: usize,
    data: CMatrix,
    an: CMatrix,
}

impl PrecoderSet {
    pub fn new(
        scheme: Scheme,
        rf_data: RfStage,
        baseband_data: CMatrix,
        rf_an: RfStage,
        baseband_an: CMatrix,
    ) -> Self {
        let data = rf_data.apply(&baseband_data);
        let an = rf_an.apply(&baseband_an);
        let an_streams = baseband_an.ncols();
        Self {
            scheme,
            rf_data,
            baseband_data,
            rf_an,
            baseband_an,
            an_streams,
            data,
            an,
        }
    }

    /// Effective data precoder `F·W` (N×K).
    pub fn data_precoder(&self) -> &CMatrix {
        &self.data
    }

    /// Effective AN precoder `A·V` (N×L₃).
    pub fn an_precoder(&self) -> &CMatrix {
        &self.an
    }

    /// Largest deviation of `‖FW‖²` from `K` and `‖AV‖²` from `L₃`.
    pub fn power_error(&self) -> f64 {
        let k = self.data.ncols() as f64;
        let l3 = self.an_streams as f64;
        (self.data.norm_squared() - k)
            .abs()
            .max((self.an.norm_squared() - l3).abs())
    }

    /// Largest deviation of any RF entry modulus from `1/√N`; zero for full-digital.
    pub fn modulus_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for stage in [&self.rf_data, &self.rf_an] {
            if let Some(f) = stage.phase_shifters() {
                let target = 1.0 / (f.nrows() as f64).sqrt();
                for z in f.iter() {
                    worst = worst.max((z.norm() - target).abs());
                }
            }
        }
        worst
    }
}

/// Solver settings for the iterative null-space (INS) AN search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsOptions {
    /// Leakage target on `‖Ĥᴴa‖²`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsReport {
    /// Iterations used per column.
    pub iterations: Vec<usize>,
    /// Final `‖Ĥᴴa‖²` per column.
    pub leakage: Vec<f64>,
    pub converged: Vec<bool>,
}

impl InsReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn worst_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Conjugate-phase analog data precoder: column `j` follows the phases of `ĥ_j`.
///
/// With this orientation `ĥ_jᴴ f_j = Σ|ĥ_ij|/√N`, i.e. the beam adds coherently
/// at MT `j`.
pub fn build_analog_data(h_hat: &CMatrix) -> CMatrix {
    phase_only_project(h_hat, h_hat.nrows())
}

/// Phase-only AN columns in the (approximate) null space of `Ĥᴴ`.
///
/// Each column runs alternating projections from its own random
/// constant-modulus start: project onto `null(Ĥᴴ)` with
/// `x − Ĥ(ĤᴴĤ)⁻¹Ĥᴴx`, then back onto the constant-modulus torus. The
/// iterate with the lowest leakage is kept. Non-converged columns are
/// returned best-effort and flagged in the report.
pub fn build_analog_an_ins(
    h_hat: &CMatrix,
    count: usize,
    opts: InsOptions,
    rng: &mut RngStream,
) -> Result<(CMatrix, InsReport)> {
    let n = h_hat.nrows();
    let k = h_hat.ncols();
    let mut a = random_phase_matrix(n, count, n, rng);
    let mut report = InsReport {
        iterations: vec![0; count],
        leakage: vec![0.0; count],
        converged: vec![true; count],
    };
    if k == 0 {
        return Ok((a, report));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "INS needs K < N, got K={k}, N={n}"
        )));
    }
    let h_adj = h_hat.adjoint();
    let gram_inv = hermitian_inverse(&(&h_adj * h_hat))?;
    let amp = 1.0 / (n as f64).sqrt();

    for c in 0..count {
        let mut x = a.column(c).into_owned();
        let mut best = x.clone();
        let mut best_leak = f64::INFINITY;
        let mut iters = 0;
        loop {
            let r = &h_adj * &x;
            let leak = r.norm_squared();
            if leak < best_leak {
                best_leak = leak;
                best.copy_from(&x);
            }
            if leak <= opts.tol || iters >= opts.max_iter {
                break;
            }
            let y = &x - h_hat * (&gram_inv * r);
            x = y.map(|z| unit_phase(z) * amp);
            iters += 1;
        }
        a.set_column(c, &best);
        report.iterations[c] = iters;
        report.leakage[c] = best_leak;
        report.converged[c] = best_leak <= opts.tol;
    }
    Ok((a, report))
}

/// Hybrid RF stage: `K` conjugate-phase columns followed by `L − K` columns of
/// i.i.d. uniform phases (drawn per entry).
pub fn build_hybrid_rf(h_hat: &CMatrix, rf_chains: usize, rng: &mut RngStream) -> Result<CMatrix> {
    let (n, k) = h_hat.shape();
    if rf_chains < k {
        return Err(Error::InvalidArgument(format!(
            "need L >= K, got L={rf_chains}, K={k}"
        )));
    }
    let mut f = CMatrix::zeros(n, rf_chains);
    f.columns_mut(0, k).copy_from(&build_analog_data(h_hat));
    if rf_chains > k {
        let extra = random_phase_matrix(n, rf_chains - k, n, rng);
        f.columns_mut(k, rf_chains - k).copy_from(&extra);
    }
    Ok(f)
}

fn check_nonzero(h_hat: &CMatrix) -> Result<()> {
    if h_hat.norm_squared() == 0.0 {
        return Err(Error::InvalidArgument(
            "estimated channel is all zero".into(),
        ));
    }
    Ok(())
}

fn scale_to_power(w: &mut CMatrix, rf: &CMatrix, target: f64) -> Result<f64> {
    let p = (rf * &*w).norm_squared();
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cannot normalize precoder with power {p}"
        )));
    }
    let gamma = (target / p).sqrt();
    *w *= Complex64::new(gamma, 0.0);
    Ok(gamma)
}

/// Baseband matched filter `W = γ_MF·FᴴĤ` with `‖FW‖_F² = K`.
pub fn build_baseband_mf(f: &CMatrix, h_hat: &CMatrix) -> Result<CMatrix> {
    Ok(baseband_mf_with_gain(f, h_hat)?.0)
}

/// Like [`build_baseband_mf`], also returning the realized `γ_MF`.
pub fn baseband_mf_with_gain(f: &CMatrix, h_hat: &CMatrix) -> Result<(CMatrix, f64)> {
    check_nonzero(h_hat)?;
    let k = h_hat.ncols() as f64;
    let mut w = f.adjoint() * h_hat;
    let gamma = scale_to_power(&mut w, f, k)?;
    Ok((w, gamma))
}

/// Baseband zero forcing `W = γ_ZF·FᴴĤ(ĤᴴFFᴴĤ)⁻¹` with `‖FW‖_F² = K`.
pub fn build_baseband_zf(f: &CMatrix, h_hat: &CMatrix) -> Result<CMatrix> {
    Ok(baseband_zf_with_gain(f, h_hat)?.0)
}

/// Like [`build_baseband_zf`], also returning the realized `γ_ZF`.
///
/// `γ_ZF` is set from the realized `‖F·FᴴĤ(ĤᴴFFᴴĤ)⁻¹‖_F²`, which reduces to
/// `√(K / tr((ĤᴴFFᴴĤ)⁻¹))` whenever `FᴴF = I` (full-digital) and keeps the
/// power constraint exact for phase-shifter `F` as well. Since
/// `ĤᴴFW = γ_ZF·I`, `γ_ZF` is also the per-MT effective gain.
pub fn baseband_zf_with_gain(f: &CMatrix, h_hat: &CMatrix) -> Result<(CMatrix, f64)> {
    check_nonzero(h_hat)?;
    let k = h_hat.ncols() as f64;
    let b = f.adjoint() * h_hat;
    let gram = b.adjoint() * &b;
    let inv = hermitian_inverse(&gram)?;
    let mut w = b * inv;
    let gamma = scale_to_power(&mut w, f, k)?;
    Ok((w, gamma))
}

/// Baseband AN precoder: orthonormal basis of `null(ĤᴴA)`, scaled so that
/// `‖AV‖_F² = L − K`.
pub fn build_baseband_an(a: &CMatrix, h_hat: &CMatrix) -> Result<CMatrix> {
    check_nonzero(h_hat)?;
    let k = h_hat.ncols();
    let l = a.ncols();
    let effective = h_hat.adjoint() * a;
    let rank = numerical_rank(&effective, DEFAULT_TOL);
    if rank < k {
        return Err(Error::RankDeficient { rank, required: k });
    }
    let mut v = null_space_basis(&effective, DEFAULT_TOL)?;
    scale_to_power(&mut v, a, (l - k) as f64)?;
    Ok(v)
}

/// Full-digital MF/ZF data precoder with an `L₃`-column null-space AN precoder.
pub fn build_full_digital(
    scheme: Scheme,
    h_hat: &CMatrix,
    an_streams: usize,
) -> Result<PrecoderSet> {
    if !scheme.is_full_digital() {
        return Err(Error::InvalidArgument(format!(
            "{scheme} is not a full-digital scheme"
        )));
    }
    check_nonzero(h_hat)?;
    let (n, k) = h_hat.shape();
    if n < k + an_streams {
        return Err(Error::InvalidArgument(format!(
            "need N − K >= L3, got N={n}, K={k}, L3={an_streams}"
        )));
    }
    let kf = k as f64;
    let w = match scheme {
        Scheme::Fmf => {
            let mut w = h_hat.clone();
            let p = w.norm_squared();
            w *= Complex64::new((kf / p).sqrt(), 0.0);
            w
        }
        _ => {
            let inv = hermitian_inverse(&(h_hat.adjoint() * h_hat))?;
            let gamma = (kf / inv.trace().re).sqrt();
            let mut w = h_hat * inv;
            w *= Complex64::new(gamma, 0.0);
            w
        }
    };
    let mut v = null_space_columns(&h_hat.adjoint(), DEFAULT_TOL, an_streams)?;
    if an_streams > 0 {
        let p = v.norm_squared();
        v *= Complex64::new((an_streams as f64 / p).sqrt(), 0.0);
    }
    Ok(PrecoderSet::new(
        scheme,
        RfStage::PassThrough(n),
        w,
        RfStage::PassThrough(n),
        v,
    ))
}

/// Output of [`build_precoders`].
#[derive(Debug, Clone)]
pub struct BuiltPrecoders {
    pub set: PrecoderSet,
    /// Present for ANA only.
    pub ins: Option<InsReport>,
}

/// Builds the precoders of `scheme` for one channel estimate.
///
/// `rng` supplies the random RF phases (hybrid) or INS starting points (ANA);
/// full-digital schemes draw nothing.
pub fn build_precoders(
    scheme: Scheme,
    cfg: &SystemConfig,
    h_hat: &CMatrix,
    ins: InsOptions,
    rng: &mut RngStream,
) -> Result<BuiltPrecoders> {
    let k = cfg.users;
    let l3 = cfg.an_streams();
    match scheme {
        Scheme::Ana => {
            check_nonzero(h_hat)?;
            let f = build_analog_data(h_hat);
            let (a, report) = build_analog_an_ins(h_hat, l3, ins, rng)?;
            let set = PrecoderSet::new(
                scheme,
                RfStage::PhaseShifters(f),
                CMatrix::identity(k, k),
                RfStage::PhaseShifters(a),
                CMatrix::identity(l3, l3),
            );
            Ok(BuiltPrecoders {
                set,
                ins: Some(report),
            })
        }
        Scheme::Hmf | Scheme::Hzf => {
            let f = build_hybrid_rf(h_hat, cfg.rf_chains, rng)?;
            let w = if scheme == Scheme::Hmf {
                build_baseband_mf(&f, h_hat)?
            } else {
                build_baseband_zf(&f, h_hat)?
            };
            let v = build_baseband_an(&f, h_hat)?;
            let set = PrecoderSet::new(
                scheme,
                RfStage::PhaseShifters(f.clone()),
                w,
                RfStage::PhaseShifters(f),
                v,
            );
            Ok(BuiltPrecoders { set, ins: None })
        }
        Scheme::Fmf | Scheme::Fzf => Ok(BuiltPrecoders {
            set: build_full_digital(scheme, h_hat, l3)?,
            ins: None,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channels;
    use crate::numkernel::sample_complex_gaussian;

    fn channel(
        n: usize,
        l: usize,
        seed: u64,
    ) -> (SystemConfig, crate::channel::ChannelRealization) {
        let cfg = SystemConfig::new(n, l, 3, 5);
        let ch = generate_channels(&cfg, &mut RngStream::new(seed, 0)).unwrap();
        (cfg, ch)
    }

    #[test]
    fn scheme_round_trips_through_str() {
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("XYZ".parse::<Scheme>().is_err());
    }

    #[test]
    fn positive_real_channel_gives_zero_phases() {
        let h = CMatrix::from_element(16, 2, Complex64::new(0.3, 0.0));
        let f = build_analog_data(&h);
        for z in f.iter() {
            assert!((z - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
        // W = I, so the data power is exactly K.
        assert!((f.norm_squared() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hybrid_rf_reduces_to_analog_when_l_equals_k() {
        let (_, ch) = channel(32, 10, 1);
        let f = build_hybrid_rf(&ch.h_hat, 3, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(f, build_analog_data(&ch.h_hat));
    }

    #[test]
    fn hybrid_rf_constant_modulus_and_rank() {
        let (_, ch) = channel(128, 10, 2);
        let f = build_hybrid_rf(&ch.h_hat, 10, &mut RngStream::new(3, 0)).unwrap();
        let target = 1.0 / 128f64.sqrt();
        assert!(f.iter().all(|z| (z.norm() - target).abs() < 1e-15));
        // Extra columns are not parallel to each other.
        assert_eq!(numerical_rank(&f, 1e-10), 10);
        assert_eq!(numerical_rank(&(ch.h_hat.adjoint() * &f), 1e-10), 3);
    }

    #[test]
    fn mf_and_zf_power_normalization() {
        let (_, ch) = channel(64, 10, 4);
        let f = build_hybrid_rf(&ch.h_hat, 10, &mut RngStream::new(5, 0)).unwrap();
        let w = build_baseband_mf(&f, &ch.h_hat).unwrap();
        assert!(((&f * &w).norm_squared() - 3.0).abs() < 1e-9);
        let w = build_baseband_zf(&f, &ch.h_hat).unwrap();
        assert!(((&f * &w).norm_squared() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zf_is_diagonal_on_estimated_channel() {
        let (_, ch) = channel(128, 10, 6);
        let f = build_hybrid_rf(&ch.h_hat, 10, &mut RngStream::new(7, 0)).unwrap();
        let (w, gamma) = baseband_zf_with_gain(&f, &ch.h_hat).unwrap();
        let g = ch.h_hat.adjoint() * &f * &w;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert!((g[(i, j)] - Complex64::new(gamma, 0.0)).norm() < 1e-9 * gamma);
                } else {
                    assert!(g[(i, j)].norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn baseband_an_nulls_estimated_channel() {
        let (_, ch) = channel(128, 10, 8);
        let a = build_hybrid_rf(&ch.h_hat, 10, &mut RngStream::new(9, 0)).unwrap();
        let v = build_baseband_an(&a, &ch.h_hat).unwrap();
        assert_eq!(v.shape(), (10, 7));
        let av = &a * &v;
        assert!((av.norm_squared() - 7.0).abs() < 1e-9);
        let resid = (ch.h_hat.adjoint() * &av).norm();
        assert!(resid < 1e-9 * ch.h_hat.norm() * a.norm());
    }

    #[test]
    fn degenerate_channel_is_rejected() {
        let h = CMatrix::zeros(16, 3);
        let f = build_analog_data(&h);
        assert!(build_baseband_mf(&f, &h).is_err());
        assert!(build_baseband_zf(&f, &h).is_err());
        assert!(build_full_digital(Scheme::Fzf, &h, 2).is_err());
    }

    #[test]
    fn baseband_an_rank_deficiency() {
        let (_, ch) = channel(16, 10, 10);
        // A with identical columns: ĤᴴA has rank 1 < K.
        let col = build_analog_data(&ch.h_hat).column(0).into_owned();
        let a = CMatrix::from_fn(16, 5, |i, _| col[i]);
        assert!(matches!(
            build_baseband_an(&a, &ch.h_hat),
            Err(Error::RankDeficient {
                rank: 1,
                required: 3
            })
        ));
    }

    #[test]
    fn ins_with_no_users_is_trivial() {
        let h = CMatrix::zeros(32, 0);
        let (a, rep) =
            build_analog_an_ins(&h, 4, InsOptions::default(), &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(a.shape(), (32, 4));
        assert!(rep.all_converged());
        assert_eq!(rep.worst_leakage(), 0.0);
    }

    #[test]
    fn ins_converges_with_constant_modulus() {
        let (_, ch) = channel(128, 10, 11);
        let (a, rep) = build_analog_an_ins(
            &ch.h_hat,
            7,
            InsOptions::default(),
            &mut RngStream::new(2, 2),
        )
        .unwrap();
        assert!(rep.all_converged(), "{rep:?}");
        assert!(rep.iterations.iter().all(|&i| i <= 500));
        let target = 1.0 / 128f64.sqrt();
        assert!(a.iter().all(|z| (z.norm() - target).abs() < 1e-15));
        for c in 0..7 {
            let leak = (ch.h_hat.adjoint() * a.column(c)).norm_squared();
            assert!(leak <= 1e-6);
            assert!((leak - rep.leakage[c]).abs() < 1e-18);
        }
    }

    #[test]
    fn ins_reports_non_convergence() {
        let (_, ch) = channel(128, 10, 12);
        let opts = InsOptions {
            tol: 1e-30,
            max_iter: 3,
        };
        let (_, rep) = build_analog_an_ins(&ch.h_hat, 2, opts, &mut RngStream::new(3, 3)).unwrap();
        assert!(!rep.all_converged());
        assert!(rep.iterations.iter().all(|&i| i == 3));
        assert!(rep.worst_leakage() > 0.0);
    }

    #[test]
    fn ins_perfect_csi_leakage_matches_true_channel() {
        // λ = 1: the estimate is the true channel.
        let h = sample_complex_gaussian(64, 3, 1.0, &mut RngStream::new(4, 0)).unwrap();
        let (a, rep) =
            build_analog_an_ins(&h, 7, InsOptions::default(), &mut RngStream::new(4, 1)).unwrap();
        let through_true = (h.adjoint() * &a)
            .column_iter()
            .map(|c| c.norm_squared())
            .collect::<Vec<_>>();
        for (x, y) in through_true.iter().zip(&rep.leakage) {
            assert!((x - y).abs() < 1e-18);
        }
    }

    #[test]
    fn every_scheme_meets_invariants() {
        let (cfg, ch) = channel(128, 10, 13);
        for s in Scheme::ALL {
            let built = build_precoders(
                s,
                &cfg,
                &ch.h_hat,
                InsOptions::default(),
                &mut RngStream::new(1, 0),
            )
            .unwrap();
            let set = &built.set;
            assert!(set.power_error() < 1e-9, "{s}: {}", set.power_error());
            assert!(set.modulus_error() < 1e-15, "{s}");
            assert_eq!(set.an_streams, 7);
            assert_eq!(set.data_precoder().shape(), (128, 3));
            assert_eq!(set.an_precoder().shape(), (128, 7));
            if s.is_hybrid() {
                assert_eq!(set.rf_data, set.rf_an);
            }
            if s != Scheme::Ana {
                let r = (ch.h_hat.adjoint() * set.an_precoder()).norm();
                assert!(
                    r < 1e-9 * ch.h_hat.norm() * set.rf_an.to_matrix().norm(),
                    "{s}"
                );
            }
        }
    }

    #[test]
    fn full_digital_needs_enough_null_directions() {
        let h = sample_complex_gaussian(8, 3, 1.0, &mut RngStream::new(5, 0)).unwrap();
        assert!(build_full_digital(Scheme::Fzf, &h, 6).is_err());
        assert!(build_full_digital(Scheme::Fzf, &h, 5).is_ok());
        assert!(build_full_digital(Scheme::Hzf, &h, 5).is_err());
    }
}
