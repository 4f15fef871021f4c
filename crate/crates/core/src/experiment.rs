//! Batch experiments: config parsing, sweeps, `φ` optimization, validation
//! and CSV output.
//!
//! Config files are flat `key = value` text. Lists are comma separated,
//! `#` starts a comment. Recognized keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `N`, `L` | antennas, RF chains (lists allowed on the sweep axis) |
//! | `K`, `M` | users, eavesdropper antennas |
//! | `P`, `P_dB` | total transmit power |
//! | `p_tau`, `p_tau_dB`, `tau` | pilot power and length |
//! | `lambda` | CSI quality; overrides the pilot settings |
//! | `noise`, `beta`, `beta_eve` | noise power, MT and Eve path loss |
//! | `phi` | power split (list allowed for `sweep-phi`) |
//! | `schemes` | subset of `ANA,HMF,HZF,FMF,FZF` |
//! | `trials`, `seed`, `workers` | ensemble settings |
//! | `grid_step`, `refine` | `φ` search |
//! | `ins_tol`, `ins_max_iter` | INS solver |
//! | `tol.<check>` | tolerance override for a `validate` check |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::channel::{validate_config, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics::{eve_capacity_bound, ordering_check};
use crate::montecarlo::{run_ensemble, EnsembleResult, EnsembleSpec, DEFAULT_TRIALS};
use crate::optimizer::{optimize_phi, phi_grid, secrecy_at, PhiSearchSpec};
use crate::precoder::{InsOptions, Scheme};

pub const SWEEP_N_HEADER: &str =
    "N,scheme,secrecy_cf,secrecy_mc,secrecy_mc_stderr,rate_cf,rate_mc,eve_bound,eve_mc";
pub const SWEEP_PHI_HEADER: &str = "L,scheme,phi,secrecy_cf,eve_bound,bound_valid";
pub const OPTIMIZE_PHI_HEADER: &str = "L,scheme,phi,secrecy_cf";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub antennas: Vec<usize>,
    pub rf_chains: Vec<usize>,
    pub users: usize,
    pub eve_antennas: usize,
    pub total_power: f64,
    pub pilot_power: f64,
    pub pilot_len: Option<usize>,
    pub lambda: Option<f64>,
    pub noise_power: f64,
    pub path_loss: f64,
    pub eve_path_loss: f64,
    pub phi: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub grid_step: f64,
    pub refine: bool,
    pub ins: InsOptions,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    /// `N = 128`, `L = 10`, `K = 3`, `M = 5`, `P = 10 dB`, `p_τ = 0 dB`, `φ = 0.5`.
    fn default() -> Self {
        Self {
            antennas: vec![128],
            rf_chains: vec![10],
            users: 3,
            eve_antennas: 5,
            total_power: 10.0,
            pilot_power: 1.0,
            pilot_len: None,
            lambda: None,
            noise_power: 1.0,
            path_loss: 1.0,
            eve_path_loss: 1.0,
            phi: vec![0.5],
            schemes: Scheme::ALL.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            workers: None,
            grid_step: 0.01,
            refine: false,
            ins: InsOptions::default(),
            tolerances: BTreeMap::new(),
        }
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn parse_list<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<Vec<T>> {
    let items: std::result::Result<Vec<T>, _> =
        v.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(x) if !x.is_empty() => Ok(x),
        _ => Err(Error::Parse {
            line,
            msg: format!("bad value for {key}: {v:?}"),
        }),
    }
}

fn parse_one<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
    let mut l = parse_list::<T>(v, line, key)?;
    if l.len() != 1 {
        return Err(Error::Parse {
            line,
            msg: format!("{key} takes a single value"),
        });
    }
    Ok(l.remove(0))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected key = value, got {body:?}"),
                });
            };
            let (key, v) = (key.trim(), value.trim());
            match key {
                "N" => c.antennas = parse_list(v, line, key)?,
                "L" => c.rf_chains = parse_list(v, line, key)?,
                "K" => c.users = parse_one(v, line, key)?,
                "M" => c.eve_antennas = parse_one(v, line, key)?,
                "P" => c.total_power = parse_one(v, line, key)?,
                "P_dB" => c.total_power = db(parse_one(v, line, key)?),
                "p_tau" => c.pilot_power = parse_one(v, line, key)?,
                "p_tau_dB" => c.pilot_power = db(parse_one(v, line, key)?),
                "tau" => c.pilot_len = Some(parse_one(v, line, key)?),
                "lambda" => c.lambda = Some(parse_one(v, line, key)?),
                "noise" => c.noise_power = parse_one(v, line, key)?,
                "beta" => c.path_loss = parse_one(v, line, key)?,
                "beta_eve" => c.eve_path_loss = parse_one(v, line, key)?,
                "phi" => c.phi = parse_list(v, line, key)?,
                "schemes" => c.schemes = parse_list(v, line, key)?,
                "trials" => c.trials = parse_one(v, line, key)?,
                "seed" => c.seed = parse_one(v, line, key)?,
                "workers" => c.workers = Some(parse_one(v, line, key)?),
                "grid_step" => c.grid_step = parse_one(v, line, key)?,
                "refine" => c.refine = parse_one(v, line, key)?,
                "ins_tol" => c.ins.tol = parse_one(v, line, key)?,
                "ins_max_iter" => c.ins.max_iter = parse_one(v, line, key)?,
                k if k.starts_with("tol.") => {
                    c.tolerances
                        .insert(k["tol.".len()..].to_string(), parse_one(v, line, key)?);
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        if let Some(l) = c.lambda {
            if !(0.0..1.0).contains(&l) {
                return Err(Error::InvalidArgument(format!(
                    "lambda must lie in [0, 1), got {l}"
                )));
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// System configuration at one point of the sweep.
    pub fn system(&self, antennas: usize, rf_chains: usize, phi: f64) -> SystemConfig {
        let mut cfg = SystemConfig::new(antennas, rf_chains, self.users, self.eve_antennas);
        cfg.total_power = self.total_power;
        cfg.phi = phi;
        cfg.pilot_power = self.pilot_power;
        cfg.pilot_len = self.pilot_len.unwrap_or(self.users);
        cfg.noise_power = self.noise_power;
        cfg.path_loss = vec![self.path_loss; self.users];
        cfg.eve_path_loss = self.eve_path_loss;
        match self.lambda {
            Some(l) if self.path_loss == 1.0 => cfg.with_lambda(l),
            Some(l) => {
                cfg.pilot_power = l / (1.0 - l) / (cfg.pilot_len as f64 * self.path_loss);
                cfg
            }
            None => cfg,
        }
    }

    fn single<T: Copy>(list: &[T], name: &str) -> Result<T> {
        match list {
            [x] => Ok(*x),
            _ => Err(Error::InvalidArgument(format!(
                "{name} must be a single value for this command"
            ))),
        }
    }

    fn ensemble(&self, cfg: SystemConfig, scheme: Scheme) -> EnsembleSpec {
        let mut spec = EnsembleSpec::new(cfg, scheme, self.trials, self.seed);
        spec.ins = self.ins;
        spec.workers = self.workers;
        spec
    }

    fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes; empty for missing values.
fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v == 0.0 || (1e-4..1e15).contains(&v.abs()) => format!("{v}"),
        Some(v) if v.is_finite() => format!("{v:e}"),
        Some(v) => format!("{v}").to_lowercase(),
        None => String::new(),
    }
}

/// Writes `contents` through a temporary sibling file and renames it into
/// place, so a failed write never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.partial", name.to_string_lossy()));
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

/// CSV text plus warnings for stderr.
#[derive(Debug, Clone, Default)]
pub struct CsvOutput {
    pub csv: String,
    pub warnings: Vec<String>,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

fn warn_unreliable(out: &mut CsvOutput, what: &str, r: &EnsembleResult) {
    if r.failures.count > 0 {
        out.warnings.push(format!(
            "{what}: {} of {} trials dropped {:?}{}",
            r.failures.count,
            r.n_trials,
            r.failures.reasons,
            if r.unreliable { " (unreliable)" } else { "" }
        ));
    }
}

/// Secrecy and rate per `(N, scheme)`.
pub fn sweep_n(x: &ExperimentConfig) -> Result<CsvOutput> {
    let l = ExperimentConfig::single(&x.rf_chains, "L")?;
    let phi = ExperimentConfig::single(&x.phi, "phi")?;
    for &n in &x.antennas {
        x.system(n, l, phi).check(true)?;
    }
    let mut out = CsvOutput::default();
    out.csv.push_str(SWEEP_N_HEADER);
    out.csv.push('\n');
    for &n in &x.antennas {
        for &s in &x.schemes {
            let r = run_ensemble(&x.ensemble(x.system(n, l, phi), s).with_eve(true))?;
            warn_unreliable(&mut out, &format!("N={n} {s}"), &r);
            let rr = &r.rate_report;
            writeln!(
                out.csv,
                "{n},{s},{},{},{},{},{},{},{}",
                num(rr.mean_secrecy_cf()),
                num(rr.mean_secrecy_mc()),
                num(rr.secrecy_mc_stderr),
                num(Some(rr.mean_rate_cf())),
                num(Some(rr.mean_rate_mc())),
                num(rr.eve_bound),
                num(rr.mean_eve_mc()),
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Closed-form secrecy over `(L, scheme, φ)`. Points outside the bound's
/// domain get secrecy 0 and `bound_valid = 0`.
pub fn sweep_phi(x: &ExperimentConfig) -> Result<CsvOutput> {
    let n = ExperimentConfig::single(&x.antennas, "N")?;
    let phis = if x.phi.len() > 1 {
        x.phi.clone()
    } else {
        phi_grid(x.grid_step)
    };
    for &l in &x.rf_chains {
        x.system(n, l, 0.5).check(false)?;
    }
    for &p in &phis {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "phi must lie in (0, 1], got {p}"
            )));
        }
    }
    let mut out = CsvOutput::default();
    out.csv.push_str(SWEEP_PHI_HEADER);
    out.csv.push('\n');
    for &l in &x.rf_chains {
        for &s in &x.schemes {
            for &p in &phis {
                let cfg = x.system(n, l, p);
                let (sec, bound, valid) = match eve_capacity_bound(&cfg) {
                    Ok(b) => (secrecy_at(&cfg, s, p)?, Some(b), 1),
                    Err(Error::Domain(_)) => (0.0, None, 0),
                    Err(e) => return Err(e),
                };
                writeln!(
                    out.csv,
                    "{l},{s},{},{},{},{valid}",
                    num(Some(p)),
                    num(Some(sec)),
                    num(bound)
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}

/// `φ*` per `(L, scheme)`; the CSV holds the full curves.
pub fn optimize(x: &ExperimentConfig) -> Result<CsvOutput> {
    let n = ExperimentConfig::single(&x.antennas, "N")?;
    let mut out = CsvOutput::default();
    out.csv.push_str(OPTIMIZE_PHI_HEADER);
    out.csv.push('\n');
    for &l in &x.rf_chains {
        for &s in &x.schemes {
            let spec = PhiSearchSpec {
                cfg: x.system(n, l, 0.5),
                scheme: s,
                grid_step: x.grid_step,
                refine: x.refine,
            };
            let opt = optimize_phi(&spec)?;
            for (p, v) in &opt.curve {
                writeln!(out.csv, "{l},{s},{},{}", num(Some(*p)), num(Some(*v))).unwrap();
            }
            out.summary.push(format!(
                "{s}, {l}, {}, {}{}",
                num(Some(opt.phi_star)),
                num(Some(opt.secrecy_star)),
                if opt.zero_secrecy {
                    " (zero secrecy on the whole grid)"
                } else {
                    ""
                }
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Reported but not counted toward the exit status.
    pub informational: bool,
    pub note: String,
}

impl CheckOutcome {
    fn line(&self) -> String {
        let status = match (self.passed, self.informational) {
            (true, _) => "PASS",
            (false, true) => "INFO",
            (false, false) => "FAIL",
        };
        let mut s = format!(
            "{status} {} measured={} tol={}",
            self.name,
            num(Some(self.measured)),
            num(Some(self.tolerance))
        );
        if !self.note.is_empty() {
            s.push_str("  ");
            s.push_str(&self.note);
        }
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        let failed = self
            .checks
            .iter()
            .filter(|c| !c.passed && !c.informational)
            .count();
        writeln!(s, "{} checks, {failed} failed", self.checks.len()).unwrap();
        s
    }

    fn push(
        &mut self,
        x: &ExperimentConfig,
        name: &str,
        measured: f64,
        default_tol: f64,
        note: String,
    ) {
        let tolerance = x.tolerance(name, default_tol);
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            informational: false,
            note,
        });
    }

    fn push_info(
        &mut self,
        x: &ExperimentConfig,
        name: &str,
        measured: f64,
        default_tol: f64,
        note: String,
    ) {
        self.push(x, name, measured, default_tol, note);
        self.checks.last_mut().unwrap().informational = true;
    }

    fn push_min(
        &mut self,
        x: &ExperimentConfig,
        name: &str,
        measured: f64,
        default_tol: f64,
        note: String,
    ) {
        let tolerance = x.tolerance(name, default_tol);
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured >= tolerance,
            informational: false,
            note,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs the invariant and agreement checks at the configured operating point.
///
/// Structural problems with the configuration are reported as a failed
/// `config` check, not as an error.
pub fn validate(x: &ExperimentConfig) -> Result<ValidationReport> {
    let n = ExperimentConfig::single(&x.antennas, "N")?;
    let l = ExperimentConfig::single(&x.rf_chains, "L")?;
    let phi = ExperimentConfig::single(&x.phi, "phi")?;
    let cfg = x.system(n, l, phi);
    let mut rep = ValidationReport::default();

    let violations = validate_config(&cfg, true);
    let names: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    rep.push(x, "config", violations.len() as f64, 0.0, names.join("; "));
    if !violations.is_empty() {
        return Ok(rep);
    }

    let mut modulus: f64 = 0.0;
    let mut power: f64 = 0.0;
    let mut null_space: f64 = 0.0;
    let mut zf: f64 = 0.0;
    let bound = eve_capacity_bound(&cfg)?;
    for &s in &x.schemes {
        let r = run_ensemble(&x.ensemble(cfg.clone(), s).with_eve(true))?;
        let d = &r.diagnostics;
        modulus = modulus.max(d.max_modulus_error);
        power = power.max(d.max_power_error);
        if s != Scheme::Ana {
            null_space = null_space.max(d.max_an_residual);
        }
        if s.is_zero_forcing() {
            zf = zf.max(d.max_zf_offdiag);
        }
        let name = s.as_str().to_lowercase();
        rep.push(
            x,
            &format!("{name}.dropped_trials"),
            r.failures.count as f64 / r.n_trials as f64,
            0.01,
            format!("{:?}", r.failures.reasons),
        );
        let rr = &r.rate_report;
        // HMF's closed form carries the approximate interference term below,
        // so its rate agreement is reported without gating.
        let push_rate = if s == Scheme::Hmf {
            ValidationReport::push_info
        } else {
            ValidationReport::push
        };
        push_rate(
            &mut rep,
            x,
            &format!("{name}.rate_mc_vs_cf"),
            rel(rr.mean_rate_mc(), rr.mean_rate_cf()),
            0.10,
            format!(
                "mc={} cf={}",
                num(Some(rr.mean_rate_mc())),
                num(Some(rr.mean_rate_cf()))
            ),
        );
        let eve = rr.mean_eve_mc().unwrap_or(f64::NAN);
        rep.push(
            x,
            &format!("{name}.eve_above_bound"),
            eve - bound,
            0.1,
            format!("mc={} bound={}", num(Some(eve)), num(Some(bound))),
        );
        let lam = cfg.lambda(0);
        let k1 = (cfg.users - 1) as f64;
        let mean_int = r.stats.iter().map(|t| t.total_interference()).sum::<f64>()
            / (cfg.users as f64 * k1.max(1.0));
        let mean_leak = r.stats.iter().map(|t| t.an_leakage).sum::<f64>() / cfg.users as f64;
        let mean_sig = r.stats.iter().map(|t| t.signal_amp).sum::<f64>() / cfg.users as f64;
        let mean_gain = r.estimated_gain.iter().map(|g| g.0).sum::<f64>() / cfg.users as f64;
        let l3 = cfg.an_streams() as f64;
        match s {
            Scheme::Ana => {
                let oracle = (std::f64::consts::PI * n as f64 * lam).sqrt() / 2.0;
                rep.push(
                    x,
                    "ana.signal",
                    rel(mean_sig, oracle),
                    0.02,
                    format!("oracle={}", num(Some(oracle))),
                );
                let ins = d.ins_converged_columns as f64 / d.ins_columns.max(1) as f64;
                rep.push_min(x, "ana.ins_converged_fraction", ins, 0.99, String::new());
                rep.push(
                    x,
                    "ana.ins_leakage",
                    d.ins_worst_converged_leakage,
                    x.ins.tol,
                    String::new(),
                );
            }
            Scheme::Hzf => {
                let oracle = (std::f64::consts::FRAC_PI_4 * lam * (n as f64 - 1.0)).sqrt();
                rep.push(
                    x,
                    "hzf.gain",
                    rel(mean_gain, oracle),
                    0.03,
                    format!("oracle={}", num(Some(oracle))),
                );
                if k1 > 0.0 {
                    rep.push(
                        x,
                        "hzf.interference",
                        rel(mean_int, 1.0 - lam),
                        0.05,
                        String::new(),
                    );
                }
                rep.push(
                    x,
                    "hzf.an_leakage",
                    rel(mean_leak, l3 * (1.0 - lam)),
                    0.05,
                    String::new(),
                );
            }
            Scheme::Hmf if k1 > 0.0 => {
                rep.push_info(
                    x,
                    "hmf.interference",
                    rel(mean_int, 2.0),
                    0.10,
                    format!("mc={} approximation=2", num(Some(mean_int))),
                );
            }
            _ => {}
        }
    }
    rep.push(x, "constant_modulus", modulus, 1e-15, String::new());
    rep.push(x, "power_normalization", power, 1e-9, String::new());
    rep.push(x, "an_null_space", null_space, 1e-9, String::new());
    rep.push(x, "zf_orthogonality", zf, 1e-9, String::new());

    let ord = ordering_check(&cfg)?;
    rep.push(
        x,
        "ordering.threshold",
        if ord.threshold_consistent() { 0.0 } else { 1.0 },
        0.0,
        format!(
            "hzf_beats_hmf={} threshold={}",
            ord.hzf_beats_hmf,
            num(Some(ord.hzf_threshold))
        ),
    );
    rep.push(
        x,
        "ordering.zf_chain",
        if ord.zf_chain { 0.0 } else { 1.0 },
        0.0,
        "FZF > HZF > ANA".into(),
    );
    rep.push(
        x,
        "ordering.mf_chain",
        if ord.mf_chain { 0.0 } else { 1.0 },
        0.0,
        "FMF > ANA > HMF".into(),
    );

    let trials = x.trials.min(200);
    let scheme = x.schemes.first().copied().unwrap_or(Scheme::Hzf);
    let mut spec = EnsembleSpec::new(cfg.clone(), scheme, trials, x.seed).with_eve(true);
    spec.ins = x.ins;
    let a = run_ensemble(&spec.clone().with_workers(1))?;
    let b = run_ensemble(&spec.with_workers(4))?;
    let same = format!("{:?}", a) == format!("{:?}", b);
    rep.push(
        x,
        "determinism",
        if same { 0.0 } else { 1.0 },
        0.0,
        format!("{scheme}, {trials} trials, 1 vs 4 workers"),
    );
    Ok(rep)
}
