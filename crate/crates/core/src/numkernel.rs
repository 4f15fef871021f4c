//! Complex linear-algebra and random-sampling primitives.
//!
//! Everything in the crate stores matrices as [`CMatrix`], a dense column-major
//! `nalgebra` matrix of `Complex64`. Random draws go through [`RngStream`], a
//! ChaCha8 generator addressed by `(master_seed, stream_id)` so that Monte Carlo
//! trial `t` always sees the same samples no matter which worker runs it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative singular-value threshold used for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Deterministic random stream addressed by `(master_seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A statistically independent stream with the same `stream_id`, keyed by `salt`.
    ///
    /// Used to give precoder randomness its own sequence so that channel draws
    /// stay identical across schemes run with the same seed.
    pub fn fork(&self, salt: u64) -> RngStream {
        RngStream::new(
            splitmix64(self.master_seed ^ splitmix64(salt)),
            self.stream_id,
        )
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// i.i.d. circularly-symmetric CN(0, `variance`) entries, drawn column by column.
pub fn sample_complex_gaussian(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut RngStream,
) -> Result<CMatrix> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "variance must be finite and non-negative, got {variance}"
        )));
    }
    let scale = (variance / 2.0).sqrt();
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(scale * re, scale * im)
        })
        .collect();
    Ok(CMatrix::from_vec(rows, cols, data))
}

/// Uniform phases on `[0, 2π)` with modulus `1/√n`.
pub fn random_phase_matrix(rows: usize, cols: usize, n: usize, rng: &mut RngStream) -> CMatrix {
    let amp = 1.0 / (n as f64).sqrt();
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            Complex64::from_polar(amp, std::f64::consts::TAU * u)
        })
        .collect();
    CMatrix::from_vec(rows, cols, data)
}

/// Maps every entry to `(1/√n)·e^{j·arg(entry)}`; zero entries take phase 0.
pub fn phase_only_project(m: &CMatrix, n: usize) -> CMatrix {
    let amp = 1.0 / (n as f64).sqrt();
    m.map(|z| unit_phase(z) * amp)
}

#[inline]
pub(crate) fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Orthonormal basis of the null space of the `k×n` matrix `m` (`k < n`).
///
/// Rank is decided from the singular values: those at or below
/// `tol·σ_max` count as zero. A full-row-rank `m` yields `n − k` columns.
pub fn null_space_basis(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (k, n) = m.shape();
    null_space_columns(m, tol, n.saturating_sub(k))
}

/// First `count` columns of the null-space basis of `m`.
///
/// Same rank decision as [`null_space_basis`]; cheaper when only a few
/// null directions are needed out of many.
pub fn null_space_columns(m: &CMatrix, tol: f64, count: usize) -> Result<CMatrix> {
    let (k, n) = m.shape();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "null space needs more columns than rows, got {k}x{n}"
        )));
    }
    if count > n - k {
        return Err(Error::InvalidArgument(format!(
            "requested {count} null directions, only {} available",
            n - k
        )));
    }
    if k == 0 {
        return Ok(CMatrix::identity(n, count));
    }
    let svd = m.clone().svd(false, true);
    let smax = svd.singular_values.max();
    let rank = if smax > 0.0 {
        svd.singular_values
            .iter()
            .filter(|&&s| s > tol * smax)
            .count()
    } else {
        0
    };
    if rank < k {
        return Err(Error::RankDeficient { rank, required: k });
    }
    let row_space = svd
        .v_t
        .expect("right singular vectors were requested")
        .adjoint();
    Ok(orthonormal_complement(&row_space, count))
}

/// `count` orthonormal vectors orthogonal to the columns of `basis`.
///
/// Completes a Householder QR of `basis` and returns columns `r..r+count`
/// of the full unitary factor, where `r = basis.ncols()`.
fn orthonormal_complement(basis: &CMatrix, count: usize) -> CMatrix {
    let (n, r) = basis.shape();
    let mut work = basis.clone();
    let mut reflectors: Vec<(usize, DVector<Complex64>, f64)> = Vec::with_capacity(r);

    for j in 0..r {
        let x = work.view((j, j), (n - j, 1)).column(0).into_owned();
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = -unit_phase(x[0]) * norm;
        let mut v = x;
        v[0] -= alpha;
        let vv = v.norm_squared();
        if vv == 0.0 {
            continue;
        }
        for c in j..r {
            let mut col = work.view_mut((j, c), (n - j, 1));
            let s = v.dotc(&col.column(0));
            col.column_mut(0)
                .axpy(-2.0 * s / vv, &v, Complex64::new(1.0, 0.0));
        }
        reflectors.push((j, v, vv));
    }

    let mut out = CMatrix::zeros(n, count);
    for i in 0..count {
        let mut e = DVector::<Complex64>::zeros(n);
        e[r + i] = Complex64::new(1.0, 0.0);
        for (j, v, vv) in reflectors.iter().rev() {
            let mut tail = e.rows_mut(*j, n - j);
            let s = v.dotc(&tail);
            tail.axpy(-2.0 * s / *vv, v, Complex64::new(1.0, 0.0));
        }
        out.set_column(i, &e);
    }
    out
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hermitian_inverse(g: &CMatrix) -> Result<CMatrix> {
    match g.clone().cholesky() {
        Some(ch) => {
            let inv = ch.inverse();
            if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                Ok(inv)
            } else {
                Err(Error::Singular {
                    condition: condition_estimate(g),
                })
            }
        }
        None => Err(Error::Singular {
            condition: condition_estimate(g),
        }),
    }
}

/// Ratio of extreme singular values; infinite for an exactly singular matrix.
pub fn condition_estimate(g: &CMatrix) -> f64 {
    let s = g.singular_values();
    let (lo, hi) = (s.min(), s.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Numerical rank with the same relative threshold as [`null_space_basis`].
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.singular_values();
    let smax = s.max();
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * smax).count()
}
