//! Closed forms for non-backtracking walks on d-regular graphs.
//!
//! The number of non-backtracking walks of length `k` between two vertices is
//! a polynomial in the adjacency matrix,
//! `A^(k) = sqrt(d (d-1)^(k-1)) q_k(A / (2 sqrt(d-1)))`, where `q_k` mixes
//! Chebyshev polynomials of the second kind. Evaluating `q_k` at the
//! normalised adjacency eigenvalues gives the spectrum of the `k`-step
//! transition matrix, and its growth rate off `[-1, 1]` is `ψ`.

use std::fmt::Debug;
use std::io::Write;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::RegularGraph;
use crate::numfmt::format_sig;
use crate::spectra::Spectrum;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("ψ is defined on [0, ∞), got {0}")]
    NegativeInput(f64),
    #[error("λ = {lambda} outside [0, d = {d}]")]
    LambdaOutOfRange { lambda: f64, d: usize },
    #[error("degree {d} below the minimum of {min}")]
    DegreeTooSmall { d: usize, min: usize },
    #[error("walk length must be at least 1")]
    ZeroLength,
    #[error("walk counts of length {k} overflow the integer type")]
    OverflowRisk { k: usize },
}

/// Chebyshev polynomial of the second kind `U_k(x)` for `k >= -1`, by the
/// forward recurrence `U_{k+1} = 2x U_k - U_{k-1}` from `U_{-1} = 0`,
/// `U_0 = 1`. Overflows to infinity for large `k` when `|x| > 1`.
pub fn chebyshev_u<T: Scalar>(k: i64, x: T) -> T {
    assert!(k >= -1, "U_k is defined for k >= -1");
    chebyshev_pair(k, x).1
}

/// `(U_{k-1}(x), U_k(x))`.
fn chebyshev_pair<T: Scalar>(k: i64, x: T) -> (T, T) {
    let two_x = x + x;
    let (mut prev, mut cur) = (T::zero(), T::one());
    if k == -1 {
        return (T::zero(), T::zero());
    }
    for _ in 0..k {
        let next = two_x * cur - prev;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// `q_k(x) = sqrt((d-1)/d) U_k(x) - U_{k-2}(x) / sqrt(d (d-1))` for `k >= 1`.
pub fn q_k<T: Scalar>(k: usize, x: T, d: usize) -> T {
    assert!(k >= 1, "q_k is defined for k >= 1");
    assert!(d >= 2, "q_k needs d >= 2");
    let df = T::from_usize_lossy(d);
    let dm1 = df - T::one();
    let u_k = chebyshev_u(k as i64, x);
    let u_km2 = chebyshev_u(k as i64 - 2, x);
    (dm1 / df).sqrt() * u_k - u_km2 / (df * dm1).sqrt()
}

/// `ψ(x) = x + sqrt(x^2 - 1)` for `x >= 1` and `1` on `[0, 1]`.
pub fn psi<T: Scalar>(x: T) -> Result<T, KernelError> {
    if x < T::zero() || x.is_nan() {
        return Err(KernelError::NegativeInput(x.to_f64_lossy()));
    }
    if x <= T::one() {
        return Ok(T::one());
    }
    Ok(x + (x * x - T::one()).sqrt())
}

/// Simple and non-backtracking mixing rates of an `(n, d, λ)`-graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair<T> {
    pub lambda: T,
    pub d: usize,
    /// `λ / d`.
    pub rho: T,
    /// `ψ(λ / (2 sqrt(d-1))) / sqrt(d-1)`.
    pub rho_nb: T,
}

impl<T: Scalar> RatePair<T> {
    /// `rho_nb / rho`; infinite when `λ = 0`.
    pub fn ratio(&self) -> T {
        if self.rho == T::zero() {
            T::infinity()
        } else {
            self.rho_nb / self.rho
        }
    }

    /// `2 sqrt(d-1)`, the Ramanujan threshold.
    pub fn ramanujan_bound(&self) -> T {
        ramanujan_bound(self.d)
    }

    /// `λ <= 2 sqrt(d-1)`.
    pub fn is_ramanujan(&self) -> bool {
        self.lambda <= self.ramanujan_bound()
    }

    /// `d / (2(d-1))`, the smallest possible `rho_nb / rho` above the
    /// Ramanujan threshold.
    pub fn min_ratio(&self) -> T {
        let d = T::from_usize_lossy(self.d);
        d / (T::lit(2.0) * (d - T::one()))
    }
}

pub fn ramanujan_bound<T: Scalar>(d: usize) -> T {
    T::lit(2.0) * (T::from_usize_lossy(d) - T::one()).sqrt()
}

/// Theoretical mixing rates for a given `λ` and degree `d >= 3`.
///
/// `λ` may exceed `d` by a relative `1e-12` (eigensolver noise) and is then
/// clamped to `d`.
pub fn rates<T: Scalar>(lambda: T, d: usize) -> Result<RatePair<T>, KernelError> {
    if d < 3 {
        return Err(KernelError::DegreeTooSmall { d, min: 3 });
    }
    let df = T::from_usize_lossy(d);
    if lambda.is_nan() || lambda < T::zero() || lambda > df * (T::one() + T::lit(1e-12)) {
        return Err(KernelError::LambdaOutOfRange {
            lambda: lambda.to_f64_lossy(),
            d,
        });
    }
    let lambda = lambda.min(df);
    let sqrt_dm1 = (df - T::one()).sqrt();
    let rho_nb = psi(lambda / (T::lit(2.0) * sqrt_dm1))? / sqrt_dm1;
    Ok(RatePair {
        lambda,
        d,
        rho: lambda / df,
        rho_nb,
    })
}

/// Integer types that can hold exact walk counts.
pub trait CountScalar:
    Clone
    + Debug
    + PartialEq
    + Ord
    + Zero
    + One
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
}

impl<I> CountScalar for I where
    I: Clone
        + Debug
        + PartialEq
        + Ord
        + Zero
        + One
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
{
}

/// `A^(k)`: entry `(u, v)` counts non-backtracking walks of length `k` from
/// `u` to `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct NbCountMatrix<I> {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// Row-major `n x n`.
    pub entries: Vec<I>,
}

impl<I: CountScalar> NbCountMatrix<I> {
    pub fn get(&self, u: usize, v: usize) -> &I {
        &self.entries[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[I] {
        &self.entries[u * self.n..(u + 1) * self.n]
    }

    pub fn row_sum(&self, u: usize) -> Option<I> {
        self.row(u)
            .iter()
            .try_fold(I::zero(), |acc, x| acc.checked_add(x))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| (u + 1..self.n).all(|v| self.get(u, v) == self.get(v, u)))
    }

    /// `d (d-1)^(k-1)`, the number of non-backtracking walks of length `k`
    /// from any vertex.
    pub fn walks_per_vertex(&self) -> I {
        walks_per_vertex(self.d, self.k).expect("checked at construction")
    }

    /// `A^(k)_{uv} / (d (d-1)^(k-1))`, the k-step transition probability.
    pub fn probability(&self, u: usize, v: usize) -> f64 {
        let num = self.get(u, v).to_f64().unwrap_or(f64::NAN);
        num / self.walks_per_vertex().to_f64().unwrap_or(f64::NAN)
    }

    /// `max_{u,v} |A^(k)_{uv} / N - 1/n|` with `N = d (d-1)^(k-1)`. The
    /// numerator `|n A^(k)_{uv} - N|` is formed exactly in `I`.
    pub fn max_deviation(&self) -> Result<f64, KernelError> {
        let overflow = || KernelError::OverflowRisk { k: self.k };
        let total = self.walks_per_vertex();
        let n_i = I::from_usize(self.n).ok_or_else(overflow)?;
        let mut worst = I::zero();
        for x in &self.entries {
            let scaled = x.checked_mul(&n_i).ok_or_else(overflow)?;
            let diff = if scaled >= total {
                scaled.checked_sub(&total)
            } else {
                total.checked_sub(&scaled)
            }
            .ok_or_else(overflow)?;
            if diff > worst {
                worst = diff;
            }
        }
        let denom = total.to_f64().unwrap_or(f64::NAN) * self.n as f64;
        Ok(worst.to_f64().unwrap_or(f64::NAN) / denom)
    }

    /// Entries of `A^(k) - d (d-1)^(k-1) J / n`, formed exactly as
    /// `n a - N` in `I` before the single division.
    pub fn centered(&self) -> Result<Vec<f64>, KernelError> {
        let overflow = || KernelError::OverflowRisk { k: self.k };
        let total = self.walks_per_vertex();
        let n_i = I::from_usize(self.n).ok_or_else(overflow)?;
        let n_f = self.n as f64;
        self.entries
            .iter()
            .map(|x| {
                let scaled = x.checked_mul(&n_i).ok_or_else(overflow)?;
                let (diff, sign) = if scaled >= total {
                    (scaled.checked_sub(&total), 1.0)
                } else {
                    (total.checked_sub(&scaled), -1.0)
                };
                let diff = diff.ok_or_else(overflow)?;
                Ok(sign * diff.to_f64().unwrap_or(f64::NAN) / n_f)
            })
            .collect()
    }

    pub fn to_f64_matrix(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// `d (d-1)^(k-1)` in `I`, `None` on overflow.
pub fn walks_per_vertex<I: CountScalar>(d: usize, k: usize) -> Option<I> {
    if k == 0 {
        return Some(I::one());
    }
    let d_i = I::from_usize(d)?;
    let dm1 = I::from_usize(d - 1)?;
    (1..k).try_fold(d_i, |acc, _| acc.checked_mul(&dm1))
}

/// Iterator over `A^(1), A^(2), ...` by the recurrence
/// `A^(1) = A`, `A^(2) = A^2 - d I`, `A^(k+1) = A A^(k) - (d-1) A^(k-1)`,
/// in exact integer arithmetic. Yields an error and stops once a count would
/// overflow `I`.
pub struct NbCountSequence<'g, I> {
    g: &'g RegularGraph,
    prev: Option<Vec<I>>,
    cur: Option<Vec<I>>,
    k: usize,
    failed: bool,
}

impl<'g, I: CountScalar> NbCountSequence<'g, I> {
    pub fn new(g: &'g RegularGraph) -> Self {
        NbCountSequence {
            g,
            prev: None,
            cur: None,
            k: 0,
            failed: false,
        }
    }

    fn step(&mut self) -> Result<Vec<I>, KernelError> {
        let g = self.g;
        let (n, d) = (g.n(), g.d());
        let k_next = self.k + 1;
        let overflow = KernelError::OverflowRisk { k: k_next };
        // every intermediate entry is bounded by d times the next row sum
        walks_per_vertex::<I>(d, k_next)
            .and_then(|t| t.checked_mul(&I::from_usize(d)?))
            .ok_or(overflow.clone())?;
        let next = match self.cur.take() {
            None => g.adjacency_matrix::<I>(),
            Some(cur) => {
                let (coef, subtract_identity) = match &self.prev {
                    None => (I::from_usize(d).ok_or(overflow.clone())?, true),
                    Some(_) => (I::from_usize(d - 1).ok_or(overflow.clone())?, false),
                };
                let mut next = vec![I::zero(); n * n];
                for u in 0..n {
                    let out = &mut next[u * n..(u + 1) * n];
                    for &w in g.neighbors(u) {
                        for (o, x) in out.iter_mut().zip(&cur[w * n..(w + 1) * n]) {
                            *o = o.checked_add(x).ok_or(overflow.clone())?;
                        }
                    }
                    if subtract_identity {
                        out[u] = out[u].checked_sub(&coef).ok_or(overflow.clone())?;
                    } else {
                        let prev = self.prev.as_ref().unwrap();
                        for (o, p) in out.iter_mut().zip(&prev[u * n..(u + 1) * n]) {
                            let t = p.checked_mul(&coef).ok_or(overflow.clone())?;
                            *o = o.checked_sub(&t).ok_or(overflow.clone())?;
                        }
                    }
                }
                self.prev = Some(cur);
                next
            }
        };
        self.cur = Some(next.clone());
        self.k = k_next;
        Ok(next)
    }
}

impl<I: CountScalar> Iterator for NbCountSequence<'_, I> {
    type Item = Result<NbCountMatrix<I>, KernelError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.step() {
            Ok(entries) => Some(Ok(NbCountMatrix {
                k: self.k,
                n: self.g.n(),
                d: self.g.d(),
                entries,
            })),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Exact `A^(k)` for `k >= 1`.
pub fn nb_count_matrix<I: CountScalar>(
    g: &RegularGraph,
    k: usize,
) -> Result<NbCountMatrix<I>, KernelError> {
    if k == 0 {
        return Err(KernelError::ZeroLength);
    }
    let mut seq = NbCountSequence::new(g);
    for _ in 1..k {
        seq.next().expect("sequence yields until an error")?;
    }
    seq.next().expect("sequence yields until an error")
}

/// `sqrt(d (d-1)^(k-1)) q_k(A / (2 sqrt(d-1)))` evaluated through an
/// eigendecomposition of `A`: `sum_i f(λ_i) v_i v_i^T`. `vectors[i]` must be
/// the unit eigenvector of `spectrum.eigenvalues[i]`.
pub fn nb_count_spectral<T: Scalar>(
    d: usize,
    k: usize,
    spectrum: &Spectrum<T>,
    vectors: &[Vec<T>],
) -> Vec<T> {
    spectral_sum(d, k, spectrum, vectors, 0)
}

/// [`nb_count_spectral`] without the top eigenpair, i.e.
/// `A^(k) - d (d-1)^(k-1) J / n` for a connected graph. Compare with
/// [`NbCountMatrix::centered`]; the large rank-one term then never passes
/// through floating point.
pub fn nb_count_spectral_centered<T: Scalar>(
    d: usize,
    k: usize,
    spectrum: &Spectrum<T>,
    vectors: &[Vec<T>],
) -> Vec<T> {
    spectral_sum(d, k, spectrum, vectors, 1)
}

fn spectral_sum<T: Scalar>(
    d: usize,
    k: usize,
    spectrum: &Spectrum<T>,
    vectors: &[Vec<T>],
    skip: usize,
) -> Vec<T> {
    let n = spectrum.len();
    let scale = (T::from_usize_lossy(d) * T::from_usize_lossy(d - 1).powi(k as i32 - 1)).sqrt();
    let half_width = ramanujan_bound::<T>(d);
    let mut out = vec![T::zero(); n * n];
    for (&lambda, v) in spectrum.eigenvalues.iter().zip(vectors).skip(skip) {
        let f = scale * q_k(k, lambda / half_width, d);
        for u in 0..n {
            let fu = f * v[u];
            for (o, &vv) in out[u * n..(u + 1) * n].iter_mut().zip(v) {
                *o = *o + fu * vv;
            }
        }
    }
    out
}

/// Eigenvalue of the k-step non-backtracking transition matrix belonging to
/// adjacency eigenvalue `lambda`: `q_k(λ / (2 sqrt(d-1))) / sqrt(d (d-1)^(k-1))`.
///
/// Evaluated by the normalised recurrence
/// `m_{k+1} = (λ m_k - m_{k-1}) / (d-1)` with `m_1 = λ/d`,
/// `m_2 = (λ^2 - d) / (d (d-1))`, which never overflows.
pub fn transition_eigenvalue<T: Scalar>(lambda: T, d: usize, k: usize) -> T {
    assert!(k >= 1 && d >= 2);
    let df = T::from_usize_lossy(d);
    let dm1 = df - T::one();
    let m1 = lambda / df;
    if k == 1 {
        return m1;
    }
    let (mut prev, mut cur) = (m1, (lambda * lambda - df) / (df * dm1));
    for _ in 2..k {
        let next = (lambda * cur - prev) / dm1;
        prev = cur;
        cur = next;
    }
    cur
}

/// `μ(k)`: the largest `|μ_i|` over the nontrivial eigenvalues of the k-step
/// transition matrix, skipping the first (largest) adjacency eigenvalue once.
pub fn mu_k<T: Scalar>(s: &Spectrum<T>, d: usize, k: usize) -> T {
    s.eigenvalues
        .iter()
        .skip(1)
        .map(|&lambda| transition_eigenvalue(lambda, d, k).abs())
        .fold(T::zero(), T::max)
}

/// One row of the mixing-rate curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurveRow<T> {
    pub lambda: T,
    pub rho: T,
    pub rho_nb: T,
}

/// `points` evenly spaced values on `[0, d]` together with the Ramanujan
/// threshold `2 sqrt(d-1)`, sorted. A single point yields `[0, 2 sqrt(d-1)]`.
pub fn rate_curve_grid<T: Scalar>(d: usize, points: usize) -> Vec<T> {
    let df = T::from_usize_lossy(d);
    let mut grid: Vec<T> = match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..points)
            .map(|i| df * T::from_usize_lossy(i) / T::from_usize_lossy(points - 1))
            .collect(),
    };
    let knee = ramanujan_bound::<T>(d);
    if knee <= df && !grid.contains(&knee) {
        grid.push(knee);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Rates along a grid of `λ` values in `[0, d]`.
pub fn rate_curve_data<T: Scalar>(
    d: usize,
    lambda_grid: &[T],
) -> Result<Vec<RateCurveRow<T>>, KernelError> {
    lambda_grid
        .iter()
        .map(|&lambda| {
            let r = rates(lambda, d)?;
            Ok(RateCurveRow {
                lambda: r.lambda,
                rho: r.rho,
                rho_nb: r.rho_nb,
            })
        })
        .collect()
}

/// CSV with header `lambda,rho_simple,rho_nb`, 12 significant digits.
pub fn write_rate_curve_csv<T: Scalar, W: Write>(
    rows: &[RateCurveRow<T>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "lambda,rho_simple,rho_nb")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            format_sig(r.lambda.to_f64_lossy(), 12),
            format_sig(r.rho.to_f64_lossy(), 12),
            format_sig(r.rho_nb.to_f64_lossy(), 12)
        )?;
    }
    Ok(())
}
