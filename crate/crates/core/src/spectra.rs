//! Dense symmetric eigensolvers for adjacency matrices and the `(n, d, λ)`
//! parameters derived from them.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{component_count, is_bipartite, RegularGraph};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("n = {n} exceeds the dense eigensolver limit of {limit}")]
    DenseLimitExceeded { n: usize, limit: usize },
    #[error("need at least two vertices")]
    TooSmall,
}

/// Algorithm behind [`eigenvalues_dense_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Cyclic Jacobi rotations.
    Jacobi,
    /// Householder reduction to tridiagonal form followed by implicit QL.
    Tridiagonal,
    /// Jacobi up to `jacobi_limit` vertices, tridiagonal QL beyond.
    Auto { jacobi_limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<T> {
    /// Jacobi stops once the off-diagonal Frobenius norm drops below this.
    pub tol: T,
    pub max_sweeps: usize,
    pub dense_limit: usize,
    pub method: EigenMethod,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        EigenOptions {
            tol: T::lit(1e-12).max(T::epsilon() * T::lit(1e3)),
            max_sweeps: 100,
            dense_limit: 4096,
            method: EigenMethod::Auto { jacobi_limit: 256 },
        }
    }
}

/// Adjacency eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    /// `max_i |A v_i - λ_i v_i|_∞`, present when eigenvectors were computed.
    pub residual: Option<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> T {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `max(λ_2, |λ_n|)`.
    pub fn lambda_star(&self) -> T {
        lambda_star(self)
    }

    /// Eigenvalues within `tol` of `value`.
    pub fn multiplicity_near(&self, value: T, tol: T) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&x| (x - value).abs() <= tol)
            .count()
    }

    /// One eigenvalue per line with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &x in &self.eigenvalues {
            writeln!(out, "{:.16e}", x.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// `max(λ_2, |λ_n|)`; needs at least two eigenvalues.
pub fn lambda_star<T: Scalar>(s: &Spectrum<T>) -> T {
    assert!(s.len() >= 2, "lambda_star needs n >= 2");
    s.eigenvalues[1].max(s.smallest().abs())
}

/// `sqrt(d (n - d) / (n - 1))`, a lower bound on `λ` for every d-regular
/// graph on `n` vertices, from the trace of `A^2`.
pub fn trace_lower_bound<T: Scalar>(n: usize, d: usize) -> T {
    assert!(n > d && d >= 1, "trace bound needs n > d >= 1");
    let (n, d) = (T::from_usize_lossy(n), T::from_usize_lossy(d));
    (d * (n - d) / (n - T::one())).sqrt()
}

/// All adjacency eigenvalues with default options.
pub fn eigenvalues_dense<T: Scalar>(g: &RegularGraph, tol: T) -> Result<Spectrum<T>, SpectraError> {
    eigenvalues_dense_with(
        g,
        &EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )
}

pub fn eigenvalues_dense_with<T: Scalar>(
    g: &RegularGraph,
    opts: &EigenOptions<T>,
) -> Result<Spectrum<T>, SpectraError> {
    let n = g.n();
    if n > opts.dense_limit {
        return Err(SpectraError::DenseLimitExceeded {
            n,
            limit: opts.dense_limit,
        });
    }
    let a = g.adjacency_matrix::<T>();
    let use_jacobi = match opts.method {
        EigenMethod::Jacobi => true,
        EigenMethod::Tridiagonal => false,
        EigenMethod::Auto { jacobi_limit } => n <= jacobi_limit,
    };
    let mut values = if use_jacobi {
        jacobi(a, n, opts.tol, opts.max_sweeps, false)?.0
    } else {
        tridiagonal_ql(a, n)?
    };
    sort_descending(&mut values);
    Ok(Spectrum {
        eigenvalues: values,
        residual: None,
    })
}

/// Eigenvalues and unit eigenvectors via Jacobi; `vectors[i]` belongs to
/// `spectrum.eigenvalues[i]`. The residual field is filled in.
pub fn eigen_pairs_dense<T: Scalar>(
    g: &RegularGraph,
    opts: &EigenOptions<T>,
) -> Result<(Spectrum<T>, Vec<Vec<T>>), SpectraError> {
    let n = g.n();
    if n > opts.dense_limit {
        return Err(SpectraError::DenseLimitExceeded {
            n,
            limit: opts.dense_limit,
        });
    }
    let (values, vt) = jacobi(
        g.adjacency_matrix::<T>(),
        n,
        opts.tol,
        opts.max_sweeps,
        true,
    )?;
    let vt = vt.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    let eigenvalues: Vec<T> = order.iter().map(|&i| values[i]).collect();
    let vectors: Vec<Vec<T>> = order
        .iter()
        .map(|&i| vt[i * n..(i + 1) * n].to_vec())
        .collect();
    let residual = eigenvalues
        .iter()
        .zip(&vectors)
        .map(|(&lambda, v)| residual_inf(g, lambda, v))
        .fold(T::zero(), T::max);
    Ok((
        Spectrum {
            eigenvalues,
            residual: Some(residual),
        },
        vectors,
    ))
}

/// `|A v - λ v|_∞`.
pub fn residual_inf<T: Scalar>(g: &RegularGraph, lambda: T, v: &[T]) -> T {
    (0..g.n())
        .map(|u| {
            let av: T = g.neighbors(u).iter().map(|&w| v[w]).sum();
            (av - lambda * v[u]).abs()
        })
        .fold(T::zero(), T::max)
}

fn sort_descending<T: Scalar>(values: &mut [T]) {
    // stable: ties keep input order
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
}

/// Cyclic Jacobi on a dense symmetric row-major matrix. Returns the diagonal
/// and, if asked, the eigenvectors as rows of a row-major matrix.
fn jacobi<T: Scalar>(
    mut a: Vec<T>,
    n: usize,
    tol: T,
    max_sweeps: usize,
    want_vectors: bool,
) -> Result<(Vec<T>, Option<Vec<T>>), SpectraError> {
    let mut vt = want_vectors.then(|| {
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = T::one();
        }
        m
    });
    let two = T::lit(2.0);
    let off_norm = |a: &[T]| -> T {
        let mut s = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                s = s + a[p * n + q] * a[p * n + q];
            }
        }
        (two * s).sqrt()
    };
    let mut sweeps = 0;
    while off_norm(&a) >= tol {
        if sweeps == max_sweeps {
            return Err(SpectraError::NoConvergence {
                iterations: max_sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (two * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    let new_p = akp - s * (akq + tau * akp);
                    let new_q = akq + s * (akp - tau * akq);
                    a[p * n + k] = new_p;
                    a[k * n + p] = new_p;
                    a[q * n + k] = new_q;
                    a[k * n + q] = new_q;
                }
                if let Some(vt) = vt.as_mut() {
                    for k in 0..n {
                        let g = vt[p * n + k];
                        let h = vt[q * n + k];
                        vt[p * n + k] = g - s * (h + tau * g);
                        vt[q * n + k] = h + s * (g - tau * h);
                    }
                }
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    Ok((diag, vt))
}

/// Householder tridiagonalisation (full symmetric storage, row-wise updates)
/// followed by implicit QL with Wilkinson shifts. Eigenvalues only.
fn tridiagonal_ql<T: Scalar>(mut a: Vec<T>, n: usize) -> Result<Vec<T>, SpectraError> {
    let mut diag = vec![T::zero(); n];
    let mut off = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let alpha_sq: T = (lo..n).map(|i| a[i * n + k] * a[i * n + k]).sum();
        let x0 = a[lo * n + k];
        if alpha_sq - x0 * x0 <= T::zero() {
            off[k] = x0;
            continue;
        }
        let alpha = if x0 > T::zero() {
            -alpha_sq.sqrt()
        } else {
            alpha_sq.sqrt()
        };
        // v = x - alpha e_1, H = I - beta v v^T
        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] = v[lo] - alpha;
        let vnorm_sq: T = (lo..n).map(|i| v[i] * v[i]).sum();
        let beta = T::lit(2.0) / vnorm_sq;
        for i in lo..n {
            let row = &a[i * n + lo..i * n + n];
            let dot: T = row.iter().zip(&v[lo..n]).map(|(&x, &y)| x * y).sum();
            p[i] = beta * dot;
        }
        let ptv: T = (lo..n).map(|i| p[i] * v[i]).sum();
        let half = beta * ptv / T::lit(2.0);
        for i in lo..n {
            p[i] = p[i] - half * v[i];
        }
        for i in lo..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[i * n + lo..i * n + n];
            for (j, x) in row.iter_mut().enumerate() {
                let j = j + lo;
                *x = *x - vi * p[j] - wi * v[j];
            }
        }
        off[k] = alpha;
    }
    for i in 0..n {
        diag[i] = a[i * n + i];
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    off[n - 1] = T::zero();
    tql(&mut diag, &mut off)?;
    Ok(diag)
}

/// Implicit QL on a symmetric tridiagonal matrix; `off[i]` couples `i` and
/// `i + 1`. Eigenvalues replace `diag`.
fn tql<T: Scalar>(diag: &mut [T], off: &mut [T]) -> Result<(), SpectraError> {
    let n = diag.len();
    let eps = T::epsilon();
    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(SpectraError::NoConvergence {
                    iterations: MAX_ITER,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (T::lit(2.0) * off[l]);
            let mut r = g.hypot(T::one());
            g = diag[m] - diag[l] + off[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    diag[i + 1] = diag[i + 1] - p;
                    off[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] = diag[l] - p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}

/// Estimate of `λ = max(λ_2, |λ_n|)` by power iteration with `A^2` on the
/// complement of the all-ones vector. Intended for graphs beyond the dense
/// limit; convergence is slow when the top of the nontrivial spectrum is
/// clustered, so the result is an estimate, reported with its last relative
/// change.
pub fn lambda_power_estimate(
    g: &RegularGraph,
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> (f64, f64) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; n];
    let deflate_normalise = |x: &mut [f64]| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };
    deflate_normalise(&mut x);
    let apply = |src: &[f64], dst: &mut [f64]| {
        for (u, o) in dst.iter_mut().enumerate() {
            *o = g.neighbors(u).iter().map(|&w| src[w]).sum();
        }
    };
    let mut estimate = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..max_iters {
        apply(&x, &mut y);
        apply(&y, &mut x);
        let rayleigh: f64 = {
            // x now holds A^2 x_old, x_old unit: <x_old, A^2 x_old> = |A x_old|^2
            y.iter().map(|v| v * v).sum::<f64>()
        };
        let next = rayleigh.sqrt();
        change = ((next - estimate) / next).abs();
        estimate = next;
        deflate_normalise(&mut x);
        if change < rel_tol {
            break;
        }
    }
    (estimate, change)
}

/// Checks of the spectrum against combinatorial facts about the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SanityReport {
    pub d: usize,
    /// Eigenvalues within tolerance of `d`.
    pub multiplicity_of_d: usize,
    pub components: usize,
    pub smallest: f64,
    pub bipartite: bool,
    /// `|λ_i| <= d` up to tolerance for every `i`.
    pub bounded_by_d: bool,
    pub trace: f64,
    pub tol: f64,
}

impl SanityReport {
    pub fn multiplicity_matches(&self) -> bool {
        self.multiplicity_of_d == self.components
    }

    /// `λ_n = -d` exactly when the graph is bipartite.
    pub fn bipartite_matches(&self) -> bool {
        ((self.smallest + self.d as f64).abs() <= self.tol) == self.bipartite
    }

    pub fn passed(&self) -> bool {
        self.multiplicity_matches()
            && self.bipartite_matches()
            && self.bounded_by_d
            && self.trace.abs() <= self.tol * self.d as f64
    }
}

pub fn spectral_sanity<T: Scalar>(g: &RegularGraph, s: &Spectrum<T>, tol: T) -> SanityReport {
    let d = T::from_usize_lossy(g.d());
    SanityReport {
        d: g.d(),
        multiplicity_of_d: s.multiplicity_near(d, tol),
        components: component_count(g),
        smallest: s.smallest().to_f64_lossy(),
        bipartite: is_bipartite(g),
        bounded_by_d: s.eigenvalues.iter().all(|&x| x.abs() <= d + tol),
        trace: s.eigenvalues.iter().copied().sum::<T>().to_f64_lossy(),
        tol: tol.to_f64_lossy(),
    }
}
