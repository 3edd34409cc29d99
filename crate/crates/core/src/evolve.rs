//! Exact evolution of walk distributions, deviation from uniform, and
//! empirical mixing rates.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::RegularGraph;
use crate::nbkernel::{mu_k, KernelError, NbCountSequence};
use crate::spectra::{SpectraError, Spectrum};
use crate::{Scalar, WalkKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error("non-backtracking walks need d >= 3, got d = {d}")]
    DegreeTooSmall { d: usize },
    #[error("probabilities must be non-negative and sum to 1 (sum = {sum})")]
    NotADistribution { sum: f64 },
    #[error("expected {expected} entries, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("vertex {0} out of range")]
    InvalidVertex(usize),
    #[error("no start vertices")]
    NoStarts,
    #[error(
        "deviation {final_deviation:e} at the horizon has not dropped below a tenth of the threshold {threshold:e}"
    )]
    HorizonTooShort {
        final_deviation: f64,
        threshold: f64,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

fn check_probs<T: Scalar>(probs: &[T]) -> Result<(), EvolveError> {
    let sum: T = probs.iter().copied().sum();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    if (sum - T::one()).abs() > tol || probs.iter().any(|&p| p < T::zero() || p.is_nan()) {
        return Err(EvolveError::NotADistribution {
            sum: sum.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Probability vector over vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> VertexDistribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self, EvolveError> {
        check_probs(&probs)?;
        Ok(VertexDistribution { probs })
    }

    pub fn uniform(n: usize) -> Self {
        VertexDistribution {
            probs: vec![T::one() / T::from_usize_lossy(n); n],
        }
    }

    pub fn delta(n: usize, v: usize) -> Self {
        let mut probs = vec![T::zero(); n];
        probs[v] = T::one();
        VertexDistribution { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }
}

/// Probability vector over directed edges, indexed by
/// [`DirectedEdgeIndex`](crate::DirectedEdgeIndex).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> EdgeDistribution<T> {
    pub fn new(g: &RegularGraph, probs: Vec<T>) -> Result<Self, EvolveError> {
        if probs.len() != g.n() * g.d() {
            return Err(EvolveError::WrongLength {
                expected: g.n() * g.d(),
                found: probs.len(),
            });
        }
        check_probs(&probs)?;
        Ok(EdgeDistribution { probs })
    }

    pub fn uniform(g: &RegularGraph) -> Self {
        let m = g.n() * g.d();
        EdgeDistribution {
            probs: vec![T::one() / T::from_usize_lossy(m); m],
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }
}

/// One step of the simple walk, `p ↦ p A / d`.
pub fn simple_step<T: Scalar>(
    g: &RegularGraph,
    v: &VertexDistribution<T>,
) -> VertexDistribution<T> {
    let mut out = vec![T::zero(); g.n()];
    simple_apply(g, &v.probs, &mut out);
    VertexDistribution { probs: out }
}

fn simple_apply<T: Scalar>(g: &RegularGraph, src: &[T], dst: &mut [T]) {
    let inv_d = T::one() / T::from_usize_lossy(g.d());
    for (w, o) in dst.iter_mut().enumerate() {
        let s: T = g.neighbors(w).iter().map(|&u| src[u]).sum();
        *o = s * inv_d;
    }
}

fn require_nb(g: &RegularGraph) -> Result<(), EvolveError> {
    if g.d() < 3 {
        Err(EvolveError::DegreeTooSmall { d: g.d() })
    } else {
        Ok(())
    }
}

/// Start of a non-backtracking walk at `w0`: mass `1/d` on each edge out of `w0`.
pub fn nb_initial<T: Scalar>(
    g: &RegularGraph,
    w0: usize,
) -> Result<EdgeDistribution<T>, EvolveError> {
    require_nb(g)?;
    if w0 >= g.n() {
        return Err(EvolveError::InvalidVertex(w0));
    }
    let d = g.d();
    let mut probs = vec![T::zero(); g.n() * d];
    let share = T::one() / T::from_usize_lossy(d);
    for p in &mut probs[w0 * d..(w0 + 1) * d] {
        *p = share;
    }
    Ok(EdgeDistribution { probs })
}

/// One step of the non-backtracking chain: the mass on `(u, v)` is split
/// equally over the `d - 1` edges `(v, w)` with `w != u`.
pub fn nb_step<T: Scalar>(
    g: &RegularGraph,
    e: &EdgeDistribution<T>,
) -> Result<EdgeDistribution<T>, EvolveError> {
    require_nb(g)?;
    let mut out = vec![T::zero(); e.probs.len()];
    nb_apply(g, &e.probs, &mut out);
    Ok(EdgeDistribution { probs: out })
}

/// Pull form: edge `(v, w)` receives from every `(u, v)` with `u != w`,
/// i.e. from all edges into `v` except the reverse of `(v, w)`.
fn nb_apply<T: Scalar>(g: &RegularGraph, src: &[T], dst: &mut [T]) {
    let d = g.d();
    let idx = g.edge_index();
    let inv = T::one() / T::from_usize_lossy(d - 1);
    for v in 0..g.n() {
        // total mass arriving at v
        let incoming: T = (0..d).map(|s| src[idx.reverse(v * d + s)]).sum();
        for s in 0..d {
            let e = v * d + s;
            dst[e] = (incoming - src[idx.reverse(e)]) * inv;
        }
    }
}

/// Vertex marginal of an edge distribution: mass summed by head vertex.
pub fn project_to_vertices<T: Scalar>(
    g: &RegularGraph,
    e: &EdgeDistribution<T>,
) -> VertexDistribution<T> {
    let mut out = vec![T::zero(); g.n()];
    project_apply(g, &e.probs, &mut out);
    VertexDistribution { probs: out }
}

fn project_apply<T: Scalar>(g: &RegularGraph, src: &[T], dst: &mut [T]) {
    dst.iter_mut().for_each(|x| *x = T::zero());
    for (e, &m) in src.iter().enumerate() {
        let h = g.head(e);
        dst[h] = dst[h] + m;
    }
}

/// `max_i |p_i - 1/n|`.
pub fn deviation_linf<T: Scalar>(v: &VertexDistribution<T>) -> T {
    let u = T::one() / T::from_usize_lossy(v.len());
    v.probs
        .iter()
        .map(|&p| (p - u).abs())
        .fold(T::zero(), T::max)
}

/// Total variation distance to uniform, `(1/2) sum_i |p_i - 1/n|`.
pub fn deviation_tv<T: Scalar>(v: &VertexDistribution<T>) -> T {
    let u = T::one() / T::from_usize_lossy(v.len());
    v.probs.iter().map(|&p| (p - u).abs()).sum::<T>() / T::lit(2.0)
}

/// Deviation level used for the mixing time `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T> {
    /// `1 / (2n)`.
    HalfN,
    /// `1 / n^2`, the fine mixing time.
    NSquared,
    Value(T),
}

impl<T: Scalar> Threshold<T> {
    pub fn resolve(self, n: usize) -> T {
        let nf = T::from_usize_lossy(n);
        match self {
            Threshold::HalfN => T::one() / (T::lit(2.0) * nf),
            Threshold::NSquared => T::one() / (nf * nf),
            Threshold::Value(x) => x,
        }
    }
}

/// Which start vertices the worst case is taken over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartSet {
    All,
    /// Exactly these vertices, e.g. `[0]` for a vertex-transitive graph.
    Vertices(Vec<usize>),
    /// `count` distinct vertices drawn with the given seed.
    Sampled {
        count: usize,
        seed: u64,
    },
}

impl StartSet {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>, EvolveError> {
        let starts = match self {
            StartSet::All => (0..n).collect(),
            StartSet::Vertices(v) => {
                if let Some(&bad) = v.iter().find(|&&x| x >= n) {
                    return Err(EvolveError::InvalidVertex(bad));
                }
                v.clone()
            }
            StartSet::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut v = sample(&mut rng, n, (*count).min(n)).into_vec();
                v.sort_unstable();
                v
            }
        };
        if starts.is_empty() {
            return Err(EvolveError::NoStarts);
        }
        Ok(starts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingOptions<T> {
    pub horizon: usize,
    pub threshold: Threshold<T>,
    pub starts: StartSet,
    /// Deviations below this are left out of the rate fit.
    pub noise_floor: T,
}

impl<T: Scalar> Default for MixingOptions<T> {
    fn default() -> Self {
        MixingOptions {
            horizon: 200,
            threshold: Threshold::HalfN,
            starts: StartSet::All,
            noise_floor: T::min_positive_value().sqrt(),
        }
    }
}

/// Worst-case deviation from uniform along the horizon, with the fitted
/// geometric decay rate and the mixing time.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport<T> {
    pub walk: WalkKind,
    pub n: usize,
    pub d: usize,
    /// `deviations[k] = max_{u,v} |P^(k)_{uv} - 1/n|` for `k = 0..=horizon`.
    pub deviations: Vec<T>,
    pub fitted_rate: Option<T>,
    /// Smallest `t` with `deviations[k] <= threshold` for all `t <= k <= horizon`.
    pub tau: Option<usize>,
    pub threshold: T,
    /// `Some` when the maximum ran over a subset of start vertices.
    pub sampled_starts: Option<Vec<usize>>,
}

impl<T: Scalar> MixingReport<T> {
    pub fn horizon(&self) -> usize {
        self.deviations.len() - 1
    }
}

/// Exact deviations of both walks from every start vertex in the start set,
/// maximised over starts and targets.
///
/// The signed deviation `p_k - uniform` is evolved directly and re-centred
/// to zero sum after each step. Uniform is a fixed point and every other
/// mode decays, so rounding stays relative to the current deviation and
/// decay can be followed far below `1e-16`.
pub fn deviation_series<T: Scalar>(
    g: &RegularGraph,
    walk: WalkKind,
    horizon: usize,
    starts: &[usize],
) -> Result<Vec<T>, EvolveError> {
    if walk == WalkKind::Nb {
        require_nb(g)?;
    }
    if let Some(&bad) = starts.iter().find(|&&s| s >= g.n()) {
        return Err(EvolveError::InvalidVertex(bad));
    }
    let per_start: Vec<Vec<T>> = starts
        .par_iter()
        .map(|&s| match walk {
            WalkKind::Simple => simple_deviations(g, s, horizon),
            WalkKind::Nb => nb_deviations(g, s, horizon),
        })
        .collect();
    let mut worst = vec![T::zero(); horizon + 1];
    for series in per_start {
        for (w, x) in worst.iter_mut().zip(series) {
            *w = w.max(x);
        }
    }
    Ok(worst)
}

fn recentre<T: Scalar>(x: &mut [T]) {
    let mean = x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len());
    x.iter_mut().for_each(|v| *v = *v - mean);
}

fn max_abs<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|v| v.abs()).fold(T::zero(), T::max)
}

fn simple_deviations<T: Scalar>(g: &RegularGraph, start: usize, horizon: usize) -> Vec<T> {
    let n = g.n();
    let u = T::one() / T::from_usize_lossy(n);
    let mut cur = vec![-u; n];
    cur[start] = T::one() - u;
    let mut next = vec![T::zero(); n];
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(max_abs(&cur));
    for _ in 0..horizon {
        simple_apply(g, &cur, &mut next);
        recentre(&mut next);
        out.push(max_abs(&next));
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

fn nb_deviations<T: Scalar>(g: &RegularGraph, start: usize, horizon: usize) -> Vec<T> {
    let (n, d) = (g.n(), g.d());
    let m = n * d;
    let ue = T::one() / T::from_usize_lossy(m);
    let share = T::one() / T::from_usize_lossy(d);
    let mut cur = vec![-ue; m];
    for x in &mut cur[start * d..(start + 1) * d] {
        *x = share - ue;
    }
    let mut next = vec![T::zero(); m];
    let mut vert = vec![T::zero(); n];
    let mut out = Vec::with_capacity(horizon + 1);
    // k = 0: the walk sits at the start vertex
    let un = T::one() / T::from_usize_lossy(n);
    out.push((T::one() - un).max(un));
    for _ in 0..horizon {
        project_apply(g, &cur, &mut vert);
        // vert holds the position after the step just taken
        out.push(max_abs(&vert));
        nb_apply(g, &cur, &mut next);
        recentre(&mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

/// Least-squares slope of `y` against `x`.
fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Geometric decay rate of a deviation series.
///
/// Uses the last half of the usable range `1..=k_hi`, where `k_hi` is the
/// largest `k` whose deviation is at or above `noise_floor`; points below the
/// floor are dropped. Even and odd `k` are fitted separately by least squares
/// on `ln(deviation)` and the larger slope wins, so parity oscillation near
/// bipartiteness does not drag the estimate down.
pub fn fit_rate<T: Scalar>(deviations: &[T], noise_floor: T) -> Option<T> {
    let k_hi = (1..deviations.len())
        .rev()
        .find(|&k| deviations[k] >= noise_floor && deviations[k] > T::zero())?;
    let k_lo = (k_hi / 2).max(1);
    let window: Vec<(usize, f64)> = (k_lo..=k_hi)
        .filter(|&k| deviations[k] >= noise_floor && deviations[k] > T::zero())
        .map(|k| (k, deviations[k].to_f64_lossy().ln()))
        .collect();
    let parity = |r: usize| -> Vec<(f64, f64)> {
        window
            .iter()
            .filter(|(k, _)| k % 2 == r)
            .map(|&(k, y)| (k as f64, y))
            .collect()
    };
    let slopes = [ls_slope(&parity(0)), ls_slope(&parity(1))];
    let slope = slopes
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    slope.is_finite().then(|| T::lit(slope.exp()))
}

/// Smallest `t` with `deviations[k] <= threshold` for every `k >= t` in the series.
pub fn mixing_time<T: Scalar>(deviations: &[T], threshold: T) -> Option<usize> {
    if deviations.last().is_none_or(|&x| x > threshold) {
        return None;
    }
    let mut t = deviations.len() - 1;
    while t > 0 && deviations[t - 1] <= threshold {
        t -= 1;
    }
    Some(t)
}

/// Evolves the chosen walk exactly, records the worst-case deviation for
/// every `k <= horizon`, fits the decay rate and finds `τ`.
///
/// Fails with [`EvolveError::HorizonTooShort`] unless the deviation at the
/// horizon is below a tenth of the threshold, which also catches bipartite
/// and disconnected graphs.
pub fn mixing_report<T: Scalar>(
    g: &RegularGraph,
    walk: WalkKind,
    opts: &MixingOptions<T>,
) -> Result<MixingReport<T>, EvolveError> {
    let starts = opts.starts.resolve(g.n())?;
    let deviations = deviation_series(g, walk, opts.horizon, &starts)?;
    let threshold = opts.threshold.resolve(g.n());
    let last: T = *deviations.last().unwrap();
    if last.is_nan() || last >= threshold / T::lit(10.0) {
        return Err(EvolveError::HorizonTooShort {
            final_deviation: last.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    let sampled_starts = (starts.len() < g.n()).then(|| starts.clone());
    Ok(MixingReport {
        walk,
        n: g.n(),
        d: g.d(),
        fitted_rate: fit_rate(&deviations, opts.noise_floor),
        tau: mixing_time(&deviations, threshold),
        threshold,
        deviations,
        sampled_starts,
    })
}

/// `μ(k)/n <= max_{u,v} |P̃^(k)_{uv} - 1/n| <= μ(k)` at one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich<T> {
    pub k: usize,
    pub lower: T,
    pub observed: T,
    pub upper: T,
}

impl<T: Scalar> Sandwich<T> {
    /// `observed - lower`; negative means the lower bound failed.
    pub fn lower_margin(&self) -> T {
        self.observed - self.lower
    }

    /// `upper - observed`; negative means the upper bound failed.
    pub fn upper_margin(&self) -> T {
        self.upper - self.observed
    }

    /// Both inequalities up to a slack of `rel_tol * upper + abs_tol`. The
    /// bounds come from floating-point eigenvalues, so an exact zero of `μ(k)`
    /// shows up as a value of order `1e-16`.
    pub fn holds(&self, rel_tol: T, abs_tol: T) -> bool {
        let slack = rel_tol * self.upper + abs_tol;
        self.lower <= self.observed + slack && self.observed <= self.upper + slack
    }
}

/// Sandwich bounds for `k = 1..=k_max`. The observed deviation comes from
/// exact 128-bit walk counts, the bounds from the adjacency spectrum.
pub fn sandwich_series<T: Scalar>(
    g: &RegularGraph,
    spectrum: &Spectrum<T>,
    k_max: usize,
) -> Result<Vec<Sandwich<T>>, EvolveError> {
    let n = T::from_usize_lossy(g.n());
    NbCountSequence::<u128>::new(g)
        .take(k_max)
        .map(|counts| {
            let counts = counts?;
            let mu = mu_k(spectrum, g.d(), counts.k);
            Ok(Sandwich {
                k: counts.k,
                lower: mu / n,
                observed: T::lit(counts.max_deviation()?),
                upper: mu,
            })
        })
        .collect()
}

/// [`sandwich_series`] at a single `k`.
pub fn sandwich_at<T: Scalar>(
    g: &RegularGraph,
    spectrum: &Spectrum<T>,
    k: usize,
) -> Result<Sandwich<T>, EvolveError> {
    if k == 0 {
        return Err(KernelError::ZeroLength.into());
    }
    Ok(*sandwich_series(g, spectrum, k)?.last().unwrap())
}
