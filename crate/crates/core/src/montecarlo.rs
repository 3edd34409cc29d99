//! Seeded trajectory sampling, visit loads and the cycle-trap experiment.
//!
//! Every random stream is a ChaCha8 generator keyed by a 64-bit seed plus a
//! fixed stream id per process (simple walk, nb walk, balls-and-bins). Trial
//! `i` of an experiment uses seed `base_seed + i` (wrapping), so adding trials
//! never changes earlier ones and parallel execution is bit-reproducible.

use std::collections::HashSet;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DecoratedGraph, RegularGraph};
use crate::WalkKind;

const STREAM_SIMPLE: u64 = 1;
const STREAM_NB: u64 = 2;
const STREAM_BINS: u64 = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("non-backtracking walks need d >= 3, got d = {d}")]
    Degree2Nb { d: usize },
    #[error("start vertex {0} out of range")]
    InvalidStart(usize),
    #[error("walk needs at least one step")]
    ZeroSteps,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("empty trace")]
    Empty,
    #[error("vertex {vertex} at position {position} out of range")]
    OutOfRange { position: usize, vertex: usize },
    #[error("positions {position} and {} are not adjacent", position + 1)]
    NotAdjacent { position: usize },
    #[error("walk backtracks at position {position}")]
    Backtrack { position: usize },
}

/// A sampled trajectory `w_0, ..., w_steps`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub vertices: Vec<usize>,
    pub kind: WalkKind,
    pub seed: u64,
    pub start: usize,
}

impl WalkTrace {
    pub fn steps(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// One vertex id per line.
    pub fn write_ids<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples a walk of `steps` steps from `start`.
///
/// The simple walk picks one of the `d` neighbours uniformly. The nb walk
/// picks uniformly among all `d` neighbours for the first step and among the
/// `d - 1` neighbours other than the previous vertex afterwards, by drawing
/// `j` in `0..d-1` and shifting it past the predecessor's slot.
pub fn simulate_walk(
    g: &RegularGraph,
    kind: WalkKind,
    start: usize,
    steps: usize,
    seed: u64,
) -> Result<WalkTrace, WalkError> {
    let d = g.d();
    if start >= g.n() {
        return Err(WalkError::InvalidStart(start));
    }
    if steps == 0 {
        return Err(WalkError::ZeroSteps);
    }
    let mut vertices = Vec::with_capacity(steps + 1);
    vertices.push(start);
    match kind {
        WalkKind::Simple => {
            let mut rng = rng_for(seed, STREAM_SIMPLE);
            let mut v = start;
            for _ in 0..steps {
                v = g.neighbors(v)[rng.gen_range(0..d)];
                vertices.push(v);
            }
        }
        WalkKind::Nb => {
            if d < 3 {
                return Err(WalkError::Degree2Nb { d });
            }
            let mut rng = rng_for(seed, STREAM_NB);
            let idx = g.edge_index();
            let mut e = start * d + rng.gen_range(0..d);
            vertices.push(g.head(e));
            for _ in 1..steps {
                let back = idx.reverse(e);
                let (v, skip) = (idx.tail(back), idx.slot(back));
                let mut j = rng.gen_range(0..d - 1);
                if j >= skip {
                    j += 1;
                }
                e = v * d + j;
                vertices.push(g.head(e));
            }
        }
    }
    Ok(WalkTrace {
        vertices,
        kind,
        seed,
        start,
    })
}

/// Checks adjacency of consecutive vertices and, for nb traces,
/// `w_{t-1} != w_{t+1}`.
pub fn validate_trace(g: &RegularGraph, t: &WalkTrace) -> Result<(), TraceError> {
    let w = &t.vertices;
    if w.is_empty() {
        return Err(TraceError::Empty);
    }
    if let Some((position, &vertex)) = w.iter().enumerate().find(|(_, &v)| v >= g.n()) {
        return Err(TraceError::OutOfRange { position, vertex });
    }
    for (position, pair) in w.windows(2).enumerate() {
        if !g.has_edge(pair[0], pair[1]) {
            return Err(TraceError::NotAdjacent { position });
        }
    }
    if t.kind == WalkKind::Nb {
        for (i, tri) in w.windows(3).enumerate() {
            if tri[0] == tri[2] {
                return Err(TraceError::Backtrack { position: i + 1 });
            }
        }
    }
    Ok(())
}

fn counts_of(items: &[usize], n: usize) -> Vec<usize> {
    let mut counts = vec![0; n];
    for &v in items {
        counts[v] += 1;
    }
    counts
}

/// Visits per vertex over all positions `0..=steps`, indexed by vertex id.
/// The vector has length `max vertex id + 1`.
pub fn visit_histogram(t: &WalkTrace) -> Vec<usize> {
    let n = t.vertices.iter().max().map_or(0, |&m| m + 1);
    counts_of(&t.vertices, n)
}

/// Largest number of visits to one vertex, counting the start.
pub fn max_load(t: &WalkTrace) -> usize {
    visit_histogram(t).into_iter().max().unwrap_or(0)
}

/// Smallest index at which some vertex repeats, or `steps + 1` if none does.
pub fn self_intersection_time(t: &WalkTrace) -> usize {
    let mut seen = HashSet::with_capacity(t.vertices.len());
    t.vertices
        .iter()
        .position(|v| !seen.insert(*v))
        .unwrap_or(t.vertices.len())
}

/// Bin occupancy after throwing `n_balls` balls uniformly into `n_bins` bins.
pub fn balls_and_bins_counts(n_bins: usize, n_balls: usize, seed: u64) -> Vec<usize> {
    assert!(n_bins > 0, "need at least one bin");
    let mut rng = rng_for(seed, STREAM_BINS);
    let mut counts = vec![0; n_bins];
    for _ in 0..n_balls {
        counts[rng.gen_range(0..n_bins)] += 1;
    }
    counts
}

/// Maximum bin load for `n_balls` balls in `n_bins` bins.
pub fn balls_and_bins(n_bins: usize, n_balls: usize, seed: u64) -> usize {
    balls_and_bins_counts(n_bins, n_balls, seed)
        .into_iter()
        .max()
        .unwrap_or(0)
}

/// Max loads of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadTrial {
    pub trial: u64,
    pub seed: u64,
    pub nb_max: usize,
    pub simple_max: usize,
    pub bins_max: usize,
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[usize]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Quartiles {
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
        })
    }
}

/// Max-load comparison of the nb walk, the simple walk and balls-and-bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub base_seed: u64,
    pub trials: Vec<LoadTrial>,
    /// `*_loads[c]` = number of (trial, vertex) pairs with exactly `c` visits.
    pub nb_loads: Vec<u64>,
    pub simple_loads: Vec<u64>,
    pub bins_loads: Vec<u64>,
}

impl LoadReport {
    pub fn trial_count(&self) -> usize {
        self.trials.len()
    }

    fn column(&self, f: impl Fn(&LoadTrial) -> usize) -> Vec<usize> {
        self.trials.iter().map(f).collect()
    }

    pub fn nb_summary(&self) -> Option<Quartiles> {
        Quartiles::of(&self.column(|t| t.nb_max))
    }

    pub fn simple_summary(&self) -> Option<Quartiles> {
        Quartiles::of(&self.column(|t| t.simple_max))
    }

    pub fn bins_summary(&self) -> Option<Quartiles> {
        Quartiles::of(&self.column(|t| t.bins_max))
    }

    /// `trial,seed,nb_max,simple_max,bins_max` per trial.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "trial,seed,nb_max,simple_max,bins_max")?;
        for t in &self.trials {
            writeln!(
                w,
                "{},{},{},{},{}",
                t.trial, t.seed, t.nb_max, t.simple_max, t.bins_max
            )?;
        }
        Ok(())
    }

    /// Summary as JSON: parameters, quartiles per process and the load
    /// distributions.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "d": self.d,
            "steps": self.steps,
            "base_seed": self.base_seed,
            "trials": self.trials.len(),
            "nb": self.nb_summary(),
            "simple": self.simple_summary(),
            "bins": self.bins_summary(),
            "nb_loads": self.nb_loads,
            "simple_loads": self.simple_loads,
            "bins_loads": self.bins_loads,
        })
    }
}

fn add_loads(acc: &mut Vec<u64>, counts: &[usize]) {
    for &c in counts {
        if acc.len() <= c {
            acc.resize(c + 1, 0);
        }
        acc[c] += 1;
    }
}

/// Runs `trials` independent trials. Trial `i` uses seed `base_seed + i` for
/// an nb walk and a simple walk of `steps` steps from vertex 0 and for
/// throwing `steps` balls into `n` bins.
pub fn load_experiment(
    g: &RegularGraph,
    steps: usize,
    trials: usize,
    base_seed: u64,
) -> Result<LoadReport, WalkError> {
    let n = g.n();
    let per_trial: Vec<(LoadTrial, [Vec<usize>; 3])> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let seed = base_seed.wrapping_add(trial);
            let nb = counts_of(&simulate_walk(g, WalkKind::Nb, 0, steps, seed)?.vertices, n);
            let simple = counts_of(
                &simulate_walk(g, WalkKind::Simple, 0, steps, seed)?.vertices,
                n,
            );
            let bins = balls_and_bins_counts(n, steps, seed);
            let max = |c: &[usize]| c.iter().copied().max().unwrap_or(0);
            let row = LoadTrial {
                trial,
                seed,
                nb_max: max(&nb),
                simple_max: max(&simple),
                bins_max: max(&bins),
            };
            Ok((row, [nb, simple, bins]))
        })
        .collect::<Result<_, WalkError>>()?;
    let mut report = LoadReport {
        n,
        d: g.d(),
        steps,
        base_seed,
        trials: Vec::with_capacity(trials),
        nb_loads: Vec::new(),
        simple_loads: Vec::new(),
        bins_loads: Vec::new(),
    };
    for (row, [nb, simple, bins]) in per_trial {
        report.trials.push(row);
        add_loads(&mut report.nb_loads, &nb);
        add_loads(&mut report.simple_loads, &simple);
        add_loads(&mut report.bins_loads, &bins);
    }
    Ok(report)
}

/// Outcome of the cycle-trap experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapReport {
    pub k: usize,
    pub cycle_len: usize,
    pub d: usize,
    pub steps: usize,
    pub trials: usize,
    pub segments_per_trial: usize,
    pub trapped_segments: u64,
    /// Trapped segments per trial.
    pub per_trial: Vec<u64>,
    /// Max load of each trial's walk.
    pub max_loads: Vec<usize>,
    pub observed: f64,
    /// `(d-1)^(-k g)`.
    pub predicted: f64,
    /// Binomial standard error of `observed` under `predicted`.
    pub standard_error: f64,
    /// `1 - (1 - predicted)^segments_per_trial`: chance one walk is trapped at least once.
    pub success_probability: f64,
}

impl TrapReport {
    /// `|observed - predicted|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.observed - self.predicted).abs() / self.standard_error
    }

    /// Every walk that hit a trap has max load above `k`.
    pub fn load_exceeds_k_when_trapped(&self) -> bool {
        self.per_trial
            .iter()
            .zip(&self.max_loads)
            .all(|(&traps, &load)| traps == 0 || load > self.k)
    }

    pub fn trials_with_trap(&self) -> usize {
        self.per_trial.iter().filter(|&&t| t > 0).count()
    }
}

/// Whether positions `s..=s + k g` of the walk go `k` times round the
/// decoration cycle of `w_s`.
///
/// The direction is the one still open after the previous step: forward if
/// the walk arrived from the cycle predecessor, backward if it arrived from
/// the cycle successor, forward otherwise. Given the past, each of the `k g`
/// steps then matches with probability `1/(d-1)`.
pub fn is_trap_segment(dg: &DecoratedGraph, walk: &[usize], s: usize, k: usize) -> bool {
    let v = walk[s];
    let backwards = s > 0 && walk[s - 1] == dg.forward(v);
    let len = k * dg.cycle_len;
    (s..s + len).all(|t| {
        let next = if backwards {
            dg.backward(walk[t])
        } else {
            dg.forward(walk[t])
        };
        walk[t + 1] == next
    })
}

/// Runs `trials` nb walks of `n` steps on the decorated graph, splits each
/// into `floor(n / (k g))` disjoint segments and counts trapped segments.
pub fn cycle_trap_frequency(
    dg: &DecoratedGraph,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<TrapReport, WalkError> {
    assert!(k >= 1, "trap needs k >= 1");
    let g = &dg.graph;
    let steps = g.n();
    let len = k * dg.cycle_len;
    let segments = steps / len;
    let rows: Vec<(u64, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let t = simulate_walk(g, WalkKind::Nb, 0, steps, seed.wrapping_add(trial))?;
            let traps = (0..segments)
                .filter(|&j| is_trap_segment(dg, &t.vertices, j * len, k))
                .count() as u64;
            Ok((traps, max_load(&t)))
        })
        .collect::<Result<_, WalkError>>()?;
    let trapped: u64 = rows.iter().map(|r| r.0).sum();
    let total = (segments * trials) as f64;
    let predicted = ((g.d() - 1) as f64).powi(-(len as i32));
    Ok(TrapReport {
        k,
        cycle_len: dg.cycle_len,
        d: g.d(),
        steps,
        trials,
        segments_per_trial: segments,
        trapped_segments: trapped,
        per_trial: rows.iter().map(|r| r.0).collect(),
        max_loads: rows.iter().map(|r| r.1).collect(),
        observed: if total > 0.0 {
            trapped as f64 / total
        } else {
            0.0
        },
        predicted,
        standard_error: (predicted * (1.0 - predicted) / total).sqrt(),
        success_probability: 1.0 - (1.0 - predicted).powi(segments as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle_decorated_expander;

    fn k4() -> RegularGraph {
        RegularGraph::complete(4).unwrap()
    }

    #[test]
    fn nb_trace_on_k4_never_backtracks() {
        let g = k4();
        for seed in 0..50 {
            let t = simulate_walk(&g, WalkKind::Nb, 0, 10, seed).unwrap();
            assert_eq!(t.vertices.len(), 11);
            validate_trace(&g, &t).unwrap();
        }
    }

    #[test]
    fn simple_walk_visits_k4_evenly() {
        let t = simulate_walk(&k4(), WalkKind::Simple, 0, 100_000, 1).unwrap();
        for c in visit_histogram(&t) {
            assert!((c as f64 / 100_001.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = RegularGraph::petersen();
        for kind in [WalkKind::Simple, WalkKind::Nb] {
            let a = simulate_walk(&g, kind, 3, 500, 77).unwrap();
            let b = simulate_walk(&g, kind, 3, 500, 77).unwrap();
            assert_eq!(a, b);
            let c = simulate_walk(&g, kind, 3, 500, 78).unwrap();
            assert_ne!(a.vertices, c.vertices);
        }
        assert_eq!(balls_and_bins(100, 100, 5), balls_and_bins(100, 100, 5));
    }

    #[test]
    fn walk_errors() {
        let c = RegularGraph::cycle(5).unwrap();
        assert_eq!(
            simulate_walk(&c, WalkKind::Nb, 0, 3, 0),
            Err(WalkError::Degree2Nb { d: 2 })
        );
        assert_eq!(
            simulate_walk(&c, WalkKind::Simple, 5, 3, 0),
            Err(WalkError::InvalidStart(5))
        );
        assert_eq!(
            simulate_walk(&c, WalkKind::Simple, 0, 0, 0),
            Err(WalkError::ZeroSteps)
        );
    }

    #[test]
    fn validator_catches_bad_traces() {
        let g = k4();
        let mk = |vertices: Vec<usize>, kind| WalkTrace {
            vertices,
            kind,
            seed: 0,
            start: 0,
        };
        assert_eq!(
            validate_trace(&g, &mk(vec![0, 1, 0], WalkKind::Nb)),
            Err(TraceError::Backtrack { position: 1 })
        );
        assert!(validate_trace(&g, &mk(vec![0, 1, 0], WalkKind::Simple)).is_ok());
        assert_eq!(
            validate_trace(&g, &mk(vec![0, 0], WalkKind::Simple)),
            Err(TraceError::NotAdjacent { position: 0 })
        );
        assert!(matches!(
            validate_trace(&g, &mk(vec![0, 9], WalkKind::Simple)),
            Err(TraceError::OutOfRange {
                position: 1,
                vertex: 9
            })
        ));
    }

    #[test]
    fn loads_on_forced_rotation() {
        // a triangle walked round and round
        let steps = 10;
        let t = WalkTrace {
            vertices: (0..=steps).map(|i| i % 3).collect(),
            kind: WalkKind::Simple,
            seed: 0,
            start: 0,
        };
        assert_eq!(max_load(&t), (steps + 1).div_ceil(3));
        assert_eq!(visit_histogram(&t).iter().sum::<usize>(), steps + 1);
        let single = WalkTrace {
            vertices: vec![2],
            ..t
        };
        assert_eq!(max_load(&single), 1);
    }

    #[test]
    fn self_intersection() {
        let mk = |vertices: Vec<usize>| WalkTrace {
            vertices,
            kind: WalkKind::Simple,
            seed: 0,
            start: 0,
        };
        assert_eq!(self_intersection_time(&mk(vec![0, 1, 2, 3])), 4);
        assert_eq!(self_intersection_time(&mk(vec![0, 1, 2, 1])), 3);
        let g = k4();
        for seed in 0..20 {
            let t = simulate_walk(&g, WalkKind::Simple, 0, 10, seed).unwrap();
            assert!(self_intersection_time(&t) <= 4);
        }
    }

    #[test]
    fn single_ball() {
        assert_eq!(balls_and_bins(10, 1, 3), 1);
        assert_eq!(balls_and_bins(10, 0, 3), 0);
    }

    #[test]
    fn empty_experiment() {
        let r = load_experiment(&RegularGraph::petersen(), 10, 0, 1).unwrap();
        assert_eq!(r.trial_count(), 0);
        assert!(r.nb_summary().is_none());
    }

    #[test]
    fn adding_trials_keeps_earlier_ones() {
        let g = RegularGraph::petersen();
        let a = load_experiment(&g, 50, 3, 11).unwrap();
        let b = load_experiment(&g, 50, 6, 11).unwrap();
        assert_eq!(a.trials[..], b.trials[..3]);
        // load distribution accounts for every vertex of every trial
        assert_eq!(b.nb_loads.iter().sum::<u64>(), 6 * 10);
        let visits: u64 = b
            .nb_loads
            .iter()
            .enumerate()
            .map(|(c, &m)| c as u64 * m)
            .sum();
        assert_eq!(visits, 6 * 51);
    }

    #[test]
    fn report_writers() {
        let r = load_experiment(&RegularGraph::petersen(), 20, 2, 0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial,seed,nb_max,simple_max,bins_max\n0,0,"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(r.summary_json()["trials"], 2);
    }

    #[test]
    fn quartiles() {
        let q = Quartiles::of(&[1, 2, 3, 4]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
        assert_eq!(Quartiles::of(&[7]).unwrap().median, 7.0);
    }

    #[test]
    fn trap_detection() {
        let dg = cycle_decorated_expander(4, 4, 4, 7).unwrap();
        // 0 -> 1 -> 2 -> 3 -> 0 goes once round cycle 0
        let walk = [0, 1, 2, 3, 0, 1];
        assert!(is_trap_segment(&dg, &walk, 0, 1));
        // arrived at 1 from 2 -> must go backwards
        let back = [2, 1, 0, 3, 2, 1];
        assert!(is_trap_segment(&dg, &back, 1, 1));
        let fwd_after_back = [2, 1, 2, 3, 0, 1];
        assert!(!is_trap_segment(&dg, &fwd_after_back, 1, 1));
    }

    #[test]
    fn trap_frequency_is_deterministic_and_consistent() {
        let dg = cycle_decorated_expander(64, 4, 4, 3).unwrap();
        let a = cycle_trap_frequency(&dg, 1, 4, 9).unwrap();
        let b = cycle_trap_frequency(&dg, 1, 4, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.segments_per_trial, 64);
        assert!((a.predicted - 1.0 / 81.0).abs() < 1e-15);
        assert!(a.load_exceeds_k_when_trapped());
        // (d-1)^{kg} far beyond n: traps essentially never happen
        let rare = cycle_trap_frequency(&dg, 6, 4, 9).unwrap();
        assert_eq!(rare.trapped_segments, 0);
    }
}
