//! Random regular graphs from the pairing (configuration) model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_connected, GraphError, RegularGraph};

/// Restart budgets for the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    /// Pairing attempts before giving up. Each attempt aborts at its first
    /// self-loop or repeated edge and starts over from scratch.
    pub max_attempts: u64,
    /// Whole-graph resamples allowed by [`random_regular_connected`].
    pub max_connect_samples: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_attempts: 1_000_000,
            max_connect_samples: 1_000,
        }
    }
}

enum Failure {
    Collision,
    Overlap,
}

/// One uniformly random perfect matching of the `n d` half-edges. Fails on
/// the first pair that would create a loop, a repeated edge, or an edge
/// rejected by `forbidden`.
fn try_pairing(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
    forbidden: &dyn Fn(usize, usize) -> bool,
    rows: &mut [Vec<usize>],
) -> Result<(), Failure> {
    for row in rows.iter_mut() {
        row.clear();
    }
    let mut points: Vec<usize> = (0..n * d).collect();
    let total = points.len();
    let mut i = 0;
    while i < total {
        let j = rng.gen_range(i + 1..total);
        points.swap(i + 1, j);
        let u = points[i] / d;
        let v = points[i + 1] / d;
        if u == v || rows[u].contains(&v) {
            return Err(Failure::Collision);
        }
        if forbidden(u, v) {
            return Err(Failure::Overlap);
        }
        rows[u].push(v);
        rows[v].push(u);
        i += 2;
    }
    Ok(())
}

fn sample_layer(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
    opts: &GenOptions,
    forbidden: &dyn Fn(usize, usize) -> bool,
) -> Result<Vec<Vec<usize>>, GraphError> {
    let mut rows = vec![Vec::with_capacity(d); n];
    let mut overlaps = 0u64;
    for _ in 0..opts.max_attempts {
        match try_pairing(n, d, rng, forbidden, &mut rows) {
            Ok(()) => return Ok(rows),
            Err(Failure::Overlap) => overlaps += 1,
            Err(Failure::Collision) => {}
        }
    }
    if overlaps * 2 > opts.max_attempts {
        Err(GraphError::OverlapTimeout {
            attempts: opts.max_attempts,
        })
    } else {
        Err(GraphError::GenerationTimeout {
            attempts: opts.max_attempts,
        })
    }
}

fn check_feasible(n: usize, d: usize) -> Result<(), GraphError> {
    if d < 3 {
        return Err(GraphError::DegreeTooSmall { d, min: 3 });
    }
    if d >= n || (n * d) % 2 == 1 {
        return Err(GraphError::InfeasibleDegree { n, d });
    }
    Ok(())
}

fn rows_to_graph(n: usize, d: usize, mut rows: Vec<Vec<usize>>) -> RegularGraph {
    let mut adj = Vec::with_capacity(n * d);
    for row in rows.iter_mut() {
        row.sort_unstable();
        adj.extend_from_slice(row);
    }
    RegularGraph::from_sorted_unchecked(n, d, adj)
}

/// Simple d-regular graph on `n` vertices from the pairing model with full
/// restart on collisions. Deterministic in `seed`; connectivity is not
/// guaranteed (see [`random_regular_connected`]).
///
/// The expected number of restarts grows like `exp((d^2 - 1) / 4)`, so the
/// default budget is comfortable up to about `d = 7`.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<RegularGraph, GraphError> {
    random_regular_with(n, d, seed, &GenOptions::default())
}

pub fn random_regular_with(
    n: usize,
    d: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<RegularGraph, GraphError> {
    check_feasible(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = sample_layer(n, d, &mut rng, opts, &|_, _| false)?;
    Ok(rows_to_graph(n, d, rows))
}

/// Like [`random_regular`] but keeps sampling from the same random stream
/// until the graph is connected. When the first sample is connected the
/// result equals `random_regular(n, d, seed)`.
pub fn random_regular_connected(n: usize, d: usize, seed: u64) -> Result<RegularGraph, GraphError> {
    random_regular_connected_with(n, d, seed, &GenOptions::default())
}

pub fn random_regular_connected_with(
    n: usize,
    d: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<RegularGraph, GraphError> {
    check_feasible(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.max_connect_samples {
        let rows = sample_layer(n, d, &mut rng, opts, &|_, _| false)?;
        let g = rows_to_graph(n, d, rows);
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(GraphError::Disconnected {
        attempts: opts.max_connect_samples,
    })
}

/// A d-regular graph in which every vertex lies on a designated cycle of
/// length `g`.
///
/// Cycle `c` consists of the vertices `c*g .. c*g + g` in order; the
/// remaining `d - 2` edges at each vertex form a random layer disjoint from
/// the cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedGraph {
    pub graph: RegularGraph,
    pub cycles: usize,
    pub cycle_len: usize,
}

impl DecoratedGraph {
    #[inline]
    pub fn cycle_of(&self, v: usize) -> usize {
        v / self.cycle_len
    }

    /// Successor of `v` along its cycle.
    #[inline]
    pub fn forward(&self, v: usize) -> usize {
        let base = v - v % self.cycle_len;
        base + (v % self.cycle_len + 1) % self.cycle_len
    }

    /// Predecessor of `v` along its cycle.
    #[inline]
    pub fn backward(&self, v: usize) -> usize {
        let base = v - v % self.cycle_len;
        base + (v % self.cycle_len + self.cycle_len - 1) % self.cycle_len
    }

    pub fn cycle_vertices(&self, c: usize) -> std::ops::Range<usize> {
        c * self.cycle_len..(c + 1) * self.cycle_len
    }

    fn on_cycle_edge(cycle_len: usize, u: usize, v: usize) -> bool {
        if u / cycle_len != v / cycle_len {
            return false;
        }
        let (a, b) = (u % cycle_len, v % cycle_len);
        (a + 1) % cycle_len == b || (b + 1) % cycle_len == a
    }
}

/// `cycles` disjoint cycles of length `cycle_len` overlaid with an
/// independent simple `(d - 2)`-regular random layer that shares no edge
/// with them.
pub fn cycle_decorated_expander(
    cycles: usize,
    cycle_len: usize,
    d: usize,
    seed: u64,
) -> Result<DecoratedGraph, GraphError> {
    cycle_decorated_expander_with(cycles, cycle_len, d, seed, &GenOptions::default())
}

pub fn cycle_decorated_expander_with(
    cycles: usize,
    cycle_len: usize,
    d: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<DecoratedGraph, GraphError> {
    if cycles == 0 || cycle_len < 3 {
        return Err(GraphError::InvalidParameters(format!(
            "need at least one cycle of length >= 3, got {cycles} cycles of length {cycle_len}"
        )));
    }
    if d < 4 {
        return Err(GraphError::DegreeTooSmall { d, min: 4 });
    }
    let n = cycles * cycle_len;
    if d >= n || (n * (d - 2)) % 2 == 1 {
        return Err(GraphError::InfeasibleDegree { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forbidden = |u: usize, v: usize| DecoratedGraph::on_cycle_edge(cycle_len, u, v);
    let mut rows = sample_layer(n, d - 2, &mut rng, opts, &forbidden)?;
    for (v, row) in rows.iter_mut().enumerate() {
        let base = v - v % cycle_len;
        row.push(base + (v % cycle_len + 1) % cycle_len);
        row.push(base + (v % cycle_len + cycle_len - 1) % cycle_len);
    }
    Ok(DecoratedGraph {
        graph: rows_to_graph(n, d, rows),
        cycles,
        cycle_len,
    })
}
