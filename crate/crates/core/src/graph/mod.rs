//! d-regular simple graphs, their directed-edge view, generators and
//! structural queries.

mod generate;
mod io;
mod structure;

pub use generate::{
    cycle_decorated_expander, cycle_decorated_expander_with, random_regular,
    random_regular_connected, random_regular_connected_with, random_regular_with, DecoratedGraph,
    GenOptions,
};
pub use io::GraphFile;
pub use structure::{
    bfs_distances, component_count, girth, is_bipartite, is_connected, spaced_set, SpacedSet,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} has {found} neighbours, expected {expected}")]
    NonRegular {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex} lists {neighbor} but {neighbor} does not list {vertex}")]
    Asymmetric { vertex: usize, neighbor: usize },
    #[error("vertex {vertex} lists itself")]
    SelfLoop { vertex: usize },
    #[error("vertex {vertex} lists {neighbor} more than once")]
    DuplicateEdge { vertex: usize, neighbor: usize },
    #[error("vertex {vertex} lists {neighbor}, which is not a vertex id")]
    VertexOutOfRange { vertex: usize, neighbor: usize },
    #[error("degree {d} is below the minimum of {min}")]
    DegreeTooSmall { d: usize, min: usize },
    #[error("need at least {min} vertices, got {n}")]
    TooFewVertices { n: usize, min: usize },
    #[error("no simple {d}-regular graph on {n} vertices")]
    InfeasibleDegree { n: usize, d: usize },
    #[error("invalid construction parameters: {0}")]
    InvalidParameters(String),
    #[error("pairing model produced no simple graph in {attempts} attempts")]
    GenerationTimeout { attempts: u64 },
    #[error("random layer kept overlapping the cycle layer after {attempts} attempts")]
    OverlapTimeout { attempts: u64 },
    #[error("no connected graph after {attempts} samples")]
    Disconnected { attempts: u64 },
    #[error("graph file: {0}")]
    Format(String),
}

/// Bijection between `0..n*d` and directed edges `(tail, head)`.
///
/// Edge `tail * d + slot` points from `tail` to the `slot`-th entry of its
/// sorted neighbour list, so tails and heads are computed without lookup and
/// only the reverse map is tabulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedEdgeIndex {
    d: usize,
    reverse: Vec<usize>,
}

impl DirectedEdgeIndex {
    fn build(n: usize, d: usize, adj: &[usize]) -> Self {
        let mut reverse = vec![0; n * d];
        for tail in 0..n {
            for slot in 0..d {
                let head = adj[tail * d + slot];
                let row = &adj[head * d..head * d + d];
                let back = row
                    .binary_search(&tail)
                    .expect("validated adjacency is symmetric");
                reverse[tail * d + slot] = head * d + back;
            }
        }
        DirectedEdgeIndex { d, reverse }
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    #[inline]
    pub fn id(&self, tail: usize, slot: usize) -> usize {
        tail * self.d + slot
    }

    #[inline]
    pub fn tail(&self, edge: usize) -> usize {
        edge / self.d
    }

    #[inline]
    pub fn slot(&self, edge: usize) -> usize {
        edge % self.d
    }

    #[inline]
    pub fn reverse(&self, edge: usize) -> usize {
        self.reverse[edge]
    }
}

/// Immutable simple d-regular undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    /// Row-major `n x d`, each row sorted ascending.
    adj: Vec<usize>,
    edges: DirectedEdgeIndex,
}

impl RegularGraph {
    /// Validates per-vertex neighbour lists and sorts each row.
    pub fn from_adjacency<R: AsRef<[usize]>>(lists: &[R]) -> Result<Self, GraphError> {
        let n = lists.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let d = lists[0].as_ref().len();
        let mut adj = Vec::with_capacity(n * d);
        for (vertex, row) in lists.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(GraphError::NonRegular {
                    vertex,
                    expected: d,
                    found: row.len(),
                });
            }
            let mut sorted = row.to_vec();
            sorted.sort_unstable();
            for (i, &w) in sorted.iter().enumerate() {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange {
                        vertex,
                        neighbor: w,
                    });
                }
                if w == vertex {
                    return Err(GraphError::SelfLoop { vertex });
                }
                if i > 0 && sorted[i - 1] == w {
                    return Err(GraphError::DuplicateEdge {
                        vertex,
                        neighbor: w,
                    });
                }
            }
            adj.extend_from_slice(&sorted);
        }
        if d < 2 {
            return Err(GraphError::DegreeTooSmall { d, min: 2 });
        }
        for vertex in 0..n {
            for &w in &adj[vertex * d..vertex * d + d] {
                if adj[w * d..w * d + d].binary_search(&vertex).is_err() {
                    return Err(GraphError::Asymmetric {
                        vertex,
                        neighbor: w,
                    });
                }
            }
        }
        Ok(Self::from_sorted_unchecked(n, d, adj))
    }

    pub(crate) fn from_sorted_unchecked(n: usize, d: usize, adj: Vec<usize>) -> Self {
        let edges = DirectedEdgeIndex::build(n, d, &adj);
        RegularGraph { n, d, adj, edges }
    }

    /// The complete graph `K_n`, `n >= 3`.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices { n, min: 3 });
        }
        let lists: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..n).filter(|&w| w != v).collect())
            .collect();
        Self::from_adjacency(&lists)
    }

    /// The cycle `C_n` (2-regular), `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices { n, min: 3 });
        }
        let lists: Vec<[usize; 2]> = (0..n).map(|v| [(v + n - 1) % n, (v + 1) % n]).collect();
        Self::from_adjacency(&lists)
    }

    /// The Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`.
    pub fn petersen() -> Self {
        let lists: Vec<[usize; 3]> = (0..10)
            .map(|v| {
                if v < 5 {
                    [(v + 4) % 5, (v + 1) % 5, v + 5]
                } else {
                    let i = v - 5;
                    [v - 5, 5 + (i + 2) % 5, 5 + (i + 3) % 5]
                }
            })
            .collect();
        Self::from_adjacency(&lists).expect("Petersen graph is 3-regular")
    }

    /// Disjoint union; both graphs must share the degree.
    pub fn disjoint_union(&self, other: &RegularGraph) -> Result<Self, GraphError> {
        if self.d != other.d {
            return Err(GraphError::InvalidParameters(format!(
                "degrees differ: {} vs {}",
                self.d, other.d
            )));
        }
        let mut adj = self.adj.clone();
        adj.extend(other.adj.iter().map(|&w| w + self.n));
        Ok(Self::from_sorted_unchecked(self.n + other.n, self.d, adj))
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::InvalidParameters(
                "permutation length differs from vertex count".into(),
            ));
        }
        let mut lists = vec![Vec::new(); self.n];
        for v in 0..self.n {
            let target = perm[v];
            if target >= self.n {
                return Err(GraphError::InvalidParameters("not a permutation".into()));
            }
            lists[target] = self.neighbors(v).iter().map(|&w| perm[w]).collect();
        }
        if lists.iter().any(|l| l.is_empty()) {
            return Err(GraphError::InvalidParameters("not a permutation".into()));
        }
        Self::from_adjacency(&lists)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Undirected edge count `n d / 2`.
    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v * self.d..(v + 1) * self.d]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edge_index(&self) -> &DirectedEdgeIndex {
        &self.edges
    }

    /// Head of directed edge `e`.
    #[inline]
    pub fn head(&self, e: usize) -> usize {
        self.adj[e]
    }

    /// Directed edge id of `(tail, head)`, if they are adjacent.
    pub fn edge_id(&self, tail: usize, head: usize) -> Option<usize> {
        self.neighbors(tail)
            .binary_search(&head)
            .ok()
            .map(|slot| self.edges.id(tail, slot))
    }

    /// Neighbour lists as owned rows.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.neighbors(v).to_vec()).collect()
    }

    /// Dense row-major adjacency matrix.
    pub fn adjacency_matrix<T: num_traits::Zero + num_traits::One + Clone>(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.n * self.n];
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                m[u * self.n + v] = T::one();
            }
        }
        m
    }
}
