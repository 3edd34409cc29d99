use std::collections::VecDeque;

use super::RegularGraph;

/// Breadth-first distances from `source`; `None` for unreachable vertices.
pub fn bfs_distances(g: &RegularGraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn component_count(g: &RegularGraph) -> usize {
    let mut seen = vec![false; g.n()];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

pub fn is_connected(g: &RegularGraph) -> bool {
    component_count(g) == 1
}

/// Two-colouring test over every component.
pub fn is_bipartite(g: &RegularGraph) -> bool {
    let mut color: Vec<Option<bool>> = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for s in 0..g.n() {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(false);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &w in g.neighbors(u) {
                match color[w] {
                    None => {
                        color[w] = Some(!cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Length of the shortest cycle, `None` for a forest.
///
/// Runs a breadth-first search from every root and records the first
/// non-tree edge `(u, w)` closing a cycle of length `dist(u) + dist(w) + 1`.
/// Each search stops once no shorter cycle can appear at the current depth.
/// The minimum over all roots is exact.
pub fn girth(g: &RegularGraph) -> Option<usize> {
    let n = g.n();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut touched = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for root in 0..n {
        for &v in &touched {
            dist[v] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        parent[root] = usize::MAX;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if 2 * du + 1 >= best {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = du + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else if w != parent[u] {
                    best = best.min(du + dist[w] + 1);
                    if best == 3 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 3 {
            break;
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Vertices pairwise at graph distance at least `spacing`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacedSet {
    pub vertices: Vec<usize>,
    pub spacing: usize,
}

impl SpacedSet {
    /// Guaranteed minimum size of the greedy set: a vertex blocks at most the
    /// ball of radius `spacing - 1` around it, whose volume is below
    /// `1 + sum_{i < spacing} d (d-1)^i`.
    pub fn size_lower_bound(n: usize, d: usize, spacing: usize) -> f64 {
        let d = d as f64;
        let ball: f64 = 1.0
            + (0..spacing)
                .map(|i| d * (d - 1.0).powi(i as i32))
                .sum::<f64>();
        n as f64 / ball
    }
}

/// Greedy maximal set with pairwise distance `>= spacing`, scanning vertex ids
/// in ascending order.
pub fn spaced_set(g: &RegularGraph, spacing: usize) -> SpacedSet {
    let spacing = spacing.max(1);
    let n = g.n();
    let mut blocked = vec![false; n];
    let mut depth = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    let mut vertices = Vec::new();
    for v in 0..n {
        if blocked[v] {
            continue;
        }
        vertices.push(v);
        blocked[v] = true;
        // block the ball of radius spacing - 1
        for &t in &touched {
            depth[t] = usize::MAX;
        }
        touched.clear();
        depth[v] = 0;
        touched.push(v);
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            if depth[u] + 1 >= spacing {
                continue;
            }
            for &w in g.neighbors(u) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    blocked[w] = true;
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
    }
    SpacedSet { vertices, spacing }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> RegularGraph {
        let c3 = RegularGraph::cycle(3).unwrap();
        c3.disjoint_union(&c3).unwrap()
    }

    #[test]
    fn girth_of_small_graphs() {
        assert_eq!(girth(&RegularGraph::complete(4).unwrap()), Some(3));
        assert_eq!(girth(&RegularGraph::petersen()), Some(5));
        assert_eq!(girth(&RegularGraph::cycle(6).unwrap()), Some(6));
        assert_eq!(girth(&two_triangles()), Some(3));
    }

    #[test]
    fn connectivity_and_bipartiteness() {
        let k4 = RegularGraph::complete(4).unwrap();
        assert!(is_connected(&k4));
        assert!(!is_bipartite(&k4));
        assert!(is_bipartite(&RegularGraph::cycle(6).unwrap()));
        assert!(!is_bipartite(&RegularGraph::cycle(5).unwrap()));
        let tt = two_triangles();
        assert!(!is_connected(&tt));
        assert_eq!(component_count(&tt), 2);
    }

    #[test]
    fn spaced_sets() {
        let p = RegularGraph::petersen();
        assert_eq!(spaced_set(&p, 1).vertices, (0..10).collect::<Vec<_>>());
        let k4 = RegularGraph::complete(4).unwrap();
        assert_eq!(spaced_set(&k4, 2).vertices, vec![0]);
        let s = spaced_set(&p, 3);
        assert!(!s.vertices.is_empty());
        for &a in &s.vertices {
            let dist = bfs_distances(&p, a);
            for &b in &s.vertices {
                if a != b {
                    assert!(dist[b].unwrap() >= 3);
                }
            }
        }
    }

    #[test]
    fn distances_on_cycle() {
        let c = RegularGraph::cycle(6).unwrap();
        let dist: Vec<usize> = bfs_distances(&c, 0)
            .into_iter()
            .map(Option::unwrap)
            .collect();
        assert_eq!(dist, vec![0, 1, 2, 3, 2, 1]);
        assert_eq!(bfs_distances(&two_triangles(), 0)[4], None);
    }
}
