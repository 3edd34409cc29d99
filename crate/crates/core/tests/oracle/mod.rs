//! Slow, independent reference computations for small graphs.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use nbwalk::graph::{random_regular, RegularGraph};

/// Small graphs with `d >= 3` and `n <= 12`.
pub fn small_corpus() -> Vec<(String, RegularGraph)> {
    let k4 = RegularGraph::complete(4).unwrap();
    let k33 = RegularGraph::from_adjacency(&[
        [3, 4, 5],
        [3, 4, 5],
        [3, 4, 5],
        [0, 1, 2],
        [0, 1, 2],
        [0, 1, 2],
    ])
    .unwrap();
    let cube = RegularGraph::from_adjacency(
        &(0..8usize)
            .map(|v| vec![v ^ 1, v ^ 2, v ^ 4])
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let prism = RegularGraph::from_adjacency(&[
        [1, 2, 3],
        [0, 2, 4],
        [0, 1, 5],
        [0, 4, 5],
        [1, 3, 5],
        [2, 3, 4],
    ])
    .unwrap();
    let mut out = vec![
        ("K4".to_string(), k4.clone()),
        ("K5".to_string(), RegularGraph::complete(5).unwrap()),
        ("K6".to_string(), RegularGraph::complete(6).unwrap()),
        ("K10".to_string(), RegularGraph::complete(10).unwrap()),
        ("K3,3".to_string(), k33),
        ("prism".to_string(), prism),
        ("cube".to_string(), cube),
        ("petersen".to_string(), RegularGraph::petersen()),
        ("2K4".to_string(), k4.disjoint_union(&k4).unwrap()),
    ];
    for (n, d, seed) in [(10, 3, 1), (12, 3, 2), (12, 4, 3), (12, 5, 4), (10, 4, 5)] {
        out.push((
            format!("random({n},{d},{seed})"),
            random_regular(n, d, seed).unwrap(),
        ));
    }
    out
}

/// `counts[u][v]` = number of non-backtracking walks of length `k` from `u`
/// to `v`, by explicit depth-first enumeration.
pub fn enumerate_nb_walks(g: &RegularGraph, k: usize) -> Vec<Vec<u64>> {
    fn go(g: &RegularGraph, prev: Option<usize>, cur: usize, left: usize, row: &mut [u64]) {
        if left == 0 {
            row[cur] += 1;
            return;
        }
        for &w in g.neighbors(cur) {
            if Some(w) != prev {
                go(g, Some(cur), w, left - 1, row);
            }
        }
    }
    (0..g.n())
        .map(|u| {
            let mut row = vec![0; g.n()];
            go(g, None, u, k, &mut row);
            row
        })
        .collect()
}

/// Girth by searching for the shortest closed non-backtracking walk that
/// returns to its start without repeating a vertex. Exponential; tiny graphs only.
pub fn girth_by_cycle_search(g: &RegularGraph) -> Option<usize> {
    fn go(
        g: &RegularGraph,
        start: usize,
        path: &mut Vec<usize>,
        limit: usize,
        best: &mut Option<usize>,
    ) {
        let cur = *path.last().unwrap();
        for &w in g.neighbors(cur) {
            if w == start && path.len() >= 3 {
                let len = path.len();
                if best.is_none_or(|b| len < b) {
                    *best = Some(len);
                }
            } else if !path.contains(&w)
                && path.len() < limit
                && best.is_none_or(|b| path.len() + 1 < b)
            {
                path.push(w);
                go(g, start, path, limit, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    for s in 0..g.n() {
        let mut path = vec![s];
        go(g, s, &mut path, g.n(), &mut best);
    }
    best
}

/// Every labelled d-regular graph on `n` vertices with `d >= 2`.
pub fn all_regular_graphs(n: usize) -> Vec<RegularGraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut lists = vec![Vec::new(); n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                lists[u].push(v);
                lists[v].push(u);
            }
        }
        let d = lists[0].len();
        if d >= 2 && lists.iter().all(|l| l.len() == d) {
            out.push(RegularGraph::from_adjacency(&lists).unwrap());
        }
    }
    out
}

/// Polynomial with rational coefficients, lowest degree first.
pub type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

/// Characteristic polynomial `det(x I - A)` by Faddeev–LeVerrier in exact
/// integer arithmetic.
pub fn char_poly(g: &RegularGraph) -> Poly {
    let n = g.n();
    let a: Vec<BigInt> = g
        .adjacency_matrix::<i64>()
        .into_iter()
        .map(BigInt::from)
        .collect();
    let matmul = |x: &[BigInt], y: &[BigInt]| {
        let mut out = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if x[i * n + k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += &x[i * n + k] * &y[k * n + j];
                }
            }
        }
        out
    };
    // c[n] = 1; M_0 = 0; M_k = A M_{k-1} + c_{n-k+1} I; c_{n-k} = -tr(A M_k)/k
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m = vec![BigInt::zero(); n * n];
    for k in 1..=n {
        let mut next = matmul(&a, &m);
        for i in 0..n {
            next[i * n + i] += &c[n - k + 1];
        }
        m = next;
        let am = matmul(&a, &m);
        let tr: BigInt = (0..n).map(|i| am[i * n + i].clone()).sum();
        c[n - k] = -tr / BigInt::from(k);
    }
    c.into_iter().map(BigRational::from_integer).collect()
}

fn poly_rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let lead = b.last().unwrap().clone();
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[i + shift] = &r[i + shift] - &f * bi;
        }
        r.pop();
        if r.is_empty() {
            r.push(BigRational::zero());
        }
        r = trim(r);
    }
    r
}

fn poly_div(a: &Poly, b: &Poly) -> Poly {
    if a.len() < b.len() {
        return vec![BigRational::zero()];
    }
    let mut r = a.clone();
    let lead = b.last().unwrap().clone();
    let mut q = vec![BigRational::zero(); a.len() + 1 - b.len()];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[i + shift] = &r[i + shift] - &f * bi;
        }
        q[shift] = f;
        r.pop();
    }
    trim(q)
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().unwrap().clone();
    a.into_iter().map(|c| c / &lead).collect()
}

fn derivative(p: &Poly) -> Poly {
    if p.len() == 1 {
        return vec![BigRational::zero()];
    }
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

/// Yun's square-free factorisation: `p = prod_i f_i^i`, returned as `(i, f_i)`
/// with every `f_i` of positive degree.
pub fn square_free(p: &Poly) -> Vec<(usize, Poly)> {
    let mut out = Vec::new();
    let dp = derivative(p);
    let a0 = poly_gcd(p, &dp);
    let mut b = poly_div(p, &a0);
    let mut c = poly_div(&dp, &a0);
    let mut i = 1;
    loop {
        let db = derivative(&b);
        let d: Poly = trim(
            (0..c.len().max(db.len()))
                .map(|j| {
                    c.get(j).cloned().unwrap_or_else(BigRational::zero)
                        - db.get(j).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        );
        if b.len() == 1 {
            break;
        }
        let a = poly_gcd(&b, &d);
        if a.len() > 1 {
            out.push((i, a.clone()));
        }
        b = poly_div(&b, &a);
        c = poly_div(&d, &a);
        i += 1;
    }
    out
}

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(p)];
    loop {
        let r = poly_rem(&chain[chain.len() - 2], &chain[chain.len() - 1]);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| eval(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Real roots of a square-free polynomial in `(lo, hi]`, isolated with Sturm
/// sequences and refined by bisection to width `2^-36`.
fn real_roots(p: &Poly, lo: BigRational, hi: BigRational) -> Vec<f64> {
    let chain = sturm_chain(p);
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi)];
    let eps = BigRational::new(BigInt::one(), BigInt::one() << 36);
    let two = BigRational::from_integer(BigInt::from(2));
    while let Some((a, b)) = stack.pop() {
        let count = sign_changes(&chain, &a) - sign_changes(&chain, &b);
        if count == 0 {
            continue;
        }
        if count == 1 && &b - &a < eps {
            out.push(((&a + &b) / &two).to_f64().unwrap());
            continue;
        }
        let mid = (&a + &b) / &two;
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    out
}

/// Adjacency eigenvalues with multiplicity, descending, from the exact
/// characteristic polynomial.
pub fn eigenvalues_by_char_poly(g: &RegularGraph) -> Vec<f64> {
    let p = char_poly(g);
    // all eigenvalues lie in [-d, d]
    let bound = BigRational::from_integer(BigInt::from(g.d() as i64 + 1));
    let mut out = Vec::new();
    for (mult, f) in square_free(&p) {
        for r in real_roots(&f, -bound.clone(), bound.clone()) {
            out.extend(std::iter::repeat_n(r, mult));
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}
