use proptest::prelude::*;

use nbwalk::evolve::{nb_initial, nb_step, project_to_vertices, simple_step};
use nbwalk::graph::{girth, random_regular};
use nbwalk::nbkernel::{chebyshev_u, nb_count_matrix, psi, q_k, rates, transition_eigenvalue};
use nbwalk::spectra::{eigenvalues_dense, lambda_star, trace_lower_bound};
use nbwalk::{EdgeDistribution, RegularGraph, VertexDistribution};

fn graph_params() -> impl Strategy<Value = (usize, usize, u64)> {
    (3usize..=5, 5usize..=16, any::<u64>())
        .prop_filter("feasible", |&(d, n, _)| d < n && n * d % 2 == 0)
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelling_preserves_spectrum_counts_and_girth(
        (g, perm) in graph_params()
            .prop_map(|(d, n, s)| random_regular(n, d, s).unwrap())
            .prop_flat_map(|g| { let n = g.n(); (Just(g), permutation(n)) })
    ) {
        let h = g.relabel(&perm).unwrap();
        let a = eigenvalues_dense::<f64>(&g, 1e-12).unwrap();
        let b = eigenvalues_dense::<f64>(&h, 1e-12).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert_eq!(girth(&g), girth(&h));
        let cg = nb_count_matrix::<u64>(&g, 4).unwrap();
        let ch = nb_count_matrix::<u64>(&h, 4).unwrap();
        for u in 0..g.n() {
            for v in 0..g.n() {
                prop_assert_eq!(cg.get(u, v), ch.get(perm[u], perm[v]));
            }
        }
    }

    #[test]
    fn steps_conserve_mass(
        (d, n, seed) in graph_params(),
        weights in prop::collection::vec(0.0f64..1.0, 16 * 5),
        steps in 1usize..8,
    ) {
        let g = random_regular(n, d, seed).unwrap();
        let total: f64 = weights[..n].iter().sum::<f64>() + 1e-9;
        let p: Vec<f64> = weights[..n].iter().map(|w| (w + 1e-9 / n as f64) / total).collect();
        let mut v = VertexDistribution::new(p).unwrap();
        let m = n * d;
        let total: f64 = weights[..m].iter().sum::<f64>() + 1e-9;
        let q: Vec<f64> = weights[..m].iter().map(|w| (w + 1e-9 / m as f64) / total).collect();
        let mut e = EdgeDistribution::new(&g, q).unwrap();
        for _ in 0..steps {
            v = simple_step(&g, &v);
            e = nb_step(&g, &e).unwrap();
            prop_assert!((v.total() - 1.0).abs() < 1e-12);
            prop_assert!((e.total() - 1.0).abs() < 1e-12);
            prop_assert!(v.probs().iter().chain(e.probs()).all(|&x| x >= 0.0));
        }
        prop_assert!((project_to_vertices(&g, &e).total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nb_rows_are_count_rows((d, n, seed) in graph_params(), start in 0usize..16, k in 1usize..7) {
        let g = random_regular(n, d, seed).unwrap();
        let start = start % n;
        let counts = nb_count_matrix::<u64>(&g, k).unwrap();
        let mut e = nb_initial::<f64>(&g, start).unwrap();
        for _ in 1..k {
            e = nb_step(&g, &e).unwrap();
        }
        let row = project_to_vertices(&g, &e);
        for v in 0..n {
            prop_assert!((row.probs()[v] - counts.probability(start, v)).abs() < 1e-13);
        }
    }

    #[test]
    fn trace_bound_holds((d, n, seed) in graph_params()) {
        let g = random_regular(n, d, seed).unwrap();
        let s = eigenvalues_dense::<f64>(&g, 1e-12).unwrap();
        let lam = lambda_star(&s);
        prop_assert!(lam >= trace_lower_bound::<f64>(n, d) - 1e-9);
        prop_assert!(lam <= d as f64 + 1e-9);
    }

    #[test]
    fn psi_is_an_inverse_pair(x in 1.0f64..1e3) {
        // psi(x) = x + sqrt(x^2-1) and its conjugate multiply to one
        let p = psi(x).unwrap();
        prop_assert!(p >= 1.0);
        prop_assert!((p * (x - (x * x - 1.0).sqrt()) - 1.0).abs() < 1e-6);
        prop_assert!(((p + 1.0 / p) / 2.0 - x).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn psi_is_flat_then_increasing(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(psi(lo).unwrap() <= psi(hi).unwrap());
        if hi <= 1.0 {
            prop_assert_eq!(psi(hi).unwrap(), 1.0);
        }
    }

    #[test]
    fn chebyshev_trig_identity(theta in 0.01f64..3.13, k in 0i64..40) {
        let lhs = chebyshev_u(k, theta.cos());
        let rhs = ((k + 1) as f64 * theta).sin() / theta.sin();
        prop_assert!((lhs - rhs).abs() < 1e-8 * (k as f64 + 1.0) / theta.sin().min(1.0));
    }

    #[test]
    fn rate_ratio_in_corollary_band(d in 3usize..40, t in 0.0f64..=1.0) {
        let knee = 2.0 * ((d - 1) as f64).sqrt();
        let lambda = t * d as f64;
        let r = rates(lambda, d).unwrap();
        prop_assert!(r.rho_nb <= 1.0 + 1e-12);
        if lambda >= knee {
            let ratio = r.ratio();
            prop_assert!(ratio >= d as f64 / (2.0 * (d - 1) as f64) - 1e-9);
            prop_assert!(ratio <= 1.0 + 1e-12);
        } else {
            prop_assert!((r.rho_nb - 1.0 / ((d - 1) as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn transition_eigenvalue_root_tends_to_rate(d in 3usize..12, t in 0.0f64..=1.0) {
        // |m_k|^(1/k) for large k approaches the nb rate of λ
        let lambda = t * d as f64;
        let k = 400;
        let m = transition_eigenvalue(lambda, d, k).abs();
        let rate = rates(lambda, d).unwrap().rho_nb;
        let root = m.powf(1.0 / k as f64);
        prop_assert!(root <= rate * 1.02, "root {root} rate {rate}");
    }
}

/// `limsup |q_k(x)|^(1/k) = psi(|x|)`, checked at `k = 500` where `x <= 2`
/// keeps `q_k` finite.
#[test]
fn q_growth_is_psi() {
    for &x in &[1.1f64, 1.5, 2.0, -1.3] {
        let best = (480..=500)
            .map(|k| q_k(k, x, 3).abs().powf(1.0 / k as f64))
            .fold(0.0, f64::max);
        let target = psi(x.abs()).unwrap();
        assert!(
            (best / target - 1.0).abs() < 0.01,
            "x={x}: {best} vs {target}"
        );
    }
    for &x in &[0.0f64, 0.3, 0.9, -0.7] {
        let best = (480..=500)
            .map(|k| q_k(k, x, 3).abs().powf(1.0 / k as f64))
            .fold(0.0, f64::max);
        assert!(best <= 1.02 && best > 0.95, "x={x}: {best}");
    }
}

/// The `q_k` are orthonormal for the Kesten–McKay law, the spectral measure
/// of the infinite d-regular tree.
#[test]
fn q_orthonormal_for_kesten_mckay() {
    for d in [3usize, 4, 7] {
        let dm1 = (d - 1) as f64;
        let df = d as f64;
        // x = cos θ, λ = 2 sqrt(d-1) x; density in x is
        // (2/π) d (d-1) sin^2θ / (d^2 - 4(d-1) cos^2θ) dθ
        let m = 4000;
        let nodes: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                let w = 2.0 / std::f64::consts::PI * df * dm1 * th.sin().powi(2)
                    / (df * df - 4.0 * dm1 * th.cos().powi(2))
                    * std::f64::consts::PI
                    / m as f64;
                (th.cos(), w)
            })
            .collect();
        let mass: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((mass - 1.0).abs() < 1e-10, "d={d} mass {mass}");
        // walks of length 0 are the identity, polynomial 1
        let f = |k: usize, x: f64| if k == 0 { 1.0 } else { q_k(k, x, d) };
        for j in 0..8 {
            for k in 0..8 {
                let ip: f64 = nodes.iter().map(|&(x, w)| w * f(j, x) * f(k, x)).sum();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-9, "d={d} j={j} k={k}: {ip}");
            }
        }
    }
}

#[test]
fn complete_graph_rates() {
    for n in [5usize, 10, 30] {
        let r = rates(1.0f64, n - 1).unwrap();
        assert!((r.rho - 1.0 / (n - 1) as f64).abs() < 1e-15);
        assert!((r.rho_nb - 1.0 / ((n - 2) as f64).sqrt()).abs() < 1e-15);
    }
    let g = RegularGraph::complete(10).unwrap();
    let s = eigenvalues_dense::<f64>(&g, 1e-12).unwrap();
    assert!((lambda_star(&s) - 1.0).abs() < 1e-12);
}
