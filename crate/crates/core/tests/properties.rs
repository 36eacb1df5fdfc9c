mod common;

use common::{brute_force_alpha, lambda_min};
use conichom::graph::{classical_homomorphism, disjoint_union};
use conichom::hom::*;
use conichom::linalg::{contract, kron};
use conichom::theta::{big_theta, theta};
use conichom::{ConeTag, Graph, Partition, SymMatrix};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| Graph::random(n, seed))
}

/// A graph with a classical map into `K_k` for `k = χ`, and that map.
fn colored(max_n: usize) -> impl Strategy<Value = (Graph, Graph, Vec<usize>)> {
    graph(max_n).prop_map(|g| {
        let k = chi_exact(&g).unwrap();
        let target = Graph::complete(k);
        let map = classical_homomorphism(&g, &target).unwrap();
        (g, target, map)
    })
}

fn gram(vecs: &[Vec<f64>]) -> SymMatrix {
    let n = vecs[0].len();
    SymMatrix::from_fn(n, |i, j| vecs.iter().map(|v| v[i] * v[j]).sum())
}

fn psd_matrix(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), 1..=n + 1))
        .prop_map(|v| gram(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_json_round_trip(g in graph(9)) {
        let text = g.to_json();
        let back = Graph::from_json(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn lifts_compose_like_maps((g, k, map) in colored(7), extra in 0usize..3) {
        let bigger = Graph::complete(k.n() + extra);
        let embed: Vec<usize> = (0..k.n()).collect();
        let a = classical_lift(&g, &k, &map).unwrap();
        let b = classical_lift(&k, &bigger, &embed).unwrap();
        let ab = compose_witnesses(&a, &b).unwrap();
        let direct = classical_lift(&g, &bigger, &map).unwrap();
        prop_assert!(ab.h.max_abs_diff(&direct.h) == 0.0);
        prop_assert!(ab.is_valid(1e-12));
        prop_assert!(gram_check(&ab.h, 1e-12));
        prop_assert!(nonsignalling_check(&ab.h, 1e-12));
    }

    #[test]
    fn lattice_operations_keep_lifts_valid((g, k, map) in colored(6), (g2, k2, map2) in colored(5)) {
        let a = classical_lift(&g, &k, &map).unwrap();
        let id = identity_witness(&g);
        let meet = categorical_meet_witness(&a, &id).unwrap();
        prop_assert!(meet.is_valid(1e-12));

        let target = Graph::complete(k.n().max(k2.n()));
        let a = classical_lift(&g, &target, &map).unwrap();
        let b = classical_lift(&g2, &target, &map2).unwrap();
        let u = disjoint_union_witness(&a, &b).unwrap();
        prop_assert!(u.is_valid(1e-9), "{:?}", u.residuals);
        prop_assert_eq!(&u.x, &disjoint_union(&g, &g2));
    }

    #[test]
    fn hom_theta_round_trip((g, k, map) in colored(6)) {
        let w = classical_lift(&g, &k, &map).unwrap();
        let m = hom_to_theta_witness(&w).unwrap();
        prop_assert!((m.trace() - 1.0).abs() < 1e-12);
        prop_assert!((m.sum() - g.n() as f64).abs() < 1e-12);
        let back = theta_to_hom_witness(&m, &g, &k, ConeTag::Cp, 1e-9).unwrap();
        prop_assert!(back.h.max_abs_diff(&w.h) < 1e-12);
    }

    #[test]
    fn kron_and_contraction_stay_psd(a in psd_matrix(5), b in psd_matrix(5)) {
        let k = kron(&a, &b).unwrap();
        prop_assert!(lambda_min(&k.rows()) >= -1e-9);
        let n = k.dim();
        let blocks: Vec<Vec<usize>> = (0..a.dim()).map(|i| (i * b.dim()..(i + 1) * b.dim()).collect()).collect();
        let c = contract(&k, &Partition::new(n, blocks).unwrap()).unwrap();
        // contracting A ⊗ B over the blocks of B gives (Σ B) A
        prop_assert!(c.max_abs_diff(&a.scaled(b.sum())) < 1e-9 * (1.0 + a.max_abs() * b.max_abs()));
        prop_assert!(lambda_min(&c.rows()) >= -1e-9);
    }

    #[test]
    fn degenerate_matrix_is_psd_with_unit_blocks(n in 1usize..9) {
        let h = degenerate_weak_splus_witness(n);
        prop_assert!(lambda_min(&h.rows()) >= -1e-9);
        prop_assert!(gram_check(&h, 1e-12));
        let r = witness_residuals(&h, &Graph::complete(n), &Graph::complete(2), ConeTag::Splus).unwrap();
        prop_assert!(r.passes(HomMode::Weak, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta_sandwich(g in graph(7)) {
        prop_assume!(g.n() >= 2);
        let alpha = brute_force_alpha(&g) as f64;
        let clique_cover = chi_exact(&g.complement()).unwrap() as f64;
        let vals: Vec<f64> = ConeTag::ALL.iter().map(|&c| theta(&g, c).unwrap().value).collect();
        prop_assert_eq!(vals[0], alpha);
        prop_assert!(vals[0] <= vals[1] + 1e-6 && vals[1] <= vals[2] + 1e-6, "{:?}", vals);
        prop_assert!(vals[2] <= clique_cover + 1e-6);

        let big: Vec<f64> = ConeTag::ALL.iter().map(|&c| big_theta(&g, c).unwrap().value).collect();
        prop_assert!(big[2] <= big[1] + 1e-6 && big[1] <= big[0] + 1e-6, "{:?}", big);
        prop_assert!(big[0] <= chi_exact(&g).unwrap() as f64 + 1e-9);
        for i in 1..3 {
            prop_assert!(vals[i] * big[i] >= g.n() as f64 - 1e-6);
        }
    }

    #[test]
    fn conic_decisions_respect_classical_maps(x in graph(5), y in graph(5)) {
        let classical = classical_homomorphism(&x, &y).is_some();
        for cone in [ConeTag::Dnn, ConeTag::Splus] {
            let d = decide_hom(&x, &y, cone, HomMode::Strong).unwrap();
            if classical {
                prop_assert!(d.verdict.is_yes());
            }
            if let Some(w) = d.verdict.witness() {
                prop_assert!(w.is_valid(1e-7));
            }
            prop_assert!(!matches!(d.verdict, Verdict::Inconclusive(_)), "{}", d.to_json());
        }
    }
}
