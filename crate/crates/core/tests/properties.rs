use proptest::prelude::*;

use gm_surrogate::cli::{cmd_match, parse_graph, MatchOptions};
use gm_surrogate::rational::{format_rational, parse_rational, rat};
use gm_surrogate::{
    build_objective, build_perturbed, oracle_gm, symmetric_difference, AdjacencyMatrix, Permutation, Rational,
};

fn graph(n: usize) -> impl Strategy<Value = AdjacencyMatrix> {
    proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
        let mut edges = Vec::new();
        let mut k = 0;
        for u in 1..=n {
            for v in u + 1..=n {
                if bits[k] {
                    edges.push((u, v));
                }
                k += 1;
            }
        }
        AdjacencyMatrix::from_edges(n, &edges).unwrap()
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|image| Permutation::new(image).unwrap())
}

fn pair(n: usize) -> impl Strategy<Value = (AdjacencyMatrix, AdjacencyMatrix, Permutation)> {
    (graph(n), graph(n), permutation(n))
}

proptest! {
    #[test]
    fn inverse_undoes_composition(p in permutation(6)) {
        prop_assert_eq!(p.compose(&p.inverse()), Permutation::identity(6));
        prop_assert_eq!(p.inverse().compose(&p), Permutation::identity(6));
        prop_assert_eq!(Permutation::from_one_based(&p.one_based()).unwrap(), p);
    }

    #[test]
    fn permutation_matrix_is_doubly_stochastic(p in permutation(5)) {
        let x = p.to_matrix();
        for i in 0..5 {
            let row: Rational = (0..5).map(|j| x[i * 5 + j].clone()).sum();
            let col: Rational = (0..5).map(|j| x[j * 5 + i].clone()).sum();
            prop_assert_eq!(row, rat(1, 1));
            prop_assert_eq!(col, rat(1, 1));
        }
    }

    #[test]
    fn symdiff_and_common_edges_partition_the_edges((g1, g2, p) in pair(5)) {
        let obj = build_objective(&g1, &g2).unwrap();
        let qform = gm_surrogate::eval_qform(&obj, &p.to_matrix()).unwrap();
        let symdiff = symmetric_difference(&g1, &g2, &p).unwrap();
        prop_assert_eq!(
            Rational::from_integer((symdiff as i64).into()) + qform,
            Rational::from_integer(((g1.edge_count() + g2.edge_count()) as i64).into())
        );
    }

    #[test]
    fn relabeled_graph_matches_perfectly((g, _, p) in pair(5)) {
        let h = g.relabel(&p);
        prop_assert_eq!(h.edge_count(), g.edge_count());
        prop_assert_eq!(oracle_gm(&g, &h).unwrap().min_symdiff, 0);
    }

    #[test]
    fn oracle_is_symmetric((g1, g2, _) in pair(4)) {
        prop_assert_eq!(oracle_gm(&g1, &g2).unwrap().min_symdiff, oracle_gm(&g2, &g1).unwrap().min_symdiff);
    }

    #[test]
    fn rational_text_round_trips(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = rat(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn perturbed_system_contains_only_scaled_points(k in 1i64..100) {
        let t = rat(k, 301);
        let sys = build_perturbed(3, &t).unwrap();
        prop_assert!(!sys.contains(&Permutation::identity(3).to_matrix()));
        prop_assert_eq!(sys.implied_last_column_sum(), rat(1, 1) - rat(3, 1) * &t);
    }

    #[test]
    fn matrix_text_round_trips(g in graph(6)) {
        let text: String = std::iter::once("6\n".to_string())
            .chain(g.to_rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect::<String>() + "\n"))
            .collect();
        prop_assert_eq!(parse_graph(&text).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_finds_the_exhaustive_optimum((g1, g2, _) in pair(3)) {
        let report = cmd_match(&g1, &g2, &MatchOptions::default()).unwrap();
        prop_assert!(report.is_optimal());
        prop_assert_eq!(report.gap, 0);
        prop_assert_eq!(report.symdiff, oracle_gm(&g1, &g2).unwrap().min_symdiff as u64);
        prop_assert_eq!(symmetric_difference(&g1, &g2, &report.sigma).unwrap() as u64, report.symdiff);
    }
}
