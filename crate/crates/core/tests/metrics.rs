mod common;

use proptest::prelude::*;

use common::fixtures::{random_graph, rng};
use common::oracle::{self, Dense};
use econet::netmetrics::{self, NullEnsemble};
use econet::WeightedGraph;

fn graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..16, 0.1f64..0.9, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, &mut rng(seed)))
}

proptest! {
    #[test]
    fn constant_weights_reduce_to_binary(g in graph(), w in 0.01f64..1.0) {
        let g = g.with_constant_weight(w).unwrap();
        for s in netmetrics::node_stats(&g) {
            match (s.clustering, s.clustering_unweighted) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn strength_bounded_by_degree(g in graph()) {
        for s in netmetrics::node_stats(&g) {
            prop_assert!(s.strength <= s.degree as f64 + 1e-12);
            prop_assert_eq!(s.clustering.is_some(), s.degree >= 2);
        }
    }

    #[test]
    fn assortativity_is_bounded_and_matches_pearson(g in graph(), seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let x: Vec<f64> = (0..g.node_count()).map(|_| r.gen_range(0.0..10.0)).collect();
        let lib = netmetrics::assortativity_scalar(&g, &x).unwrap();
        let naive = oracle::assortativity_scalar(&Dense::from_graph(&g), &x);
        prop_assert_eq!(lib.is_some(), naive.is_some());
        if let (Some(a), Some(b)) = (lib, naive) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let cats: Vec<&str> = (0..g.node_count()).map(|_| if r.gen_bool(0.5) { "x" } else { "y" }).collect();
        if let Some(v) = netmetrics::assortativity_categorical(&g, &cats).unwrap() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn null_instances_conserve_topology_and_weights(g in graph(), seed in any::<u64>()) {
        let ensemble = NullEnsemble::new(5, seed);
        let mut original = g.weights();
        original.sort_by(f64::total_cmp);
        let total: f64 = original.iter().sum();
        for t in 0..5 {
            let inst = ensemble.instance(&g, t);
            prop_assert_eq!(inst.degrees(), g.degrees());
            for (a, b) in inst.edges().iter().zip(g.edges()) {
                prop_assert_eq!((a.u, a.v), (b.u, b.v));
            }
            let mut w = inst.weights();
            w.sort_by(f64::total_cmp);
            prop_assert_eq!(&w, &original);
            let sum: f64 = inst.weights().iter().sum();
            prop_assert!((sum - total).abs() <= 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn ccdf_is_non_increasing(samples in prop::collection::vec(0.0f64..1.0, 1..60)) {
        let c = netmetrics::ccdf(&samples);
        prop_assert!(c.exceed.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(c.exceed[0] <= 1.0);
        prop_assert_eq!(*c.exceed.last().unwrap(), 0.0);
        prop_assert!(c.values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dip_is_bounded(samples in prop::collection::vec(-5.0f64..5.0, 2..80)) {
        let n = samples.len() as f64;
        let d = netmetrics::dip_statistic(&samples).unwrap();
        prop_assert!(d >= 1.0 / (2.0 * n) - 1e-12 && d <= 0.25 + 1e-12, "dip {d} with n = {n}");
    }

    #[test]
    fn histogram_counts_every_value(values in prop::collection::vec(-3.0f64..3.0, 1..100), bins in 1usize..40) {
        let h = netmetrics::histogram(&values, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        prop_assert_eq!(h.edges.len(), bins + 1);
    }
}

#[test]
fn evenly_spaced_sample_has_minimal_dip() {
    let v: Vec<f64> = (0..50).map(f64::from).collect();
    let d = netmetrics::dip_statistic(&v).unwrap();
    assert!((d - 1.0 / 100.0).abs() < 1e-12, "{d}");
}

#[test]
fn weighted_clustering_hand_value() {
    // triangle 0-1-2 plus pendant 3 on node 0:
    // c_0 = 2 * (w01 + w02) / 2 / (s_0 * (k_0 - 1))
    let g = WeightedGraph::from_edges(4, [(0, 1, 0.5), (0, 2, 0.25), (1, 2, 1.0), (0, 3, 1.0)]).unwrap();
    let want = (0.5 + 0.25) / (1.75 * 2.0);
    assert!((netmetrics::local_weighted_clustering(&g, 0).unwrap() - want).abs() < 1e-15);
    assert!((netmetrics::local_unweighted_clustering(&g, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(netmetrics::local_weighted_clustering(&g, 3), None);
    assert!((netmetrics::global_clustering(&g).unwrap() - 3.0 / 5.0).abs() < 1e-15);
}
