use cerlab::density::{densest_subgraph_bruteforce, densest_subgraph_exact};
use cerlab::inference::{
    map_estimator, reasonable_candidate_check, reasonable_candidate_search, EstimatorConfig, SearchStrategy,
};
use cerlab::model::{common_edges, relabel, sample_correlated, sample_gnp, ModelParams};
use cerlab::oracle::max_common_edges;
use cerlab::{par, Bijection, Graph, RandomSeed};

#[test]
fn map_matches_brute_force_maximum() {
    let params = ModelParams::new(6, 0.5, 0.8).unwrap();
    let config = EstimatorConfig::new(1.0, 0.5, 0.2);
    for seed in 0..20 {
        let s = sample_correlated(&params, RandomSeed(seed)).unwrap();
        let est = map_estimator(&s.g, &s.g_bar, &params, &config).unwrap();
        assert!(est.exhaustive);
        assert_eq!(est.common_edges, max_common_edges(&s.g, &s.g_bar));
        assert_eq!(common_edges(&s.g, &s.g_bar, &est.pi), est.common_edges);
    }
}

#[test]
fn hill_climbing_usually_finds_the_exhaustive_optimum() {
    let params = ModelParams::new(8, 0.5, 0.9).unwrap();
    let exhaustive = EstimatorConfig {
        strategy: SearchStrategy::Exhaustive,
        ..EstimatorConfig::new(1.0, 0.5, 0.2)
    };
    let trials = 100;
    let mut hits = 0;
    for seed in 0..trials {
        let s = sample_correlated(&params, RandomSeed(100 + seed)).unwrap();
        let climb = EstimatorConfig {
            strategy: SearchStrategy::HillClimb,
            seed,
            ..exhaustive.clone()
        };
        let best = map_estimator(&s.g, &s.g_bar, &params, &exhaustive).unwrap();
        let found = map_estimator(&s.g, &s.g_bar, &params, &climb).unwrap();
        assert!(!found.exhaustive && found.common_edges <= best.common_edges);
        hits += (found.common_edges == best.common_edges) as u64;
    }
    assert!(hits as f64 >= 0.95 * trials as f64, "{hits}/{trials}");
}

/// A `K4` block plus a stray edge, hidden by a known relabeling.
fn planted_instance() -> (Graph, Graph, Bijection) {
    let g = Graph::from_edges(7, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (4, 5)]).unwrap();
    let pi_star = Bijection::new(vec![3, 6, 0, 5, 1, 2, 4]).unwrap();
    let g_bar = relabel(&g, &pi_star).unwrap();
    (g, g_bar, pi_star)
}

#[test]
fn candidate_search_recovers_planted_block() {
    let (g, g_bar, pi_star) = planted_instance();
    // K4 has density 3/2; demand a certificate of four vertices at that density
    let config = EstimatorConfig::new(1.5, 0.5, 0.1);
    let check = reasonable_candidate_check(&pi_star, &g, &g_bar, &config).unwrap();
    assert!(check.accepted);
    let found = reasonable_candidate_search(&g, &g_bar, &config)
        .unwrap()
        .expect("candidate exists");
    assert!(found.exhaustive && found.check.accepted);
    let cert = found.check.certificate.unwrap();
    assert!(cert.len() >= 4);
    // the certificate block must land on the planted block's image
    let mut image: Vec<usize> = cert.iter().map(|&v| found.pi.apply(v)).collect();
    image.sort_unstable();
    assert_eq!(image, vec![0, 3, 5, 6]);
    // a density ceiling below the block's density rules every matching out
    let strict = EstimatorConfig::new(1.0, 0.5, 0.1);
    assert!(reasonable_candidate_search(&g, &g_bar, &strict).unwrap().is_none());
}

#[test]
fn densest_subgraph_matches_brute_force() {
    let mut rng = RandomSeed(5).rng();
    for i in 0..60 {
        let n = 4 + i % 10;
        let g = sample_gnp(n, 0.15 + 0.05 * (i % 6) as f64, &mut rng);
        let exact = densest_subgraph_exact(&g).unwrap();
        let brute = densest_subgraph_bruteforce(&g).unwrap();
        assert_eq!(exact.density, brute.density, "n={n}");
        assert_eq!(exact.best_subset, brute.best_subset, "n={n}");
    }
}

#[test]
#[cfg(feature = "parallel")]
fn sequential_and_parallel_maps_agree() {
    let f = |i: usize| {
        let params = ModelParams::new(30, 0.2, 0.7).unwrap();
        let s = sample_correlated(&params, RandomSeed(9).derive(i as u64)).unwrap();
        (s.g.edge_count(), s.g_bar.edge_count(), s.pi_star.forward())
    };
    assert_eq!(par::map_indexed_seq(64, f), par::map_indexed_par(64, f));
}
