use cerlab::bijection::all_bijections;
use cerlab::inference::{ln_mixture_ratio, tv_exact, LikelihoodConstants};
use cerlab::model::{sample_correlated, ModelParams};
use cerlab::moments::{
    combinatorial_minimum, cycle_moment, minimum_lower_bound, minimum_rate_delta0, orbit_moment,
    permutation_count_bound, OrbitClass, TailRateParams,
};
use cerlab::oracle::{
    correlated_pmf_by_generation, independent_pmf_by_generation, minimum_by_grid, orbit_moment_by_enumeration,
    partial_matching_cycle_census,
};
use cerlab::{Bijection, RandomSeed};
use proptest::prelude::*;
use rand::Rng as _;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn frozen_orbit_moments() {
    let cases = [
        (OrbitClass::Cycle, 1, 0.5, 0.25, 0.5, 1.040_545_079_418_758),
        (OrbitClass::Cycle, 3, 1.2, 0.4, 0.8, 2.345_603_336_368_307),
        (OrbitClass::Chain, 2, 1.2, 0.4, 0.8, 1.616_270_554_570_366_2),
        (OrbitClass::Chain, 4, 0.5, 0.25, 0.8, 1.114_623_462_136_711_7),
        (OrbitClass::Cycle, 6, 1.2, 0.25, 0.5, 1.268_852_502_741_070_9),
    ];
    for (class, k, theta, p, s, frozen) in cases {
        let got = orbit_moment(class, k, theta, p, s).unwrap();
        assert!(close(got, frozen, 1e-10), "{class:?} k={k}: {got} vs {frozen}");
    }
}

#[test]
fn moments_match_enumeration_over_grid() {
    for class in [OrbitClass::Cycle, OrbitClass::Chain] {
        for k in [1, 2, 3, 4, 6] {
            for p in [0.25, 0.4] {
                for s in [0.5, 0.8] {
                    for theta in [0.5, 1.2] {
                        let exact = orbit_moment_by_enumeration(class, k, theta, p, s);
                        let closed = orbit_moment(class, k, theta, p, s).unwrap();
                        assert!(close(exact, closed, 1e-10), "{class:?} k={k} p={p} s={s} θ={theta}");
                    }
                }
            }
        }
    }
}

#[test]
fn cycle_moment_of_length_one_is_a_single_edge() {
    // a 1-cycle is one edge whose parent is shared: E exp(θ·1{both kept})
    let (theta, p, s) = (0.7, 0.3, 0.6);
    let direct = 1.0 + p * s * s * (f64::exp(theta) - 1.0);
    assert!(close(cycle_moment(1, theta, p, s).unwrap(), direct, 1e-12));
}

#[test]
fn frozen_combinatorial_minima() {
    let m = combinatorial_minimum(20, &[2, 1], 2.0, 0.5, 0.5).unwrap().value;
    assert!((m - -4.5).abs() < 1e-9);
    let m = combinatorial_minimum(30, &[3, 0, 2], 2.5, 0.5, 0.7).unwrap().value;
    assert!((m - 10.1).abs() < 1e-9);
    // a non-integral minimizer: the lattice minimum sits strictly above the relaxation
    let relaxed = combinatorial_minimum(12, &[1], 1.5, 0.0, 0.3).unwrap().value;
    let lattice = minimum_by_grid(12, &[1], 1.5, 0.0, 0.3).unwrap();
    assert!((relaxed - -6.05).abs() < 1e-9 && (lattice - -5.9).abs() < 1e-9);
}

/// Parameter sets whose relaxed minimizer is integral: `ρ = a + f`, `η = b + f` with
/// `f ∈ {0, ½}`, and `T` even when `f = ½`. With `tied` set, `N` is the cutoff implied by `α`;
/// otherwise it is drawn freely from `1..=3`.
fn integral_case(tied: bool) -> impl Strategy<Value = (usize, Vec<usize>, f64, f64, f64)> {
    (1usize..=3, 0usize..=1, 1usize..=3, 0usize..=2, 0usize..4, 1usize..=30).prop_flat_map(
        move |(free_n, half, a, b, ai, t_raw)| {
            let f = half as f64 * 0.5;
            let a = if half == 0 { a.max(2) } else { a };
            let b = b.min(a - 1);
            let t = if half == 1 { t_raw + t_raw % 2 } else { t_raw };
            let alpha = [0.3, 0.5, 0.6, 0.7][ai];
            let big_n = if tied {
                TailRateParams::new(alpha, None).unwrap().n_cutoff
            } else {
                free_n
            };
            proptest::collection::vec(0usize..=4, big_n).prop_filter_map("Σ k n_k ≤ T", move |ns| {
                let weighted: usize = ns.iter().enumerate().map(|(i, &x)| (i + 1) * x).sum();
                (weighted <= t).then_some((t, ns, a as f64 + f, b as f64 + f, alpha))
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_minimum_equals_lattice((t, ns, rho, eta, alpha) in integral_case(false)) {
        let closed = combinatorial_minimum(t, &ns, rho, eta, alpha).unwrap().value;
        let grid = minimum_by_grid(t, &ns, rho, eta, alpha).unwrap();
        prop_assert!((closed - grid).abs() < 1e-9, "closed {} grid {}", closed, grid);
    }

    #[test]
    fn minimum_dominates_lower_bounds((t, ns, rho, eta, alpha) in integral_case(true), extra in 0usize..40) {
        let m = combinatorial_minimum(t, &ns, rho, eta, alpha).unwrap().value;
        prop_assert!(minimum_lower_bound(t, &ns, rho, eta, alpha) <= m + 1e-9);
        // any n ≥ T with c_λ = T/n and δ = n₁/n; the rate depends only on the ratio
        let n = t + extra;
        let rates = TailRateParams::with_cutoff(alpha, ns.len());
        let delta0 = minimum_rate_delta0(rho, eta, &rates, t as f64 / n as f64, ns[0] as f64 / n as f64);
        prop_assert!(m >= delta0 * t as f64 - 1e-9, "M = {} < δ₀T = {}", m, delta0 * t as f64);
    }
}

#[test]
fn permutation_counts_respect_bound() {
    let mut rng = RandomSeed(11).rng();
    for n in 3..=6 {
        let pi_star = Bijection::random(n, &mut rng);
        for t in 1..=n {
            let mut a: Vec<usize> = (0..n).collect();
            for i in 0..t {
                let j = rng.random_range(i..n);
                a.swap(i, j);
            }
            let mut a = a[..t].to_vec();
            a.sort_unstable();
            let big_n = t.min(3);
            let census = partial_matching_cycle_census(&pi_star, &a, big_n);
            for ns in census.keys() {
                // |S| counts σ with at least n_k cycles of each length
                let count: usize = census
                    .iter()
                    .filter(|(k, _)| k.iter().zip(ns).all(|(have, need)| have >= need))
                    .map(|(_, c)| c)
                    .sum();
                let bound = permutation_count_bound(n, t, ns).unwrap().exp();
                assert!(
                    count as f64 <= bound * (1.0 + 1e-9),
                    "n={n} A={a:?} ns={ns:?}: {count} > {bound}"
                );
            }
        }
    }
}

#[test]
fn mixture_identity_against_generation() {
    for (n, p, s, seed) in [(3, 0.5, 0.7, 1), (4, 0.4, 0.8, 2), (5, 0.6, 0.5, 3)] {
        let params = ModelParams::new(n, p, s).unwrap();
        let consts = LikelihoodConstants::from_params(&params).unwrap();
        let sample = sample_correlated(&params, RandomSeed(seed)).unwrap();
        let (g, g_bar) = (&sample.g, &sample.g_bar);
        let n_fact = all_bijections(n).len() as f64;
        let via_ratio = (ln_mixture_ratio(g, g_bar, &consts).unwrap()).exp() / n_fact;
        let direct = correlated_pmf_by_generation(g, g_bar, &params) / independent_pmf_by_generation(g, g_bar, &params);
        assert!(close(via_ratio, direct, 1e-9), "n={n}: {via_ratio} vs {direct}");
    }
}

#[test]
fn frozen_total_variation() {
    let tv = tv_exact(&ModelParams::new(4, 0.5, 0.8).unwrap()).unwrap();
    assert!(close(tv, 0.339_145_392_127_996_66, 1e-9));
    let tv = tv_exact(&ModelParams::new(3, 0.5, 0.5).unwrap()).unwrap();
    assert!(close(tv, 0.1337890625, 1e-12));
}
