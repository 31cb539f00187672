//! Brute-force reference computations, compiled for tests and behind the `oracles` feature.
//!
//! Each function recomputes a quantity from its definition by enumeration, without
//! calling the formulas it is used to check.

use std::collections::BTreeMap;

use crate::bijection::{all_bijections, all_embeddings, Bijection};
use crate::graph::Graph;
use crate::model::ModelParams;
use crate::moments::OrbitClass;

/// `E exp(θ|ℰ_O|)` for an isolated orbit of length `k`, summing over all `8^k` outcomes of the
/// per-edge triples (parent bit, keep bit in `G`, keep bit in `Ḡ`); a chain also sums over the
/// outside predecessor bit.
pub fn orbit_moment_by_enumeration(class: OrbitClass, k: usize, theta: f64, p: f64, s: f64) -> f64 {
    assert!((1..=8).contains(&k), "enumeration limited to k ≤ 8");
    let bern = |bit: bool, q: f64| if bit { q } else { 1.0 - q };
    let mut total = 0.0;
    for code in 0u32..(1 << (3 * k)) {
        let mut weight = 1.0;
        let mut g = vec![false; k];
        let mut g_bar = vec![false; k];
        for i in 0..k {
            let parent = code >> (3 * i) & 1 == 1;
            let keep1 = code >> (3 * i + 1) & 1 == 1;
            let keep2 = code >> (3 * i + 2) & 1 == 1;
            weight *= bern(parent, p) * bern(keep1, s) * bern(keep2, s);
            g[i] = parent && keep1;
            g_bar[i] = parent && keep2;
        }
        let count_with = |before_first: bool| {
            (0..k)
                .filter(|&i| g[i] && if i == 0 { before_first } else { g_bar[i - 1] })
                .count()
        };
        match class {
            OrbitClass::Cycle => total += weight * (theta * count_with(g_bar[k - 1]) as f64).exp(),
            OrbitClass::Chain => {
                let ps = p * s;
                total += weight * ps * (theta * count_with(true) as f64).exp();
                total += weight * (1.0 - ps) * (theta * count_with(false) as f64).exp();
            }
        }
    }
    total
}

/// `M(T, n₁..n_N)` over the integer lattice `Σ_T ∩ Δ`, by enumerating `x₁..x_{N+1}`.
///
/// `α_k = (k−1)/k` for `k ≤ N` and `α_{N+1} = min(α, N/(N+1))`. `x₀` is set to the least value
/// meeting the demand, and enumeration stops once the demand is met since every cost is
/// non-negative. Returns `None` if the lattice set is empty.
pub fn minimum_by_grid(t: usize, ns: &[usize], rho: f64, eta: f64, alpha: f64) -> Option<f64> {
    let big_n = ns.len();
    let tf = t as f64;
    let upper = (rho * tf + 1e-9).floor() as i64;
    let demand = ((rho - eta) * tf - 1e-9).ceil().max(0.0) as i64;
    let mut caps = Vec::with_capacity(big_n);
    let mut weighted = 0usize;
    for (i, &nk) in ns.iter().enumerate() {
        weighted += (i + 1) * nk;
        caps.push(((rho + eta) * weighted as f64 + 1e-9).floor() as i64);
    }
    let mut costs: Vec<f64> = (1..=big_n).map(|k| (k as f64 - 1.0) / k as f64).collect();
    costs.push(alpha.min(big_n as f64 / (big_n as f64 + 1.0)));
    let base = ns.iter().sum::<usize>() as f64 - tf;

    fn rec(
        k: usize,
        prefix: i64,
        sum: i64,
        cost: f64,
        ctx: &(usize, i64, i64, &[i64], &[f64]),
        best: &mut Option<f64>,
    ) {
        let (big_n, upper, demand, caps, costs) = *ctx;
        if k == big_n + 2 {
            let x0 = (demand - sum).max(0);
            if x0 <= upper {
                let total = cost + x0 as f64;
                if best.is_none_or(|b| total < b) {
                    *best = Some(total);
                }
            }
            return;
        }
        let mut hi = upper;
        if k <= big_n {
            hi = hi.min(caps[k - 1] - prefix);
        }
        for x in 0..=hi.max(-1) {
            rec(k + 1, prefix + x, sum + x, cost + costs[k - 1] * x as f64, ctx, best);
            if sum + x >= demand {
                break;
            }
        }
    }

    let mut best = None;
    rec(1, 0, 0, 0.0, &(big_n, upper, demand, &caps, &costs), &mut best);
    best.map(|b| b + base)
}

/// Histogram of `(n₁..n_N)` over all injective `σ: A → V̄`, where `n_k` is the number of
/// `k`-node cycles of `φ = σ̄⁻¹∘π*` lying entirely in `A`.
pub fn partial_matching_cycle_census(pi_star: &Bijection, a: &[usize], big_n: usize) -> BTreeMap<Vec<usize>, usize> {
    let n = pi_star.n();
    let mut in_a = vec![false; n];
    for &v in a {
        in_a[v] = true;
    }
    let mut hist = BTreeMap::new();
    for sigma in all_embeddings(a, n) {
        // φ(v) = σ⁻¹(π*(v)) where defined
        let mut preimage = vec![usize::MAX; n];
        for (&v, &w) in sigma.domain.iter().zip(&sigma.images) {
            preimage[w] = v;
        }
        let phi = |v: usize| preimage[pi_star.apply(v)];
        let mut counts = vec![0usize; big_n];
        let mut seen = vec![false; n];
        for &start in a {
            if seen[start] {
                continue;
            }
            // walk forward; a cycle through `start` closes only if every step stays in A
            let mut len = 0;
            let mut v = start;
            let closes = loop {
                let w = phi(v);
                len += 1;
                if w == usize::MAX || !in_a[w] {
                    break false;
                }
                if w == start {
                    break true;
                }
                if len > n {
                    break false;
                }
                v = w;
            };
            if closes {
                let mut v = start;
                loop {
                    seen[v] = true;
                    v = phi(v);
                    if v == start {
                        break;
                    }
                }
                if len <= big_n {
                    counts[len - 1] += 1;
                }
            }
        }
        *hist.entry(counts).or_insert(0) += 1;
    }
    hist
}

/// Probability of `(G, Ḡ)` under the correlated law, summing per pair over the
/// parent/keep bits and averaging over `π*`.
pub fn correlated_pmf_by_generation(g: &Graph, g_bar: &Graph, params: &ModelParams) -> f64 {
    let (p, s) = (params.p, params.s);
    let bern = |bit: bool, q: f64| if bit { q } else { 1.0 - q };
    let pair = |x: bool, y: bool| {
        let mut total = 0.0;
        for parent in [false, true] {
            for keep1 in [false, true] {
                for keep2 in [false, true] {
                    if (parent && keep1) == x && (parent && keep2) == y {
                        total += bern(parent, p) * bern(keep1, s) * bern(keep2, s);
                    }
                }
            }
        }
        total
    };
    let n = g.n();
    let all = all_bijections(n);
    let sum: f64 = all
        .iter()
        .map(|pi_star| {
            let mut prod = 1.0;
            for u in 0..n {
                for v in u + 1..n {
                    prod *= pair(g.has_edge(u, v), g_bar.has_edge(pi_star.apply(u), pi_star.apply(v)));
                }
            }
            prod
        })
        .sum();
    sum / all.len() as f64
}

/// Probability of `(G, Ḡ)` under two independent sub-sampled parents.
pub fn independent_pmf_by_generation(g: &Graph, g_bar: &Graph, params: &ModelParams) -> f64 {
    let (p, s) = (params.p, params.s);
    let edge = |present: bool| {
        let on = p * s;
        if present {
            on
        } else {
            (1.0 - p) + p * (1.0 - s)
        }
    };
    let n = g.n();
    let mut prod = 1.0;
    for u in 0..n {
        for v in u + 1..n {
            prod *= edge(g.has_edge(u, v)) * edge(g_bar.has_edge(u, v));
        }
    }
    prod
}

/// Largest `|ℰ_π|` over all bijections.
pub fn max_common_edges(g: &Graph, g_bar: &Graph) -> usize {
    all_bijections(g.n())
        .iter()
        .map(|pi| {
            g.edges()
                .filter(|&(u, v)| g_bar.has_edge(pi.apply(u), pi.apply(v)))
                .count()
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_at_zero_theta_is_one() {
        for class in [OrbitClass::Cycle, OrbitClass::Chain] {
            assert!((orbit_moment_by_enumeration(class, 3, 0.0, 0.3, 0.6) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_minimum_simple_case() {
        // no short cycles: all demand goes to x_{N+1} at cost α
        let m = minimum_by_grid(10, &[0, 0], 2.0, 0.0, 0.5).unwrap();
        assert!((m - (-10.0 + 0.5 * 20.0)).abs() < 1e-12);
    }

    #[test]
    fn census_of_full_set_counts_permutations() {
        // A = V: σ ranges over all bijections, so the histogram totals n!
        let pi_star = Bijection::identity(4);
        let h = partial_matching_cycle_census(&pi_star, &[0, 1, 2, 3], 4);
        assert_eq!(h.values().sum::<usize>(), 24);
        // fixed-point-free permutations of 4 elements: 9
        assert_eq!(h.iter().filter(|(k, _)| k[0] == 0).map(|(_, c)| c).sum::<usize>(), 9);
    }
}
