//! Maximum subgraph density `max_{∅≠U} |E(U)|/|U|` and the empirical curve `ρ(λ)`.
//!
//! The exact solver reduces to the `⌈d₀⌉`-core (with `d₀` the greedy peeling
//! density, a lower bound on the optimum), splits into connected components and runs
//! Goldberg's parametric min-cut on each. Densities of distinct subsets differ by at
//! least `1/(n(n−1))`, so an integer binary search at that resolution identifies the
//! optimum, and the final cut returns the largest densest subgraph (which is unique).

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowNetwork;
use crate::graph::Graph;
use crate::model::sample_gnp;
use crate::par::map_indexed;
use crate::rng::RandomSeed;
use crate::stats::{isotonic_non_decreasing, quantile, MeanAccumulator};

pub const BRUTEFORCE_MAX_N: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("graph has no vertices")]
    Empty,
    #[error("brute force limited to n ≤ {BRUTEFORCE_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error("invalid argument: {0}")]
    InvalidArgs(String),
    #[error("target {target} outside the curve range [{low}, {high}]")]
    OutOfRange { target: f64, low: f64, high: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityResult {
    /// Largest vertex set attaining the maximum density, ascending; `{0}` for an edgeless graph.
    pub best_subset: Vec<usize>,
    pub density: Ratio<u64>,
    pub witness_edges: usize,
}

impl DensityResult {
    pub fn density_f64(&self) -> f64 {
        *self.density.numer() as f64 / *self.density.denom() as f64
    }

    fn singleton() -> DensityResult {
        DensityResult {
            best_subset: vec![0],
            density: Ratio::from_integer(0),
            witness_edges: 0,
        }
    }
}

/// Min-degree peeling: vertices in removal order and the edge count left after each removal.
#[derive(Clone, Debug)]
pub struct Peeling {
    pub order: Vec<usize>,
    /// `edges_left[i]`: edges among the vertices not in `order[..i]`.
    pub edges_left: Vec<usize>,
}

impl Peeling {
    /// Vertices still present after removing the first `i` in the order.
    pub fn remaining(&self, i: usize) -> Vec<usize> {
        let mut rest = self.order[i..].to_vec();
        rest.sort_unstable();
        rest
    }
}

/// Repeatedly removes a minimum-degree vertex (smallest id on ties) of the subgraph induced by `mask`.
pub fn peel_min_degree(g: &Graph, mask: &[bool]) -> Peeling {
    let members: Vec<usize> = (0..g.n()).filter(|&v| mask[v]).collect();
    let mut deg = vec![0usize; g.n()];
    let mut edges = 0;
    for &v in &members {
        deg[v] = g.neighbors(v).filter(|&w| mask[w]).count();
        edges += deg[v];
    }
    edges /= 2;
    let max_deg = members.iter().map(|&v| deg[v]).max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); max_deg + 1];
    for &v in &members {
        buckets[deg[v]].insert(v);
    }
    let mut alive = mask.to_vec();
    let mut order = Vec::with_capacity(members.len());
    let mut edges_left = Vec::with_capacity(members.len() + 1);
    edges_left.push(edges);
    let mut low = 0;
    for _ in 0..members.len() {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop_first().expect("nonempty bucket");
        alive[v] = false;
        order.push(v);
        edges -= deg[v];
        for w in g.neighbors(v) {
            if alive[w] {
                buckets[deg[w]].remove(&w);
                deg[w] -= 1;
                buckets[deg[w]].insert(w);
                low = low.min(deg[w]);
            }
        }
        edges_left.push(edges);
    }
    Peeling { order, edges_left }
}

/// Best density over the peeling's suffix sets, as `(edges, vertices)`.
fn peeling_lower_bound(p: &Peeling) -> (usize, usize) {
    let k = p.order.len();
    let mut best = (0, 1);
    for i in 0..k {
        let (e, size) = (p.edges_left[i], k - i);
        if e * best.1 > best.0 * size {
            best = (e, size);
        }
    }
    best
}

/// Whether some nonempty `U ⊆ component` has `L·|E(U)| > a·|U|`; returns the cut's source side.
fn parametric_cut(g: &Graph, comp: &[usize], local: &[usize], scale: i64, a: i64) -> (bool, Vec<usize>) {
    let nc = comp.len();
    let m: i64 = comp
        .iter()
        .map(|&v| g.neighbors(v).filter(|&w| local[w] != usize::MAX).count() as i64)
        .sum::<i64>()
        / 2;
    let (s, t) = (nc, nc + 1);
    let mut net = FlowNetwork::new(nc + 2);
    let big = scale * m;
    for (i, &v) in comp.iter().enumerate() {
        let d = g.neighbors(v).filter(|&w| local[w] != usize::MAX).count() as i64;
        net.add_arc(s, i, big);
        net.add_arc(i, t, big + 2 * a - scale * d);
        for w in g.neighbors(v) {
            let j = local[w];
            if j != usize::MAX && i < j {
                net.add_edge(i, j, scale);
            }
        }
    }
    let cut = net.max_flow(s, t);
    let side = net.source_side(s);
    let set: Vec<usize> = (0..nc).filter(|&i| side[i]).map(|i| comp[i]).collect();
    (cut < big * nc as i64, set)
}

/// Exact densest subgraph of one connected component (sorted vertex list), or `None`
/// when the component cannot reach `lower`. `upper` must bound the optimum from above.
fn densest_in_component(
    g: &Graph,
    comp: &[usize],
    lower: Ratio<u64>,
    upper: Ratio<u64>,
) -> Option<(Ratio<u64>, Vec<usize>)> {
    let nc = comp.len();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in comp.iter().enumerate() {
        local[v] = i;
    }
    let scale = (nc as i64) * (nc as i64 - 1).max(1);
    let scaled = |r: Ratio<u64>| r * Ratio::from_integer(scale as u64);
    // test(a): some density exceeds a/L. Invariant: test(lo) true, test(hi) false.
    let mut lo = scaled(lower).ceil().to_integer() as i64 - 1;
    let mut hi = scaled(upper).ceil().to_integer() as i64;
    if !parametric_cut(g, comp, &local, scale, lo).0 {
        return None;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if parametric_cut(g, comp, &local, scale, mid).0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, set) = parametric_cut(g, comp, &local, scale, lo);
    let e = g.induced_edge_count(&set) as u64;
    Some((Ratio::new(e, set.len() as u64), set))
}

/// Exact maximum density; the subset returned is the largest one attaining it.
pub fn densest_subgraph_exact(g: &Graph) -> Result<DensityResult, DensityError> {
    if g.n() == 0 {
        return Err(DensityError::Empty);
    }
    if g.edge_count() == 0 {
        return Ok(DensityResult::singleton());
    }
    let all = vec![true; g.n()];
    let (e0, k0) = peeling_lower_bound(&peel_min_degree(g, &all));
    let lower = Ratio::new(e0 as u64, k0 as u64);
    // Peeling is a 2-approximation.
    let upper = lower * Ratio::from_integer(2);
    // Every vertex of a densest subgraph has inner degree ≥ the optimum ≥ `lower`.
    let core_deg = lower.ceil().to_integer() as usize;
    let core = g.k_core(core_deg);
    let mask = g.mask_of(&core);
    let mut best = Ratio::from_integer(0);
    let mut best_set: Vec<usize> = Vec::new();
    for comp in g.components_within(&mask) {
        if comp.len() < 2 {
            continue;
        }
        let Some((d, set)) = densest_in_component(g, &comp, lower, upper) else {
            continue;
        };
        if d > best {
            best = d;
            best_set = set;
        } else if d == best {
            best_set.extend(set);
        }
    }
    best_set.sort_unstable();
    let witness_edges = g.induced_edge_count(&best_set);
    debug_assert_eq!(Ratio::new(witness_edges as u64, best_set.len() as u64), best);
    Ok(DensityResult {
        best_subset: best_set,
        density: best,
        witness_edges,
    })
}

/// Exhaustive search over all nonempty subsets; ties resolved toward the largest subset.
pub fn densest_subgraph_bruteforce(g: &Graph) -> Result<DensityResult, DensityError> {
    let n = g.n();
    if n == 0 {
        return Err(DensityError::Empty);
    }
    if n > BRUTEFORCE_MAX_N {
        return Err(DensityError::TooLarge(n));
    }
    let rows: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).fold(0u32, |acc, w| acc | (1 << w)))
        .collect();
    let mut best = (0u64, 1u64, 1u32);
    for mask in 1u32..(1u32 << n) {
        let mut twice = 0u32;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            twice += (rows[v] & mask).count_ones();
            bits &= bits - 1;
        }
        let (e, k) = ((twice / 2) as u64, mask.count_ones() as u64);
        let cmp = (e * best.1).cmp(&(best.0 * k));
        if cmp.is_gt() || (cmp.is_eq() && k > best.1) {
            best = (e, k, mask);
        }
    }
    if best.0 == 0 {
        return Ok(DensityResult::singleton());
    }
    let subset: Vec<usize> = (0..n).filter(|&v| best.2 >> v & 1 == 1).collect();
    Ok(DensityResult {
        witness_edges: best.0 as usize,
        density: Ratio::new(best.0, best.1),
        best_subset: subset,
    })
}

/// Monte Carlo summary of the maximum density of `G(n, λ/n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub lambda: f64,
    pub n: usize,
    pub replicates: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Quantiles of `|maximizer| / n`.
    pub size_q05: f64,
    pub size_q50: f64,
}

pub fn estimate_rho(lambda: f64, n: usize, replicates: usize, seed: RandomSeed) -> Result<RhoEstimate, DensityError> {
    if !(lambda >= 1.0 && lambda < n as f64) {
        return Err(DensityError::InvalidArgs(format!(
            "lambda = {lambda} must lie in [1, n)"
        )));
    }
    if replicates == 0 || n < 2 {
        return Err(DensityError::InvalidArgs(
            "need n ≥ 2 and at least one replicate".into(),
        ));
    }
    let q = lambda / n as f64;
    let runs = map_indexed(replicates, |i| {
        let g = sample_gnp(n, q, &mut seed.derive(i as u64).rng());
        let r = densest_subgraph_exact(&g).expect("n ≥ 2");
        (r.density_f64(), r.best_subset.len() as f64 / n as f64)
    });
    let acc: MeanAccumulator = runs.iter().map(|r| r.0).collect();
    let sizes: Vec<f64> = runs.iter().map(|r| r.1).collect();
    Ok(RhoEstimate {
        lambda,
        n,
        replicates,
        mean: acc.mean(),
        stderr: acc.stderr(),
        size_q05: quantile(&sizes, 0.05),
        size_q50: quantile(&sizes, 0.5),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoCurve {
    pub lambda_grid: Vec<f64>,
    /// Means after isotonic (non-decreasing) adjustment.
    pub rho_hat: Vec<f64>,
    pub rho_raw: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_used: usize,
    pub replicates: usize,
    pub points: Vec<RhoEstimate>,
}

impl RhoCurve {
    pub fn from_estimates(points: Vec<RhoEstimate>) -> Result<RhoCurve, DensityError> {
        if points.is_empty() {
            return Err(DensityError::InvalidArgs("empty lambda grid".into()));
        }
        if points.windows(2).any(|w| w[0].lambda >= w[1].lambda) {
            return Err(DensityError::InvalidArgs(
                "lambda grid must be strictly increasing".into(),
            ));
        }
        let rho_raw: Vec<f64> = points.iter().map(|p| p.mean).collect();
        Ok(RhoCurve {
            lambda_grid: points.iter().map(|p| p.lambda).collect(),
            rho_hat: isotonic_non_decreasing(&rho_raw),
            rho_raw,
            stderr: points.iter().map(|p| p.stderr).collect(),
            n_used: points[0].n,
            replicates: points[0].replicates,
            points,
        })
    }

    /// `ĉ_λ`: 5th percentile of maximizer size fraction at the grid point nearest `lambda`.
    pub fn c_lambda(&self, lambda: f64) -> f64 {
        let i = nearest_index(&self.lambda_grid, lambda);
        self.points[i].size_q05
    }

    /// `ρ̂(λ)` by linear interpolation, clamped to the grid ends.
    pub fn rho_at(&self, lambda: f64) -> f64 {
        interpolate(&self.lambda_grid, &self.rho_hat, lambda)
    }

    /// Interpolated stderr at `lambda`.
    pub fn stderr_at(&self, lambda: f64) -> f64 {
        interpolate(&self.lambda_grid, &self.stderr, lambda)
    }
}

fn nearest_index(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, &g) in grid.iter().enumerate() {
        if (g - x).abs() < (grid[best] - x).abs() {
            best = i;
        }
    }
    best
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Estimates over a grid, each `λ_j` drawing replicates from `seed.derive(j)`.
pub fn rho_curve(lambdas: &[f64], n: usize, replicates: usize, seed: RandomSeed) -> Result<RhoCurve, DensityError> {
    let points = lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| estimate_rho(l, n, replicates, seed.derive(j as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    RhoCurve::from_estimates(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStar {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Smallest `λ` on the piecewise-linear interpolant of `ys` with value `target`, by bisection,
/// clamped to the grid ends when the target lies outside the curve's range.
fn invert_monotone(xs: &[f64], ys: &[f64], target: f64) -> f64 {
    let last = xs.len() - 1;
    if target <= ys[0] {
        return xs[0];
    }
    if target > ys[last] {
        return xs[last];
    }
    let (mut lo, mut hi) = (xs[0], xs[last]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if interpolate(xs, ys, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    hi
}

/// `λ̂* = ρ̂⁻¹(target)` with an interval from the `±2·stderr` band.
///
/// Targets outside `[min(ρ̂ − 2se), max(ρ̂ + 2se)]` are refused. Inside that range but
/// beyond the point curve, the estimate is clamped to the nearest grid end.
pub fn rho_inverse(target: f64, curve: &RhoCurve) -> Result<LambdaStar, DensityError> {
    if !(target >= 1.0) {
        return Err(DensityError::InvalidArgs(format!("target {target} must be ≥ 1")));
    }
    let upper_band: Vec<f64> = curve
        .rho_hat
        .iter()
        .zip(&curve.stderr)
        .map(|(r, s)| r + 2.0 * s)
        .collect();
    let lower_band: Vec<f64> = curve
        .rho_hat
        .iter()
        .zip(&curve.stderr)
        .map(|(r, s)| r - 2.0 * s)
        .collect();
    let upper_band = isotonic_non_decreasing(&upper_band);
    let lower_band = isotonic_non_decreasing(&lower_band);
    let low = lower_band[0];
    let high = *upper_band.last().expect("nonempty");
    if target < low || target > high {
        return Err(DensityError::OutOfRange { target, low, high });
    }
    let xs = &curve.lambda_grid;
    Ok(LambdaStar {
        estimate: invert_monotone(xs, &curve.rho_hat, target),
        lower: invert_monotone(xs, &upper_band, target),
        upper: invert_monotone(xs, &lower_band, target),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::Bijection;
    use crate::model::relabel;
    use proptest::prelude::*;

    fn r(a: u64, b: u64) -> Ratio<u64> {
        Ratio::new(a, b)
    }

    #[test]
    fn small_named_graphs() {
        let tri = Graph::complete(3);
        assert_eq!(densest_subgraph_exact(&tri).unwrap().density, r(1, 1));
        assert_eq!(densest_subgraph_bruteforce(&tri).unwrap().density, r(1, 1));
        let edge = Graph::path(2);
        assert_eq!(densest_subgraph_exact(&edge).unwrap().density, r(1, 2));
        assert_eq!(densest_subgraph_bruteforce(&edge).unwrap().density, r(1, 2));
        assert_eq!(densest_subgraph_exact(&Graph::complete(4)).unwrap().density, r(3, 2));
        let p4 = densest_subgraph_bruteforce(&Graph::path(4)).unwrap();
        assert_eq!((p4.density, p4.best_subset.len()), (r(3, 4), 4));
        assert_eq!(densest_subgraph_exact(&Graph::path(4)).unwrap().density, r(3, 4));
        let empty = densest_subgraph_exact(&Graph::empty(5)).unwrap();
        assert_eq!((empty.density, empty.best_subset.len()), (r(0, 1), 1));
        assert!(densest_subgraph_bruteforce(&Graph::empty(21)).is_err());
        assert!(densest_subgraph_exact(&Graph::empty(0)).is_err());
    }

    #[test]
    fn union_of_tied_components() {
        // two disjoint triangles plus a pendant edge: both triangles are densest
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 7)]).unwrap();
        let d = densest_subgraph_exact(&g).unwrap();
        assert_eq!(d.best_subset, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(d.density, r(1, 1));
        assert_eq!(d, densest_subgraph_bruteforce(&g).unwrap());
    }

    #[test]
    fn peeling_tracks_edges() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
        let p = peel_min_degree(&g, &[true; 5]);
        assert_eq!(p.edges_left[0], 5);
        assert_eq!(*p.edges_left.last().unwrap(), 0);
        assert_eq!(p.order[0], 4);
        assert_eq!(p.remaining(2), vec![0, 1, 2]);
    }

    #[test]
    fn inverse_on_synthetic_curve() {
        let pts: Vec<RhoEstimate> = [(1.0, 1.0), (2.0, 1.2), (4.0, 2.1), (8.0, 4.05)]
            .iter()
            .map(|&(lambda, mean)| RhoEstimate {
                lambda,
                n: 100,
                replicates: 10,
                mean,
                stderr: 0.01,
                size_q05: 0.5,
                size_q50: 0.6,
            })
            .collect();
        let curve = RhoCurve::from_estimates(pts).unwrap();
        let at_knot = rho_inverse(2.1, &curve).unwrap();
        assert!((at_knot.estimate - 4.0).abs() < 1e-9);
        assert!(at_knot.lower <= at_knot.estimate && at_knot.estimate <= at_knot.upper);
        assert!((rho_inverse(1.0, &curve).unwrap().estimate - 1.0).abs() < 1e-12);
        assert!(rho_inverse(5.0, &curve).is_err());
        assert!((curve.rho_at(3.0) - 1.65).abs() < 1e-12);
        assert_eq!(curve.c_lambda(3.9), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn exact_matches_bruteforce(n in 1usize..=12, q in 0.05f64..0.9, seed in any::<u64>()) {
            let g = sample_gnp(n, q, &mut RandomSeed(seed).rng());
            let a = densest_subgraph_exact(&g).unwrap();
            let b = densest_subgraph_bruteforce(&g).unwrap();
            prop_assert_eq!(a.density, b.density);
            if a.witness_edges > 0 {
                prop_assert_eq!(&a.best_subset, &b.best_subset);
            }
            prop_assert_eq!(Ratio::new(g.induced_edge_count(&a.best_subset) as u64, a.best_subset.len() as u64), a.density);
        }

        #[test]
        fn relabeling_invariance(n in 2usize..=30, q in 0.05f64..0.5, seed in any::<u64>()) {
            let mut rng = RandomSeed(seed).rng();
            let g = sample_gnp(n, q, &mut rng);
            let pi = Bijection::random(n, &mut rng);
            let a = densest_subgraph_exact(&g).unwrap();
            let b = densest_subgraph_exact(&relabel(&g, &pi).unwrap()).unwrap();
            prop_assert_eq!(a.density, b.density);
            if a.witness_edges > 0 {
                let mut mapped: Vec<usize> = a.best_subset.iter().map(|&v| pi.apply(v)).collect();
                mapped.sort_unstable();
                prop_assert_eq!(mapped, b.best_subset);
            }
        }
    }
}
