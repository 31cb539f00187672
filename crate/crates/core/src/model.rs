//! The correlated and independent generative laws on graph pairs.

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bijection::Bijection;
use crate::graph::{pair_count, Graph};
use crate::rng::{RandomSeed, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
}

/// `n` vertices, parent edge probability `p`, per-graph retention probability `s`.
///
/// `s = 0` is accepted as a degenerate law (both graphs empty).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub p: f64,
    pub s: f64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, s: f64) -> Result<ModelParams, ModelError> {
        let params = ModelParams { n, p, s };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `p = n^{-α}` and `s` chosen so that `n p s² = λ`.
    pub fn from_lambda_alpha(n: usize, lambda: f64, alpha: f64) -> Result<ModelParams, ModelError> {
        let p = (n as f64).powf(-alpha);
        let s = (lambda / (n as f64 * p)).sqrt();
        ModelParams::new(n, p, s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 {
            return Err(ModelError::InvalidParams(format!("n = {} < 2", self.n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(ModelError::InvalidParams(format!("p = {} not in (0,1)", self.p)));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(ModelError::InvalidParams(format!("s = {} not in [0,1]", self.s)));
        }
        Ok(())
    }

    /// `λ = n p s²`.
    pub fn lambda(&self) -> f64 {
        self.n as f64 * self.p * self.s * self.s
    }

    /// `α̂ = −ln p / ln n`.
    pub fn alpha_hat(&self) -> f64 {
        -self.p.ln() / (self.n as f64).ln()
    }

    /// Marginal edge probability of each graph.
    pub fn ps(&self) -> f64 {
        self.p * self.s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedSample {
    pub params: ModelParams,
    pub pi_star: Bijection,
    pub g: Graph,
    pub g_bar: Graph,
}

/// Calls `f(u, v)` for each pair `u < v` of `0..n` retained independently with probability `q`,
/// in ascending canonical order. Uses geometric gaps, so the cost is `O(n + kept)`.
pub fn for_each_bernoulli_pair<F>(n: usize, q: f64, rng: &mut Rng, mut f: F)
where
    F: FnMut(&mut Rng, usize, usize),
{
    let total = pair_count(n) as u64;
    if q <= 0.0 || total == 0 {
        return;
    }
    if q >= 1.0 {
        for u in 0..n {
            for v in u + 1..n {
                f(rng, u, v);
            }
        }
        return;
    }
    let gap = Geometric::new(q).expect("q in (0,1)");
    let mut u = 0usize;
    let mut row_start = 0u64;
    let mut row_end = (n - 1) as u64;
    let mut idx = gap.sample(rng);
    while idx < total {
        while idx >= row_end {
            u += 1;
            row_start = row_end;
            row_end += (n - 1 - u) as u64;
        }
        let v = u + 1 + (idx - row_start) as usize;
        f(rng, u, v);
        idx = match idx.checked_add(1 + gap.sample(rng)) {
            Some(i) => i,
            None => break,
        };
    }
}

/// One `G(n, q)` draw.
pub fn sample_gnp(n: usize, q: f64, rng: &mut Rng) -> Graph {
    let mut edges = Vec::new();
    for_each_bernoulli_pair(n, q, rng, |_, u, v| edges.push((u, v)));
    Graph::from_edges(n, edges).expect("sampled pairs are valid")
}

/// Draws `(π*, G, Ḡ)`: `π*` uniform, then for every pair `e` a parent bit `I_e ~ Bern(p)`
/// and independent retention bits `J_e, J̄_e ~ Bern(s)`; `G_e = I_e J_e` and `Ḡ_{π*(e)} = I_e J̄_e`.
pub fn sample_correlated(params: &ModelParams, seed: RandomSeed) -> Result<CorrelatedSample, ModelError> {
    params.validate()?;
    let mut rng = seed.rng();
    let pi_star = Bijection::random(params.n, &mut rng);
    Ok(sample_correlated_given(params, pi_star, &mut rng))
}

/// Same law conditioned on a fixed `π*`.
pub fn sample_correlated_given(params: &ModelParams, pi_star: Bijection, rng: &mut Rng) -> CorrelatedSample {
    let (g, g_bar) = sample_pair_given(params, &pi_star, rng);
    CorrelatedSample {
        params: *params,
        pi_star,
        g,
        g_bar,
    }
}

fn sample_pair_given(params: &ModelParams, pi_star: &Bijection, rng: &mut Rng) -> (Graph, Graph) {
    let (n, s) = (params.n, params.s);
    let mut e = Vec::new();
    let mut e_bar = Vec::new();
    for_each_bernoulli_pair(n, params.p, rng, |rng, u, v| {
        if rng.random_bool(s) {
            e.push((u, v));
        }
        if rng.random_bool(s) {
            e_bar.push((pi_star.apply(u), pi_star.apply(v)));
        }
    });
    (
        Graph::from_edges(n, e).expect("valid"),
        Graph::from_edges(n, e_bar).expect("valid"),
    )
}

/// Two independent `G(n, ps)` graphs.
pub fn sample_independent(params: &ModelParams, seed: RandomSeed) -> Result<(Graph, Graph), ModelError> {
    params.validate()?;
    let mut rng = seed.rng();
    let g = sample_gnp(params.n, params.ps(), &mut rng);
    let g_bar = sample_gnp(params.n, params.ps(), &mut rng);
    Ok((g, g_bar))
}

/// `H_π`: pairs present in `g` whose image under `π` is present in `g_bar`.
pub fn intersection_graph(g: &Graph, g_bar: &Graph, pi: &Bijection) -> Result<Graph, ModelError> {
    check_sizes(g.n(), g_bar.n())?;
    check_sizes(g.n(), pi.n())?;
    Ok(Graph::from_edges(
        g.n(),
        g.edges().filter(|&(u, v)| g_bar.has_edge(pi.apply(u), pi.apply(v))),
    )
    .expect("subset of g"))
}

/// `|ℰ_π|` without materializing the intersection graph.
pub fn common_edges(g: &Graph, g_bar: &Graph, pi: &Bijection) -> usize {
    g.edges()
        .filter(|&(u, v)| g_bar.has_edge(pi.apply(u), pi.apply(v)))
        .count()
}

/// Number of vertices on which the two maps agree.
pub fn overlap(pi1: &Bijection, pi2: &Bijection) -> Result<usize, ModelError> {
    check_sizes(pi1.n(), pi2.n())?;
    Ok((0..pi1.n()).filter(|&v| pi1.apply(v) == pi2.apply(v)).count())
}

/// Image of `g` under `π`.
pub fn relabel(g: &Graph, pi: &Bijection) -> Result<Graph, ModelError> {
    check_sizes(g.n(), pi.n())?;
    Ok(Graph::from_edges(g.n(), g.edges().map(|(u, v)| (pi.apply(u), pi.apply(v)))).expect("bijective image"))
}

fn check_sizes(a: usize, b: usize) -> Result<(), ModelError> {
    if a == b {
        Ok(())
    } else {
        Err(ModelError::SizeMismatch(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 0.5, 0.5).is_err());
        assert!(ModelParams::new(5, 0.0, 0.5).is_err());
        assert!(ModelParams::new(5, 1.0, 0.5).is_err());
        assert!(ModelParams::new(5, 0.5, 1.5).is_err());
        let p = ModelParams::new(100, 0.1, 0.5).unwrap();
        assert!((p.lambda() - 2.5).abs() < 1e-12);
        assert!((p.alpha_hat() - 0.5).abs() < 1e-12);
        let q = ModelParams::from_lambda_alpha(2000, 2.0, 0.5).unwrap();
        assert!((q.lambda() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn full_retention_copies_parent() {
        let params = ModelParams::new(30, 0.5, 1.0).unwrap();
        for seed in 0..5 {
            let smp = sample_correlated(&params, RandomSeed(seed)).unwrap();
            assert_eq!(relabel(&smp.g, &smp.pi_star).unwrap(), smp.g_bar);
        }
    }

    #[test]
    fn zero_retention_is_empty() {
        let params = ModelParams::new(20, 0.3, 0.0).unwrap();
        let smp = sample_correlated(&params, RandomSeed(1)).unwrap();
        assert_eq!(smp.g.edge_count() + smp.g_bar.edge_count(), 0);
        let (a, b) = sample_independent(&params, RandomSeed(1)).unwrap();
        assert_eq!(a.edge_count() + b.edge_count(), 0);
    }

    #[test]
    fn geometric_walk_covers_every_pair_at_q_one() {
        let mut rng = RandomSeed(3).rng();
        assert_eq!(sample_gnp(7, 1.0, &mut rng), Graph::complete(7));
        assert_eq!(sample_gnp(7, 0.0, &mut rng).edge_count(), 0);
    }

    #[test]
    fn intersection_of_paths_under_end_swap() {
        let path = Graph::path(4);
        let pi = Bijection::transposition(4, 0, 3);
        let h = intersection_graph(&path, &path, &pi).unwrap();
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(intersection_graph(&path, &path, &Bijection::identity(4)).unwrap(), path);
    }

    #[test]
    fn overlap_examples() {
        let id = Bijection::identity(5);
        assert_eq!(overlap(&id, &id).unwrap(), 5);
        assert_eq!(overlap(&id, &Bijection::cyclic_shift(5, 1)).unwrap(), 0);
        assert_eq!(overlap(&id, &Bijection::transposition(5, 0, 1)).unwrap(), 3);
        assert!(overlap(&id, &Bijection::identity(4)).is_err());
    }

    #[test]
    fn relabel_triangle() {
        let tri = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let pi = Bijection::new(vec![3, 4, 0, 1, 2]).unwrap();
        let img = relabel(&tri, &pi).unwrap();
        assert_eq!(img, Graph::from_edges(5, [(3, 4), (0, 4), (0, 3)]).unwrap());
    }

    fn arb_graph_and_perm() -> impl Strategy<Value = (Graph, Bijection)> {
        (2usize..16).prop_flat_map(|n| {
            (
                proptest::collection::vec((0..n, 0..n), 0..40),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
                .prop_map(move |(pairs, perm)| {
                    let g = Graph::from_edges(n, pairs.into_iter().filter(|(u, v)| u != v)).unwrap();
                    (g, Bijection::new(perm).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn intersection_with_own_relabeling_is_identity((g, pi) in arb_graph_and_perm()) {
            let img = relabel(&g, &pi).unwrap();
            prop_assert_eq!(intersection_graph(&g, &img, &pi).unwrap(), g.clone());
            prop_assert_eq!(relabel(&img, &pi.inverse()).unwrap(), g);
        }

        #[test]
        fn intersection_is_bounded((g, pi) in arb_graph_and_perm(), seed in 0u64..1000) {
            let mut rng = RandomSeed(seed).rng();
            let other = sample_gnp(g.n(), 0.4, &mut rng);
            let h = intersection_graph(&g, &other, &pi).unwrap();
            prop_assert!(h.edge_count() <= g.edge_count().min(other.edge_count()));
            prop_assert_eq!(h.edge_count(), common_edges(&g, &other, &pi));
        }

        #[test]
        fn overlap_counts_agree_on_both_sides((_g, pi) in arb_graph_and_perm(), seed in 0u64..1000) {
            let other = Bijection::random(pi.n(), &mut RandomSeed(seed).rng());
            let fwd = overlap(&pi, &other).unwrap();
            let back = (0..pi.n()).filter(|&w| pi.apply_inverse(w) == other.apply_inverse(w)).count();
            prop_assert_eq!(fwd, back);
            prop_assert_eq!(fwd, overlap(&other, &pi).unwrap());
        }
    }
}
