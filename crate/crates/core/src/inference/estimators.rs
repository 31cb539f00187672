//! Matching estimators: the common-edge maximizer (posterior mode) and the
//! reasonable-candidate estimator.
//!
//! Both search the space of bijections exhaustively up to [`EXHAUSTIVE_MAX_N`] vertices and
//! by transposition hill climbing above it.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::likelihood::LikelihoodConstants;
use super::{check_size, overlap_threshold, InferenceError};
use crate::bijection::Bijection;
use crate::density::{densest_subgraph_exact, peel_min_degree};
use crate::graph::Graph;
use crate::model::{intersection_graph, ModelError, ModelParams};
use crate::par;
use crate::rng::RandomSeed;

pub const EXHAUSTIVE_MAX_N: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Exhaustive when `n ≤ 9`, hill climbing otherwise.
    Auto,
    Exhaustive,
    HillClimb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub eta: f64,
    pub rho_hat: f64,
    /// Estimated linear-size fraction `ĉ_λ` of the dense core.
    pub c_lambda_hat: f64,
    /// Partial-recovery fraction `δ`.
    pub delta: f64,
    pub strategy: SearchStrategy,
    /// Transposition evaluations allowed across all restarts.
    pub budget: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn new(rho_hat: f64, c_lambda_hat: f64, eta: f64) -> EstimatorConfig {
        EstimatorConfig {
            eta,
            rho_hat,
            c_lambda_hat,
            delta: 0.1,
            strategy: SearchStrategy::Auto,
            budget: 2_000_000,
            restarts: 64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let ok = self.eta >= 0.0
            && self.rho_hat >= 0.0
            && self.c_lambda_hat > 0.0
            && self.c_lambda_hat <= 1.0
            && (0.0..=1.0).contains(&self.delta)
            && self.restarts >= 1;
        if ok {
            Ok(())
        } else {
            Err(InferenceError::InvalidArgs(format!(
                "invalid estimator config {self:?}"
            )))
        }
    }

    /// Whether `0 < η < (ρ̂ − 1/α)/4`, the margin the reasonable-candidate argument needs.
    pub fn eta_in_supercritical_range(&self, alpha: f64) -> bool {
        self.eta > 0.0 && self.eta < (self.rho_hat - 1.0 / alpha) / 4.0
    }

    fn exhaustive(&self, n: usize) -> Result<bool, InferenceError> {
        match self.strategy {
            SearchStrategy::Auto => Ok(n <= EXHAUSTIVE_MAX_N),
            SearchStrategy::Exhaustive => check_size("exhaustive search", n, EXHAUSTIVE_MAX_N).map(|_| true),
            SearchStrategy::HillClimb => Ok(false),
        }
    }
}

fn check_sizes(g: &Graph, g_bar: &Graph) -> Result<(), InferenceError> {
    if g.n() == g_bar.n() {
        Ok(())
    } else {
        Err(ModelError::SizeMismatch(g.n(), g_bar.n()).into())
    }
}

fn score(g: &Graph, g_bar: &Graph, f: &[usize]) -> usize {
    g.edges().filter(|&(u, v)| g_bar.has_edge(f[u], f[v])).count()
}

/// Calls `visit(forward)` on every bijection whose image of vertex 0 is `first`, in
/// lexicographic order, until it returns false.
fn for_each_in_block<F: FnMut(&[usize]) -> bool>(n: usize, first: usize, mut visit: F) {
    let rest: Vec<usize> = (0..n).filter(|&w| w != first).collect();
    let mut f = vec![first; n];
    for tail in rest.into_iter().permutations(n - 1) {
        f[1..].copy_from_slice(&tail);
        if !visit(&f) {
            return;
        }
    }
}

/// Change in `|ℰ_π|` when the images of `a` and `b` are swapped.
fn swap_delta(g: &Graph, g_bar: &Graph, f: &[usize], a: usize, b: usize) -> isize {
    let local = |img: &dyn Fn(usize) -> usize| -> isize {
        let mut c = g.neighbors(a).filter(|&w| g_bar.has_edge(img(a), img(w))).count();
        c += g
            .neighbors(b)
            .filter(|&w| w != a && g_bar.has_edge(img(b), img(w)))
            .count();
        c as isize
    };
    let before = local(&|x| f[x]);
    let after = local(&|x| {
        if x == a {
            f[b]
        } else if x == b {
            f[a]
        } else {
            f[x]
        }
    });
    after - before
}

struct Climb {
    forward: Vec<usize>,
    score: usize,
    evaluations: u64,
    out_of_budget: bool,
}

/// First-improvement ascent of `|ℰ_π|` over transpositions, until a local optimum or `budget` evaluations.
fn hill_climb(g: &Graph, g_bar: &Graph, start: Vec<usize>, budget: u64) -> Climb {
    let n = start.len();
    let mut f = start;
    let mut s = score(g, g_bar, &f);
    let mut evaluations = 0;
    loop {
        let mut improved = false;
        for a in 0..n {
            for b in a + 1..n {
                if evaluations == budget {
                    return Climb {
                        forward: f,
                        score: s,
                        evaluations,
                        out_of_budget: true,
                    };
                }
                evaluations += 1;
                let d = swap_delta(g, g_bar, &f, a, b);
                if d > 0 {
                    f.swap(a, b);
                    s = (s as isize + d) as usize;
                    improved = true;
                }
            }
        }
        if !improved {
            return Climb {
                forward: f,
                score: s,
                evaluations,
                out_of_budget: false,
            };
        }
    }
}

fn climbs(g: &Graph, g_bar: &Graph, config: &EstimatorConfig) -> Vec<Climb> {
    let n = g.n();
    let per_restart = (config.budget / config.restarts as u64).max(1);
    let seed = RandomSeed(config.seed);
    par::map_indexed(config.restarts, |r| {
        let start = Bijection::random(n, &mut seed.derive(r as u64).rng()).forward();
        hill_climb(g, g_bar, start, per_restart)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub pi: Bijection,
    pub common_edges: usize,
    pub exhaustive: bool,
    /// Hill climbing stopped on budget before reaching a local optimum in some restart.
    pub budget_exhausted: bool,
    pub evaluations: u64,
}

/// Maximizer of `|ℰ_π|`, which is the posterior mode when `P > 1`.
/// Ties go to the lexicographically smallest bijection found.
pub fn map_estimator(
    g: &Graph,
    g_bar: &Graph,
    params: &ModelParams,
    config: &EstimatorConfig,
) -> Result<MapEstimate, InferenceError> {
    check_sizes(g, g_bar)?;
    config.validate()?;
    let consts = LikelihoodConstants::from_params(params)?;
    if !(consts.big_p > 1.0) {
        return Err(InferenceError::InvalidArgs(format!(
            "P = {} ≤ 1: the posterior mode does not maximize common edges",
            consts.big_p
        )));
    }
    let n = g.n();
    if config.exhaustive(n)? {
        let blocks = par::map_indexed(n.max(1), |first| {
            let mut best: Option<(usize, Vec<usize>)> = None;
            if n > 0 {
                for_each_in_block(n, first, |f| {
                    let s = score(g, g_bar, f);
                    if best.as_ref().is_none_or(|(b, _)| s > *b) {
                        best = Some((s, f.to_vec()));
                    }
                    true
                });
            } else {
                best = Some((0, Vec::new()));
            }
            best.expect("block nonempty")
        });
        let mut best = &blocks[0];
        for b in &blocks[1..] {
            if b.0 > best.0 {
                best = b;
            }
        }
        let evaluations = (1..=n as u64).product();
        return Ok(MapEstimate {
            pi: Bijection::new(best.1.clone()).expect("permutation"),
            common_edges: best.0,
            exhaustive: true,
            budget_exhausted: false,
            evaluations,
        });
    }
    let results = climbs(g, g_bar, config);
    let best = results
        .iter()
        .max_by(|x, y| x.score.cmp(&y.score).then_with(|| y.forward.cmp(&x.forward)))
        .expect("at least one restart");
    Ok(MapEstimate {
        pi: Bijection::new(best.forward.clone()).expect("permutation"),
        common_edges: best.score,
        exhaustive: false,
        budget_exhausted: results.iter().any(|c| c.out_of_budget),
        evaluations: results.iter().map(|c| c.evaluations).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub accepted: bool,
    /// Maximum edge/vertex ratio of `H_π`.
    pub max_density: f64,
    /// Condition (i): `max_density ≤ ρ̂ + η`.
    pub density_cap_ok: bool,
    /// Condition (ii): a set of size `≥ ⌈ĉn⌉` with density `≥ ρ̂ − η` was found.
    pub dense_core_ok: bool,
    pub certificate: Option<Vec<usize>>,
    pub certificate_density: Option<f64>,
}

/// Minimum certificate size `⌈ĉn⌉` (at least one vertex).
pub fn certificate_min_size(config: &EstimatorConfig, n: usize) -> usize {
    overlap_threshold(config.c_lambda_hat, n).max(1)
}

/// Both reasonable-candidate conditions on `H_π`. Condition (ii) tries the largest densest
/// subgraph, then the suffix sets of min-degree peeling; an accepted check always carries
/// a certificate, so there are no false accepts, only possible misses.
pub fn reasonable_candidate_check(
    pi: &Bijection,
    g: &Graph,
    g_bar: &Graph,
    config: &EstimatorConfig,
) -> Result<CandidateCheck, InferenceError> {
    config.validate()?;
    let h = intersection_graph(g, g_bar, pi)?;
    check_intersection_graph(&h, config)
}

/// [`reasonable_candidate_check`] on an already computed intersection graph.
pub fn check_intersection_graph(h: &Graph, config: &EstimatorConfig) -> Result<CandidateCheck, InferenceError> {
    let n = h.n();
    let d = densest_subgraph_exact(h)?;
    let max_density = d.density_f64();
    let density_cap_ok = max_density <= config.rho_hat + config.eta;
    let min_size = certificate_min_size(config, n);
    let floor = config.rho_hat - config.eta;
    let qualifies = |e: usize, k: usize| k >= min_size && e as f64 >= floor * k as f64;

    let mut certificate = None;
    if qualifies(d.witness_edges, d.best_subset.len()) {
        certificate = Some((d.best_subset.clone(), max_density));
    } else {
        let peel = peel_min_degree(h, &vec![true; n]);
        let mut best: Option<(usize, usize)> = None;
        for i in 0..=n.saturating_sub(min_size) {
            let (e, k) = (peel.edges_left[i], n - i);
            if k > 0 && qualifies(e, k) && best.is_none_or(|(be, bk)| e * bk > be * k) {
                best = Some((e, i));
            }
        }
        if let Some((e, i)) = best {
            certificate = Some((peel.remaining(i), e as f64 / (n - i) as f64));
        }
    }
    let dense_core_ok = certificate.is_some();
    Ok(CandidateCheck {
        accepted: density_cap_ok && dense_core_ok,
        max_density,
        density_cap_ok,
        dense_core_ok,
        certificate_density: certificate.as_ref().map(|c| c.1),
        certificate: certificate.map(|c| c.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSearch {
    pub pi: Bijection,
    pub check: CandidateCheck,
    pub exhaustive: bool,
}

/// Some bijection passing [`reasonable_candidate_check`], or `None`.
///
/// Exhaustive mode returns the lexicographically first accepted bijection. Hill climbing
/// ascends `|ℰ_π|` from each restart and tests the local optimum; the first accepted
/// restart (in restart order) wins.
pub fn reasonable_candidate_search(
    g: &Graph,
    g_bar: &Graph,
    config: &EstimatorConfig,
) -> Result<Option<CandidateSearch>, InferenceError> {
    check_sizes(g, g_bar)?;
    config.validate()?;
    let n = g.n();
    let min_size = certificate_min_size(config, n);
    // Any certificate has at least (ρ̂−η)⌈ĉn⌉ edges, all of them common edges.
    let needed = (config.rho_hat - config.eta) * min_size as f64;
    if config.exhaustive(n)? {
        let blocks = par::map_indexed(n, |first| -> Result<Option<CandidateSearch>, InferenceError> {
            let mut found = None;
            let mut err = None;
            for_each_in_block(n, first, |f| {
                if (score(g, g_bar, f) as f64) < needed {
                    return true;
                }
                let pi = Bijection::new(f.to_vec()).expect("permutation");
                match reasonable_candidate_check(&pi, g, g_bar, config) {
                    Ok(check) if check.accepted => {
                        found = Some(CandidateSearch {
                            pi,
                            check,
                            exhaustive: true,
                        });
                        false
                    }
                    Ok(_) => true,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(found),
            }
        });
        for b in blocks {
            if let Some(found) = b? {
                return Ok(Some(found));
            }
        }
        return Ok(None);
    }
    for climb in climbs(g, g_bar, config) {
        if (climb.score as f64) < needed {
            continue;
        }
        let pi = Bijection::new(climb.forward).expect("permutation");
        let check = reasonable_candidate_check(&pi, g, g_bar, config)?;
        if check.accepted {
            return Ok(Some(CandidateSearch {
                pi,
                check,
                exhaustive: false,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::all_bijections;
    use crate::model::{common_edges, relabel, sample_correlated};

    fn asymmetric7() -> Graph {
        // smallest asymmetric trees have 7 vertices
        Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6)]).unwrap()
    }

    #[test]
    fn exhaustive_recovers_identity_on_asymmetric_graph() {
        let g = asymmetric7();
        let params = ModelParams::new(7, 0.3, 0.9).unwrap();
        let est = map_estimator(&g, &g, &params, &EstimatorConfig::new(1.0, 0.5, 0.1)).unwrap();
        assert_eq!(est.pi, Bijection::identity(7));
        assert!(est.exhaustive);
        // hidden relabeling is undone as well
        let pi_star = Bijection::new(vec![3, 6, 0, 5, 1, 2, 4]).unwrap();
        let g_bar = relabel(&g, &pi_star).unwrap();
        let est = map_estimator(&g, &g_bar, &params, &EstimatorConfig::new(1.0, 0.5, 0.1)).unwrap();
        assert_eq!(est.pi, pi_star);
    }

    #[test]
    fn empty_graphs_give_identity() {
        let params = ModelParams::new(6, 0.3, 0.5).unwrap();
        let e = Graph::empty(6);
        let est = map_estimator(&e, &e, &params, &EstimatorConfig::new(1.0, 0.5, 0.1)).unwrap();
        assert_eq!(est.pi, Bijection::identity(6));
    }

    #[test]
    fn exhaustive_attains_enumerated_max() {
        let params = ModelParams::new(6, 0.5, 0.7).unwrap();
        for seed in 0..10 {
            let s = sample_correlated(&params, RandomSeed(seed)).unwrap();
            let best = all_bijections(6)
                .iter()
                .map(|pi| common_edges(&s.g, &s.g_bar, pi))
                .max()
                .unwrap();
            let est = map_estimator(&s.g, &s.g_bar, &params, &EstimatorConfig::new(1.0, 0.5, 0.1)).unwrap();
            assert_eq!(est.common_edges, best);
            assert_eq!(common_edges(&s.g, &s.g_bar, &est.pi), best);
        }
    }

    #[test]
    fn swap_delta_matches_rescoring() {
        let params = ModelParams::new(12, 0.4, 0.8).unwrap();
        let s = sample_correlated(&params, RandomSeed(4)).unwrap();
        let f = Bijection::random(12, &mut RandomSeed(5).rng()).forward();
        for a in 0..12 {
            for b in a + 1..12 {
                let mut f2 = f.clone();
                f2.swap(a, b);
                let d = score(&s.g, &s.g_bar, &f2) as isize - score(&s.g, &s.g_bar, &f) as isize;
                assert_eq!(swap_delta(&s.g, &s.g_bar, &f, a, b), d);
            }
        }
    }

    #[test]
    fn budget_flag_is_raised() {
        let params = ModelParams::new(30, 0.3, 0.9).unwrap();
        let s = sample_correlated(&params, RandomSeed(1)).unwrap();
        let mut cfg = EstimatorConfig::new(1.0, 0.5, 0.1);
        cfg.budget = 50;
        cfg.restarts = 2;
        let est = map_estimator(&s.g, &s.g_bar, &params, &cfg).unwrap();
        assert!(est.budget_exhausted && !est.exhaustive);
    }

    #[test]
    fn p_exceeds_one_on_the_parameter_grid() {
        // P = (1−2ps+ps²)/(p−2ps+ps²) and p < 1
        for &p in &[0.01, 0.3, 0.9, 0.999] {
            for &s in &[0.0, 0.2, 0.7, 0.99] {
                assert!(LikelihoodConstants::new(p, s).unwrap().big_p > 1.0);
            }
        }
    }

    #[test]
    fn candidate_check_on_synthetic_clique() {
        // clique on ⌈ĉn⌉ = 5 vertices of 20: density 2
        let n = 20;
        let clique: Vec<(usize, usize)> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
        let g = Graph::from_edges(n, clique).unwrap();
        let cfg = EstimatorConfig::new(2.0, 0.25, 0.1);
        let check = reasonable_candidate_check(&Bijection::identity(n), &g, &g, &cfg).unwrap();
        assert!(check.accepted);
        assert_eq!(check.certificate, Some(vec![0, 1, 2, 3, 4]));
        let empty = Graph::empty(n);
        let check = reasonable_candidate_check(&Bijection::identity(n), &empty, &empty, &cfg).unwrap();
        assert!(!check.dense_core_ok && !check.accepted);
        // too dense for (i)
        let tight = EstimatorConfig::new(1.5, 0.25, 0.1);
        assert!(
            !reasonable_candidate_check(&Bijection::identity(n), &g, &g, &tight)
                .unwrap()
                .density_cap_ok
        );
    }

    #[test]
    fn peeling_certificate_when_densest_is_small() {
        // K4 (density 1.5) attached to a 12-cycle (density 1): the densest set is too small
        let mut edges: Vec<(usize, usize)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        for i in 4..16 {
            edges.push((i, if i == 15 { 4 } else { i + 1 }));
        }
        edges.push((0, 4));
        let g = Graph::from_edges(16, edges).unwrap();
        let cfg = EstimatorConfig::new(1.05, 0.9, 0.1);
        let check = reasonable_candidate_check(&Bijection::identity(16), &g, &g, &cfg).unwrap();
        assert!(check.dense_core_ok);
        let cert = check.certificate.unwrap();
        assert!(cert.len() >= 15);
        assert!(g.induced_edge_count(&cert) as f64 >= 0.95 * cert.len() as f64);
        assert!(!check.density_cap_ok);
    }

    #[test]
    fn search_empty_is_none_and_results_pass_check() {
        let cfg = EstimatorConfig::new(1.0, 0.5, 0.2);
        let e = Graph::empty(6);
        assert!(reasonable_candidate_search(&e, &e, &cfg).unwrap().is_none());
        let g = Graph::cycle(7);
        let found = reasonable_candidate_search(&g, &g, &cfg).unwrap().unwrap();
        assert!(reasonable_candidate_check(&found.pi, &g, &g, &cfg).unwrap().accepted);
    }
}
