//! Total variation between the independent law `P` and the correlated law `Q`.

use serde::{Deserialize, Serialize};

use super::likelihood::LikelihoodConstants;
use super::posterior::MAX_POSTERIOR_N;
use super::{check_size, InferenceError};
use crate::bijection::{all_bijections, Bijection};
use crate::graph::{pair_count, Graph};
use crate::model::{common_edges, sample_independent, ModelParams};
use crate::par;
use crate::rng::RandomSeed;
use crate::stats::{log_sum_exp, MeanAccumulator};

/// Largest `n` for exhaustive TV (`2^{2·C(4,2)} = 4096` graph pairs).
pub const TV_EXACT_MAX_N: usize = 4;

/// Probability of `(G, Ḡ)` under two independent `G(n, ps)` draws.
pub fn independent_pmf(g: &Graph, g_bar: &Graph, params: &ModelParams) -> f64 {
    let ps = params.ps();
    let m = pair_count(g.n()) as i32;
    let e = (g.edge_count() + g_bar.edge_count()) as i32;
    ps.powi(e) * (1.0 - ps).powi(2 * m - e)
}

/// Joint pair probabilities `q(x, y)` under the correlated law, indexed `[x][y]`.
fn pair_law(params: &ModelParams) -> [[f64; 2]; 2] {
    let (p, s) = (params.p, params.s);
    let ps = p * s;
    let both = ps * s;
    let one = ps * (1.0 - s);
    [[1.0 - 2.0 * ps + both, one], [one, both]]
}

/// Probability of `(G, Ḡ)` under the correlated law: the uniform mixture over `π*` of
/// independent per-pair joint draws.
pub fn correlated_pmf(g: &Graph, g_bar: &Graph, params: &ModelParams) -> Result<f64, InferenceError> {
    let n = g.n();
    check_size("correlated pmf", n, MAX_POSTERIOR_N)?;
    let q = pair_law(params);
    let bijections = all_bijections(n);
    let total: f64 = bijections
        .iter()
        .map(|pi| {
            let mut prod = 1.0;
            for u in 0..n {
                for v in u + 1..n {
                    prod *= q[g.has_edge(u, v) as usize][g_bar.has_edge(pi.apply(u), pi.apply(v)) as usize];
                }
            }
            prod
        })
        .sum();
    Ok(total / bijections.len() as f64)
}

fn graph_from_mask(n: usize, pairs: &[(usize, usize)], mask: u32) -> Graph {
    Graph::from_edges(
        n,
        pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e),
    )
    .expect("valid pairs")
}

/// `½ Σ |P − Q|` over every pair of graphs on `n ≤ 4` vertices.
pub fn tv_exact(params: &ModelParams) -> Result<f64, InferenceError> {
    params.validate()?;
    let n = params.n;
    check_size("exact total variation", n, TV_EXACT_MAX_N)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let graphs: Vec<Graph> = (0..1u32 << pairs.len())
        .map(|m| graph_from_mask(n, &pairs, m))
        .collect();
    let rows = par::map_indexed(graphs.len(), |i| -> Result<f64, InferenceError> {
        let mut acc = 0.0;
        for h in &graphs {
            let p = independent_pmf(&graphs[i], h, params);
            let q = correlated_pmf(&graphs[i], h, params)?;
            acc += (p - q).abs();
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok((0.5 * total).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub replicates: usize,
}

/// Monte Carlo `E_P[(1 − Q/P)₊]` with the likelihood ratio `Q/P = (1/n!) Σ_π Π_e ℓ`
/// computed exactly by enumeration (`n ≤ 7`). Replicate `i` uses `seed.derive(i)`.
pub fn tv_mc(params: &ModelParams, replicates: usize, seed: RandomSeed) -> Result<TvEstimate, InferenceError> {
    params.validate()?;
    let n = params.n;
    check_size("Monte Carlo total variation", n, MAX_POSTERIOR_N)?;
    if replicates == 0 {
        return Err(InferenceError::InvalidArgs("replicates must be ≥ 1".into()));
    }
    let consts = LikelihoodConstants::from_params(params)?;
    let bijections = all_bijections(n);
    let ln_n_fact = (bijections.len() as f64).ln();
    let values = par::map_indexed(replicates, |i| -> Result<f64, InferenceError> {
        let (g, g_bar) = sample_independent(params, seed.derive(i as u64))?;
        let lls: Vec<f64> = bijections.iter().map(|pi| ln_ratio(&consts, pi, &g, &g_bar)).collect();
        let ratio = (log_sum_exp(&lls) - ln_n_fact).exp();
        Ok((1.0 - ratio).max(0.0))
    });
    let mut acc = MeanAccumulator::default();
    for v in values {
        acc.push(v?);
    }
    Ok(TvEstimate {
        estimate: acc.mean(),
        stderr: acc.stderr(),
        replicates,
    })
}

fn ln_ratio(consts: &LikelihoodConstants, pi: &Bijection, g: &Graph, g_bar: &Graph) -> f64 {
    consts.ln_ratio_from_counts(g.n(), g.edge_count(), g_bar.edge_count(), common_edges(g, g_bar, pi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_laws_have_zero_distance() {
        let params = ModelParams::new(3, 0.5, 0.0).unwrap();
        assert_eq!(tv_exact(&params).unwrap(), 0.0);
        let mc = tv_mc(&params, 50, RandomSeed(1)).unwrap();
        assert!(mc.estimate.abs() < 1e-12);
    }

    #[test]
    fn pmfs_sum_to_one() {
        let params = ModelParams::new(3, 0.6, 0.7).unwrap();
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let graphs: Vec<Graph> = (0..8).map(|m| graph_from_mask(3, &pairs, m)).collect();
        let (mut tp, mut tq) = (0.0, 0.0);
        for a in &graphs {
            for b in &graphs {
                tp += independent_pmf(a, b, &params);
                tq += correlated_pmf(a, b, &params).unwrap();
            }
        }
        assert!((tp - 1.0).abs() < 1e-12 && (tq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_in_unit_interval_and_grows_with_correlation() {
        let weak = tv_exact(&ModelParams::new(4, 0.5, 0.2).unwrap()).unwrap();
        let strong = tv_exact(&ModelParams::new(4, 0.5, 0.9).unwrap()).unwrap();
        assert!((0.0..=1.0).contains(&weak) && (0.0..=1.0).contains(&strong));
        assert!(strong > weak);
    }

    #[test]
    fn size_limits() {
        assert!(tv_exact(&ModelParams::new(5, 0.5, 0.5).unwrap()).is_err());
        assert!(tv_mc(&ModelParams::new(8, 0.5, 0.5).unwrap(), 10, RandomSeed(0)).is_err());
    }
}
