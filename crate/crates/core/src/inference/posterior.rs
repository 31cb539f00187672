//! Exact posterior of the hidden matching at small `n`.

use serde::{Deserialize, Serialize};

use super::likelihood::{log_likelihood_ratio, LikelihoodConstants};
use super::{check_size, overlap_threshold, InferenceError};
use crate::bijection::{all_bijections, Bijection};
use crate::graph::Graph;
use crate::model::ModelParams;
use crate::par;
use crate::stats::log_sum_exp;

/// Largest `n` for which posteriors are tabulated (`7! = 5040` entries).
pub const MAX_POSTERIOR_N: usize = 7;

/// Posterior over all `n!` bijections, in lexicographic order of one-line notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTable {
    pub n: usize,
    pub entries: Vec<(Bijection, f64)>,
    pub ln_posterior: Vec<f64>,
    pub normalized: bool,
}

impl PosteriorTable {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, q)| q).sum()
    }

    pub fn max_atom(&self) -> f64 {
        self.entries.iter().map(|&(_, q)| q).fold(0.0, f64::max)
    }

    pub fn prob(&self, pi: &Bijection) -> f64 {
        self.entries[lex_rank(pi)].1
    }

    pub fn ln_prob(&self, pi: &Bijection) -> f64 {
        self.ln_posterior[lex_rank(pi)]
    }
}

/// Position of `pi` in the lexicographic listing of all bijections of its size.
pub fn lex_rank(pi: &Bijection) -> usize {
    let f = pi.forward();
    let n = f.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller_later = f[i + 1..].iter().filter(|&&x| x < f[i]).count();
        rank = rank * (n - i) + smaller_later;
    }
    rank
}

/// Log of `Σ_π Π_e ℓ(G_e, Ḡ_{π(e)}) = n!·Q[G,Ḡ]/P[G,Ḡ]`, by enumeration.
pub fn ln_mixture_ratio(g: &Graph, g_bar: &Graph, consts: &LikelihoodConstants) -> Result<f64, InferenceError> {
    check_size("mixture enumeration", g.n(), MAX_POSTERIOR_N)?;
    let lls = all_bijections(g.n())
        .iter()
        .map(|pi| log_likelihood_ratio(pi, g, g_bar, consts))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(log_sum_exp(&lls))
}

/// `Q_{G,Ḡ}[π] ∝ exp(ln ratio(π))` over all bijections.
pub fn exact_posterior(g: &Graph, g_bar: &Graph, params: &ModelParams) -> Result<PosteriorTable, InferenceError> {
    let n = g.n();
    check_size("exact posterior", n, MAX_POSTERIOR_N)?;
    let consts = LikelihoodConstants::from_params(params)?;
    let bijections = all_bijections(n);
    let lls = par::map_indexed(bijections.len(), |i| {
        log_likelihood_ratio(&bijections[i], g, g_bar, &consts)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;
    let z = log_sum_exp(&lls);
    if !z.is_finite() {
        return Err(InferenceError::InvalidArgs(
            "graphs have zero likelihood under every matching".into(),
        ));
    }
    let ln_posterior: Vec<f64> = lls.iter().map(|&l| l - z).collect();
    let entries = bijections
        .into_iter()
        .zip(ln_posterior.iter().map(|&l| l.exp()))
        .collect();
    Ok(PosteriorTable {
        n,
        entries,
        ln_posterior,
        normalized: true,
    })
}

/// `M(G,Ḡ,π̃)`: posterior mass of matchings agreeing with `π̃` on at least `⌈δn⌉` vertices.
pub fn posterior_overlap_mass(table: &PosteriorTable, pi_tilde: &Bijection, delta: f64) -> f64 {
    let need = overlap_threshold(delta, table.n);
    let f = pi_tilde.forward();
    table
        .entries
        .iter()
        .filter(|(pi, _)| (0..table.n).filter(|&v| pi.apply(v) == f[v]).count() >= need)
        .map(|(_, q)| q)
        .sum()
}

/// `W(G,Ḡ) = max_π̃ M(G,Ḡ,π̃)`, with the maximizing reference matching (lexicographically first).
pub fn posterior_w_argmax(table: &PosteriorTable, delta: f64) -> (f64, Bijection) {
    let refs: Vec<&Bijection> = table.entries.iter().map(|(pi, _)| pi).collect();
    let masses = par::map_indexed(refs.len(), |i| posterior_overlap_mass(table, refs[i], delta));
    let mut best = 0;
    for (i, &m) in masses.iter().enumerate() {
        if m > masses[best] {
            best = i;
        }
    }
    (masses[best], refs[best].clone())
}

pub fn posterior_w(table: &PosteriorTable, delta: f64) -> f64 {
    posterior_w_argmax(table, delta).0
}

/// Rows of a posterior dump: one-line notation, log posterior, overlap with `truth`.
pub fn posterior_rows(table: &PosteriorTable, truth: &Bijection) -> Vec<(String, f64, usize)> {
    table
        .entries
        .iter()
        .zip(&table.ln_posterior)
        .map(|((pi, _), &lp)| {
            let ov = (0..table.n).filter(|&v| pi.apply(v) == truth.apply(v)).count();
            (pi.one_line(), lp, ov)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_correlated;
    use crate::rng::RandomSeed;

    #[test]
    fn lex_rank_matches_enumeration() {
        for (i, pi) in all_bijections(5).iter().enumerate() {
            assert_eq!(lex_rank(pi), i);
        }
    }

    #[test]
    fn empty_and_triangle_are_uniform() {
        let params = ModelParams::new(4, 0.3, 0.7).unwrap();
        let t = exact_posterior(&Graph::empty(4), &Graph::empty(4), &params).unwrap();
        assert!(t.entries.iter().all(|(_, q)| (q - 1.0 / 24.0).abs() < 1e-12));
        let params = ModelParams::new(3, 0.3, 0.7).unwrap();
        let k3 = Graph::complete(3);
        let t = exact_posterior(&k3, &k3, &params).unwrap();
        assert!(t.entries.iter().all(|(_, q)| (q - 1.0 / 6.0).abs() < 1e-12));
    }

    #[test]
    fn single_edge_posterior_concentrates() {
        let params = ModelParams::new(4, 0.5, 0.5).unwrap();
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let t = exact_posterior(&g, &g, &params).unwrap();
        let (hi, lo): (Vec<_>, Vec<_>) = t.entries.iter().partition(|(pi, _)| pi.apply(0) < 2 && pi.apply(1) < 2);
        assert_eq!((hi.len(), lo.len()), (4, 20));
        let top = hi[0].1;
        assert!(hi.iter().all(|(_, q)| (q - top).abs() < 1e-15));
        let rest = lo.iter().map(|(_, q)| *q).fold(0.0, f64::max);
        assert!(top > rest);
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_mass_extremes() {
        let params = ModelParams::new(5, 0.4, 0.8).unwrap();
        let s = sample_correlated(&params, RandomSeed(9)).unwrap();
        let t = exact_posterior(&s.g, &s.g_bar, &params).unwrap();
        let pi = Bijection::random(5, &mut RandomSeed(1).rng());
        assert!((posterior_overlap_mass(&t, &pi, 0.0) - 1.0).abs() < 1e-12);
        assert!((posterior_overlap_mass(&t, &pi, 1.0) - t.prob(&pi)).abs() < 1e-15);
        assert!((posterior_w(&t, 1.0) - t.max_atom()).abs() < 1e-15);
        let w = posterior_w(&t, 0.4);
        assert!(w >= t.max_atom() && w <= 1.0 + 1e-12);
    }

    #[test]
    fn uniform_overlap_mass_counts_fixed_points() {
        let params = ModelParams::new(4, 0.3, 0.7).unwrap();
        let t = exact_posterior(&Graph::empty(4), &Graph::empty(4), &params).unwrap();
        // identity (4 fixed points) + 6 transpositions (2 fixed points)
        let m = posterior_overlap_mass(&t, &Bijection::identity(4), 0.5);
        assert!((m - 7.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_is_rejected() {
        let params = ModelParams::new(8, 0.3, 0.7).unwrap();
        assert!(matches!(
            exact_posterior(&Graph::empty(8), &Graph::empty(8), &params),
            Err(InferenceError::TooLarge { .. })
        ));
    }
}
