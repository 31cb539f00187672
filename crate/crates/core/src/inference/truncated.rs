//! Truncated mixture sums over bijections extending a partial matching.
//!
//! `f(G,Ḡ,A,σ) = Σ_{π ⊇ σ} P^{|ℰ_π|} Q^{|E|+|Ē|} R^{C(n,2)} · 1{H_π admissible} · 1{A good in H_π}`
//! and `g(G,Ḡ,A) = max_σ f(G,Ḡ,A,σ)`. The admissibility indicator is evaluated on `H_π`;
//! an undecided admissibility check counts as not admissible.

use super::likelihood::{log_likelihood_ratio, LikelihoodConstants};
use super::posterior::MAX_POSTERIOR_N;
use super::{check_size, InferenceError};
use crate::admissibility::{check_admissible, is_good_set, AdmissibilityConstants};
use crate::bijection::{all_bijections, all_embeddings, Embedding};
use crate::graph::Graph;
use crate::model::{intersection_graph, ModelError};

fn check_inputs(g: &Graph, g_bar: &Graph, a: &[usize]) -> Result<(), InferenceError> {
    if g.n() != g_bar.n() {
        return Err(ModelError::SizeMismatch(g.n(), g_bar.n()).into());
    }
    check_size("truncated mixture", g.n(), MAX_POSTERIOR_N)?;
    if a.iter().any(|&v| v >= g.n()) {
        return Err(InferenceError::InvalidArgs(format!(
            "A = {a:?} not inside 0..{}",
            g.n()
        )));
    }
    Ok(())
}

pub fn truncated_mass_f(
    g: &Graph,
    g_bar: &Graph,
    a: &[usize],
    sigma: &Embedding,
    likelihood: &LikelihoodConstants,
    consts: &AdmissibilityConstants,
) -> Result<f64, InferenceError> {
    check_inputs(g, g_bar, a)?;
    if sigma.domain != a {
        return Err(InferenceError::InvalidArgs("σ must be defined exactly on A".into()));
    }
    let mut total = 0.0;
    for pi in all_bijections(g.n()).iter().filter(|pi| pi.extends(sigma)) {
        let h = intersection_graph(g, g_bar, pi)?;
        if !check_admissible(&h, consts).is_admissible() || !is_good_set(&h, a, consts.c_big).good {
            continue;
        }
        total += log_likelihood_ratio(pi, g, g_bar, likelihood)?.exp();
    }
    Ok(total)
}

/// `g(G,Ḡ,A)` together with a maximizing embedding (first in lexicographic order).
pub fn truncated_mass_g(
    g: &Graph,
    g_bar: &Graph,
    a: &[usize],
    likelihood: &LikelihoodConstants,
    consts: &AdmissibilityConstants,
) -> Result<(f64, Embedding), InferenceError> {
    check_inputs(g, g_bar, a)?;
    let mut best: Option<(f64, Embedding)> = None;
    for sigma in all_embeddings(a, g.n()) {
        let f = truncated_mass_f(g, g_bar, a, &sigma, likelihood, consts)?;
        if best.as_ref().is_none_or(|(b, _)| f > *b) {
            best = Some((f, sigma));
        }
    }
    Ok(best.expect("at least one embedding"))
}
