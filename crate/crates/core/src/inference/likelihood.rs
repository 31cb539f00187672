//! Edge likelihood ratio and the constants `P, Q, R`.
//!
//! For a candidate matching `π`,
//! `n!·Q[π, G, Ḡ] / P[G, Ḡ] = Π_e ℓ(G_e, Ḡ_{π(e)}) = P^{|ℰ_π|} Q^{|E|+|Ē|} R^{C(n,2)}`.

use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::bijection::Bijection;
use crate::graph::{pair_count, Graph};
use crate::model::{common_edges, ModelError, ModelParams};

/// Agreement required between the per-pair product and the closed form (on the log scale,
/// relative to the magnitude of the value).
pub const LIKELIHOOD_TOL: f64 = 1e-9;

/// `ℓ(x, y)`: joint probability of the pair under the correlated law over the product
/// of the marginals.
pub fn edge_ll(x: bool, y: bool, p: f64, s: f64) -> f64 {
    let ps = p * s;
    match (x, y) {
        (false, false) => (1.0 - 2.0 * ps + ps * s) / ((1.0 - ps) * (1.0 - ps)),
        (true, true) => 1.0 / p,
        _ => (1.0 - s) / (1.0 - ps),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodConstants {
    pub p: f64,
    pub s: f64,
    /// `(1−2ps+ps²)/(p(1−s)²)`; infinite when `s = 1`.
    pub big_p: f64,
    /// `(1−s)(1−ps)/(1−2ps+ps²)`; zero when `s = 1`.
    pub big_q: f64,
    /// `(1−2ps+ps²)/(1−ps)²`.
    pub big_r: f64,
    pub ln_p: f64,
    pub ln_q: f64,
    pub ln_r: f64,
}

impl LikelihoodConstants {
    pub fn new(p: f64, s: f64) -> Result<LikelihoodConstants, InferenceError> {
        if !(p > 0.0 && p < 1.0 && (0.0..=1.0).contains(&s)) {
            return Err(InferenceError::InvalidArgs(format!(
                "need p ∈ (0,1), s ∈ [0,1]; got p = {p}, s = {s}"
            )));
        }
        let ps = p * s;
        let q00 = 1.0 - 2.0 * ps + ps * s;
        let big_p = q00 / (p * (1.0 - s) * (1.0 - s));
        let big_q = (1.0 - s) * (1.0 - ps) / q00;
        let big_r = q00 / ((1.0 - ps) * (1.0 - ps));
        Ok(LikelihoodConstants {
            p,
            s,
            big_p,
            big_q,
            big_r,
            ln_p: big_p.ln(),
            ln_q: big_q.ln(),
            ln_r: big_r.ln(),
        })
    }

    pub fn from_params(params: &ModelParams) -> Result<LikelihoodConstants, InferenceError> {
        LikelihoodConstants::new(params.p, params.s)
    }

    pub fn ln_edge(&self, x: bool, y: bool) -> f64 {
        edge_ll(x, y, self.p, self.s).ln()
    }

    /// `|ℰ| ln P + (|E|+|Ē|) ln Q + C(n,2) ln R`.
    ///
    /// At `s = 1` the two graphs must coincide under `π` to have positive likelihood; the
    /// limit is then `|ℰ| ln(1/p) + (C(n,2) − |ℰ|) ln ℓ(0,0)`, and `−∞` otherwise.
    pub fn ln_ratio_from_counts(&self, n: usize, edges_g: usize, edges_g_bar: usize, common: usize) -> f64 {
        let pairs = pair_count(n) as f64;
        if self.s == 1.0 {
            if edges_g + edges_g_bar != 2 * common {
                return f64::NEG_INFINITY;
            }
            let ln00 = self.ln_edge(false, false);
            return common as f64 * -self.p.ln() + (pairs - common as f64) * ln00;
        }
        common as f64 * self.ln_p + (edges_g + edges_g_bar) as f64 * self.ln_q + pairs * self.ln_r
    }

    /// Closed-form log-ratio for `π` (no product cross-check).
    pub fn ln_ratio(&self, pi: &Bijection, g: &Graph, g_bar: &Graph) -> f64 {
        self.ln_ratio_from_counts(g.n(), g.edge_count(), g_bar.edge_count(), common_edges(g, g_bar, pi))
    }
}

/// `Σ_e ln ℓ(G_e, Ḡ_{π(e)})` over all `C(n,2)` pairs.
pub fn ln_ratio_product(pi: &Bijection, g: &Graph, g_bar: &Graph, consts: &LikelihoodConstants) -> f64 {
    let ln = [
        [consts.ln_edge(false, false), consts.ln_edge(false, true)],
        [consts.ln_edge(true, false), consts.ln_edge(true, true)],
    ];
    let n = g.n();
    let mut total = 0.0;
    for u in 0..n {
        for v in u + 1..n {
            let x = g.has_edge(u, v) as usize;
            let y = g_bar.has_edge(pi.apply(u), pi.apply(v)) as usize;
            total += ln[x][y];
        }
    }
    total
}

/// `ln(n!·Q[π,G,Ḡ]/P[G,Ḡ])`, evaluated both as a per-pair product and in closed form.
/// The two must agree; the closed form is returned.
pub fn log_likelihood_ratio(
    pi: &Bijection,
    g: &Graph,
    g_bar: &Graph,
    consts: &LikelihoodConstants,
) -> Result<f64, InferenceError> {
    if g.n() != g_bar.n() || g.n() != pi.n() {
        return Err(ModelError::SizeMismatch(g.n(), if g.n() != g_bar.n() { g_bar.n() } else { pi.n() }).into());
    }
    let product = ln_ratio_product(pi, g, g_bar, consts);
    let closed = consts.ln_ratio(pi, g, g_bar);
    let agree = if closed.is_finite() && product.is_finite() {
        (product - closed).abs() <= LIKELIHOOD_TOL * closed.abs().max(1.0)
    } else {
        product == closed
    };
    if !agree {
        return Err(InferenceError::Inconsistent { product, closed });
    }
    Ok(closed)
}
