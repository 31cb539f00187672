//! Exponential moments of orbit edge counts and the quantities built on them.
//!
//! For an orbit of length `k`, `|ℰ_O|` is a sum of products `G_i Ḡ_{i+1}` of
//! neighbouring Bernoulli bits. Conditioning on the two boundary bits gives the
//! three sequences `a_m, b_m, c_m` (boundary `(0,0)`, `(1,1)`, `(0,1)`), which obey
//! a linear recurrence whose characteristic roots are `μ₁ ≥ μ₂`. Cycle moments
//! equal `μ₁ᵏ + μ₂ᵏ`; chain moments are another fixed combination of `a, b, c`.
//!
//! All evaluation is done in log space so that large `kθ` does not overflow.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelParams;
use crate::orbits::OrbitCensus;
use crate::rng::Rng;

/// Relative tolerance for the internal two-route consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("{what}: closed form {closed} disagrees with recurrence {recurrence}")]
    Inconsistent {
        what: &'static str,
        closed: f64,
        recurrence: f64,
    },
    #[error("polytope is empty: total capacity {capacity} below required {required}")]
    Infeasible { capacity: f64, required: f64 },
}

fn check_args(theta: f64, p: f64, s: f64) -> Result<(), MomentError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MomentError::InvalidArgs(format!("p = {p} not in (0,1)")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(MomentError::InvalidArgs(format!("s = {s} not in [0,1]")));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(MomentError::InvalidArgs(format!(
            "theta = {theta} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// `ln(x + y)` given `ln x` and `ln y`.
fn ln_add(lx: f64, ly: f64) -> f64 {
    if lx == f64::NEG_INFINITY {
        return ly;
    }
    if ly == f64::NEG_INFINITY {
        return lx;
    }
    let m = lx.max(ly);
    m + ((lx - m).exp() + (ly - m).exp()).ln()
}

/// Boundary-conditioned moments `a_m, b_m, c_m`, stored as logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRecurrence {
    pub m: usize,
    pub ln_a: f64,
    pub ln_b: f64,
    pub ln_c: f64,
}

impl ChainRecurrence {
    /// `(a_m, b_m, c_m)`; may overflow to infinity for very large `mθ`.
    pub fn values(&self) -> (f64, f64, f64) {
        (self.ln_a.exp(), self.ln_b.exp(), self.ln_c.exp())
    }

    /// `ln(w_a a + w_b b + w_c c)` for non-negative weights.
    fn ln_combination(&self, wa: f64, wb: f64, wc: f64) -> f64 {
        let m = self.ln_a.max(self.ln_b).max(self.ln_c);
        let sum = wa * (self.ln_a - m).exp() + wb * (self.ln_b - m).exp() + wc * (self.ln_c - m).exp();
        m + sum.ln()
    }
}

/// Runs the recurrence from `a₁ = 1, b₁ = e^θ, c₁ = 1` up to index `m`.
pub fn chain_recurrence(m: usize, theta: f64, p: f64, s: f64) -> Result<ChainRecurrence, MomentError> {
    check_args(theta, p, s)?;
    if m == 0 {
        return Err(MomentError::InvalidArgs("m must be ≥ 1".into()));
    }
    let ps = p * s;
    let et = theta.exp();
    let q00 = 1.0 - 2.0 * ps + ps * s;
    // Values are kept normalized by their maximum, with the scale in `ln_scale`.
    let (mut a, mut b, mut c) = (1.0, et, 1.0);
    let mut ln_scale = 0.0;
    for _ in 1..m {
        let na = ps * c + (1.0 - ps) * a;
        let nc = ps * b + (1.0 - ps) * c;
        let nb = ps * et * (s * b + (1.0 - s) * c) + (ps * (1.0 - s) * b + q00 * c);
        let top = na.max(nb).max(nc);
        a = na / top;
        b = nb / top;
        c = nc / top;
        ln_scale += top.ln();
    }
    Ok(ChainRecurrence {
        m,
        ln_a: ln_scale + a.ln(),
        ln_b: ln_scale + b.ln(),
        ln_c: ln_scale + c.ln(),
    })
}

/// Roots `μ₁ ≥ μ₂ ≥ 0` of `x² − (1 + ps²ν)x + (ps² − p²s²)ν`, `ν = e^θ − 1`.
pub fn char_roots(theta: f64, p: f64, s: f64) -> Result<(f64, f64), MomentError> {
    check_args(theta, p, s)?;
    let nu = theta.exp_m1();
    let trace = 1.0 + p * s * s * nu;
    let det = (p * s * s - p * p * s * s) * nu;
    let disc = trace * trace - 4.0 * det;
    assert!(disc >= -1e-12 * trace * trace, "negative discriminant {disc}");
    let mu1 = 0.5 * (trace + disc.max(0.0).sqrt());
    // Vieta avoids cancellation in the small root.
    let mu2 = if mu1 > 0.0 { det / mu1 } else { 0.0 };
    Ok((mu1, mu2))
}

/// `θ, ν, μ₁, μ₂` together with the chain coefficients `c₁, c₂` solving
/// `c₁μ₁ + c₂μ₂ = A₁`, `c₁μ₁² + c₂μ₂² = A₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCoefficients {
    pub theta: f64,
    pub nu: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl MomentCoefficients {
    pub fn new(theta: f64, p: f64, s: f64) -> Result<MomentCoefficients, MomentError> {
        let (mu1, mu2) = char_roots(theta, p, s)?;
        let nu = theta.exp_m1();
        let x = p * p * s * s * nu;
        let a1 = 1.0 + x;
        let a2 = 1.0 + 2.0 * x + p * p * p * s.powi(4) * nu * nu;
        let (c1, c2) = if mu2 <= f64::EPSILON * mu1 {
            (a1 / mu1, 0.0)
        } else {
            let gap = mu1 - mu2;
            ((a2 - mu2 * a1) / (mu1 * gap), (mu1 * a1 - a2) / (mu2 * gap))
        };
        Ok(MomentCoefficients {
            theta,
            nu,
            mu1,
            mu2,
            c1,
            c2,
        })
    }

    /// `ln(μ₁ᵏ + μ₂ᵏ)`.
    pub fn ln_trace(&self, k: usize) -> f64 {
        let k = k as f64;
        ln_add(k * self.mu1.ln(), k * self.mu2.ln())
    }

    /// `ln(c₁μ₁ᵏ + c₂μ₂ᵏ)`.
    pub fn ln_chain(&self, k: usize) -> f64 {
        let ratio = if self.mu2 > 0.0 {
            (self.mu2 / self.mu1).powi(k as i32)
        } else {
            0.0
        };
        k as f64 * self.mu1.ln() + (self.c1 + self.c2 * ratio).ln()
    }
}

/// Orbit classes entering the moment formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    Cycle,
    Chain,
}

impl OrbitClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitClass::Cycle => "cycle",
            OrbitClass::Chain => "chain",
        }
    }
}

/// Allowed gap between the two log routes: the relative tolerance, widened by the
/// rounding floor of a `k`-step product whose log has magnitude `|ln_value|`.
fn log_tolerance(ln_value: f64, k: usize) -> f64 {
    CONSISTENCY_TOL.max(64.0 * f64::EPSILON * (ln_value.abs() + k as f64))
}

/// `ln E exp(θ|ℰ_O|)` for a `k`-cycle, after checking `μ₁ᵏ + μ₂ᵏ` against the `a/b/c` combination.
pub fn ln_cycle_moment(k: usize, theta: f64, p: f64, s: f64) -> Result<f64, MomentError> {
    let (closed, combo) = cycle_moment_routes(k, theta, p, s)?;
    // Relative agreement of the values is absolute agreement of the logarithms.
    if (closed - combo).abs() > log_tolerance(closed, k) {
        return Err(MomentError::Inconsistent {
            what: "cycle moment",
            closed,
            recurrence: combo,
        });
    }
    Ok(closed)
}

/// Both logarithmic routes for a `k`-cycle, unchecked: `ln(μ₁ᵏ + μ₂ᵏ)` and the `a/b/c` combination.
pub fn cycle_moment_routes(k: usize, theta: f64, p: f64, s: f64) -> Result<(f64, f64), MomentError> {
    let coef = MomentCoefficients::new(theta, p, s)?;
    let rec = chain_recurrence(k, theta, p, s)?;
    let ps = p * s;
    let combo = rec.ln_combination(1.0 - 2.0 * ps + ps * s, ps * s, 2.0 * ps * (1.0 - s));
    Ok((coef.ln_trace(k), combo))
}

pub fn cycle_moment(k: usize, theta: f64, p: f64, s: f64) -> Result<f64, MomentError> {
    ln_cycle_moment(k, theta, p, s).map(f64::exp)
}

/// `ln E exp(θ|ℰ_O|)` for a `k`-chain; the `a/b/c` combination is returned after
/// checking it against the coefficient form `c₁μ₁ᵏ + c₂μ₂ᵏ`.
pub fn ln_chain_moment(k: usize, theta: f64, p: f64, s: f64) -> Result<f64, MomentError> {
    let (closed, combo) = chain_moment_routes(k, theta, p, s)?;
    if (combo - closed).abs() > log_tolerance(closed, k) {
        return Err(MomentError::Inconsistent {
            what: "chain moment",
            closed,
            recurrence: combo,
        });
    }
    Ok(combo)
}

/// Both logarithmic routes for a `k`-chain, unchecked: `ln(c₁μ₁ᵏ + c₂μ₂ᵏ)` and the `a/b/c` combination.
pub fn chain_moment_routes(k: usize, theta: f64, p: f64, s: f64) -> Result<(f64, f64), MomentError> {
    let rec = chain_recurrence(k, theta, p, s)?;
    let coef = MomentCoefficients::new(theta, p, s)?;
    let ps = p * s;
    let combo = rec.ln_combination((1.0 - ps) * (1.0 - ps), ps * ps, 2.0 * ps * (1.0 - ps));
    Ok((coef.ln_chain(k), combo))
}

/// [`cycle_moment_routes`] or [`chain_moment_routes`] by class.
pub fn orbit_moment_routes(class: OrbitClass, k: usize, theta: f64, p: f64, s: f64) -> Result<(f64, f64), MomentError> {
    match class {
        OrbitClass::Cycle => cycle_moment_routes(k, theta, p, s),
        OrbitClass::Chain => chain_moment_routes(k, theta, p, s),
    }
}

pub fn chain_moment(k: usize, theta: f64, p: f64, s: f64) -> Result<f64, MomentError> {
    ln_chain_moment(k, theta, p, s).map(f64::exp)
}

pub fn orbit_moment(class: OrbitClass, k: usize, theta: f64, p: f64, s: f64) -> Result<f64, MomentError> {
    match class {
        OrbitClass::Cycle => cycle_moment(k, theta, p, s),
        OrbitClass::Chain => chain_moment(k, theta, p, s),
    }
}

/// Draws `|ℰ_O|` for an isolated orbit of length `k` by simulating its Bernoulli triples.
///
/// Edge `i` of the orbit is in the intersection graph when its own `G`-bit and the
/// `Ḡ`-bit of edge `i − 1` are both set. For a cycle the predecessor of edge 0 is
/// edge `k − 1`; for a chain it is an outside edge, whose `Ḡ`-bit is `Bern(ps)`.
pub fn simulate_orbit_edges(class: OrbitClass, k: usize, p: f64, s: f64, rng: &mut Rng) -> usize {
    let mut g = Vec::with_capacity(k);
    let mut g_bar = Vec::with_capacity(k);
    for _ in 0..k {
        let parent = rng.random_bool(p);
        g.push(parent && rng.random_bool(s));
        g_bar.push(parent && rng.random_bool(s));
    }
    let before_first = match class {
        OrbitClass::Cycle => g_bar[k - 1],
        OrbitClass::Chain => rng.random_bool(p * s),
    };
    (0..k)
        .filter(|&i| g[i] && if i == 0 { before_first } else { g_bar[i - 1] })
        .count()
}

/// `α_k = (k−1)/k` for `k ≤ N` and `α_{N+1} = min(α, N/(N+1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRateParams {
    pub alpha: f64,
    pub n_cutoff: usize,
    /// `alpha_k[k − 1]` for `k = 1..=N+1`.
    pub alpha_k: Vec<f64>,
}

impl TailRateParams {
    /// Short/long cutoff `N`: `⌊1/(1−α)⌋` for `α < 1`, `⌊1/(ρ−η−1)⌋ + 1` for `α = 1`.
    pub fn new(alpha: f64, rho_eta: Option<(f64, f64)>) -> Result<TailRateParams, MomentError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(MomentError::InvalidArgs(format!("alpha = {alpha} not in (0,1]")));
        }
        // Guard against 1/(1−α) landing just below an integer, e.g. α = 2/3.
        let n_cutoff = if alpha < 1.0 {
            (1.0 / (1.0 - alpha) + 1e-9).floor() as usize
        } else {
            let (rho, eta) = rho_eta.ok_or_else(|| MomentError::InvalidArgs("alpha = 1 needs rho and eta".into()))?;
            if rho - eta <= 1.0 {
                return Err(MomentError::InvalidArgs(format!(
                    "rho − eta = {} must exceed 1",
                    rho - eta
                )));
            }
            (1.0 / (rho - eta - 1.0) + 1e-9).floor() as usize + 1
        };
        Ok(TailRateParams::with_cutoff(alpha, n_cutoff))
    }

    pub fn with_cutoff(alpha: f64, n_cutoff: usize) -> TailRateParams {
        let big_n = n_cutoff as f64;
        let mut alpha_k: Vec<f64> = (1..=n_cutoff).map(|k| (k as f64 - 1.0) / k as f64).collect();
        alpha_k.push(alpha.min(big_n / (big_n + 1.0)));
        TailRateParams {
            alpha,
            n_cutoff,
            alpha_k,
        }
    }

    /// `α_k` for `1 ≤ k ≤ N + 1`.
    pub fn rate(&self, k: usize) -> f64 {
        self.alpha_k[k - 1]
    }

    pub fn long_rate(&self) -> f64 {
        self.alpha_k[self.n_cutoff]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    Special,
    ShortCycle(usize),
    Long,
}

/// The `θ` used for a class, before the non-negativity fallback.
pub fn tail_theta(class: TailClass, params: &ModelParams, rates: &TailRateParams) -> f64 {
    let ln_n = (params.n as f64).ln();
    let ln_lambda = params.lambda().ln();
    match class {
        TailClass::Special => ln_n - ln_n.ln(),
        TailClass::ShortCycle(k) => rates.rate(k) * ln_n - ln_lambda,
        TailClass::Long if rates.alpha < 1.0 => rates.alpha * ln_n,
        TailClass::Long => rates.long_rate() * ln_n - ln_lambda,
    }
}

/// Logarithm of the Markov bound `e^{−θx} E e^{θ E_class}` on `Q[E_class ≥ x | π*]`.
///
/// The moment generating function is the exact product over independent orbits of the
/// class. When the prescribed `θ` is negative the bound is taken at `θ = 0` (value 1).
pub fn ln_markov_tail_bound(
    class: TailClass,
    x: f64,
    census: &OrbitCensus,
    params: &ModelParams,
    rates: &TailRateParams,
) -> Result<f64, MomentError> {
    if let TailClass::ShortCycle(k) = class {
        if k == 0 || k > rates.n_cutoff {
            return Err(MomentError::InvalidArgs(format!(
                "short cycle length {k} outside 1..={}",
                rates.n_cutoff
            )));
        }
    }
    let theta = tail_theta(class, params, rates);
    if !(theta > 0.0) {
        return Ok(0.0);
    }
    let (p, s) = (params.p, params.s);
    let coef = MomentCoefficients::new(theta, p, s)?;
    let mut ln_mgf = 0.0;
    match class {
        TailClass::Special => {
            for (&k, &count) in &census.special {
                ln_mgf += count as f64 * coef.ln_trace(k);
            }
        }
        TailClass::ShortCycle(k) => {
            ln_mgf += census.cycle_count(k) as f64 * ln_cycle_moment(k, theta, p, s)?;
        }
        TailClass::Long => {
            for (&k, &count) in census.cycles.range(rates.n_cutoff + 1..) {
                ln_mgf += count as f64 * ln_cycle_moment(k, theta, p, s)?;
            }
            for (&k, &count) in &census.chains {
                ln_mgf += count as f64 * ln_chain_moment(k, theta, p, s)?;
            }
        }
    }
    Ok(ln_mgf - theta * x)
}

pub fn markov_tail_bound(
    class: TailClass,
    x: f64,
    census: &OrbitCensus,
    params: &ModelParams,
    rates: &TailRateParams,
) -> Result<f64, MomentError> {
    ln_markov_tail_bound(class, x, census, params, rates).map(f64::exp)
}

/// A point `(x₀, …, x_{N+1})` of the relaxed polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopePoint {
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimumResult {
    pub value: f64,
    pub minimizer: PolytopePoint,
}

/// Bounds shared by the relaxation and lattice searches.
#[derive(Clone, Debug)]
pub struct PolytopeBounds {
    /// Per-coordinate box `ρT`.
    pub upper: f64,
    /// Required total `(ρ−η)T`.
    pub demand: f64,
    /// Prefix caps `(ρ+η)Σ_{k≤m} k n_k` for `m = 1..=N`.
    pub prefix_caps: Vec<f64>,
}

impl PolytopeBounds {
    pub fn new(t: usize, ns: &[usize], rho: f64, eta: f64) -> PolytopeBounds {
        let t = t as f64;
        let mut acc = 0.0;
        let prefix_caps = ns
            .iter()
            .enumerate()
            .map(|(i, &nk)| {
                acc += ((i + 1) * nk) as f64;
                (rho + eta) * acc
            })
            .collect();
        PolytopeBounds {
            upper: rho * t,
            demand: (rho - eta) * t,
            prefix_caps,
        }
    }
}

fn check_minimum_args(t: usize, ns: &[usize], rho: f64, eta: f64, alpha: f64) -> Result<(), MomentError> {
    let weighted: usize = ns.iter().enumerate().map(|(i, &nk)| (i + 1) * nk).sum();
    if weighted > t {
        return Err(MomentError::InvalidArgs(format!(
            "Σ k n_k = {weighted} exceeds T = {t}"
        )));
    }
    if !(rho > 1.0 && eta >= 0.0 && eta < rho) {
        return Err(MomentError::InvalidArgs(format!(
            "need rho > 1 and 0 ≤ eta < rho (rho = {rho}, eta = {eta})"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MomentError::InvalidArgs(format!("alpha = {alpha} not in (0,1]")));
    }
    Ok(())
}

/// `M(T, n₁..n_N)` over the real relaxation of `Σ_T ∩ Δ`, with `N = ns.len()`.
///
/// The prefix caps are nested, so the feasible region is a polymatroid intersected with a
/// box, and filling coordinates greedily in order of increasing cost is optimal. Each
/// coordinate `x_k` with `k ≤ N` can grow until the tightest cap among prefixes `m ≥ k`
/// binds; `x_{N+1}` and `x₀` are limited by the box `ρT` only.
pub fn combinatorial_minimum(
    t: usize,
    ns: &[usize],
    rho: f64,
    eta: f64,
    alpha: f64,
) -> Result<MinimumResult, MomentError> {
    check_minimum_args(t, ns, rho, eta, alpha)?;
    let big_n = ns.len();
    let rates = TailRateParams::with_cutoff(alpha, big_n);
    let bounds = PolytopeBounds::new(t, ns, rho, eta);
    let cost = |k: usize| if k == 0 { 1.0 } else { rates.rate(k) };
    let mut order: Vec<usize> = (0..big_n + 2).collect();
    // stable sort keeps lower indices first among equal costs
    order.sort_by(|&a, &b| cost(a).total_cmp(&cost(b)));
    let mut x = vec![0.0; big_n + 2];
    let mut remaining = bounds.demand;
    for k in order {
        if remaining <= 0.0 {
            break;
        }
        let mut room = bounds.upper;
        if (1..=big_n).contains(&k) {
            for m in k..=big_n {
                let used: f64 = x[1..=m].iter().sum();
                room = room.min(bounds.prefix_caps[m - 1] - used);
            }
        }
        let take = remaining.min(room).max(0.0);
        x[k] = take;
        remaining -= take;
    }
    if remaining > 1e-9 * bounds.demand.max(1.0) {
        return Err(MomentError::Infeasible {
            capacity: bounds.demand - remaining,
            required: bounds.demand,
        });
    }
    let objective = x[0] + (1..=big_n + 1).map(|k| rates.rate(k) * x[k]).sum::<f64>();
    let value = ns.iter().sum::<usize>() as f64 - t as f64 + objective;
    Ok(MinimumResult {
        value,
        minimizer: PolytopePoint { x },
    })
}

/// Closed-form lower bound `[α_{N+1}(ρ−η)−1]T − Σ_k [α_{N+1}(ρ+η)k − (k−1)(ρ+η) − 1] n_k` on `M`.
pub fn minimum_lower_bound(t: usize, ns: &[usize], rho: f64, eta: f64, alpha: f64) -> f64 {
    let rates = TailRateParams::with_cutoff(alpha, ns.len());
    let a = rates.long_rate();
    let mut bound = (a * (rho - eta) - 1.0) * t as f64;
    for (i, &nk) in ns.iter().enumerate() {
        let k = (i + 1) as f64;
        bound -= (a * (rho + eta) * k - (k - 1.0) * (rho + eta) - 1.0) * nk as f64;
    }
    bound
}

/// The rate `δ₀` below which `M ≥ δ₀T` is guaranteed when `T ≥ c_λ n` and `n₁ ≤ δn`:
/// `min(α_{N+1}(ρ−η) − 1, (ρ−4η−1)/2) − (ρ+η)δ/c_λ`.
pub fn minimum_rate_delta0(rho: f64, eta: f64, rates: &TailRateParams, c_lambda: f64, delta: f64) -> f64 {
    let slack = (rho + eta) * delta / c_lambda;
    let first = rates.long_rate() * (rho - eta) - 1.0 - slack;
    let second = (rho - 4.0 * eta - 1.0) / 2.0 - slack;
    first.min(second)
}

/// `ln[n(n−1)⋯(n−T+1) / Π_k k^{n_k} n_k!]`.
pub fn permutation_count_bound(n: usize, t: usize, ns: &[usize]) -> Result<f64, MomentError> {
    let weighted: usize = ns.iter().enumerate().map(|(i, &nk)| (i + 1) * nk).sum();
    if weighted > t || t > n {
        return Err(MomentError::InvalidArgs(format!(
            "need Σ k n_k ≤ T ≤ n (Σ = {weighted}, T = {t}, n = {n})"
        )));
    }
    let ln_fact = |m: usize| (2..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let falling: f64 = (n - t + 1..=n).map(|i| (i as f64).ln()).sum();
    let denom: f64 = ns
        .iter()
        .enumerate()
        .map(|(i, &nk)| nk as f64 * ((i + 1) as f64).ln() + ln_fact(nk))
        .sum();
    Ok(falling - denom)
}
