//! Admissibility of an intersection graph (five truncation conditions) and good sets.
//!
//! All asymptotic thresholds are instantiated as explicit caps in
//! [`AdmissibilityConstants`], which tests may override. Searches that can blow up
//! (small dense subsets, connected sets, cycle counts) run under a step budget and
//! report [`Status::Undecided`] instead of passing when the budget runs out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::densest_subgraph_exact;
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdmissibilityError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("constraint system infeasible: {0}")]
    Infeasible(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityConstants {
    pub n: usize,
    pub alpha: f64,
    /// Global density cap for condition (i).
    pub xi: f64,
    /// Density cap for small sets, condition (ii).
    pub zeta: f64,
    pub beta: f64,
    /// Good-set distance parameter `C`.
    pub c_big: usize,
    pub delta1: f64,
    /// Target good-set size `⌊n^β⌋`.
    pub k_good: usize,
    /// Condition (iii) holds when the maximum degree is strictly below this.
    pub degree_cap: usize,
    pub small_set_cap: usize,
    pub tiny_component_cap: usize,
    pub cycle_len_cap: usize,
    /// Step budget for each enumerative search.
    pub search_budget: u64,
}

pub const DEFAULT_CYCLE_LEN_CAP: usize = 12;
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;

impl AdmissibilityConstants {
    /// Constants for exponent `α ∈ (0,1)` and density estimate `ρ̂ ≥ 1`.
    ///
    /// `ξ = (ρ̂ + 1/α)/2`; `ζ` is the smallest point of the grid `1 + j·10⁻ᵈ` (coarsest `d`
    /// first, `d ≤ 6`) inside its feasible interval `(1, min(2, 1/α))`;
    /// `β` is the midpoint of `((1−α) ∨ (1+ζ(α−1))/(2−ζ), 1)`; `C` is the smallest integer
    /// with `α(ξ + 1/C) < 1`; `δ₁` is half of `(1−αξ) ∧ β/C`.
    pub fn default_for(alpha: f64, rho_hat: f64, n: usize) -> Result<AdmissibilityConstants, AdmissibilityError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AdmissibilityError::InvalidArgs(format!("alpha = {alpha} not in (0,1)")));
        }
        if !(rho_hat >= 1.0) {
            return Err(AdmissibilityError::InvalidArgs(format!("rho_hat = {rho_hat} < 1")));
        }
        if n < 3 {
            return Err(AdmissibilityError::InvalidArgs(format!("n = {n} < 3")));
        }
        let inv_alpha = 1.0 / alpha;
        let xi = (rho_hat + inv_alpha) / 2.0;
        if xi >= inv_alpha {
            return Err(AdmissibilityError::Infeasible(format!(
                "xi = {xi} ≥ 1/alpha = {inv_alpha}: density estimate above the threshold regime"
            )));
        }
        let zeta = zeta_grid_point(alpha)?;
        let beta_low = (1.0 - alpha).max((1.0 + zeta * (alpha - 1.0)) / (2.0 - zeta));
        if beta_low >= 1.0 {
            return Err(AdmissibilityError::Infeasible(format!(
                "beta interval ({beta_low}, 1) empty"
            )));
        }
        let beta = (beta_low + 1.0) / 2.0;
        let mut c_big = (1.0 / (inv_alpha - xi)).floor() as usize + 1;
        while alpha * (xi + 1.0 / c_big as f64) >= 1.0 {
            c_big += 1;
        }
        while c_big > 1 && alpha * (xi + 1.0 / (c_big - 1) as f64) < 1.0 {
            c_big -= 1;
        }
        let delta1 = 0.5 * (1.0 - alpha * xi).min(beta / c_big as f64);
        let ln_n = (n as f64).ln();
        Ok(AdmissibilityConstants {
            n,
            alpha,
            xi,
            zeta,
            beta,
            c_big,
            delta1,
            k_good: (n as f64).powf(beta).floor() as usize,
            degree_cap: ln_n.ceil() as usize,
            small_set_cap: (n as f64 / ln_n).floor() as usize,
            tiny_component_cap: ln_n.ln().ceil().max(1.0) as usize,
            cycle_len_cap: DEFAULT_CYCLE_LEN_CAP,
            search_budget: DEFAULT_SEARCH_BUDGET,
        })
    }

    /// Caps loose enough that every graph on `n` vertices is admissible.
    pub fn permissive(n: usize) -> AdmissibilityConstants {
        AdmissibilityConstants {
            n,
            alpha: 0.5,
            xi: n as f64,
            zeta: n as f64,
            beta: 0.5,
            c_big: 1,
            delta1: 1.0,
            k_good: 1,
            degree_cap: n + 1,
            small_set_cap: n,
            tiny_component_cap: 0,
            cycle_len_cap: n.max(3),
            search_budget: u64::MAX,
        }
    }

    /// `⌈n^{δ₁k}⌉`, the cap on the number of `k`-cycles.
    pub fn cycle_cap(&self, k: usize) -> u64 {
        (self.n as f64).powf(self.delta1 * k as f64).ceil() as u64
    }

    /// Checks the defining inequalities; `ξ < 1/α` is part of the regime assumption.
    pub fn validate(&self) -> Result<(), AdmissibilityError> {
        let a = self.alpha;
        let checks = [
            (self.xi < 1.0 / a, "xi < 1/alpha"),
            (self.zeta > 1.0, "zeta > 1"),
            (
                1.0 + self.zeta * (a - 1.0) < 2.0 - self.zeta,
                "1 + zeta(alpha − 1) < 2 − zeta",
            ),
            (
                self.beta > (1.0 - a).max((1.0 + self.zeta * (a - 1.0)) / (2.0 - self.zeta)) && self.beta < 1.0,
                "beta in its interval",
            ),
            (a * (self.xi + 1.0 / self.c_big as f64) < 1.0, "alpha(xi + 1/C) < 1"),
            (
                self.delta1 > 0.0 && self.delta1 < (1.0 - a * self.xi).min(self.beta / self.c_big as f64),
                "0 < delta1 < (1 − alpha xi) ∧ beta/C",
            ),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(AdmissibilityError::Infeasible(what.into()));
            }
        }
        Ok(())
    }
}

/// Smallest grid value `ζ > 1` with `1 + ζ(α−1) < 2 − ζ` and `ζ < 2` (so that the `β`
/// interval is defined). The grid is refined tenfold until a point fits.
pub fn zeta_grid_point(alpha: f64) -> Result<f64, AdmissibilityError> {
    let feasible = |z: f64| 1.0 + z * (alpha - 1.0) < 2.0 - z && z < 2.0;
    for digits in 2..=6 {
        let step = 10f64.powi(-digits);
        if feasible(1.0 + step) {
            return Ok(1.0 + step);
        }
    }
    Err(AdmissibilityError::Infeasible(format!(
        "no zeta grid point fits alpha = {alpha}"
    )))
}

pub fn default_constants(alpha: f64, rho_hat: f64, n: usize) -> Result<AdmissibilityConstants, AdmissibilityError> {
    AdmissibilityConstants::default_for(alpha, rho_hat, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    GlobalDensity,
    SmallSetDensity,
    MaxDegree,
    LocalUnicyclic,
    CycleCounts,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::GlobalDensity,
        Condition::SmallSetDensity,
        Condition::MaxDegree,
        Condition::LocalUnicyclic,
        Condition::CycleCounts,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Witness {
    Subset { vertices: Vec<usize>, edges: usize },
    Vertex { vertex: usize, degree: usize },
    CycleCount { length: usize, count: u64, cap: u64 },
    BudgetExhausted { steps: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub status: Status,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub conditions: Vec<ConditionReport>,
}

impl AdmissibilityReport {
    /// `Some(true)` if all pass, `Some(false)` if any fails, `None` otherwise.
    pub fn admissible(&self) -> Option<bool> {
        if self.conditions.iter().any(|c| c.status == Status::Fail) {
            Some(false)
        } else if self.conditions.iter().all(|c| c.status == Status::Pass) {
            Some(true)
        } else {
            None
        }
    }

    /// Strict reading: undecided counts as not admissible.
    pub fn is_admissible(&self) -> bool {
        self.admissible() == Some(true)
    }

    pub fn get(&self, c: Condition) -> &ConditionReport {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .expect("all conditions reported")
    }

    /// Re-evaluates each failing condition on its witness; true when every witness reproduces its failure.
    pub fn witnesses_revalidate(&self, h: &Graph, consts: &AdmissibilityConstants) -> bool {
        self.conditions
            .iter()
            .filter(|r| r.status == Status::Fail)
            .all(|r| witness_violates(h, consts, r.condition, r.witness.as_ref()))
    }
}

fn witness_violates(h: &Graph, consts: &AdmissibilityConstants, cond: Condition, w: Option<&Witness>) -> bool {
    match (cond, w) {
        (Condition::GlobalDensity, Some(Witness::Subset { vertices, .. })) => {
            !vertices.is_empty() && h.induced_edge_count(vertices) as f64 > consts.xi * vertices.len() as f64
        }
        (Condition::SmallSetDensity, Some(Witness::Subset { vertices, .. })) => {
            !vertices.is_empty()
                && vertices.len() <= consts.small_set_cap
                && h.induced_edge_count(vertices) as f64 > consts.zeta * vertices.len() as f64
        }
        (Condition::MaxDegree, Some(Witness::Vertex { vertex, .. })) => h.degree(*vertex) >= consts.degree_cap,
        (Condition::LocalUnicyclic, Some(Witness::Subset { vertices, .. })) => {
            vertices.len() <= consts.tiny_component_cap
                && h.is_connected_set(vertices)
                && h.induced_edge_count(vertices) > vertices.len()
        }
        (Condition::CycleCounts, Some(Witness::CycleCount { length, .. })) => {
            let cap = consts.cycle_cap(*length);
            match count_cycles_of_length(h, *length, u64::MAX, cap) {
                CycleCount::Counted(c) => c > cap,
                CycleCount::Budget(_) => false,
            }
        }
        _ => false,
    }
}

/// Runs conditions (i)–(v) on `h`.
pub fn check_admissible(h: &Graph, consts: &AdmissibilityConstants) -> AdmissibilityReport {
    let densest = if h.n() > 0 {
        densest_subgraph_exact(h).ok()
    } else {
        None
    };
    let mut conditions = Vec::with_capacity(5);

    // (i)
    conditions.push(match &densest {
        Some(d) if d.density_f64() > consts.xi && d.witness_edges as f64 > consts.xi * d.best_subset.len() as f64 => {
            ConditionReport {
                condition: Condition::GlobalDensity,
                status: Status::Fail,
                witness: Some(Witness::Subset {
                    vertices: d.best_subset.clone(),
                    edges: d.witness_edges,
                }),
            }
        }
        _ => pass(Condition::GlobalDensity),
    });

    // (ii)
    conditions.push(check_small_sets(
        h,
        consts,
        densest.as_ref().map(|d| d.density_f64()).unwrap_or(0.0),
    ));

    // (iii)
    let worst = (0..h.n()).max_by_key(|&v| (h.degree(v), std::cmp::Reverse(v)));
    conditions.push(match worst {
        Some(v) if h.degree(v) >= consts.degree_cap => ConditionReport {
            condition: Condition::MaxDegree,
            status: Status::Fail,
            witness: Some(Witness::Vertex {
                vertex: v,
                degree: h.degree(v),
            }),
        },
        _ => pass(Condition::MaxDegree),
    });

    // (iv): a minimal connected set with more edges than vertices lies in the 2-core.
    let core2 = h.mask_of(&h.k_core(2));
    conditions.push(
        match connected_set_search(h, &core2, consts.tiny_component_cap, consts.search_budget, |e, k| e > k) {
            SearchOutcome::Found(set) => ConditionReport {
                condition: Condition::LocalUnicyclic,
                status: Status::Fail,
                witness: Some(Witness::Subset {
                    edges: h.induced_edge_count(&set),
                    vertices: set,
                }),
            },
            SearchOutcome::Exhausted => pass(Condition::LocalUnicyclic),
            SearchOutcome::Budget(steps) => undecided(Condition::LocalUnicyclic, steps),
        },
    );

    // (v)
    conditions.push(check_cycle_counts(h, consts));

    AdmissibilityReport { conditions }
}

fn pass(condition: Condition) -> ConditionReport {
    ConditionReport {
        condition,
        status: Status::Pass,
        witness: None,
    }
}

fn undecided(condition: Condition, steps: u64) -> ConditionReport {
    ConditionReport {
        condition,
        status: Status::Undecided,
        witness: Some(Witness::BudgetExhausted { steps }),
    }
}

fn subset_fail(condition: Condition, h: &Graph, vertices: Vec<usize>) -> ConditionReport {
    ConditionReport {
        condition,
        status: Status::Fail,
        witness: Some(Witness::Subset {
            edges: h.induced_edge_count(&vertices),
            vertices,
        }),
    }
}

/// Condition (ii). A smallest violator `A` (`|E(A)| > ζ|A|`) is connected and each of its
/// vertices has inner degree `> ζ`, so it sits in one component of the `(⌊ζ⌋+1)`-core.
fn check_small_sets(h: &Graph, consts: &AdmissibilityConstants, global_density: f64) -> ConditionReport {
    let cond = Condition::SmallSetDensity;
    if global_density <= consts.zeta || consts.small_set_cap == 0 {
        return pass(cond);
    }
    let zeta = consts.zeta;
    let violates = |e: usize, k: usize| e as f64 > zeta * k as f64;
    let core = h.k_core(zeta.floor() as usize + 1);
    let mask = h.mask_of(&core);
    let mut steps_used = 0u64;
    let mut undecided_steps = None;
    for comp in h.components_within(&mask) {
        let sub = h.induced_subgraph(&comp);
        let Ok(d) = densest_subgraph_exact(&sub) else {
            continue;
        };
        if d.density_f64() <= zeta {
            continue;
        }
        let lift = |local: &[usize]| -> Vec<usize> {
            let mut v: Vec<usize> = local.iter().map(|&i| comp[i]).collect();
            v.sort_unstable();
            v
        };
        if d.best_subset.len() <= consts.small_set_cap {
            return subset_fail(cond, h, lift(&d.best_subset));
        }
        // Cheap attempt: suffixes of the min-degree peeling of the component.
        let peel = crate::density::peel_min_degree(&sub, &vec![true; sub.n()]);
        let k = sub.n();
        for i in k.saturating_sub(consts.small_set_cap)..k {
            if violates(peel.edges_left[i], k - i) {
                return subset_fail(cond, h, lift(&peel.remaining(i)));
            }
        }
        let budget = consts.search_budget.saturating_sub(steps_used);
        let comp_mask = vec![true; sub.n()];
        match connected_set_search(&sub, &comp_mask, consts.small_set_cap, budget, violates) {
            SearchOutcome::Found(set) => return subset_fail(cond, h, lift(&set)),
            SearchOutcome::Exhausted => {}
            SearchOutcome::Budget(steps) => {
                steps_used += steps;
                undecided_steps = Some(steps_used);
            }
        }
    }
    match undecided_steps {
        Some(steps) => undecided(cond, steps),
        None => pass(cond),
    }
}

fn check_cycle_counts(h: &Graph, consts: &AdmissibilityConstants) -> ConditionReport {
    let cond = Condition::CycleCounts;
    let mut undecided_steps = None;
    for k in 3..=consts.cycle_len_cap.min(h.n()) {
        let cap = consts.cycle_cap(k);
        match count_cycles_of_length(h, k, consts.search_budget, cap) {
            CycleCount::Counted(c) if c > cap => {
                return ConditionReport {
                    condition: cond,
                    status: Status::Fail,
                    witness: Some(Witness::CycleCount {
                        length: k,
                        count: c,
                        cap,
                    }),
                };
            }
            CycleCount::Counted(_) => {}
            CycleCount::Budget(steps) => undecided_steps = Some(steps),
        }
    }
    match undecided_steps {
        Some(steps) => undecided(cond, steps),
        None => pass(cond),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Vec<usize>),
    Exhausted,
    Budget(u64),
}

/// Enumerates connected vertex sets of size ≤ `max_size` inside `mask`, each exactly once,
/// and returns the first one with `pred(edges, size)`.
pub fn connected_set_search<F>(g: &Graph, mask: &[bool], max_size: usize, budget: u64, pred: F) -> SearchOutcome
where
    F: Fn(usize, usize) -> bool,
{
    struct Esu<'a, F> {
        g: &'a Graph,
        mask: &'a [bool],
        max_size: usize,
        budget: u64,
        steps: u64,
        pred: F,
        /// Number of members of `sub` in the closed neighbourhood of each vertex.
        touch: Vec<u32>,
        sub: Vec<usize>,
        edges: usize,
    }

    impl<F: Fn(usize, usize) -> bool> Esu<'_, F> {
        fn add(&mut self, w: usize) {
            self.edges += self.g.neighbors(w).filter(|u| self.sub.contains(u)).count();
            self.sub.push(w);
            self.touch[w] += 1;
            for u in self.g.neighbors(w) {
                self.touch[u] += 1;
            }
        }

        fn remove(&mut self) {
            let w = self.sub.pop().expect("nonempty");
            self.touch[w] -= 1;
            for u in self.g.neighbors(w) {
                self.touch[u] -= 1;
            }
            self.edges -= self.g.neighbors(w).filter(|u| self.sub.contains(u)).count();
        }

        /// Returns `Some(true)` when found, `Some(false)` when out of budget.
        fn extend(&mut self, root: usize, mut ext: Vec<usize>) -> Option<bool> {
            self.steps += 1;
            if self.steps > self.budget {
                return Some(false);
            }
            if (self.pred)(self.edges, self.sub.len()) {
                return Some(true);
            }
            if self.sub.len() == self.max_size {
                return None;
            }
            while let Some(w) = ext.pop() {
                let mut next = ext.clone();
                for u in self.g.neighbors(w) {
                    if u > root && self.mask[u] && self.touch[u] == 0 {
                        next.push(u);
                    }
                }
                self.add(w);
                let r = self.extend(root, next);
                if r.is_some() {
                    return r;
                }
                self.remove();
            }
            None
        }
    }

    if max_size == 0 {
        return SearchOutcome::Exhausted;
    }
    let mut esu = Esu {
        g,
        mask,
        max_size,
        budget,
        steps: 0,
        pred,
        touch: vec![0; g.n()],
        sub: Vec::new(),
        edges: 0,
    };
    for root in (0..g.n()).filter(|&v| mask[v]) {
        esu.add(root);
        let ext: Vec<usize> = g.neighbors(root).filter(|&u| u > root && mask[u]).collect();
        match esu.extend(root, ext) {
            Some(true) => {
                let mut set = esu.sub.clone();
                set.sort_unstable();
                return SearchOutcome::Found(set);
            }
            Some(false) => return SearchOutcome::Budget(esu.steps),
            None => {}
        }
        esu.remove();
    }
    SearchOutcome::Exhausted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleCount {
    Counted(u64),
    Budget(u64),
}

/// Calls `visit(cycle)` for every simple cycle of length `3..=max_len` once, rooted at its
/// smallest vertex and oriented so that the second vertex is below the last. Returns the
/// number of DFS steps, or `Err(steps)` if `budget` ran out; `visit` returning false stops early.
pub fn for_each_short_cycle<F>(g: &Graph, max_len: usize, budget: u64, mut visit: F) -> Result<u64, u64>
where
    F: FnMut(&[usize]) -> bool,
{
    fn dfs<F: FnMut(&[usize]) -> bool>(
        g: &Graph,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        max_len: usize,
        steps: &mut u64,
        budget: u64,
        visit: &mut F,
    ) -> Result<bool, ()> {
        let root = path[0];
        let v = *path.last().expect("nonempty");
        for w in g.neighbors(v) {
            *steps += 1;
            if *steps > budget {
                return Err(());
            }
            if w == root && path.len() >= 3 && path[1] < v {
                if !visit(path) {
                    return Ok(false);
                }
            } else if w > root && !on_path[w] && path.len() < max_len {
                path.push(w);
                on_path[w] = true;
                let go_on = dfs(g, path, on_path, max_len, steps, budget, visit);
                on_path[w] = false;
                path.pop();
                if !go_on? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    let core = g.k_core(2);
    let mut on_path = vec![false; g.n()];
    let mut in_core = vec![false; g.n()];
    for &v in &core {
        in_core[v] = true;
    }
    let mut steps = 0u64;
    for &root in &core {
        let mut path = vec![root];
        on_path[root] = true;
        let r = dfs(g, &mut path, &mut on_path, max_len, &mut steps, budget, &mut visit);
        on_path[root] = false;
        match r {
            Err(()) => return Err(steps),
            Ok(false) => return Ok(steps),
            Ok(true) => {}
        }
    }
    Ok(steps)
}

/// Number of simple `k`-cycles, stopping early once the count exceeds `stop_above`.
pub fn count_cycles_of_length(g: &Graph, k: usize, budget: u64, stop_above: u64) -> CycleCount {
    let mut count = 0u64;
    let r = for_each_short_cycle(g, k, budget, |c| {
        if c.len() == k {
            count += 1;
        }
        count <= stop_above
    });
    match r {
        Ok(_) => CycleCount::Counted(count),
        Err(steps) => CycleCount::Budget(steps),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum GoodSetViolation {
    TooClose {
        u: usize,
        v: usize,
        distance: usize,
    },
    NearCycle {
        vertex: usize,
        cycle: Vec<usize>,
        distance: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetCheck {
    pub good: bool,
    pub violation: Option<GoodSetViolation>,
}

/// Short cycles (length ≤ `c_big`) and, for each vertex on one, the index of such a cycle.
fn short_cycles(h: &Graph, c_big: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut cycles = Vec::new();
    let mut owner = vec![usize::MAX; h.n()];
    if c_big >= 3 {
        for_each_short_cycle(h, c_big, u64::MAX, |c| {
            let id = cycles.len();
            for &v in c {
                if owner[v] == usize::MAX {
                    owner[v] = id;
                }
            }
            cycles.push(c.to_vec());
            true
        })
        .expect("unbounded budget");
    }
    (cycles, owner)
}

/// Whether `a` is a good set: pairwise distances `> 2C+2`, and distance `> C` from every
/// cycle of length `≤ C`.
pub fn is_good_set(h: &Graph, a: &[usize], c_big: usize) -> GoodSetCheck {
    let reach = 2 * c_big + 2;
    let in_a = h.mask_of(a);
    for &u in a {
        let dist = h.bfs_distances(&[u], reach);
        if let Some(&v) = a.iter().find(|&&v| v != u && in_a[v] && dist[v] <= reach) {
            return GoodSetCheck {
                good: false,
                violation: Some(GoodSetViolation::TooClose {
                    u: u.min(v),
                    v: u.max(v),
                    distance: dist[v],
                }),
            };
        }
    }
    let (cycles, owner) = short_cycles(h, c_big);
    if !cycles.is_empty() {
        for &w in a {
            let dist = h.bfs_distances(&[w], c_big);
            let near = (0..h.n())
                .filter(|&x| owner[x] != usize::MAX && dist[x] <= c_big)
                .min_by_key(|&x| (dist[x], x));
            if let Some(x) = near {
                return GoodSetCheck {
                    good: false,
                    violation: Some(GoodSetViolation::NearCycle {
                        vertex: w,
                        cycle: cycles[owner[x]].clone(),
                        distance: dist[x],
                    }),
                };
            }
        }
    }
    GoodSetCheck {
        good: true,
        violation: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetResult {
    pub set: Vec<usize>,
    /// `k_target − |set|` when the greedy maximal good subset is too small.
    pub shortfall: usize,
}

/// Greedy good subset of `b`: drop vertices within distance `C` of a short cycle, then
/// scan `b` in ascending order adding each vertex whose `(2C+2)`-ball misses the chosen set.
pub fn find_good_set(h: &Graph, b: &[usize], k_target: usize, c_big: usize) -> GoodSetResult {
    let reach = 2 * c_big + 2;
    let (cycles, owner) = short_cycles(h, c_big);
    let mut near_cycle = vec![false; h.n()];
    if !cycles.is_empty() {
        let on_cycle: Vec<usize> = (0..h.n()).filter(|&v| owner[v] != usize::MAX).collect();
        let dist = h.bfs_distances(&on_cycle, c_big);
        for v in 0..h.n() {
            near_cycle[v] = dist[v] <= c_big;
        }
    }
    let mut candidates = b.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let mut blocked = vec![false; h.n()];
    let mut set = Vec::new();
    for v in candidates {
        if set.len() >= k_target {
            break;
        }
        if near_cycle[v] || blocked[v] {
            continue;
        }
        set.push(v);
        let dist = h.bfs_distances(&[v], reach);
        for (x, &d) in dist.iter().enumerate() {
            if d <= reach {
                blocked[x] = true;
            }
        }
    }
    GoodSetResult {
        shortfall: k_target.saturating_sub(set.len()),
        set,
    }
}
