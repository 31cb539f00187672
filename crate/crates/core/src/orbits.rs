//! Node cycles of `φ = π⁻¹∘π*` and the orbits of the induced edge map
//! `Φ(u, v) = (φ(u), φ(v))`, optionally restricted to pairs inside a vertex set `A`.
//!
//! Inside `A` an orbit is either a cycle (`Φ` returns to the first edge without
//! leaving `A`) or a maximal chain `e₁, …, e_k` with `Φ⁻¹(e₁) ∉ A` and `Φ(e_k) ∉ A`.
//! A cycle is *special* when its edges join antipodal vertices of an even node
//! cycle; such orbits have half the node-cycle length.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bijection::Bijection;
use crate::graph::{canonical, pair_count, pair_index};
use crate::model::{intersection_graph, CorrelatedSample, ModelError};

/// `φ = π⁻¹∘π*` as a permutation of `V`.
pub fn relative_permutation(pi_star: &Bijection, pi: &Bijection) -> Result<Bijection, ModelError> {
    if pi_star.n() != pi.n() {
        return Err(ModelError::SizeMismatch(pi_star.n(), pi.n()));
    }
    Ok(Bijection::new((0..pi.n()).map(|v| pi.apply_inverse(pi_star.apply(v))).collect()).expect("composition"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCycleDecomposition {
    /// Each cycle starts at its smallest vertex; cycles ordered by that vertex.
    pub cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
    position: Vec<usize>,
}

impl NodeCycleDecomposition {
    pub fn cycle_of(&self, v: usize) -> usize {
        self.cycle_of[v]
    }

    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn cycle_len_of(&self, v: usize) -> usize {
        self.cycles[self.cycle_of[v]].len()
    }

    /// Sorted multiset of cycle lengths.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    /// Whether `u` and `v` sit opposite each other on a common even cycle.
    pub fn antipodal(&self, u: usize, v: usize) -> bool {
        let c = self.cycle_of[u];
        if c != self.cycle_of[v] {
            return false;
        }
        let x = self.cycles[c].len();
        x.is_multiple_of(2) && (self.position[v] + x - self.position[u]) % x == x / 2
    }
}

pub fn node_cycles(phi: &Bijection) -> NodeCycleDecomposition {
    let n = phi.n();
    let mut cycle_of = vec![usize::MAX; n];
    let mut position = vec![0; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if cycle_of[start] != usize::MAX {
            continue;
        }
        let id = cycles.len();
        let mut cyc = Vec::new();
        let mut v = start;
        loop {
            cycle_of[v] = id;
            position[v] = cyc.len();
            cyc.push(v);
            v = phi.apply(v);
            if v == start {
                break;
            }
        }
        cycles.push(cyc);
    }
    NodeCycleDecomposition {
        cycles,
        cycle_of,
        position,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKind {
    Cycle,
    Chain,
}

impl OrbitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitKind::Cycle => "cycle",
            OrbitKind::Chain => "chain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrbit {
    /// `edges[i + 1] = Φ(edges[i])`; chains start at the edge whose preimage leaves `A`.
    pub edges: Vec<(usize, usize)>,
    pub kind: OrbitKind,
    pub special: bool,
}

impl EdgeOrbit {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Orbit counts by class and length: `S_k` (special cycles), `L_k` (other cycles), `T_k` (chains).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCensus {
    pub special: BTreeMap<usize, usize>,
    pub cycles: BTreeMap<usize, usize>,
    pub chains: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub length: usize,
    pub kind: OrbitKind,
    pub special: bool,
    pub count: usize,
}

impl OrbitCensus {
    fn record(&mut self, kind: OrbitKind, special: bool, len: usize) {
        let map = match (kind, special) {
            (OrbitKind::Cycle, true) => &mut self.special,
            (OrbitKind::Cycle, false) => &mut self.cycles,
            (OrbitKind::Chain, _) => &mut self.chains,
        };
        *map.entry(len).or_insert(0) += 1;
    }

    pub fn special_count(&self, k: usize) -> usize {
        self.special.get(&k).copied().unwrap_or(0)
    }

    pub fn cycle_count(&self, k: usize) -> usize {
        self.cycles.get(&k).copied().unwrap_or(0)
    }

    pub fn chain_count(&self, k: usize) -> usize {
        self.chains.get(&k).copied().unwrap_or(0)
    }

    /// `Σ_k k (S_k + L_k + T_k)`.
    pub fn total_edges(&self) -> usize {
        [&self.special, &self.cycles, &self.chains]
            .iter()
            .flat_map(|m| m.iter())
            .map(|(k, c)| k * c)
            .sum()
    }

    /// `Σ_k k S_k`.
    pub fn special_edges(&self) -> usize {
        self.special.iter().map(|(k, c)| k * c).sum()
    }

    /// Rows ordered by (length, kind, special).
    pub fn rows(&self) -> Vec<CensusRow> {
        let mut rows: Vec<CensusRow> = Vec::new();
        let classes = [
            (OrbitKind::Cycle, true, &self.special),
            (OrbitKind::Cycle, false, &self.cycles),
            (OrbitKind::Chain, false, &self.chains),
        ];
        for (kind, special, map) in classes {
            rows.extend(map.iter().map(|(&length, &count)| CensusRow {
                length,
                kind,
                special,
                count,
            }));
        }
        rows.sort_by_key(|r| (r.length, r.kind, r.special));
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub orbits: Vec<EdgeOrbit>,
    pub census: OrbitCensus,
}

struct OrbitWalker<'a> {
    n: usize,
    phi: &'a Bijection,
    in_a: Vec<bool>,
    nodes: NodeCycleDecomposition,
}

impl OrbitWalker<'_> {
    fn step(&self, (u, v): (usize, usize)) -> (usize, usize) {
        canonical(self.phi.apply(u), self.phi.apply(v))
    }

    fn step_back(&self, (u, v): (usize, usize)) -> (usize, usize) {
        canonical(self.phi.apply_inverse(u), self.phi.apply_inverse(v))
    }

    fn inside(&self, (u, v): (usize, usize)) -> bool {
        self.in_a[u] && self.in_a[v]
    }

    /// Visits every orbit of `(E₀)_A` once, in order of its smallest-indexed member.
    fn for_each_orbit<F: FnMut(&[(usize, usize)], OrbitKind, bool)>(&self, members: &[usize], mut f: F) {
        let mut visited = vec![false; pair_count(self.n)];
        let mut buf = Vec::new();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                let e = (u, v);
                if visited[pair_index(self.n, u, v)] {
                    continue;
                }
                let mut start = e;
                let kind = loop {
                    let prev = self.step_back(start);
                    if !self.inside(prev) {
                        break OrbitKind::Chain;
                    }
                    if prev == e {
                        start = e;
                        break OrbitKind::Cycle;
                    }
                    start = prev;
                };
                buf.clear();
                let mut cur = start;
                loop {
                    visited[pair_index(self.n, cur.0, cur.1)] = true;
                    buf.push(cur);
                    let next = self.step(cur);
                    if next == start || !self.inside(next) {
                        break;
                    }
                    cur = next;
                }
                let special = kind == OrbitKind::Cycle && self.nodes.antipodal(start.0, start.1);
                f(&buf, kind, special);
            }
        }
    }
}

fn walker<'a>(phi: &'a Bijection, a: &[usize]) -> (OrbitWalker<'a>, Vec<usize>) {
    let n = phi.n();
    let mut in_a = vec![false; n];
    for &v in a {
        in_a[v] = true;
    }
    let members: Vec<usize> = (0..n).filter(|&v| in_a[v]).collect();
    (
        OrbitWalker {
            n,
            phi,
            in_a,
            nodes: node_cycles(phi),
        },
        members,
    )
}

/// Orbits of `Φ` on all `C(n, 2)` pairs.
pub fn edge_orbits(pi_star: &Bijection, pi: &Bijection) -> Result<OrbitDecomposition, ModelError> {
    let all: Vec<usize> = (0..pi.n()).collect();
    restricted_orbits(pi_star, pi, &all)
}

/// Orbits of `Φ` restricted to pairs inside `a` (duplicates in `a` are ignored).
pub fn restricted_orbits(pi_star: &Bijection, pi: &Bijection, a: &[usize]) -> Result<OrbitDecomposition, ModelError> {
    let phi = relative_permutation(pi_star, pi)?;
    let (w, members) = walker(&phi, a);
    let mut orbits = Vec::new();
    let mut census = OrbitCensus::default();
    w.for_each_orbit(&members, |edges, kind, special| {
        census.record(kind, special, edges.len());
        orbits.push(EdgeOrbit {
            edges: edges.to_vec(),
            kind,
            special,
        });
    });
    Ok(OrbitDecomposition { orbits, census })
}

/// Census only, without storing orbit edge lists.
pub fn orbit_census(pi_star: &Bijection, pi: &Bijection, a: &[usize]) -> Result<OrbitCensus, ModelError> {
    let phi = relative_permutation(pi_star, pi)?;
    let (w, members) = walker(&phi, a);
    let mut census = OrbitCensus::default();
    w.for_each_orbit(&members, |edges, kind, special| {
        census.record(kind, special, edges.len())
    });
    Ok(census)
}

/// Intersection-graph edges inside `A` grouped by orbit class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitEdgeStats {
    /// `E_s`: edges on special cycles.
    pub e_special: usize,
    /// `E_k` for `k = 1..=N` at index `k − 1`: edges on non-special `k`-cycles.
    pub e_short: Vec<usize>,
    /// `E_{N+1}`: edges on chains and on non-special cycles longer than `N`.
    pub e_long: usize,
    pub n_cutoff: usize,
}

impl OrbitEdgeStats {
    pub fn total(&self) -> usize {
        self.e_special + self.e_short.iter().sum::<usize>() + self.e_long
    }
}

/// Counts the edges of `H_π` inside `a` by orbit class, with short/long cutoff `n_cutoff` (`N`).
pub fn orbit_edge_stats(
    sample: &CorrelatedSample,
    pi: &Bijection,
    a: &[usize],
    n_cutoff: usize,
) -> Result<OrbitEdgeStats, ModelError> {
    let h = intersection_graph(&sample.g, &sample.g_bar, pi)?;
    let phi = relative_permutation(&sample.pi_star, pi)?;
    let (w, members) = walker(&phi, a);
    let mut stats = OrbitEdgeStats {
        e_special: 0,
        e_short: vec![0; n_cutoff],
        e_long: 0,
        n_cutoff,
    };
    w.for_each_orbit(&members, |edges, kind, special| {
        let present = edges.iter().filter(|&&(u, v)| h.has_edge(u, v)).count();
        let k = edges.len();
        match (kind, special) {
            (OrbitKind::Cycle, true) => stats.e_special += present,
            (OrbitKind::Cycle, false) if k <= n_cutoff => stats.e_short[k - 1] += present,
            _ => stats.e_long += present,
        }
    });
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::model::ModelParams;
    use crate::rng::RandomSeed;
    use proptest::prelude::*;

    fn lcm(a: usize, b: usize) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        a / gcd(a, b) * b
    }

    #[test]
    fn node_cycle_examples() {
        assert_eq!(node_cycles(&Bijection::identity(6)).cycles.len(), 6);
        assert_eq!(node_cycles(&Bijection::cyclic_shift(6, 1)).cycle_type(), vec![6]);
        let p = Bijection::from_cycles(5, &[&[0, 1], &[2, 3, 4]]).unwrap();
        let d = node_cycles(&p);
        assert_eq!(d.cycles, vec![vec![0, 1], vec![2, 3, 4]]);
        let p = Bijection::from_cycles(6, &[&[0, 1], &[2, 3, 4]]).unwrap();
        assert_eq!(node_cycles(&p).cycle_type(), vec![1, 2, 3]);
    }

    #[test]
    fn aligned_matching_gives_fixed_edges() {
        let p = Bijection::random(7, &mut RandomSeed(2).rng());
        let d = edge_orbits(&p, &p).unwrap();
        assert_eq!(d.orbits.len(), 21);
        assert!(d
            .orbits
            .iter()
            .all(|o| o.len() == 1 && o.kind == OrbitKind::Cycle && !o.special));
    }

    #[test]
    fn five_cycle_splits_pairs_in_two() {
        // φ = π⁻¹∘π* with π* a 5-cycle and π = id
        let d = edge_orbits(&Bijection::cyclic_shift(5, 1), &Bijection::identity(5)).unwrap();
        assert_eq!(d.orbits.iter().map(EdgeOrbit::len).collect::<Vec<_>>(), vec![5, 5]);
        assert_eq!(d.census.cycle_count(5), 2);
    }

    #[test]
    fn cross_pairs_form_lcm_orbit() {
        let phi = Bijection::from_cycles(5, &[&[0, 1], &[2, 3, 4]]).unwrap();
        let d = edge_orbits(&phi, &Bijection::identity(5)).unwrap();
        let cross = d.orbits.iter().find(|o| o.edges.contains(&(0, 2))).unwrap();
        assert_eq!(cross.len(), 6);
        assert!(cross.edges.iter().all(|&(u, v)| u < 2 && v >= 2));
    }

    #[test]
    fn antipodal_pairs_form_special_cycle() {
        let phi = Bijection::from_cycles(6, &[&[0, 1, 2, 3]]).unwrap();
        let d = restricted_orbits(&phi, &Bijection::identity(6), &[0, 1, 2, 3]).unwrap();
        let o = d.orbits.iter().find(|o| o.edges.contains(&(0, 2))).unwrap();
        assert_eq!(o.edges, vec![(0, 2), (1, 3)]);
        assert!(o.special && o.kind == OrbitKind::Cycle);
        assert_eq!(d.census.special_count(2), 1);
        assert_eq!(d.census.cycle_count(4), 1);
    }

    #[test]
    fn chain_leaves_the_set() {
        let phi = Bijection::cyclic_shift(6, 1);
        let d = restricted_orbits(&phi, &Bijection::identity(6), &[0, 1, 2]).unwrap();
        let o = d.orbits.iter().find(|o| o.edges.contains(&(0, 1))).unwrap();
        assert_eq!(o.kind, OrbitKind::Chain);
        assert_eq!(o.edges, vec![(0, 1), (1, 2)]);
        // (0,2) maps to (1,3) and comes from (0,5): a 1-chain
        assert_eq!(d.census.chain_count(1), 1);
        assert_eq!(d.census.chain_count(2), 1);
    }

    #[test]
    fn lcm_law_for_small_cycle_lengths() {
        for x in 1..=6 {
            for y in 1..=6 {
                let n = x + y;
                let first: Vec<usize> = (0..x).collect();
                let second: Vec<usize> = (x..n).collect();
                let phi = Bijection::from_cycles(n, &[&first, &second]).unwrap();
                let d = edge_orbits(&phi, &Bijection::identity(n)).unwrap();
                for o in &d.orbits {
                    let (u, v) = o.edges[0];
                    if (u < x) != (v < x) {
                        assert_eq!(o.len(), lcm(x, y), "x={x} y={y}");
                        assert_eq!(o.kind, OrbitKind::Cycle);
                    }
                }
            }
        }
    }

    #[test]
    fn stats_for_aligned_matching() {
        let params = ModelParams::new(12, 0.5, 0.8).unwrap();
        let smp = crate::model::sample_correlated(&params, RandomSeed(9)).unwrap();
        let a: Vec<usize> = (0..8).collect();
        let st = orbit_edge_stats(&smp, &smp.pi_star, &a, 2).unwrap();
        let h = intersection_graph(&smp.g, &smp.g_bar, &smp.pi_star).unwrap();
        assert_eq!(st.e_short[0], h.induced_edge_count(&a));
        assert_eq!((st.e_special, st.e_short[1], st.e_long), (0, 0, 0));
    }

    #[test]
    fn stats_count_a_present_special_cycle() {
        // π* = id, π⁻¹ = φ a 4-cycle on {0,1,2,3}; H_π contains the special orbit {(0,2),(1,3)}.
        let n = 8;
        let pi_star = Bijection::identity(n);
        let phi = Bijection::from_cycles(n, &[&[0, 1, 2, 3]]).unwrap();
        let pi = phi.inverse();
        let g = Graph::from_edges(n, [(0, 2), (1, 3)]).unwrap();
        let g_bar = crate::model::relabel(&g, &pi).unwrap();
        let params = ModelParams::new(n, 0.5, 0.5).unwrap();
        let smp = CorrelatedSample {
            params,
            pi_star,
            g,
            g_bar,
        };
        let all: Vec<usize> = (0..n).collect();
        let st = orbit_edge_stats(&smp, &pi, &all, 2).unwrap();
        assert_eq!(st.e_special, 2);
        assert_eq!(st.total(), 2);
    }

    #[test]
    fn census_rows_sorted() {
        let phi = Bijection::from_cycles(6, &[&[0, 1, 2, 3]]).unwrap();
        let d = edge_orbits(&phi, &Bijection::identity(6)).unwrap();
        let rows = d.census.rows();
        assert!(rows
            .windows(2)
            .all(|w| (w[0].length, w[0].kind) <= (w[1].length, w[1].kind)));
        assert_eq!(rows.iter().map(|r| r.length * r.count).sum::<usize>(), 15);
    }

    fn arb_instance() -> impl Strategy<Value = (Bijection, Bijection, Vec<usize>)> {
        (1usize..24).prop_flat_map(|n| {
            let perm = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
            (perm.clone(), perm, proptest::collection::vec(any::<bool>(), n)).prop_map(|(a, b, mask)| {
                let set = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
                (Bijection::new(a).unwrap(), Bijection::new(b).unwrap(), set)
            })
        })
    }

    proptest! {
        #[test]
        fn orbits_partition_the_universe((ps, p, a) in arb_instance()) {
            let d = restricted_orbits(&ps, &p, &a).unwrap();
            let mut seen: Vec<(usize, usize)> = d.orbits.iter().flat_map(|o| o.edges.iter().copied()).collect();
            let total = seen.len();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), total);
            prop_assert_eq!(total, pair_count(a.len()));
            prop_assert_eq!(d.census.total_edges(), total);
            prop_assert!(d.census.special_edges() <= ps.n());
            let phi = relative_permutation(&ps, &p).unwrap();
            let in_a = |(u, v): (usize, usize)| a.contains(&u) && a.contains(&v);
            for o in &d.orbits {
                for w in o.edges.windows(2) {
                    prop_assert_eq!(canonical(phi.apply(w[0].0), phi.apply(w[0].1)), w[1]);
                }
                let last = *o.edges.last().unwrap();
                let first = o.edges[0];
                let next = canonical(phi.apply(last.0), phi.apply(last.1));
                let prev = canonical(phi.apply_inverse(first.0), phi.apply_inverse(first.1));
                match o.kind {
                    OrbitKind::Cycle => prop_assert_eq!(next, first),
                    OrbitKind::Chain => prop_assert!(!in_a(next) && !in_a(prev)),
                }
                prop_assert!(!o.special || o.kind == OrbitKind::Cycle);
            }
            prop_assert_eq!(orbit_census(&ps, &p, &a).unwrap(), d.census);
        }
    }
}
