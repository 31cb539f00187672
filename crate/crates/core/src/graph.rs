//! Simple undirected graphs on the vertex set `0..n`.
//!
//! Edges are stored twice: as a sorted list of canonical pairs `(u, v)` with
//! `u < v` for deterministic iteration, and as a packed adjacency bit matrix for
//! O(1) membership. Sorted neighbor lists back traversal.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) has an endpoint outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("vertex-count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("malformed edge list: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    words_per_row: usize,
    bits: Vec<u64>,
}

/// Canonical order of an unordered pair.
#[inline]
pub fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Number of unordered pairs `C(n, 2)`.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of the canonical pair `(u, v)`, `u < v`, in the row-major enumeration of `C(n, 2)`.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let words_per_row = n.div_ceil(64);
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            words_per_row,
            bits: vec![0; words_per_row * n],
        }
    }

    /// Builds a graph from arbitrary pairs; duplicates (in either orientation) collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (a, b) = canonical(u, v);
            list.push((a as u32, b as u32));
        }
        list.sort_unstable();
        list.dedup();
        for &(a, b) in &list {
            g.set_bit(a as usize, b as usize);
            g.set_bit(b as usize, a as usize);
            g.adj[a as usize].push(b);
            g.adj[b as usize].push(a);
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        g.edges = list;
        Ok(g)
    }

    pub fn complete(n: usize) -> Graph {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, pairs).expect("complete graph is valid")
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path is valid")
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`, `n ≥ 3`.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "a simple cycle needs at least three vertices");
        Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle is valid")
    }

    fn set_bit(&mut self, u: usize, v: usize) {
        self.bits[u * self.words_per_row + v / 64] |= 1u64 << (v % 64);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical pairs in ascending order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && (self.bits[u * self.words_per_row + v / 64] >> (v % 64)) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&w| w as usize)
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges with both endpoints in `set` (membership mask of length `n`).
    pub fn induced_edge_count_mask(&self, mask: &[bool]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| mask[u as usize] && mask[v as usize])
            .count()
    }

    /// Edges with both endpoints in `vertices`.
    pub fn induced_edge_count(&self, vertices: &[usize]) -> usize {
        let mask = self.mask_of(vertices);
        let mut twice = 0;
        for &v in vertices {
            twice += self.adj[v].iter().filter(|&&w| mask[w as usize]).count();
        }
        twice / 2
    }

    pub fn mask_of(&self, vertices: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &v in vertices {
            mask[v] = true;
        }
        mask
    }

    /// Induced subgraph on `vertices` (relabeled `0..k` in the given order).
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let pairs = self
            .edges()
            .filter(|&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|(u, v)| (local[u], local[v]));
        Graph::from_edges(vertices.len(), pairs).expect("induced subgraph is valid")
    }

    /// Vertices of the `k`-core (maximal subgraph with minimum degree ≥ k), ascending.
    pub fn k_core(&self, k: usize) -> Vec<usize> {
        let mut deg: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        let mut removed = vec![false; self.n];
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| deg[v] < k).collect();
        for &v in &queue {
            removed[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if !removed[w] {
                    deg[w] -= 1;
                    if deg[w] < k {
                        removed[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        (0..self.n).filter(|&v| !removed[v]).collect()
    }

    /// Connected components restricted to `mask`, each sorted, ordered by smallest vertex.
    pub fn components_within(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if !mask[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for w in self.neighbors(v) {
                    if mask[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// BFS distances from `sources` up to `max_depth` (`usize::MAX` = unreached).
    pub fn bfs_distances(&self, sources: &[usize], max_depth: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if dist[v] >= max_depth {
                continue;
            }
            for w in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Whether the vertex set induces a connected subgraph (empty sets are not connected).
    pub fn is_connected_set(&self, vertices: &[usize]) -> bool {
        if vertices.is_empty() {
            return false;
        }
        let mask = self.mask_of(vertices);
        let comps = self.components_within(&mask);
        comps.len() == 1
    }

    /// Plain-text edge list: `n m` header then one `u v` line per canonical pair, ascending.
    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.edges.len())?;
        for &(u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| GraphError::Parse("missing header".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(GraphError::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        let g = Graph::from_edges(n, edges)?;
        if g.edge_count() != m {
            return Err(GraphError::Parse("duplicate edges".into()));
        }
        Ok(g)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        it.next()
            .ok_or_else(|| GraphError::Parse(format!("expected two integers in {line:?}")))?
            .parse()
            .map_err(|e| GraphError::Parse(format!("{line:?}: {e}")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(GraphError::Parse(format!("trailing tokens in {line:?}")));
    }
    Ok((a, b))
}
