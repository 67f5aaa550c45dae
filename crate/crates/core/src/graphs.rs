//! Vertex-weighted graphs and bitstring bases over their vertices.
//!
//! Bit `i` of a basis state is vertex `i`. For spin models a set bit is spin
//! up (`σᶻ = +1`); for independent sets a set bit is an occupied vertex.

use crate::error::{Error, Result};

/// Largest basis the library enumerates unless a caller raises the cap.
pub const DEFAULT_BASIS_CAP: usize = 1 << 26;

/// Undirected simple graph on at most 64 vertices with one weight per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    neighbors: Vec<u64>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are normalised to `u < v`;
    /// self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)], weights: Vec<f64>) -> Result<Self> {
        if vertex_count == 0 || vertex_count > 64 {
            return Err(Error::InvalidSize {
                what: "vertex count",
                value: vertex_count,
            });
        }
        if weights.len() != vertex_count {
            return Err(Error::InvalidGraph(format!(
                "{} weights for {vertex_count} vertices",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidGraph(format!("non-finite weight {w}")));
        }
        let mut neighbors = vec![0u64; vertex_count];
        let mut normalised = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if neighbors[u] >> v & 1 == 1 {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            neighbors[u] |= 1 << v;
            neighbors[v] |= 1 << u;
            normalised.push((u.min(v), u.max(v)));
        }
        normalised.sort_unstable();
        Ok(Self {
            edges: normalised,
            weights,
            neighbors,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Neighbours of `v` as a bitmask.
    pub fn neighbor_mask(&self, v: usize) -> u64 {
        self.neighbors[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.neighbors[v];
        (0..self.vertex_count()).filter(move |&u| mask >> u & 1 == 1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].count_ones() as usize
    }

    pub fn is_independent(&self, state: u64) -> bool {
        self.edges
            .iter()
            .all(|&(u, v)| state >> u & 1 == 0 || state >> v & 1 == 0)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.vertex_count(), &self.edges, weights)
    }

    /// Parses a plain-text edge list: the first non-comment line holds the
    /// vertex count, then `u v` lines add edges and `w i x` lines set the
    /// weight of vertex `i` (default 1). `#` starts a comment.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (first, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing vertex count".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| parse_err(first, format!("bad vertex count `{header}`")))?;
        let mut edges = Vec::new();
        let mut weights = vec![1.0; n];
        for (line, content) in lines {
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let index = |t: &str| -> Result<usize> {
                t.parse()
                    .map_err(|_| parse_err(line, format!("bad vertex index `{t}`")))
            };
            match tokens.as_slice() {
                ["w", i, x] => {
                    let i = index(i)?;
                    let x: f64 = x
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad weight `{x}`")))?;
                    *weights
                        .get_mut(i)
                        .ok_or_else(|| parse_err(line, format!("vertex {i} out of range")))? = x;
                }
                [u, v] => edges.push((index(u)?, index(v)?)),
                _ => return Err(parse_err(line, format!("unrecognised line `{content}`"))),
            }
        }
        Self::new(n, &edges, weights)
    }
}

/// Cycle graph on `n ≥ 3` vertices with unit weights.
pub fn build_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize {
            what: "cycle length",
            value: n,
        });
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(n, &edges, vec![1.0; n])
}

/// Open path on `n ≥ 1` vertices with unit weights.
pub fn build_path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize {
            what: "path length",
            value: n,
        });
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges, vec![1.0; n])
}

/// Star with `b` branches of length two. Vertex 0 is the center and carries
/// weight `b`; branch `j` has inner vertex `1 + 2j` and outer vertex `2 + 2j`,
/// both of weight 1.
pub fn build_star(b: usize) -> Result<Graph> {
    if b == 0 || 2 * b + 1 > 64 {
        return Err(Error::InvalidSize {
            what: "star branch count",
            value: b,
        });
    }
    let mut edges = Vec::with_capacity(2 * b);
    for j in 0..b {
        edges.push((0, 1 + 2 * j));
        edges.push((1 + 2 * j, 2 + 2 * j));
    }
    let mut weights = vec![1.0; 2 * b + 1];
    weights[0] = b as f64;
    Graph::new(2 * b + 1, &edges, weights)
}

/// Whether a basis spans all bitstrings or only independent sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    Full,
    IndependentSets,
}

/// Ordered set of bitstring states. States are stored ascending, so
/// lookups are a binary search (or the identity for the full basis).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBasis {
    sites: usize,
    mode: BasisMode,
    states: Vec<u64>,
}

impl SpinBasis {
    /// All `2^n` bitstrings.
    pub fn full(n: usize, cap: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidSize {
                what: "site count",
                value: n,
            });
        }
        let size = 1usize
            .checked_shl(n as u32)
            .filter(|&s| s <= cap)
            .ok_or(Error::Capacity {
                requested: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
                cap,
            })?;
        Ok(Self {
            sites: n,
            mode: BasisMode::Full,
            states: (0..size as u64).collect(),
        })
    }

    /// All independent sets of `g`.
    pub fn independent_sets(g: &Graph, cap: usize) -> Result<Self> {
        Ok(Self {
            sites: g.vertex_count(),
            mode: BasisMode::IndependentSets,
            states: enumerate_independent_sets(g, cap)?,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        match self.mode {
            BasisMode::Full => ((state as usize) < self.states.len()).then_some(state as usize),
            BasisMode::IndependentSets => self.states.binary_search(&state).ok(),
        }
    }
}

/// Independent sets of `g` as ascending bitmasks, failing once more than
/// `cap` sets would be produced.
pub fn enumerate_independent_sets(g: &Graph, cap: usize) -> Result<Vec<u64>> {
    let mut sets = vec![0u64];
    for v in 0..g.vertex_count() {
        let lower = g.neighbor_mask(v) & ((1u64 << v) - 1);
        let extra = sets.iter().filter(|&&s| s & lower == 0).count();
        if sets.len() + extra > cap {
            return Err(Error::Capacity {
                requested: sets.len() + extra,
                cap,
            });
        }
        let grown: Vec<u64> = sets
            .iter()
            .filter(|&&s| s & lower == 0)
            .map(|&s| s | 1 << v)
            .collect();
        sets.extend(grown);
    }
    sets.sort_unstable();
    Ok(sets)
}
