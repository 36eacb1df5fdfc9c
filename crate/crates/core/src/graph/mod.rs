//! Simple undirected graphs and the constructions built on them.
//!
//! Vertices are `0..n`. Every binary product has vertex set `V(X) × V(Y)`
//! labeled x-major: `(x, y)` is vertex `x * |V(Y)| + y` (see
//! [`VertexPairIndex`]).

mod automorphism;
mod classical;
mod products;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

pub use automorphism::{
    automorphisms, automorphisms_with_limit, is_vertex_transitive, orbits, Permutation,
    AUTOMORPHISM_VERTEX_LIMIT,
};
pub use classical::{classical_homomorphism, is_homomorphism};
pub use products::{
    categorical_product, disjoint_union, disjunctive_product, homomorphic_product,
    lexicographic_product, strong_product, ProductKind,
};

/// A finite simple graph: irreflexive, symmetric adjacency.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![false; n * n],
        }
    }

    /// Builds a graph from an edge list. Loops, duplicate edges and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return param(format!("edge ({u},{v}) out of range for {n} vertices"));
            }
            if u == v {
                return param(format!("loop at vertex {u}"));
            }
            if g.has_edge(u, v) {
                return param(format!("duplicate edge ({u},{v})"));
            }
            g.set_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from a symmetric predicate evaluated on distinct pairs.
    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if adjacent(u, v) {
                    g.set_edge(u, v);
                }
            }
        }
        g
    }

    fn set_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(v, u))
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count() / 2
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Graph on the same vertices with adjacency inverted on distinct pairs.
    pub fn complement(&self) -> Graph {
        Graph::from_fn(self.n, |u, v| !self.has_edge(u, v))
    }

    /// Subgraph induced on `vertices` (relabeled in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        Graph::from_fn(vertices.len(), |i, j| {
            self.has_edge(vertices[i], vertices[j])
        })
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.set_edge(perm[u], perm[v]);
        }
        g
    }

    /// Adjacency matrix as 0/1 rows.
    pub fn adjacency_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|u| {
                (0..self.n)
                    .map(|v| if self.has_edge(u, v) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    // ---- generators ----

    pub fn complete(n: usize) -> Graph {
        Graph::from_fn(n, |_, _| true)
    }

    /// Cycle `C_n`; requires `n >= 3`.
    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return param(format!("cycle needs at least 3 vertices, got {n}"));
        }
        Ok(Graph::from_fn(n, |u, v| {
            v - u == 1 || (u == 0 && v == n - 1)
        }))
    }

    /// Path on `n` vertices (`n - 1` edges).
    pub fn path(n: usize) -> Graph {
        Graph::from_fn(n, |u, v| v - u == 1)
    }

    pub fn petersen() -> Graph {
        let mut edges = Vec::with_capacity(15);
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, &edges).expect("petersen edge list is simple")
    }

    /// Kneser graph `K(n, k)`: `k`-subsets of `[n]`, adjacent when disjoint.
    /// Subsets are enumerated in lexicographic (colex-free) bitmask order.
    pub fn kneser(n: usize, k: usize) -> Result<Graph> {
        if k == 0 || n < 2 * k {
            return param(format!("kneser needs n >= 2k >= 2, got n={n}, k={k}"));
        }
        if n > 24 {
            return crate::error::capability(format!("kneser with n={n} is too large"));
        }
        let subsets: Vec<u32> = (0u32..(1 << n))
            .filter(|s| s.count_ones() as usize == k)
            .collect();
        Ok(Graph::from_fn(subsets.len(), |i, j| {
            subsets[i] & subsets[j] == 0
        }))
    }

    /// `G(n, 1/2)`: each pair is an edge independently with probability
    /// one half, drawn from a ChaCha8 stream seeded with `seed`.
    pub fn random(n: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Graph::from_fn(n, |_, _| rng.gen_bool(0.5))
    }

    /// Parses a generator string (`complete:n`, `cycle:n`, `empty:n`,
    /// `path:n`, `petersen`, `kneser:n:k`, `random:n:seed`).
    pub fn from_generator(spec: &str) -> Result<Graph> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| {
                    Error::Parameter(format!("generator `{spec}` is missing an argument"))
                })?
                .parse::<usize>()
                .map_err(|e| Error::Parameter(format!("generator `{spec}`: {e}")))
        };
        let arity = |k: usize| -> Result<()> {
            if parts.len() != k + 1 {
                return param(format!("generator `{spec}` takes {k} argument(s)"));
            }
            Ok(())
        };
        match parts[0] {
            "complete" => arity(1).and_then(|_| Ok(Graph::complete(num(1)?))),
            "cycle" => arity(1).and_then(|_| Graph::cycle(num(1)?)),
            "empty" => arity(1).and_then(|_| Ok(Graph::empty(num(1)?))),
            "path" => arity(1).and_then(|_| Ok(Graph::path(num(1)?))),
            "petersen" => arity(0).map(|_| Graph::petersen()),
            "kneser" => arity(2).and_then(|_| Graph::kneser(num(1)?, num(2)?)),
            "random" => arity(2).and_then(|_| Ok(Graph::random(num(1)?, num(2)? as u64))),
            other => param(format!("unknown generator `{other}`")),
        }
    }

    // ---- JSON ----

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson::from(self)).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        let raw: GraphJson = serde_json::from_str(s)?;
        Graph::try_from(raw)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

impl FromStr for Graph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Graph> {
        Graph::from_generator(s)
    }
}

/// On-disk form: `{"n": <int>, "edges": [[u,v], ...]}` with `u < v`, sorted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;
    fn try_from(raw: GraphJson) -> Result<Graph> {
        let mut edges = Vec::with_capacity(raw.edges.len());
        for [u, v] in raw.edges {
            if u >= v {
                return param(format!("edge [{u},{v}] must satisfy u < v"));
            }
            edges.push((u, v));
        }
        Graph::from_edges(raw.n, &edges)
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        Graph::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Flat indexing of `V(X) × V(Y)`: `(x, y) ↔ x * ny + y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexPairIndex {
    pub nx: usize,
    pub ny: usize,
}

impl VertexPairIndex {
    pub fn new(nx: usize, ny: usize) -> Self {
        VertexPairIndex { nx, ny }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny);
        x * self.ny + y
    }

    #[inline]
    pub fn pair(&self, i: usize) -> (usize, usize) {
        (i / self.ny, i % self.ny)
    }

    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat indices of the block belonging to `x`.
    pub fn block(&self, x: usize) -> std::ops::Range<usize> {
        x * self.ny..(x + 1) * self.ny
    }
}
