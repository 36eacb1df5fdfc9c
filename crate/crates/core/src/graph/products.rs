use std::str::FromStr;

use super::{Graph, VertexPairIndex};
use crate::error::{param, Error, Result};

fn pair_product(x: &Graph, y: &Graph, rule: impl Fn(usize, usize, usize, usize) -> bool) -> Graph {
    let idx = VertexPairIndex::new(x.n(), y.n());
    Graph::from_fn(idx.dim(), |i, j| {
        let (a, b) = idx.pair(i);
        let (c, d) = idx.pair(j);
        rule(a, b, c, d)
    })
}

/// `X ⋉ Y`: `(x,y) ~ (x',y')` iff `x = x'` and `y ≠ y'`, or `x ~ x'` and
/// `y ≁ y'` (where `y ≁ y'` includes `y = y'`).
///
/// The edges are exactly the entries a strong homomorphism matrix is required
/// to vanish on.
pub fn homomorphic_product(x: &Graph, y: &Graph) -> Graph {
    pair_product(x, y, |a, b, c, d| {
        (a == c && b != d) || (x.has_edge(a, c) && !y.has_edge(b, d))
    })
}

/// `X ⊠ Y`.
pub fn strong_product(x: &Graph, y: &Graph) -> Graph {
    pair_product(x, y, |a, b, c, d| {
        let xa = x.has_edge(a, c);
        let ya = y.has_edge(b, d);
        (xa && ya) || (xa && b == d) || (a == c && ya)
    })
}

/// `X[Y]`: `x ~ x'`, or `x = x'` and `y ~ y'`.
pub fn lexicographic_product(x: &Graph, y: &Graph) -> Graph {
    pair_product(x, y, |a, b, c, d| {
        x.has_edge(a, c) || (a == c && y.has_edge(b, d))
    })
}

/// `X ∗ Y`: `x ~ x'` or `y ~ y'`.
pub fn disjunctive_product(x: &Graph, y: &Graph) -> Graph {
    pair_product(x, y, |a, b, c, d| x.has_edge(a, c) || y.has_edge(b, d))
}

/// `X × Y`: `x ~ x'` and `y ~ y'`.
pub fn categorical_product(x: &Graph, y: &Graph) -> Graph {
    pair_product(x, y, |a, b, c, d| x.has_edge(a, c) && y.has_edge(b, d))
}

/// `X + Y`: vertices of `X` first, then those of `Y` shifted by `|V(X)|`.
pub fn disjoint_union(x: &Graph, y: &Graph) -> Graph {
    let nx = x.n();
    Graph::from_fn(nx + y.n(), |u, v| {
        if v < nx {
            x.has_edge(u, v)
        } else if u >= nx {
            y.has_edge(u - nx, v - nx)
        } else {
            false
        }
    })
}

/// Named binary graph constructions, as accepted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    Homomorphic,
    Strong,
    Lexicographic,
    Disjunctive,
    Categorical,
    Union,
}

impl ProductKind {
    pub fn apply(self, x: &Graph, y: &Graph) -> Graph {
        match self {
            ProductKind::Homomorphic => homomorphic_product(x, y),
            ProductKind::Strong => strong_product(x, y),
            ProductKind::Lexicographic => lexicographic_product(x, y),
            ProductKind::Disjunctive => disjunctive_product(x, y),
            ProductKind::Categorical => categorical_product(x, y),
            ProductKind::Union => disjoint_union(x, y),
        }
    }
}

impl FromStr for ProductKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "homomorphic" => ProductKind::Homomorphic,
            "strong" => ProductKind::Strong,
            "lexicographic" | "lex" => ProductKind::Lexicographic,
            "disjunctive" => ProductKind::Disjunctive,
            "categorical" | "tensor" => ProductKind::Categorical,
            "union" | "disjoint-union" => ProductKind::Union,
            other => return param(format!("unknown product `{other}`")),
        })
    }
}
