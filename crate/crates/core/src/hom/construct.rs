//! Witness constructions: classical lifts, composition, the DNN repair,
//! lattice operations and the degenerate weak PSD matrix.

use crate::error::{param, precondition, Error, Result};
use crate::graph::{
    categorical_product, disjoint_union, homomorphic_product, is_homomorphism, Graph,
    VertexPairIndex,
};
use crate::hom::exact::optimal_coloring;
use crate::hom::witness::{block_pairs, HomMode, HomWitness};
use crate::linalg::{contract, Partition, SymMatrix};
use crate::theta::ConeTag;

/// Tolerance at which constructions check their inputs.
pub const INPUT_TOL: f64 = 1e-6;

fn require_valid(w: &HomWitness, what: &str) -> Result<()> {
    if !w.is_valid(INPUT_TOL) {
        return precondition(format!(
            "{what}: input witness {}→{} vertices is not valid (residual {:.3e})",
            w.x.n(),
            w.y.n(),
            w.max_residual()
        ));
    }
    Ok(())
}

fn same_graph(a: &Graph, b: &Graph, what: &str) -> Result<()> {
    if a != b {
        return param(format!("{what}: witnesses do not share the middle graph"));
    }
    Ok(())
}

/// `H = v vᵀ` with `v = Σ_x e_x ⊗ e_φ(x)`: the CP witness of a classical
/// homomorphism `φ`.
pub fn classical_lift(x: &Graph, y: &Graph, map: &[usize]) -> Result<HomWitness> {
    if !is_homomorphism(x, y, map) {
        return precondition("map is not a homomorphism");
    }
    let idx = VertexPairIndex::new(x.n(), y.n());
    let support: Vec<usize> = (0..x.n()).map(|v| idx.index(v, map[v])).collect();
    let mut h = SymMatrix::zeros(idx.dim());
    for &i in &support {
        for &j in &support {
            h.set(i, j, 1.0);
        }
    }
    HomWitness::new(h, x, y, ConeTag::Cp, HomMode::Strong)
}

/// `Φ Φᵀ` with `Φ = Σ_x e_x ⊗ e_x`, a strong CP witness `X → X`.
pub fn identity_witness(x: &Graph) -> HomWitness {
    let id: Vec<usize> = (0..x.n()).collect();
    classical_lift(x, x, &id).expect("the identity is a homomorphism")
}

/// `H_{xz,x'z'} = Σ_{y,y'} H1_{xy,x'y'} H2_{yz,y'z'}` for `H1: X → Y`,
/// `H2: Y → Z`. This is a contraction of a principal submatrix of
/// `H1 ⊗ H2`, so it stays in any cone containing both.
pub fn compose_witnesses(h1: &HomWitness, h2: &HomWitness) -> Result<HomWitness> {
    same_graph(&h1.y, &h2.x, "compose")?;
    let (nx, ny, nz) = (h1.x.n(), h1.y.n(), h2.y.n());
    let i1 = h1.labels();
    let i2 = h2.labels();
    let out = VertexPairIndex::new(nx, nz);
    let h = SymMatrix::from_fn(out.dim(), |p, q| {
        let (x, z) = out.pair(p);
        let (x2, z2) = out.pair(q);
        let mut s = 0.0;
        for y in 0..ny {
            for y2 in 0..ny {
                let a = h1.h.get(i1.index(x, y), i1.index(x2, y2));
                if a != 0.0 {
                    s += a * h2.h.get(i2.index(y, z), i2.index(y2, z2));
                }
            }
        }
        s
    });
    HomWitness::new(h, &h1.x, &h2.y, h1.cone.max(h2.cone), h1.mode.meet(h2.mode))
}

/// Turns a weak DNN witness into a strong one: each in-block entry
/// `c = H_{xy,xy'} > 0` is removed by adding `c` to both diagonal entries
/// (the matrix `c (e_i - e_j)(e_i - e_j)ᵀ`, which is PSD and has zero block
/// sum). Entries already at or below zero are within tolerance and are set
/// to zero.
pub fn repair_weak_to_strong_dnn(w: &HomWitness) -> Result<HomWitness> {
    if w.cone != ConeTag::Dnn {
        return param(format!("repair expects a DNN witness, got {}", w.cone));
    }
    require_valid(w, "repair")?;
    if w.mode == HomMode::Strong {
        return Ok(w.clone());
    }
    let idx = w.labels();
    let mut h = w.h.clone();
    for x in 0..idx.nx {
        let block = idx.block(x);
        for i in block.clone() {
            for j in (i + 1)..block.end {
                let c = h.get(i, j);
                if c > 0.0 {
                    h.add_to(i, i, c);
                    h.add_to(j, j, c);
                }
                h.set(i, j, 0.0);
            }
        }
    }
    HomWitness::new(h, &w.x, &w.y, ConeTag::Dnn, HomMode::Strong)
}

/// `H_{z(xy), z'(x'y')} = H1_{zx,z'x'} H2_{zy,z'y'}` for `H1: Z → X` and
/// `H2: Z → Y`; a witness `Z → X × Y` with `X × Y` indexed `x |V(Y)| + y`.
pub fn categorical_meet_witness(h1: &HomWitness, h2: &HomWitness) -> Result<HomWitness> {
    same_graph(&h1.x, &h2.x, "meet")?;
    let (nz, nx, ny) = (h1.x.n(), h1.y.n(), h2.y.n());
    let (i1, i2) = (h1.labels(), h2.labels());
    let inner = VertexPairIndex::new(nx, ny);
    let out = VertexPairIndex::new(nz, inner.dim());
    let h = SymMatrix::from_fn(out.dim(), |p, q| {
        let (z, a) = out.pair(p);
        let (z2, b) = out.pair(q);
        let (x, y) = inner.pair(a);
        let (x2, y2) = inner.pair(b);
        h1.h.get(i1.index(z, x), i1.index(z2, x2)) * h2.h.get(i2.index(z, y), i2.index(z2, y2))
    });
    let target = categorical_product(&h1.y, &h2.y);
    HomWitness::new(
        h,
        &h1.x,
        &target,
        h1.cone.max(h2.cone),
        h1.mode.meet(h2.mode),
    )
}

/// For `H1: X → Z` and `H2: Y → Z`, the witness `X + Y → Z`
/// `[[H1, H1 J H2 / ab], [(H1 J H2)ᵀ / ab, H2]]` with `a = |V(X)|`,
/// `b = |V(Y)|`. Membership of the result in the cone is re-checked: the
/// general argument goes through Gram representations of the inputs.
pub fn disjoint_union_witness(h1: &HomWitness, h2: &HomWitness) -> Result<HomWitness> {
    same_graph(&h1.y, &h2.y, "disjoint union")?;
    if h1.cone != h2.cone {
        return param("disjoint union: witnesses over different cones");
    }
    let (a, b) = (h1.x.n(), h2.x.n());
    let d1 = h1.h.dim();
    let r1 = h1.h.row_sums();
    let r2 = h2.h.row_sums();
    let ab = (a * b) as f64;
    let h = SymMatrix::from_fn(d1 + h2.h.dim(), |i, j| match (i < d1, j < d1) {
        (true, true) => h1.h.get(i, j),
        (false, false) => h2.h.get(i - d1, j - d1),
        (true, false) => r1[i] * r2[j - d1] / ab,
        (false, true) => r1[j] * r2[i - d1] / ab,
    });
    let union = disjoint_union(&h1.x, &h2.x);
    let w = HomWitness::new(h, &union, &h1.y, h1.cone, h1.mode.meet(h2.mode))?;
    let allowed = h1.residuals.cone_dev.max(h2.residuals.cone_dev) * 10.0 + INPUT_TOL;
    if w.residuals.cone_dev > allowed {
        return Err(Error::Numerical {
            message: format!(
                "disjoint-union matrix leaves the {} cone (violation {:.3e})",
                w.cone, w.residuals.cone_dev
            ),
            iterations: 0,
        });
    }
    Ok(w)
}

/// From a witness `H: X → Y`, the witness `K_n → complement(X ⋉ Y)` with
/// `n = |V(X)|` that copies `H_{x2 y, x2' y'}` to position
/// `(x1 x2 y, x1' x2' y')` when `x1 = x2` and `x1' = x2'`. It keeps the mode
/// of the input.
pub fn weak_hom_alpha_embedding(w: &HomWitness) -> Result<HomWitness> {
    let nx = w.x.n();
    let inner = w.labels();
    let out = VertexPairIndex::new(nx, inner.dim());
    let mut h = SymMatrix::zeros(out.dim());
    for p in 0..inner.dim() {
        for q in p..inner.dim() {
            let v = w.h.get(p, q);
            if v != 0.0 {
                let (x, _) = inner.pair(p);
                let (x2, _) = inner.pair(q);
                h.set(out.index(x, p), out.index(x2, q), v);
            }
        }
    }
    let target = homomorphic_product(&w.x, &w.y).complement();
    HomWitness::new(h, &Graph::complete(nx), &target, w.cone, w.mode)
}

/// Given a θ^K(G) solution `m` of value `c = χ(Ḡ)`, the strong witness
/// `K_c → Ḡ` placing `c M_{xx'}` at `(i x, j x')` for `x ∈ S_i`, `x' ∈ S_j`,
/// where `S_1, ..., S_c` is a partition of `V(G)` into cliques.
///
/// Contracting `m` over the partition gives a PSD matrix with trace one and
/// sum `c`, which is `J / c`; the factor `c` brings the block sums to one.
///
/// Fails when the value of `m` is not `c` within `tol`.
pub fn clique_cover_witness(
    g: &Graph,
    m: &SymMatrix,
    cone: ConeTag,
    tol: f64,
) -> Result<HomWitness> {
    if m.dim() != g.n() {
        return param("solution dimension does not match the graph");
    }
    let gbar = g.complement();
    let colors = optimal_coloring(&gbar)?;
    let c = colors.iter().max().map_or(0, |k| k + 1);
    if (m.sum() - c as f64).abs() > tol {
        return precondition(format!(
            "solution value {} differs from the clique cover number {c}",
            m.sum()
        ));
    }
    let idx = VertexPairIndex::new(c, g.n());
    let h = SymMatrix::from_fn(idx.dim(), |p, q| {
        let (i, x) = idx.pair(p);
        let (j, x2) = idx.pair(q);
        if colors[x] == i && colors[x2] == j {
            c as f64 * m.get(x, x2)
        } else {
            0.0
        }
    });
    HomWitness::new(h, &Graph::complete(c), &gbar, cone, HomMode::Strong)
}

/// The smallest γ making [`degenerate_weak_splus_witness`] PSD is `n / 4`.
pub fn degenerate_gamma(n: usize) -> f64 {
    (n as f64 / 4.0).max(1.0)
}

/// `H* = ½ J_n ⊗ N + γ I_n ⊗ M` with `M = [[1,-1],[-1,1]]`,
/// `N = [[0,1],[1,0]]` and `γ = max(1, n/4)`.
///
/// `H*` is PSD, has unit block sums and vanishes where a weak witness
/// `X → K2` must vanish for every graph `X` on `n` vertices. Weak
/// homomorphisms over the PSD cone are therefore trivial.
pub fn degenerate_weak_splus_witness(n: usize) -> SymMatrix {
    degenerate_with_gamma(n, degenerate_gamma(n))
}

pub fn degenerate_with_gamma(n: usize, gamma: f64) -> SymMatrix {
    let idx = VertexPairIndex::new(n, 2);
    SymMatrix::from_fn(idx.dim(), |p, q| {
        let (x, y) = idx.pair(p);
        let (x2, y2) = idx.pair(q);
        let nn = if y != y2 { 0.5 } else { 0.0 };
        let mm = if x == x2 {
            if y == y2 {
                gamma
            } else {
                -gamma
            }
        } else {
            0.0
        };
        nn + mm
    })
    .with_labels(idx)
    .expect("dimension matches")
}

/// Whether every `(x, x')` block of the labelled matrix `h` sums to one
/// within `tol`, i.e. whether its contraction over `V(X)` is `J`.
pub fn gram_check(h: &SymMatrix, tol: f64) -> bool {
    let Some(labels) = h.labels() else {
        return false;
    };
    let Ok(c) = contract(h, &Partition::by_first(labels)) else {
        return false;
    };
    c.entries().iter().all(|v| (v - 1.0).abs() <= tol)
}

/// Whether `Σ_{y'} H_{xy,x'y'}` is independent of `x'` for every `(x, y)`.
/// `H` is symmetric, so this covers the marginals of both parties.
pub fn nonsignalling_check(h: &SymMatrix, tol: f64) -> bool {
    let Some(idx) = h.labels() else {
        return false;
    };
    let marginal = |p: usize, x2: usize| -> f64 { idx.block(x2).map(|q| h.get(p, q)).sum() };
    for p in 0..idx.dim() {
        let first = marginal(p, 0);
        if (1..idx.nx).any(|x2| (marginal(p, x2) - first).abs() > tol) {
            return false;
        }
    }
    true
}

/// Sum of each `(x, x')` block; used in diagnostics.
pub fn block_sums(h: &SymMatrix) -> Option<Vec<Vec<f64>>> {
    let idx = h.labels()?;
    Some(
        (0..idx.nx)
            .map(|a| {
                (0..idx.nx)
                    .map(|b| block_pairs(idx, a, b).map(|(i, j)| h.get(i, j)).sum())
                    .collect()
            })
            .collect(),
    )
}
