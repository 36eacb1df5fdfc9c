//! Moving solutions between the theta programs along a homomorphism, and
//! between homomorphism matrices and θ^K of the homomorphic product.

use crate::error::{param, precondition, Result};
use crate::graph::{homomorphic_product, Graph};
use crate::hom::construct::INPUT_TOL;
use crate::hom::witness::{HomMode, HomWitness};
use crate::linalg::SymMatrix;
use crate::theta::{big_theta_residuals, theta_residuals, ConeTag};

fn require(w: &HomWitness, mode: Option<HomMode>, what: &str) -> Result<()> {
    if let Some(m) = mode {
        if w.mode != m {
            return precondition(format!("{what} needs a {m} witness"));
        }
    }
    if !w.is_valid(INPUT_TOL) {
        return precondition(format!(
            "{what}: witness is not valid (residual {:.3e})",
            w.max_residual()
        ));
    }
    Ok(())
}

/// `N_{yy'} = Σ_{x,x'} M_{xx'} H_{xy,x'y'}`.
///
/// `m` must be a solution of θ^K(X̄), so its zero pattern is on distinct
/// non-adjacent pairs of `X`; the result solves θ^K(Ȳ) with the same
/// objective `⟨N, J⟩ = ⟨M, J⟩`. Needs a strong witness.
pub fn monotone_transform_theta(m: &SymMatrix, w: &HomWitness) -> Result<SymMatrix> {
    require(w, Some(HomMode::Strong), "theta transform")?;
    let res = theta_residuals(&w.x.complement(), w.cone, m)?;
    if res.max() > INPUT_TOL {
        return precondition(format!(
            "input is not a solution of theta of the complement (residual {:.3e})",
            res.max()
        ));
    }
    Ok(push_forward(m, w))
}

fn push_forward(m: &SymMatrix, w: &HomWitness) -> SymMatrix {
    let idx = w.labels();
    let (nx, ny) = (idx.nx, idx.ny);
    SymMatrix::from_fn(ny, |y, y2| {
        let mut s = 0.0;
        for x in 0..nx {
            for x2 in 0..nx {
                let a = m.get(x, x2);
                if a != 0.0 {
                    s += a * w.h.get(idx.index(x, y), idx.index(x2, y2));
                }
            }
        }
        s
    })
}

/// `M_{xx'} = Σ_{y,y'} H_{xy,x'y'} N_{yy'}`, then the diagonal raised to `t`.
///
/// `n` is a solution of Θ^K(Y) with value `t`; the result solves Θ^K(X)
/// with value `t`. Weak witnesses are accepted (only nonnegative cones have
/// them). Returns the solution and the diagonal top-up per vertex.
pub fn monotone_transform_big_theta(
    n: &SymMatrix,
    t: f64,
    w: &HomWitness,
) -> Result<(SymMatrix, Vec<f64>)> {
    require(w, None, "big theta transform")?;
    let res = big_theta_residuals(&w.y, w.cone, n, t)?;
    if res.max() > INPUT_TOL * t.max(1.0) {
        return precondition(format!(
            "input is not a solution of big theta (residual {:.3e})",
            res.max()
        ));
    }
    let idx = w.labels();
    let (nx, ny) = (idx.nx, idx.ny);
    let mut out = SymMatrix::from_fn(nx, |x, x2| {
        let mut s = 0.0;
        for y in 0..ny {
            for y2 in 0..ny {
                s += w.h.get(idx.index(x, y), idx.index(x2, y2)) * n.get(y, y2);
            }
        }
        s
    });
    let top_up: Vec<f64> = out.diag().iter().map(|d| t - d).collect();
    for (x, add) in top_up.iter().enumerate() {
        out.add_to(x, x, *add);
    }
    Ok((out, top_up))
}

/// `H / |V(X)|`: a solution of θ^K(X ⋉ Y) of value `|V(X)|`.
pub fn hom_to_theta_witness(w: &HomWitness) -> Result<SymMatrix> {
    if w.mode != HomMode::Strong {
        return precondition("hom to theta needs a strong witness");
    }
    if w.x.n() == 0 {
        return param("the graph with no vertices has no theta solution");
    }
    Ok(w.h.scaled(1.0 / w.x.n() as f64).without_labels())
}

/// Bound on `|Σ_{y,y'} H_{xy,x'y'} - 1|` for `H = n M` when `M` is PSD
/// with trace one and `⟨M, J⟩ = n - δ`.
///
/// Write the contraction `M̂` in the basis `(e/√n, e⊥)`: the corner is
/// `1 - δ/n`, the rest has trace `δ/n`, and the off-diagonal part has norm at
/// most `√(δ/n)`. Hence `|n M̂ - J| ≤ 2δ + 2√δ` entrywise.
pub fn theta_to_hom_tolerance(delta: f64) -> f64 {
    let d = delta.max(0.0);
    2.0 * d + 2.0 * d.sqrt()
}

/// `n M` for a solution `M` of θ^K(X ⋉ Y) of value at least `n - tol`
/// (`n = |V(X)|`), as a strong witness `X → Y`. Its block-sum deviation is
/// bounded by [`theta_to_hom_tolerance`].
pub fn theta_to_hom_witness(
    m: &SymMatrix,
    x: &Graph,
    y: &Graph,
    cone: ConeTag,
    tol: f64,
) -> Result<HomWitness> {
    let n = x.n();
    if m.dim() != n * y.n() {
        return param("solution dimension does not match |V(X)||V(Y)|");
    }
    let value = m.sum();
    if value < n as f64 - tol {
        return precondition(format!(
            "theta value {value} is short of |V(X)| = {n} by more than {tol:e}"
        ));
    }
    let res = theta_residuals(&homomorphic_product(x, y), cone, m)?;
    if res.max() > INPUT_TOL {
        return precondition(format!(
            "input is not a theta solution for the homomorphic product (residual {:.3e})",
            res.max()
        ));
    }
    HomWitness::new(m.scaled(n as f64), x, y, cone, HomMode::Strong)
}
