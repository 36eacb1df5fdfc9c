use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{Graph, VertexPairIndex};
use crate::linalg::{format_f64_17, SymMatrix};
use crate::theta::ConeTag;

/// Strong witnesses vanish on `(xy, xy')` for `y ≠ y'`; weak ones need not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomMode {
    Strong,
    Weak,
}

impl HomMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HomMode::Strong => "strong",
            HomMode::Weak => "weak",
        }
    }

    /// The mode of a composite built from witnesses of modes `self` and `other`.
    pub fn meet(self, other: HomMode) -> HomMode {
        if self == HomMode::Strong && other == HomMode::Strong {
            HomMode::Strong
        } else {
            HomMode::Weak
        }
    }
}

impl fmt::Display for HomMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HomMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strong" => Ok(HomMode::Strong),
            "weak" => Ok(HomMode::Weak),
            other => param(format!("unknown mode '{other}' (expected strong or weak)")),
        }
    }
}

/// Weak homomorphisms are only defined over cones of nonnegative matrices.
pub(crate) fn check_mode(cone: ConeTag, mode: HomMode) -> Result<()> {
    if mode == HomMode::Weak && !cone.is_nonnegative() {
        return param(
            "weak homomorphisms over the PSD cone are degenerate (every graph maps to K2); \
             use strong mode or a nonnegative cone",
        );
    }
    Ok(())
}

/// Deviations of a candidate homomorphism matrix from each defining condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessResiduals {
    /// `max |Σ_{y,y'} H_{xy,x'y'} - 1|` over all `(x, x')`.
    pub block_sum_dev: f64,
    /// `max |H_{xy,x'y'}|` over `x ~ x'`, `y ≁ y'` (including `y = y'`).
    pub ortho_dev: f64,
    /// `max |H_{xy,xy'}|` over `y ≠ y'`.
    pub mortho_dev: f64,
    /// `max(0, -λ_min)`, and for nonnegative cones also `max(0, -min H)`.
    /// CP membership is only checked through this DNN relaxation.
    pub cone_dev: f64,
}

impl WitnessResiduals {
    pub fn max(&self, mode: HomMode) -> f64 {
        let m = self.block_sum_dev.max(self.ortho_dev).max(self.cone_dev);
        match mode {
            HomMode::Strong => m.max(self.mortho_dev),
            HomMode::Weak => m,
        }
    }

    pub fn passes(&self, mode: HomMode, tol: f64) -> bool {
        self.max(mode) <= tol
    }
}

/// Residuals of `h` as a homomorphism matrix `X → Y` over `cone`, with
/// `h` indexed `x * |V(Y)| + y`.
pub fn witness_residuals(
    h: &SymMatrix,
    x: &Graph,
    y: &Graph,
    cone: ConeTag,
) -> Result<WitnessResiduals> {
    let idx = VertexPairIndex::new(x.n(), y.n());
    if h.dim() != idx.dim() {
        return param(format!(
            "matrix of dimension {} for {}x{} vertex pairs",
            h.dim(),
            x.n(),
            y.n()
        ));
    }
    let mut r = WitnessResiduals::default();
    if h.dim() == 0 {
        return Ok(r);
    }
    for a in 0..x.n() {
        for b in a..x.n() {
            let mut s = 0.0;
            for (i, j) in block_pairs(idx, a, b) {
                let v = h.get(i, j);
                s += v;
                let (ya, yb) = (i % idx.ny, j % idx.ny);
                if a == b && ya != yb {
                    r.mortho_dev = r.mortho_dev.max(v.abs());
                }
                if x.has_edge(a, b) && !y.has_edge(ya, yb) {
                    r.ortho_dev = r.ortho_dev.max(v.abs());
                }
            }
            r.block_sum_dev = r.block_sum_dev.max((s - 1.0).abs());
        }
    }
    r.cone_dev = (-h.min_eigenvalue()?).max(0.0);
    if cone.is_nonnegative() {
        r.cone_dev = r.cone_dev.max(-h.min_entry());
    }
    Ok(r)
}

/// All `(i, j)` of the `(a, b)` block.
pub(crate) fn block_pairs(
    idx: VertexPairIndex,
    a: usize,
    b: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let (ra, rb) = (idx.block(a), idx.block(b));
    ra.flat_map(move |i| rb.clone().map(move |j| (i, j)))
}

/// A homomorphism matrix together with the graphs it relates.
#[derive(Clone, Debug)]
pub struct HomWitness {
    /// Labelled by `V(X) × V(Y)`.
    pub h: SymMatrix,
    pub cone: ConeTag,
    pub mode: HomMode,
    pub x: Graph,
    pub y: Graph,
    pub residuals: WitnessResiduals,
}

impl HomWitness {
    /// Wraps `h` and computes its residuals. Does not require validity.
    pub fn new(h: SymMatrix, x: &Graph, y: &Graph, cone: ConeTag, mode: HomMode) -> Result<Self> {
        check_mode(cone, mode)?;
        let residuals = witness_residuals(&h, x, y, cone)?;
        let h = h.with_labels(VertexPairIndex::new(x.n(), y.n()))?;
        Ok(HomWitness {
            h,
            cone,
            mode,
            x: x.clone(),
            y: y.clone(),
            residuals,
        })
    }

    pub fn labels(&self) -> VertexPairIndex {
        VertexPairIndex::new(self.x.n(), self.y.n())
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.residuals.passes(self.mode, tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.max(self.mode)
    }

    /// The same matrix regarded as a witness over a larger cone.
    pub fn widen(&self, cone: ConeTag) -> Result<HomWitness> {
        if cone < self.cone {
            return param(format!("cannot narrow a {} witness to {cone}", self.cone));
        }
        HomWitness::new(self.h.clone(), &self.x, &self.y, cone, self.mode)
    }

    /// Reads a strong witness as a weak one.
    pub fn as_weak(&self) -> Result<HomWitness> {
        HomWitness::new(self.h.clone(), &self.x, &self.y, self.cone, HomMode::Weak)
    }

    /// `{"x", "y", "cone", "mode", "matrix", "residuals"}`; the matrix uses
    /// the labelled matrix format.
    pub fn to_json(&self) -> String {
        let r = &self.residuals;
        format!(
            "{{\"x\":{},\"y\":{},\"cone\":\"{}\",\"mode\":\"{}\",\"matrix\":{},\"residuals\":{{\"block_sum_dev\":{},\"ortho_dev\":{},\"mortho_dev\":{},\"cone_dev\":{}}}}}",
            self.x.to_json(),
            self.y.to_json(),
            self.cone,
            self.mode,
            self.h.to_json(),
            format_f64_17(r.block_sum_dev),
            format_f64_17(r.ortho_dev),
            format_f64_17(r.mortho_dev),
            format_f64_17(r.cone_dev),
        )
    }
}
