//! Dense real symmetric matrices and the cone-closure operations.
//!
//! The operations here (principal submatrix, Kronecker product, conjugation
//! by a permutation, contraction over a partition) all map the CP, DNN and
//! PSD cones into themselves; the witness constructions elsewhere in the
//! crate are compositions of them.

mod eigen;

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{capability, param, Error, Result};
use crate::graph::VertexPairIndex;
pub use eigen::{eig_sym_dense, SymEigen};

/// Dense column-major matrix used for factorizations.
pub type Mat = nalgebra::DMatrix<f64>;

/// Largest dimension `kron` will materialize.
pub const KRON_DIM_CAP: usize = 4096;

/// Relative PSD tolerance (scaled by `max(1, |tr M|)`).
pub const DEFAULT_PSD_REL_TOL: f64 = 1e-8;

/// A dense symmetric matrix, optionally labeled by vertex pairs `(x, y)`.
///
/// Entries are stored in full and every mutator writes both `(i, j)` and
/// `(j, i)`, so symmetry holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
    labels: Option<VertexPairIndex>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
            labels: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// All-ones matrix `J`.
    pub fn ones(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![1.0; dim * dim],
            labels: None,
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Evaluates `f(i, j)` for `i <= j` and mirrors it.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from full rows. Rows must be square, finite and symmetric up
    /// to `1e-12` relative; the stored matrix is the exact symmetric part.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return param("matrix rows must all have length equal to the row count");
        }
        let scale = rows.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || !b.is_finite() {
                    return param(format!("non-finite entry at ({i},{j})"));
                }
                if (a - b).abs() > 1e-12 * scale {
                    return param(format!("matrix is not symmetric at ({i},{j}): {a} vs {b}"));
                }
                m.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(m)
    }

    /// Symmetric part of a square dense matrix.
    pub fn from_dense(a: &Mat) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        SymMatrix::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    pub fn to_dense(&self) -> Mat {
        // symmetric, so row-major and column-major layouts coincide
        Mat::from_vec(self.dim, self.dim, self.data.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<VertexPairIndex> {
        self.labels
    }

    pub fn with_labels(mut self, labels: VertexPairIndex) -> Result<Self> {
        if labels.dim() != self.dim {
            return param(format!(
                "labels {}x{} do not match dimension {}",
                labels.nx, labels.ny, self.dim
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `⟨M, J⟩`, the sum of all entries.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
            labels: self.labels,
        }
    }

    /// `self + s * other`; keeps `self`'s labels.
    pub fn add_scaled(&self, other: &SymMatrix, s: f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
            labels: self.labels,
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn eig(&self) -> Result<SymEigen> {
        eig_sym_dense(&self.to_dense())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.min())
    }

    /// `tol` used by [`is_psd`] when the caller has no better choice.
    pub fn default_psd_tol(&self) -> f64 {
        DEFAULT_PSD_REL_TOL * self.trace().abs().max(1.0)
    }

    // ---- JSON ----

    /// `{"dim": d, "rows": [[...], ...]}` with 17 significant digits, plus
    /// `"labels": {"nx": .., "ny": ..}` when labeled.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        write!(s, "{{\"dim\":{},\"rows\":[", self.dim).unwrap();
        for i in 0..self.dim {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for j in 0..self.dim {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&format_f64_17(self.get(i, j)));
            }
            s.push(']');
        }
        s.push(']');
        if let Some(l) = self.labels {
            write!(s, ",\"labels\":{{\"nx\":{},\"ny\":{}}}", l.nx, l.ny).unwrap();
        }
        s.push('}');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(text)?;
        if raw.rows.len() != raw.dim {
            return param(format!("dim {} but {} rows", raw.dim, raw.rows.len()));
        }
        let m = SymMatrix::from_rows(&raw.rows)?;
        match raw.labels {
            Some(l) => m.with_labels(l),
            None => Ok(m),
        }
    }
}

#[derive(Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<f64>>,
    #[serde(default)]
    labels: Option<VertexPairIndex>,
}

/// Formats with 17 significant digits in scientific notation.
pub fn format_f64_17(v: f64) -> String {
    if v == 0.0 {
        // normalise -0.0
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// A partition of `0..dim` into nonempty disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    dim: usize,
}

impl Partition {
    pub fn new(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.is_empty() {
                return param("partition blocks must be nonempty");
            }
            for &i in b {
                if i >= dim {
                    return param(format!("partition index {i} out of range {dim}"));
                }
                if seen[i] {
                    return param(format!("partition index {i} appears twice"));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return param(format!("partition does not cover index {i}"));
        }
        Ok(Partition { blocks, dim })
    }

    /// Blocks of `V(X) × V(Y)` grouped by `x`.
    pub fn by_first(labels: VertexPairIndex) -> Self {
        let blocks = (0..labels.nx).map(|x| labels.block(x).collect()).collect();
        Partition {
            blocks,
            dim: labels.dim(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

// ---- cone tests ----

/// `λ_min(M) >= -tol`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(m.min_eigenvalue()? >= -tol)
}

/// PSD and entrywise `>= -tol`.
pub fn is_dnn(m: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(m.min_entry() >= -tol && is_psd(m, tol)?)
}

/// `PᵀP` for an entrywise nonnegative factor `P` (rows of `P` are the
/// nonnegative vectors whose Gram matrix is returned, column-wise). The
/// result is a certified member of the completely positive cone.
pub fn cp_gram_certificate(p: &[Vec<f64>]) -> Result<SymMatrix> {
    let cols = p.first().map_or(0, |r| r.len());
    if p.iter().any(|r| r.len() != cols) {
        return param("factor rows must have equal length");
    }
    for (i, r) in p.iter().enumerate() {
        if let Some(j) = r.iter().position(|&v| !(v >= 0.0)) {
            return param(format!("factor entry ({i},{j}) = {} is negative", r[j]));
        }
    }
    Ok(SymMatrix::from_fn(cols, |i, j| {
        p.iter().map(|r| r[i] * r[j]).sum()
    }))
}

// ---- closure operations ----

/// Kronecker product `A ⊗ B`, index `(i, k) ↦ i * dim(B) + k`.
pub fn kron(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    let dim = a.dim * b.dim;
    if dim > KRON_DIM_CAP {
        return capability(format!("kron dimension {dim} exceeds cap {KRON_DIM_CAP}"));
    }
    let nb = b.dim;
    let mut out = SymMatrix::zeros(dim);
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a.get(i, j);
            for k in 0..nb {
                let row = (i * nb + k) * dim + j * nb;
                for l in 0..nb {
                    out.data[row + l] = aij * b.get(k, l);
                }
            }
        }
    }
    Ok(out)
}

/// `N_{ij} = Σ_{l ∈ P_i, k ∈ P_j} M_{lk}`.
pub fn contract(m: &SymMatrix, p: &Partition) -> Result<SymMatrix> {
    if p.dim != m.dim {
        return param(format!(
            "partition of {} indices applied to a {}x{} matrix",
            p.dim, m.dim, m.dim
        ));
    }
    Ok(SymMatrix::from_fn(p.len(), |i, j| {
        let mut s = 0.0;
        for &l in &p.blocks[i] {
            for &k in &p.blocks[j] {
                s += m.get(l, k);
            }
        }
        s
    }))
}

/// Restriction to the rows/columns in `indices` (kept in the given order).
pub fn principal_submatrix(m: &SymMatrix, indices: &[usize]) -> Result<SymMatrix> {
    let mut seen = vec![false; m.dim];
    for &i in indices {
        if i >= m.dim {
            return param(format!("index {i} out of range {}", m.dim));
        }
        if seen[i] {
            return param(format!("index {i} repeated"));
        }
        seen[i] = true;
    }
    Ok(SymMatrix::from_fn(indices.len(), |a, b| {
        m.get(indices[a], indices[b])
    }))
}

/// `Pᵀ M P` for the permutation matrix of `perm`: `N_{ij} = M_{perm[i], perm[j]}`.
pub fn conjugate_by_permutation(m: &SymMatrix, perm: &[usize]) -> Result<SymMatrix> {
    if perm.len() != m.dim {
        return param("permutation length does not match matrix dimension");
    }
    let mut seen = vec![false; m.dim];
    for &p in perm {
        if p >= m.dim || seen[p] {
            return param("not a permutation");
        }
        seen[p] = true;
    }
    Ok(SymMatrix::from_fn(m.dim, |i, j| m.get(perm[i], perm[j])))
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn psd_and_dnn() {
        assert!(is_psd(&SymMatrix::ones(3), 1e-9).unwrap());
        assert!(!is_psd(&SymMatrix::diagonal(&[1.0, -1.0]), 1e-9).unwrap());
        assert!(is_dnn(&SymMatrix::ones(3), 1e-9).unwrap());
        let two_i_minus_j = SymMatrix::identity(3)
            .scaled(2.0)
            .add_scaled(&SymMatrix::ones(3), -1.0);
        assert!(!is_dnn(&two_i_minus_j, 1e-9).unwrap());
    }

    #[test]
    fn cp_certificate() {
        let g = cp_gram_certificate(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(g, m(&[&[2.0, 1.0], &[1.0, 1.0]]));
        // columns [1,1] and [0,1] as in PᵀP with P = [[1,0],[1,1]] read column-wise
        let p = cp_gram_certificate(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(p, m(&[&[1.0, 1.0], &[1.0, 2.0]]));
        assert!(cp_gram_certificate(&[vec![1.0, -0.5]]).is_err());
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&SymMatrix::identity(2), &SymMatrix::identity(3)).unwrap(),
            SymMatrix::identity(6)
        );
        assert_eq!(
            kron(&SymMatrix::ones(2), &SymMatrix::ones(2)).unwrap(),
            SymMatrix::ones(4)
        );
        let big = SymMatrix::zeros(65);
        assert!(matches!(kron(&big, &big), Err(Error::Capability(_))));
    }

    #[test]
    fn contraction_examples() {
        let p = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(
            contract(&SymMatrix::identity(4), &p).unwrap(),
            m(&[&[2.0, 0.0], &[0.0, 2.0]])
        );
        assert_eq!(
            contract(&SymMatrix::ones(4), &p).unwrap(),
            m(&[&[4.0, 4.0], &[4.0, 4.0]])
        );
        assert!(Partition::new(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(Partition::new(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 1], vec![]]).is_err());
        let q = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        assert!(contract(&SymMatrix::identity(4), &q).is_err());
    }

    #[test]
    fn submatrix_examples() {
        assert_eq!(
            principal_submatrix(&SymMatrix::identity(3), &[0, 2]).unwrap(),
            SymMatrix::identity(2)
        );
        assert_eq!(
            principal_submatrix(&SymMatrix::ones(3), &[1]).unwrap(),
            SymMatrix::ones(1)
        );
        assert!(principal_submatrix(&SymMatrix::ones(3), &[3]).is_err());
        assert!(principal_submatrix(&SymMatrix::ones(3), &[1, 1]).is_err());
    }

    #[test]
    fn from_rows_validates() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = m(&[&[1.0 / 3.0, -2.0], &[-2.0, 0.0]]);
        let s = a.to_json();
        assert!(s.starts_with("{\"dim\":2,\"rows\":[[3.3333333333333331e-1,"));
        assert_eq!(SymMatrix::from_json(&s).unwrap(), a);
        let l = a.clone().with_labels(VertexPairIndex::new(1, 2)).unwrap();
        let back = SymMatrix::from_json(&l.to_json()).unwrap();
        assert_eq!(back.labels(), Some(VertexPairIndex::new(1, 2)));
        assert!(SymMatrix::from_json(r#"{"dim":3,"rows":[[1]]}"#).is_err());
    }
}
