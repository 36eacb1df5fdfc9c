use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        let out = &scaled * self.vectors.transpose();
        (&out + out.transpose()) * 0.5
    }
}

/// Decomposes a symmetric matrix. Only the lower triangle is read.
pub fn eig_sym_dense(a: &DMatrix<f64>) -> Result<SymEigen> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let max_iter = 200 * n.max(10);
    let scale = a.amax().max(1.0);
    // nalgebra's implicit QR occasionally returns NaN on exactly structured
    // matrices (repeated 0/1 blocks); a diagonal shift moves it off that path
    // and changes eigenvalues by exactly the shift.
    let mut eig = None;
    for shift in [0.0, 0.37, 1.13, 2.71] {
        let shifted = if shift == 0.0 {
            a.clone()
        } else {
            a + DMatrix::identity(n, n) * (shift * scale)
        };
        let Some(mut e) = SymmetricEigen::try_new(shifted, f64::EPSILON, max_iter) else {
            continue;
        };
        if e.eigenvalues.iter().all(|v| v.is_finite())
            && e.eigenvectors.iter().all(|v| v.is_finite())
        {
            e.eigenvalues.add_scalar_mut(-shift * scale);
            eig = Some(e);
            break;
        }
    }
    let eig = eig.ok_or_else(|| Error::Numerical {
        message: "symmetric eigendecomposition failed (non-finite or no convergence)".into(),
        iterations: max_iter,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}
