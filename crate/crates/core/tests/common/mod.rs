//! Oracles shared by the integration tests. None of them call the solver.
#![allow(dead_code)]

use conichom::Graph;

/// Exhaustive search over all `|V(Y)|^|V(X)|` vertex maps.
pub fn brute_force_hom(x: &Graph, y: &Graph) -> bool {
    let (nx, ny) = (x.n(), y.n());
    if nx == 0 {
        return true;
    }
    if ny == 0 {
        return false;
    }
    let mut map = vec![0usize; nx];
    loop {
        let ok = x.edges().iter().all(|&(u, v)| y.has_edge(map[u], map[v]));
        if ok {
            return true;
        }
        let mut i = 0;
        loop {
            if i == nx {
                return false;
            }
            map[i] += 1;
            if map[i] < ny {
                break;
            }
            map[i] = 0;
            i += 1;
        }
    }
}

/// Independence number by subset enumeration.
pub fn brute_force_alpha(g: &Graph) -> usize {
    let n = g.n();
    let masks: Vec<u32> = g
        .edges()
        .iter()
        .map(|&(u, v)| (1 << u) | (1 << v))
        .collect();
    (0u32..(1 << n))
        .filter(|&s| masks.iter().all(|&m| s & m != m))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// `-n λ_min / (λ_max - λ_min)` for an edge-transitive regular graph with
/// the given adjacency spectrum extremes.
pub fn edge_transitive_theta(n: usize, lmax: f64, lmin: f64) -> f64 {
    -(n as f64) * lmin / (lmax - lmin)
}

/// ϑ(C_n) from the closed-form cycle spectrum `2 cos(2πk/n)`.
pub fn cycle_theta(n: usize) -> f64 {
    let lmin = (0..n)
        .map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .fold(f64::INFINITY, f64::min);
    edge_transitive_theta(n, 2.0, lmin)
}

/// Petersen adjacency spectrum is `{3, 1, -2}`.
pub fn petersen_theta() -> f64 {
    edge_transitive_theta(10, 3.0, -2.0)
}

/// Dense Kronecker product of row-major square matrices.
pub fn dense_kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let mut out = vec![vec![0.0; m * n]; m * n];
    for i in 0..m {
        for j in 0..m {
            for k in 0..n {
                for l in 0..n {
                    out[i * n + k][j * n + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Smallest eigenvalue through nalgebra directly. The QR iteration can
/// return NaN on exactly structured matrices, so a diagonal shift is tried
/// when that happens.
pub fn lambda_min(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 0.0;
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    for shift in [0.0, 0.61, 1.7] {
        let vals = (&m + nalgebra::DMatrix::identity(n, n) * shift).symmetric_eigenvalues();
        if vals.iter().all(|v| v.is_finite()) {
            return vals.iter().copied().fold(f64::INFINITY, f64::min) - shift;
        }
    }
    panic!("no finite spectrum")
}

/// Whether `A + tol I` has a Cholesky factor.
pub fn psd_by_cholesky(rows: &[Vec<f64>], tol: f64) -> bool {
    let n = rows.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
        + nalgebra::DMatrix::identity(n, n) * tol;
    nalgebra::Cholesky::new(m).is_some()
}
