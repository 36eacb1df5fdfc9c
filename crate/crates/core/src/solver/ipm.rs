// Infeasible primal-dual path-following method with Nesterov-Todd scaling
// and Mehrotra predictor-corrector steps.
//
// Internally the program is `min ⟨C, X⟩ s.t. A(X) = b, X ∈ K` with every
// constraint row scaled to unit Frobenius norm and `C` scaled to norm at
// most one. A PSD coefficient `v` on `(i, j)` means `v * X_ij`; as a
// symmetric matrix that is `v` on the diagonal and `v / 2` on both
// off-diagonal positions.

use nalgebra::{Cholesky, DMatrix, SVD};

use super::{Block, BlockValue, ConicProgram, Sense, SolveOptions, SolveReport, SolveStatus, Term};
use crate::linalg::{eig_sym_dense, SymMatrix};

type Mat = DMatrix<f64>;

const STEP_STALL: f64 = 1e-9;
const DIVERGENCE: f64 = 1e12;
const INFEASIBILITY_RATIO: f64 = 1e8;

#[derive(Default, Clone)]
struct Row {
    // (psd block, i, j, v) with i <= j, sorted and merged
    psd: Vec<(usize, usize, usize, f64)>,
    // (global orthant index, a)
    lin: Vec<(usize, f64)>,
}

struct Compiled {
    psd_dims: Vec<usize>,
    n_lin: usize,
    // user block -> (is_psd, internal index or orthant offset)
    layout: Vec<(bool, usize)>,
    rows: Vec<Row>,
    // rows dropped as identically zero with zero rhs
    kept: Vec<usize>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    c_psd: Vec<Mat>,
    c_lin: Vec<f64>,
    c_scale: f64,
    sign: f64,
    lin_cols: Vec<Vec<(usize, f64)>>,
    b_norm_inf: f64,
    c_norm_inf: f64,
    inconsistent_row: Option<usize>,
}

fn merge_terms(terms: &[Term], layout: &[(bool, usize)]) -> Row {
    let mut psd = Vec::new();
    let mut lin = Vec::new();
    for t in terms {
        match *t {
            Term::Entry { block, i, j, coef } => {
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                psd.push((layout[block].1, i, j, coef));
            }
            Term::Var { block, k, coef } => lin.push((layout[block].1 + k, coef)),
        }
    }
    psd.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    lin.sort_by(|a, b| a.0.cmp(&b.0));
    let mut row = Row::default();
    for e in psd {
        match row.psd.last_mut() {
            Some(last) if (last.0, last.1, last.2) == (e.0, e.1, e.2) => last.3 += e.3,
            _ => row.psd.push(e),
        }
    }
    for e in lin {
        match row.lin.last_mut() {
            Some(last) if last.0 == e.0 => last.1 += e.1,
            _ => row.lin.push(e),
        }
    }
    row.psd.retain(|e| e.3 != 0.0);
    row.lin.retain(|e| e.1 != 0.0);
    row
}

fn row_norm(row: &Row) -> f64 {
    let s: f64 = row
        .psd
        .iter()
        .map(|&(_, i, j, v)| if i == j { v * v } else { 0.5 * v * v })
        .sum::<f64>()
        + row.lin.iter().map(|&(_, a)| a * a).sum::<f64>();
    s.sqrt()
}

fn compile(p: &ConicProgram) -> Compiled {
    let mut psd_dims = Vec::new();
    let mut n_lin = 0;
    let layout: Vec<(bool, usize)> = p
        .blocks()
        .iter()
        .map(|b| match *b {
            Block::Psd(d) => {
                psd_dims.push(d);
                (true, psd_dims.len() - 1)
            }
            Block::Nonneg(m) => {
                n_lin += m;
                (false, n_lin - m)
            }
        })
        .collect();

    let sign = match p.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let obj = merge_terms(p.objective(), &layout);
    let mut c_psd: Vec<Mat> = psd_dims.iter().map(|&d| Mat::zeros(d, d)).collect();
    let mut c_lin = vec![0.0; n_lin];
    for &(q, i, j, v) in &obj.psd {
        if i == j {
            c_psd[q][(i, i)] += sign * v;
        } else {
            c_psd[q][(i, j)] += sign * 0.5 * v;
            c_psd[q][(j, i)] += sign * 0.5 * v;
        }
    }
    for &(k, a) in &obj.lin {
        c_lin[k] += sign * a;
    }
    let c_norm_inf = c_psd
        .iter()
        .map(|c| c.amax())
        .chain(c_lin.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let c_fro = (c_psd.iter().map(|c| c.norm_squared()).sum::<f64>()
        + c_lin.iter().map(|v| v * v).sum::<f64>())
    .sqrt();
    let c_scale = c_fro.max(1.0);
    for c in &mut c_psd {
        *c /= c_scale;
    }
    for v in &mut c_lin {
        *v /= c_scale;
    }

    let mut rows = Vec::new();
    let mut kept = Vec::new();
    let mut b = Vec::new();
    let mut row_scale = Vec::new();
    let mut inconsistent_row = None;
    let mut b_norm_inf: f64 = 0.0;
    for (k, (terms, rhs)) in p.constraints().iter().enumerate() {
        b_norm_inf = b_norm_inf.max(rhs.abs());
        let mut row = merge_terms(terms, &layout);
        let norm = row_norm(&row);
        if norm == 0.0 {
            if *rhs != 0.0 && inconsistent_row.is_none() {
                inconsistent_row = Some(k);
            }
            continue;
        }
        for e in &mut row.psd {
            e.3 /= norm;
        }
        for e in &mut row.lin {
            e.1 /= norm;
        }
        rows.push(row);
        kept.push(k);
        b.push(rhs / norm);
        row_scale.push(norm);
    }
    let mut lin_cols = vec![Vec::new(); n_lin];
    for (k, row) in rows.iter().enumerate() {
        for &(idx, a) in &row.lin {
            lin_cols[idx].push((k, a));
        }
    }
    Compiled {
        psd_dims,
        n_lin,
        layout,
        rows,
        kept,
        b,
        row_scale,
        c_psd,
        c_lin,
        c_scale,
        sign,
        lin_cols,
        b_norm_inf,
        c_norm_inf,
        inconsistent_row,
    }
}

/// A primal or dual point: one matrix per PSD block plus the orthant vector.
#[derive(Clone)]
struct Point {
    psd: Vec<Mat>,
    lin: Vec<f64>,
}

impl Point {
    fn inner(&self, other: &Point) -> f64 {
        self.psd
            .iter()
            .zip(&other.psd)
            .map(|(a, b)| a.dot(b))
            .sum::<f64>()
            + self
                .lin
                .iter()
                .zip(&other.lin)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    fn axpy(&mut self, alpha: f64, d: &Point) {
        for (a, b) in self.psd.iter_mut().zip(&d.psd) {
            *a += b * alpha;
            symmetrize(a);
        }
        for (a, b) in self.lin.iter_mut().zip(&d.lin) {
            *a += alpha * b;
        }
    }

    fn norm_inf(&self) -> f64 {
        self.psd
            .iter()
            .map(|m| m.amax())
            .chain(self.lin.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    fn norm_fro(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

fn symmetrize(a: &mut Mat) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

impl Compiled {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn zero_point(&self) -> Point {
        Point {
            psd: self.psd_dims.iter().map(|&d| Mat::zeros(d, d)).collect(),
            lin: vec![0.0; self.n_lin],
        }
    }

    fn c_point(&self) -> Point {
        Point {
            psd: self.c_psd.clone(),
            lin: self.c_lin.clone(),
        }
    }

    /// `A(X)`.
    fn apply(&self, x: &Point) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                row.psd
                    .iter()
                    .map(|&(q, i, j, v)| v * x.psd[q][(i, j)])
                    .sum::<f64>()
                    + row.lin.iter().map(|&(k, a)| a * x.lin[k]).sum::<f64>()
            })
            .collect()
    }

    /// `A*(y)`.
    fn adjoint(&self, y: &[f64]) -> Point {
        let mut out = self.zero_point();
        for (row, &yk) in self.rows.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for &(q, i, j, v) in &row.psd {
                if i == j {
                    out.psd[q][(i, i)] += yk * v;
                } else {
                    let h = 0.5 * yk * v;
                    out.psd[q][(i, j)] += h;
                    out.psd[q][(j, i)] += h;
                }
            }
            for &(k, a) in &row.lin {
                out.lin[k] += yk * a;
            }
        }
        out
    }

    /// Schur complement `M_kl = ⟨A_k, W A_l W⟩ + Σ a_k a_l x/z`.
    fn schur(&self, w: &[Mat], d_lin: &[f64]) -> Mat {
        let m = self.m();
        let mut s = Mat::zeros(m, m);
        for k in 0..m {
            let rk = &self.rows[k].psd;
            if rk.is_empty() {
                continue;
            }
            for l in k..m {
                let rl = &self.rows[l].psd;
                let mut acc = 0.0;
                for &(q, i, j, v) in rk {
                    let wq = &w[q];
                    for &(q2, c, d, beta) in rl {
                        if q2 != q {
                            continue;
                        }
                        acc += v * beta * 0.5 * (wq[(i, c)] * wq[(j, d)] + wq[(i, d)] * wq[(j, c)]);
                    }
                }
                s[(k, l)] = acc;
            }
        }
        for (col, &dk) in self.lin_cols.iter().zip(d_lin) {
            for (a, &(k, ak)) in col.iter().enumerate() {
                for &(l, al) in &col[a..] {
                    let (lo, hi) = if k <= l { (k, l) } else { (l, k) };
                    s[(lo, hi)] += ak * al * dk;
                }
            }
        }
        for k in 0..m {
            for l in 0..k {
                s[(k, l)] = s[(l, k)];
            }
        }
        s
    }
}

/// Nesterov-Todd scaling of one PSD block: `W = G Gᵀ` with
/// `Gᵀ Z G = G⁻¹ X G⁻ᵀ = diag(lambda)`.
struct NtScaling {
    g: Mat,
    w: Mat,
    lambda: Vec<f64>,
}

fn nt_scaling(x: &Mat, z: &Mat) -> Option<NtScaling> {
    let lx = Cholesky::new(x.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let prod = lz.transpose() * &lx;
    let svd = SVD::new(prod, false, true);
    let v_t = svd.v_t?;
    let sv = svd.singular_values;
    if sv.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return None;
    }
    let n = x.nrows();
    // G = Lx V Σ^{-1/2}
    let mut g = lx * v_t.transpose();
    for j in 0..n {
        let s = 1.0 / sv[j].sqrt();
        for i in 0..n {
            g[(i, j)] *= s;
        }
    }
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    Some(NtScaling {
        g,
        w,
        lambda: sv.iter().copied().collect(),
    })
}

fn factor_schur(mut s: Mat) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let diag_max = (0..s.nrows()).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(c) = Cholesky::new(s.clone()) {
        return Some(c);
    }
    let mut reg = 1e-14 * diag_max.max(1e-300);
    for _ in 0..6 {
        for i in 0..s.nrows() {
            s[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(s.clone()) {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

/// Largest `α` with `Λ + α Δ̃ ⪰ 0` (Δ̃ given in the scaled space).
fn psd_step(lambda: &[f64], delta: &Mat) -> f64 {
    let n = lambda.len();
    let inv_sqrt: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let t = Mat::from_fn(n, n, |i, j| {
        0.5 * (delta[(i, j)] + delta[(j, i)]) * inv_sqrt[i] * inv_sqrt[j]
    });
    match eig_sym_dense(&t) {
        Ok(e) if e.min() < 0.0 => -1.0 / e.min(),
        Ok(_) => f64::INFINITY,
        Err(_) => 0.0,
    }
}

/// Shrinks `alpha` until every PSD block of `x + alpha dx` has a Cholesky
/// factor; the scaled-space step length can overshoot when the scaling is
/// badly conditioned.
fn backtrack(x: &Point, dx: &Point, mut alpha: f64) -> f64 {
    for _ in 0..40 {
        let inside = x
            .psd
            .iter()
            .zip(&dx.psd)
            .all(|(m, d)| Cholesky::new(m + d * alpha).is_some());
        if inside {
            return alpha;
        }
        alpha *= 0.8;
    }
    0.0
}

fn lin_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&xi, &d)| -xi / d)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: Point,
    dz: Point,
    dy: Vec<f64>,
    // scaled-space directions for the corrector and the step lengths
    dx_scaled: Vec<Mat>,
    dz_scaled: Vec<Mat>,
}

#[derive(Clone)]
struct Iterate<'a> {
    prob: &'a Compiled,
    x: Point,
    z: Point,
    y: Vec<f64>,
}

impl Iterate<'_> {
    /// Solves the Newton system for the scaled complementarity right-hand
    /// side `s` (PSD, `ΔX̃ + ΔZ̃ = s`) and `r` (orthant, `zΔx + xΔz = r`).
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        chol: &Cholesky<f64, nalgebra::Dyn>,
        nt: &[NtScaling],
        d_lin: &[f64],
        s: &[Mat],
        r: &[f64],
        rp: &[f64],
        rd: &Point,
    ) -> Direction {
        let prob = self.prob;
        // U = G S Gᵀ, V = W Rd W
        let mut u = prob.zero_point();
        let mut v = prob.zero_point();
        for (q, sc) in nt.iter().enumerate() {
            u.psd[q] = &sc.g * &s[q] * sc.g.transpose();
            v.psd[q] = &sc.w * &rd.psd[q] * &sc.w;
        }
        for k in 0..prob.n_lin {
            u.lin[k] = r[k] / self.z.lin[k];
            v.lin[k] = d_lin[k] * rd.lin[k];
        }
        let au = prob.apply(&u);
        let av = prob.apply(&v);
        let rhs: Vec<f64> = (0..prob.m()).map(|k| rp[k] - au[k] + av[k]).collect();
        let dy: Vec<f64> = chol
            .solve(&nalgebra::DVector::from_vec(rhs))
            .iter()
            .copied()
            .collect();
        let aty = prob.adjoint(&dy);
        let mut dz = rd.clone();
        dz.axpy(-1.0, &aty);
        let mut dx = u;
        let mut dx_scaled = Vec::with_capacity(nt.len());
        let mut dz_scaled = Vec::with_capacity(nt.len());
        for (q, sc) in nt.iter().enumerate() {
            let wdzw = &sc.w * &dz.psd[q] * &sc.w;
            dx.psd[q] -= wdzw;
            symmetrize(&mut dx.psd[q]);
            let mut dzs = sc.g.transpose() * &dz.psd[q] * &sc.g;
            symmetrize(&mut dzs);
            dx_scaled.push(&s[q] - &dzs);
            dz_scaled.push(dzs);
        }
        for k in 0..prob.n_lin {
            dx.lin[k] -= d_lin[k] * dz.lin[k];
        }
        Direction {
            dx,
            dz,
            dy,
            dx_scaled,
            dz_scaled,
        }
    }

    fn step_lengths(&self, nt: &[NtScaling], dir: &Direction) -> (f64, f64) {
        let mut ap = lin_step(&self.x.lin, &dir.dx.lin);
        let mut ad = lin_step(&self.z.lin, &dir.dz.lin);
        for (q, sc) in nt.iter().enumerate() {
            ap = ap.min(psd_step(&sc.lambda, &dir.dx_scaled[q]));
            ad = ad.min(psd_step(&sc.lambda, &dir.dz_scaled[q]));
        }
        (ap, ad)
    }
}

fn initial_point(prob: &Compiled) -> (Point, Point) {
    let mut x = prob.zero_point();
    let mut z = prob.zero_point();
    let max_b = prob.b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (q, &d) in prob.psd_dims.iter().enumerate() {
        let df = d as f64;
        let xi = 10.0_f64.max(df.sqrt()).max(df * (1.0 + max_b) / 2.0);
        let eta = 10.0_f64.max(df.sqrt());
        x.psd[q] = Mat::identity(d, d) * xi;
        z.psd[q] = Mat::identity(d, d) * eta;
    }
    if prob.n_lin > 0 {
        let mf = prob.n_lin as f64;
        let xi = 10.0_f64.max(mf.sqrt()).max(1.0 + max_b);
        let eta = 10.0_f64.max(mf.sqrt());
        x.lin.iter_mut().for_each(|v| *v = xi);
        z.lin.iter_mut().for_each(|v| *v = eta);
    }
    (x, z)
}

pub(super) fn solve(p: &ConicProgram, opts: &SolveOptions) -> SolveReport {
    let prob = compile(p);
    let nu = prob.psd_dims.iter().sum::<usize>() + prob.n_lin;
    let (x, z) = initial_point(&prob);
    let mut it = Iterate {
        prob: &prob,
        x,
        z,
        y: vec![0.0; prob.m()],
    };
    if prob.inconsistent_row.is_some() {
        return finish(p, &prob, &it, SolveStatus::InfeasibleCertificate, 0);
    }
    if nu == 0 {
        let status = if prob.m() == 0 {
            SolveStatus::Optimal
        } else {
            SolveStatus::InfeasibleCertificate
        };
        return finish(p, &prob, &it, status, 0);
    }
    let c = prob.c_point();
    let mut stalled = 0;
    // Late iterations can lose feasibility when the Schur complement is
    // nearly singular; early exits report the best iterate seen.
    let mut best: Option<(f64, Iterate<'_>)> = None;

    for iter in 0..opts.max_iter {
        let ax = prob.apply(&it.x);
        let rp: Vec<f64> = prob.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rd = c.clone();
        rd.axpy(-1.0, &prob.adjoint(&it.y));
        rd.axpy(-1.0, &it.z);
        let mu = it.x.inner(&it.z) / nu as f64;

        let pobj = prob.c_scale * c.inner(&it.x);
        let dobj = prob.c_scale * prob.b.iter().zip(&it.y).map(|(b, y)| b * y).sum::<f64>();
        let p_res = rp
            .iter()
            .zip(&prob.row_scale)
            .map(|(r, s)| (r * s).abs())
            .fold(0.0, f64::max);
        let d_res = prob.c_scale * rd.norm_inf();
        let gap = (pobj - dobj).abs();
        if opts.verbose {
            eprintln!(
                "ipm {iter:3}  pobj {:+.10e}  dobj {:+.10e}  pinf {p_res:.2e}  dinf {d_res:.2e}  gap {gap:.2e}  mu {mu:.2e}",
                prob.sign * pobj,
                prob.sign * dobj
            );
        }
        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            return finish_best(
                p,
                &prob,
                it,
                best,
                SolveStatus::NumericalFailure,
                iter,
                opts,
                "non-finite objective",
            );
        }
        let p_rel = p_res / (1.0 + prob.b_norm_inf);
        let d_rel = d_res / (1.0 + prob.c_norm_inf);
        let g_rel = gap / (1.0 + pobj.abs());
        if p_rel <= opts.feas_tol && d_rel <= opts.feas_tol && g_rel <= opts.gap_tol {
            return finish(p, &prob, &it, SolveStatus::Optimal, iter);
        }
        let score = p_rel.max(d_rel).max(g_rel);
        if best.as_ref().map_or(true, |(b, _)| score < *b) {
            best = Some((score, it.clone()));
        }
        // primal infeasibility: bᵀy → ∞ with A*y + Z bounded
        let by: f64 = prob.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
        let mut aty_z = prob.adjoint(&it.y);
        aty_z.axpy(1.0, &it.z);
        if by > 0.0 && aty_z.norm_fro() * INFEASIBILITY_RATIO < by {
            return finish(p, &prob, &it, SolveStatus::InfeasibleCertificate, iter);
        }
        let cx = c.inner(&it.x);
        if cx < 0.0 && it.x.norm_inf() > DIVERGENCE {
            let nax = prob.apply(&it.x).iter().map(|v| v * v).sum::<f64>().sqrt();
            if nax * INFEASIBILITY_RATIO < -cx * 1e4 {
                return finish(p, &prob, &it, SolveStatus::DualInfeasible, iter);
            }
        }
        if it.x.norm_inf() > DIVERGENCE * 1e3 || it.z.norm_inf() > DIVERGENCE * 1e3 {
            return finish_best(
                p,
                &prob,
                it,
                best,
                SolveStatus::NumericalFailure,
                iter,
                opts,
                "divergence",
            );
        }

        // scaling
        let mut nt = Vec::with_capacity(prob.psd_dims.len());
        for q in 0..prob.psd_dims.len() {
            match nt_scaling(&it.x.psd[q], &it.z.psd[q]) {
                Some(s) => nt.push(s),
                None => {
                    return finish_best(
                        p,
                        &prob,
                        it,
                        best,
                        SolveStatus::NumericalFailure,
                        iter,
                        opts,
                        "NT scaling failed",
                    )
                }
            }
        }
        let d_lin: Vec<f64> = it.x.lin.iter().zip(&it.z.lin).map(|(x, z)| x / z).collect();
        let w: Vec<Mat> = nt.iter().map(|s| s.w.clone()).collect();
        let Some(chol) = factor_schur(prob.schur(&w, &d_lin)) else {
            return finish_best(
                p,
                &prob,
                it,
                best,
                SolveStatus::NumericalFailure,
                iter,
                opts,
                "Schur factorization failed",
            );
        };

        // predictor
        let s_aff: Vec<Mat> = nt
            .iter()
            .map(|sc| {
                Mat::from_diagonal(&nalgebra::DVector::from_iterator(
                    sc.lambda.len(),
                    sc.lambda.iter().map(|l| -l),
                ))
            })
            .collect();
        let r_aff: Vec<f64> =
            it.x.lin
                .iter()
                .zip(&it.z.lin)
                .map(|(x, z)| -x * z)
                .collect();
        let aff = it.direction(&chol, &nt, &d_lin, &s_aff, &r_aff, &rp, &rd);
        let (ap_max, ad_max) = it.step_lengths(&nt, &aff);
        let ap = ap_max.min(1.0);
        let ad = ad_max.min(1.0);
        let mut xa = it.x.clone();
        xa.axpy(ap, &aff.dx);
        let mut za = it.z.clone();
        za.axpy(ad, &aff.dz);
        let mu_aff = (xa.inner(&za) / nu as f64).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let gamma = 0.9 + 0.09 * ap.min(ad);

        // corrector
        let target = sigma * mu;
        let s_cor: Vec<Mat> = nt
            .iter()
            .enumerate()
            .map(|(q, sc)| {
                let n = sc.lambda.len();
                let prod = &aff.dx_scaled[q] * &aff.dz_scaled[q];
                Mat::from_fn(n, n, |i, j| {
                    let mut r = -0.5 * (prod[(i, j)] + prod[(j, i)]);
                    if i == j {
                        r += target - sc.lambda[i] * sc.lambda[i];
                    }
                    2.0 * r / (sc.lambda[i] + sc.lambda[j])
                })
            })
            .collect();
        let r_cor: Vec<f64> = (0..prob.n_lin)
            .map(|k| target - it.x.lin[k] * it.z.lin[k] - aff.dx.lin[k] * aff.dz.lin[k])
            .collect();
        let dir = it.direction(&chol, &nt, &d_lin, &s_cor, &r_cor, &rp, &rd);
        let (ap_max, ad_max) = it.step_lengths(&nt, &dir);
        let ap = backtrack(&it.x, &dir.dx, (gamma * ap_max).min(1.0));
        let ad = backtrack(&it.z, &dir.dz, (gamma * ad_max).min(1.0));
        if !(ap.is_finite() && ad.is_finite()) {
            return finish_best(
                p,
                &prob,
                it,
                best,
                SolveStatus::NumericalFailure,
                iter,
                opts,
                "non-finite step",
            );
        }
        if ap < STEP_STALL && ad < STEP_STALL {
            stalled += 1;
            if stalled >= 3 {
                return finish_best(
                    p,
                    &prob,
                    it,
                    best,
                    SolveStatus::NumericalFailure,
                    iter,
                    opts,
                    "stalled steps",
                );
            }
        } else {
            stalled = 0;
        }
        it.x.axpy(ap, &dir.dx);
        it.z.axpy(ad, &dir.dz);
        for (y, dy) in it.y.iter_mut().zip(&dir.dy) {
            *y += ad * dy;
        }
    }
    finish_best(
        p,
        &prob,
        it,
        best,
        SolveStatus::IterationLimit,
        opts.max_iter,
        opts,
        "iteration limit",
    )
}

fn finish_best(
    p: &ConicProgram,
    prob: &Compiled,
    last: Iterate<'_>,
    best: Option<(f64, Iterate<'_>)>,
    status: SolveStatus,
    iterations: usize,
    opts: &SolveOptions,
    reason: &str,
) -> SolveReport {
    if opts.verbose {
        eprintln!("ipm stopped: {reason}");
    }
    let it = best.map_or(last, |(_, b)| b);
    finish(p, prob, &it, status, iterations)
}

fn finish(
    p: &ConicProgram,
    prob: &Compiled,
    it: &Iterate<'_>,
    status: SolveStatus,
    iterations: usize,
) -> SolveReport {
    let to_blocks = |pt: &Point, scale: f64| -> Vec<BlockValue> {
        p.blocks()
            .iter()
            .zip(&prob.layout)
            .map(|(b, &(is_psd, idx))| {
                if is_psd {
                    let m = &pt.psd[idx];
                    BlockValue::Psd(SymMatrix::from_fn(m.nrows(), |i, j| {
                        scale * 0.5 * (m[(i, j)] + m[(j, i)])
                    }))
                } else {
                    BlockValue::Nonneg(
                        pt.lin[idx..idx + b.size()]
                            .iter()
                            .map(|v| scale * v)
                            .collect(),
                    )
                }
            })
            .collect()
    };
    let primal_solution = to_blocks(&it.x, 1.0);
    let dual_slack = to_blocks(&it.z, prob.c_scale);
    let mut dual_solution = vec![0.0; p.constraints().len()];
    for (r, &k) in prob.kept.iter().enumerate() {
        dual_solution[k] = prob.sign * prob.c_scale * it.y[r] / prob.row_scale[r];
    }

    let primal_min = prob.c_scale * prob.c_point().inner(&it.x);
    let dual_min = prob.c_scale * prob.b.iter().zip(&it.y).map(|(b, y)| b * y).sum::<f64>();
    let primal_residual = p.max_constraint_violation(&primal_solution);
    let mut rd = prob.c_point();
    rd.axpy(-1.0, &prob.adjoint(&it.y));
    rd.axpy(-1.0, &it.z);
    SolveReport {
        status,
        primal_value: prob.sign * primal_min,
        dual_value: prob.sign * dual_min,
        gap: (primal_min - dual_min).abs(),
        primal_solution,
        dual_solution,
        dual_slack,
        iterations,
        primal_residual,
        dual_residual: prob.c_scale * rd.norm_inf(),
    }
}
