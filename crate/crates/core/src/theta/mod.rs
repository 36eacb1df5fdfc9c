//! The generalized theta programs over a matrix cone `K`:
//!
//! ```text
//! θ^K(G) = sup ⟨M, J⟩  s.t. tr M = 1, M_xx' = 0 (x ~ x'), M ∈ K
//! Θ^K(G) = inf t       s.t. N_xx = t, N_xx' = 0 (x ~ x'), N - J ⪰ 0, N ∈ K
//! ```
//!
//! Over PSD these are Lovász's ϑ(G) and ϑ(Ḡ); over DNN, Schrijver's ϑ⁻(G)
//! and Szegedy's ϑ⁺(Ḡ); over CP, the independence number and the fractional
//! chromatic number, which are computed combinatorially.

mod fractional;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, precondition, Error, Result};
use crate::graph::{automorphisms, Graph};
use crate::hom::exact::max_independent_set;
use crate::linalg::{conjugate_by_permutation, SymMatrix};
use crate::solver::{self, ConicProgram, Sense, SolveOptions, SolveStatus, Term};

pub use fractional::{fractional_chromatic, FractionalColoring};

/// The three cones with an implemented theory, ordered `Cp ⊂ Dnn ⊂ Splus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeTag {
    Cp,
    Dnn,
    Splus,
}

impl ConeTag {
    pub const ALL: [ConeTag; 3] = [ConeTag::Cp, ConeTag::Dnn, ConeTag::Splus];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConeTag::Cp => "cp",
            ConeTag::Dnn => "dnn",
            ConeTag::Splus => "splus",
        }
    }

    /// Whether every member of the cone is entrywise nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, ConeTag::Splus)
    }
}

impl fmt::Display for ConeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConeTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cp" => Ok(ConeTag::Cp),
            "dnn" => Ok(ConeTag::Dnn),
            "splus" | "s+" | "psd" => Ok(ConeTag::Splus),
            other => param(format!(
                "unknown cone '{other}' (expected cp, dnn or splus)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaKind {
    Theta,
    BigTheta,
}

impl ThetaKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThetaKind::Theta => "theta",
            ThetaKind::BigTheta => "big_theta",
        }
    }
}

impl FromStr for ThetaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "theta" => Ok(ThetaKind::Theta),
            "big_theta" | "bigtheta" => Ok(ThetaKind::BigTheta),
            other => param(format!("unknown theta kind '{other}'")),
        }
    }
}

/// How a theta value was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Solver {
        status: SolveStatus,
        iterations: usize,
    },
    /// Exact combinatorial computation (or an LP over enumerated sets).
    Combinatorial(&'static str),
    /// Closed form for a graph with a single vertex.
    Trivial,
}

#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub value: f64,
    /// `M` for θ, `N` for Θ.
    pub solution: SymMatrix,
    pub cone: ConeTag,
    pub kind: ThetaKind,
    /// Duality gap of the underlying solve (zero for exact methods).
    pub gap: f64,
    /// Whether the returned solution passed re-verification.
    pub attained: bool,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct ThetaJson<'a> {
    parameter: &'a str,
    cone: &'a str,
    value: f64,
    gap: f64,
    attained: bool,
}

impl ThetaResult {
    /// `{"parameter", "cone", "value", "gap", "attained"}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ThetaJson {
            parameter: self.kind.as_str(),
            cone: self.cone.as_str(),
            value: self.value,
            gap: self.gap,
            attained: self.attained,
        })
        .expect("plain struct serializes")
    }
}

/// Residuals of a candidate solution of θ^K or Θ^K.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThetaResiduals {
    /// θ: `|tr M - 1|`. Θ: largest deviation of a diagonal entry from `t`.
    pub normalization: f64,
    /// Largest `|M_xx'|` over edges.
    pub edge: f64,
    /// Violation of `M ∈ K` (for CP only the DNN relaxation is checked).
    pub cone: f64,
    /// Θ only: `max(0, -λ_min(N - J))`.
    pub shifted_psd: f64,
}

impl ThetaResiduals {
    pub fn max(&self) -> f64 {
        self.normalization
            .max(self.edge)
            .max(self.cone)
            .max(self.shifted_psd)
    }
}

fn cone_violation(m: &SymMatrix, cone: ConeTag) -> Result<f64> {
    let mut v = (-m.min_eigenvalue()?).max(0.0);
    if cone.is_nonnegative() {
        v = v.max(-m.min_entry());
    }
    Ok(v)
}

fn edge_violation(g: &Graph, m: &SymMatrix) -> f64 {
    g.edges()
        .iter()
        .map(|&(u, v)| m.get(u, v).abs())
        .fold(0.0, f64::max)
}

fn check_dim(g: &Graph, m: &SymMatrix) -> Result<()> {
    if g.n() != m.dim() {
        return param(format!(
            "matrix of dimension {} for a graph on {} vertices",
            m.dim(),
            g.n()
        ));
    }
    Ok(())
}

/// Residuals of `m` as a solution of θ^K(g); its value is `⟨m, J⟩`.
pub fn theta_residuals(g: &Graph, cone: ConeTag, m: &SymMatrix) -> Result<ThetaResiduals> {
    check_dim(g, m)?;
    Ok(ThetaResiduals {
        normalization: (m.trace() - 1.0).abs(),
        edge: edge_violation(g, m),
        cone: cone_violation(m, cone)?,
        shifted_psd: 0.0,
    })
}

/// Residuals of `n` as a solution of Θ^K(g) with value `t`.
pub fn big_theta_residuals(
    g: &Graph,
    cone: ConeTag,
    n: &SymMatrix,
    t: f64,
) -> Result<ThetaResiduals> {
    check_dim(g, n)?;
    let shifted = n.add_scaled(&SymMatrix::ones(n.dim()), -1.0);
    Ok(ThetaResiduals {
        normalization: n.diag().iter().map(|d| (d - t).abs()).fold(0.0, f64::max),
        edge: edge_violation(g, n),
        cone: cone_violation(n, cone)?,
        shifted_psd: (-shifted.min_eigenvalue()?).max(0.0),
    })
}

fn reject_empty(g: &Graph) -> Result<()> {
    if g.n() == 0 {
        return param("theta is undefined for the graph with no vertices");
    }
    Ok(())
}

/// Pairs `i < j` that are not edges.
fn non_edges(g: &Graph) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Adds `X_ij - s = rhs` for each pair, with `s` in a fresh orthant block.
/// This is how entrywise nonnegativity of a PSD block is expressed.
pub(crate) fn add_entry_slacks(
    p: &mut ConicProgram,
    block: usize,
    pairs: &[(usize, usize)],
    rhs: f64,
) {
    if pairs.is_empty() {
        return;
    }
    let slack = p.add_nonneg_block(pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        p.add_constraint(
            vec![Term::entry(block, i, j, 1.0), Term::var(slack, k, -1.0)],
            rhs,
        );
    }
}

/// The θ^K program for `K ∈ {DNN, S+}`. Block 0 holds `M`.
pub fn theta_program(g: &Graph, cone: ConeTag) -> Result<ConicProgram> {
    if cone == ConeTag::Cp {
        return param("the CP theta program is not solved by the conic solver");
    }
    let n = g.n();
    let mut p = ConicProgram::new(Sense::Maximize);
    let b = p.add_psd_block(n);
    for i in 0..n {
        p.add_objective_term(Term::entry(b, i, i, 1.0));
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                p.add_objective_term(Term::entry(b, i, j, 2.0));
            }
        }
    }
    p.add_constraint((0..n).map(|i| Term::entry(b, i, i, 1.0)).collect(), 1.0);
    for (u, v) in g.edges() {
        p.add_constraint(vec![Term::entry(b, u, v, 1.0)], 0.0);
    }
    if cone == ConeTag::Dnn {
        add_entry_slacks(&mut p, b, &non_edges(g), 0.0);
    }
    Ok(p)
}

/// The Θ^K program for `K ∈ {DNN, S+}` in the variable `Y = N - J ⪰ 0`
/// (block 0). Its optimal value is `Θ^K - 1`.
pub fn big_theta_program(g: &Graph, cone: ConeTag) -> Result<ConicProgram> {
    if cone == ConeTag::Cp {
        return param("the CP big-theta program is not solved by the conic solver");
    }
    let n = g.n();
    let mut p = ConicProgram::new(Sense::Minimize);
    let b = p.add_psd_block(n);
    p.add_objective_term(Term::entry(b, 0, 0, 1.0));
    for x in 1..n {
        p.add_constraint(
            vec![Term::entry(b, x, x, 1.0), Term::entry(b, 0, 0, -1.0)],
            0.0,
        );
    }
    for (u, v) in g.edges() {
        p.add_constraint(vec![Term::entry(b, u, v, 1.0)], -1.0);
    }
    // N = Y + J ⪰ 0 follows from Y ⪰ 0; DNN adds N_xx' ≥ 0 off the edges
    if cone == ConeTag::Dnn {
        add_entry_slacks(&mut p, b, &non_edges(g), -1.0);
    }
    Ok(p)
}

/// Solver options used by the theta functions unless overridden.
pub fn default_options() -> SolveOptions {
    SolveOptions::default()
}

/// θ^K(G) with default solver options.
pub fn theta(g: &Graph, cone: ConeTag) -> Result<ThetaResult> {
    theta_with(g, cone, &default_options())
}

/// Θ^K(G) with default solver options.
pub fn big_theta(g: &Graph, cone: ConeTag) -> Result<ThetaResult> {
    big_theta_with(g, cone, &default_options())
}

pub fn compute(
    g: &Graph,
    cone: ConeTag,
    kind: ThetaKind,
    opts: &SolveOptions,
) -> Result<ThetaResult> {
    match kind {
        ThetaKind::Theta => theta_with(g, cone, opts),
        ThetaKind::BigTheta => big_theta_with(g, cone, opts),
    }
}

/// Tolerance for re-verifying a solver solution: a few times the
/// requested feasibility tolerance, scaled by the matrix size.
fn verify_tol(opts: &SolveOptions, scale: f64) -> f64 {
    10.0 * opts.feas_tol * scale.max(1.0)
}

fn solver_failure(status: SolveStatus, iterations: usize, what: &str) -> Error {
    Error::Numerical {
        message: format!("{what}: solver ended with status {status:?}"),
        iterations,
    }
}

pub fn theta_with(g: &Graph, cone: ConeTag, opts: &SolveOptions) -> Result<ThetaResult> {
    reject_empty(g)?;
    let n = g.n();
    if n == 1 {
        return Ok(trivial(cone, ThetaKind::Theta));
    }
    if cone == ConeTag::Cp {
        let s = max_independent_set(g)?;
        let a = s.len() as f64;
        let mut m = SymMatrix::zeros(n);
        for &i in &s {
            for &j in &s {
                m.set(i, j, 1.0 / a);
            }
        }
        return Ok(ThetaResult {
            value: a,
            solution: m,
            cone,
            kind: ThetaKind::Theta,
            gap: 0.0,
            attained: true,
            provenance: Provenance::Combinatorial("maximum independent set"),
        });
    }
    let p = theta_program(g, cone)?;
    let r = solver::solve(&p, opts)?;
    if r.status != SolveStatus::Optimal {
        return Err(solver_failure(r.status, r.iterations, "theta"));
    }
    let m = r.psd(0).clone();
    let value = r.primal_value;
    let res = theta_residuals(g, cone, &m)?;
    Ok(ThetaResult {
        value,
        attained: res.max() <= verify_tol(opts, 1.0),
        solution: m,
        cone,
        kind: ThetaKind::Theta,
        gap: r.gap,
        provenance: Provenance::Solver {
            status: r.status,
            iterations: r.iterations,
        },
    })
}

pub fn big_theta_with(g: &Graph, cone: ConeTag, opts: &SolveOptions) -> Result<ThetaResult> {
    reject_empty(g)?;
    let n = g.n();
    if n == 1 {
        return Ok(trivial(cone, ThetaKind::BigTheta));
    }
    if cone == ConeTag::Cp {
        let fc = fractional_chromatic(g)?;
        let res = big_theta_residuals(g, cone, &fc.matrix, fc.value)?;
        return Ok(ThetaResult {
            value: fc.value,
            attained: res.max() <= 1e-7 * fc.value.max(1.0),
            solution: fc.matrix,
            cone,
            kind: ThetaKind::BigTheta,
            gap: fc.gap,
            provenance: Provenance::Combinatorial("fractional colouring LP"),
        });
    }
    let p = big_theta_program(g, cone)?;
    let r = solver::solve(&p, opts)?;
    if r.status != SolveStatus::Optimal {
        return Err(solver_failure(r.status, r.iterations, "big theta"));
    }
    let nmat = r.psd(0).add_scaled(&SymMatrix::ones(n), 1.0);
    let value = r.primal_value + 1.0;
    let res = big_theta_residuals(g, cone, &nmat, value)?;
    Ok(ThetaResult {
        value,
        attained: res.max() <= verify_tol(opts, value),
        solution: nmat,
        cone,
        kind: ThetaKind::BigTheta,
        gap: r.gap,
        provenance: Provenance::Solver {
            status: r.status,
            iterations: r.iterations,
        },
    })
}

/// Certified bounds on θ^K(G) for `K ∈ {DNN, S+}` from one solve,
/// whatever its final status.
#[derive(Clone, Debug)]
pub struct ThetaBounds {
    /// Objective of the returned `M` when it passes re-verification.
    pub lower: Option<f64>,
    /// Dual objective when the dual residual is small.
    pub upper: Option<f64>,
    pub status: SolveStatus,
    pub solution: SymMatrix,
}

pub fn theta_bounds(g: &Graph, cone: ConeTag, opts: &SolveOptions) -> Result<ThetaBounds> {
    reject_empty(g)?;
    let p = theta_program(g, cone)?;
    let r = solver::solve(&p, opts)?;
    let m = r.psd(0).clone();
    let tol = verify_tol(opts, 1.0);
    let res = theta_residuals(g, cone, &m)?;
    let lower = (res.max() <= tol).then(|| m.sum() / m.trace());
    let upper = (r.dual_residual <= tol).then_some(r.dual_value);
    Ok(ThetaBounds {
        lower,
        upper,
        status: r.status,
        solution: m,
    })
}

fn trivial(cone: ConeTag, kind: ThetaKind) -> ThetaResult {
    ThetaResult {
        value: 1.0,
        solution: SymMatrix::identity(1),
        cone,
        kind,
        gap: 0.0,
        attained: true,
        provenance: Provenance::Trivial,
    }
}

/// Average of `Pᵀ M P` over all automorphisms `π` of `g`,
/// i.e. `M̄_ij = mean_π M_{π(i) π(j)}`.
pub fn symmetrize(m: &SymMatrix, g: &Graph) -> Result<SymMatrix> {
    check_dim(g, m)?;
    let group = automorphisms(g)?;
    let mut acc = SymMatrix::zeros(m.dim());
    for perm in &group {
        acc = acc.add_scaled(&conjugate_by_permutation(m, perm)?, 1.0);
    }
    Ok(acc.scaled(1.0 / group.len() as f64))
}

/// Tolerance for "constant diagonal / constant row sum" checks.
pub const CONSTANT_TOL: f64 = 1e-6;

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// From a θ^K solution `M̄` with constant diagonal and constant row sums and
/// value `t = ⟨M̄, J⟩`, the Θ^K solution `N = (n²/t) M̄` of value `n/t`.
pub fn theta_to_big_theta_scaling(m_bar: &SymMatrix, g: &Graph) -> Result<SymMatrix> {
    check_dim(g, m_bar)?;
    let n = g.n() as f64;
    let t = m_bar.sum();
    if !(t > 0.0) {
        return precondition(format!("objective value {t} is not positive"));
    }
    let diag = m_bar.diag();
    let rows = m_bar.row_sums();
    let scale = t.max(1.0);
    if spread(&diag) > CONSTANT_TOL || spread(&rows) > CONSTANT_TOL * scale {
        return precondition(format!(
            "solution must have constant diagonal and row sums (spreads {:.2e}, {:.2e})",
            spread(&diag),
            spread(&rows)
        ));
    }
    Ok(m_bar.scaled(n * n / t))
}

/// From a Θ^K solution `N` with constant diagonal `t`, the θ^K solution
/// `M = N / (t n)` of value at least `n / t`.
pub fn big_theta_to_theta_scaling(nmat: &SymMatrix, g: &Graph) -> Result<SymMatrix> {
    check_dim(g, nmat)?;
    let diag = nmat.diag();
    let n = g.n() as f64;
    let t = diag.iter().sum::<f64>() / n;
    if !(t > 0.0) {
        return precondition(format!("diagonal value {t} is not positive"));
    }
    if spread(&diag) > CONSTANT_TOL * t.max(1.0) {
        return precondition(format!(
            "solution must have constant diagonal (spread {:.2e})",
            spread(&diag)
        ));
    }
    Ok(nmat.scaled(1.0 / (t * n)))
}
