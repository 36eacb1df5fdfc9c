//! Linear programs over a product of PSD blocks and nonnegative orthants.
//!
//! A [`ConicProgram`] is assembled term by term and handed to [`solve`]
//! (optimize) or [`feasibility`] (find any feasible point). Both run the
//! primal-dual interior-point method in [`ipm`].

mod ipm;

use std::env;

use crate::error::{capability, param, Result};
use crate::linalg::SymMatrix;

/// Environment variable overriding [`DEFAULT_MAX_PSD_DIM`].
pub const MAX_PSD_DIM_ENV: &str = "CONICHOM_MAX_PSD_DIM";
pub const DEFAULT_MAX_PSD_DIM: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Psd(usize),
    Nonneg(usize),
}

impl Block {
    pub fn size(&self) -> usize {
        match *self {
            Block::Psd(d) | Block::Nonneg(d) => d,
        }
    }
}

/// One coefficient of a linear functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    /// `coef * X_ij` on PSD block `block`. For `i != j` the coefficient is
    /// applied once; `(i, j)` and `(j, i)` name the same term.
    Entry {
        block: usize,
        i: usize,
        j: usize,
        coef: f64,
    },
    /// `coef * x_k` on orthant block `block`.
    Var { block: usize, k: usize, coef: f64 },
}

impl Term {
    pub fn entry(block: usize, i: usize, j: usize, coef: f64) -> Term {
        Term::Entry { block, i, j, coef }
    }

    pub fn var(block: usize, k: usize, coef: f64) -> Term {
        Term::Var { block, k, coef }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `opt ⟨C, X⟩ s.t. ⟨A_k, X⟩ = b_k, X ∈ S+^{d_1} × … × R+^{m_1} × …`.
#[derive(Clone, Debug)]
pub struct ConicProgram {
    blocks: Vec<Block>,
    objective: Vec<Term>,
    constraints: Vec<(Vec<Term>, f64)>,
    sense: Sense,
}

impl ConicProgram {
    pub fn new(sense: Sense) -> Self {
        ConicProgram {
            blocks: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
            sense,
        }
    }

    pub fn add_block(&mut self, block: Block) -> usize {
        self.blocks.push(block);
        self.blocks.len() - 1
    }

    pub fn add_psd_block(&mut self, dim: usize) -> usize {
        self.add_block(Block::Psd(dim))
    }

    pub fn add_nonneg_block(&mut self, len: usize) -> usize {
        self.add_block(Block::Nonneg(len))
    }

    pub fn add_objective_term(&mut self, term: Term) {
        self.objective.push(term);
    }

    pub fn set_objective(&mut self, terms: Vec<Term>) {
        self.objective = terms;
    }

    /// Adds `Σ terms = rhs` and returns its index.
    pub fn add_constraint(&mut self, terms: Vec<Term>, rhs: f64) -> usize {
        self.constraints.push((terms, rhs));
        self.constraints.len() - 1
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn objective(&self) -> &[Term] {
        &self.objective
    }

    pub fn constraints(&self) -> &[(Vec<Term>, f64)] {
        &self.constraints
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn total_psd_dim(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Psd(d) => *d,
                Block::Nonneg(_) => 0,
            })
            .sum()
    }

    /// Checks that every term refers to an existing block entry with the
    /// right kind and a finite coefficient.
    pub fn validate(&self) -> Result<()> {
        let check = |t: &Term, what: &str| -> Result<()> {
            match *t {
                Term::Entry { block, i, j, coef } => match self.blocks.get(block) {
                    Some(Block::Psd(d)) if i < *d && j < *d && coef.is_finite() => Ok(()),
                    Some(Block::Psd(d)) if i < *d && j < *d => {
                        param(format!("{what}: non-finite coefficient"))
                    }
                    Some(Block::Psd(d)) => param(format!(
                        "{what}: entry ({i},{j}) outside PSD block of size {d}"
                    )),
                    _ => param(format!("{what}: block {block} is not a PSD block")),
                },
                Term::Var { block, k, coef } => match self.blocks.get(block) {
                    Some(Block::Nonneg(m)) if k < *m && coef.is_finite() => Ok(()),
                    Some(Block::Nonneg(m)) if k < *m => {
                        param(format!("{what}: non-finite coefficient"))
                    }
                    Some(Block::Nonneg(m)) => param(format!(
                        "{what}: component {k} outside orthant of length {m}"
                    )),
                    _ => param(format!("{what}: block {block} is not an orthant block")),
                },
            }
        };
        for t in &self.objective {
            check(t, "objective")?;
        }
        for (k, (terms, rhs)) in self.constraints.iter().enumerate() {
            if !rhs.is_finite() {
                return param(format!("constraint {k}: non-finite right-hand side"));
            }
            for t in terms {
                check(t, &format!("constraint {k}"))?;
            }
        }
        Ok(())
    }

    /// Value of `terms` at a point.
    pub fn evaluate(terms: &[Term], point: &[BlockValue]) -> f64 {
        terms
            .iter()
            .map(|t| match *t {
                Term::Entry { block, i, j, coef } => match &point[block] {
                    BlockValue::Psd(m) => coef * m.get(i, j),
                    BlockValue::Nonneg(_) => f64::NAN,
                },
                Term::Var { block, k, coef } => match &point[block] {
                    BlockValue::Nonneg(v) => coef * v[k],
                    BlockValue::Psd(_) => f64::NAN,
                },
            })
            .sum()
    }

    /// Largest absolute equality violation at `point`.
    pub fn max_constraint_violation(&self, point: &[BlockValue]) -> f64 {
        self.constraints
            .iter()
            .map(|(terms, rhs)| (Self::evaluate(terms, point) - rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Largest cone violation at `point`: `max(-λ_min)` over PSD blocks and
    /// `max(-x_k)` over orthants, floored at zero.
    pub fn max_cone_violation(point: &[BlockValue]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for v in point {
            match v {
                BlockValue::Psd(m) => worst = worst.max(-m.min_eigenvalue()?),
                BlockValue::Nonneg(x) => {
                    worst = x.iter().fold(worst, |w, &xi| w.max(-xi));
                }
            }
        }
        Ok(worst)
    }
}

/// Value of one block of a primal or dual point.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Psd(SymMatrix),
    Nonneg(Vec<f64>),
}

impl BlockValue {
    pub fn as_psd(&self) -> Option<&SymMatrix> {
        match self {
            BlockValue::Psd(m) => Some(m),
            BlockValue::Nonneg(_) => None,
        }
    }

    pub fn as_nonneg(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Nonneg(v) => Some(v),
            BlockValue::Psd(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    pub max_psd_dim: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let max_psd_dim = env::var(MAX_PSD_DIM_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&d| d > 0)
            .unwrap_or(DEFAULT_MAX_PSD_DIM);
        SolveOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            max_psd_dim,
            verbose: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.gap_tol > 0.0) {
            return param("tolerances must be positive");
        }
        if self.max_iter == 0 || self.max_psd_dim == 0 {
            return param("iteration and size caps must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// The program is primal infeasible (dual improving ray found).
    InfeasibleCertificate,
    /// The dual is infeasible; the primal is unbounded.
    DualInfeasible,
    NumericalFailure,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective values in the program's own sense.
    pub primal_value: f64,
    pub dual_value: f64,
    /// `|primal - dual|`.
    pub gap: f64,
    pub primal_solution: Vec<BlockValue>,
    /// Multipliers `y`, one per constraint.
    pub dual_solution: Vec<f64>,
    pub dual_slack: Vec<BlockValue>,
    pub iterations: usize,
    /// `max_k |⟨A_k, X⟩ - b_k|`.
    pub primal_residual: f64,
    /// Largest entry of `C - A*(y) - Z`.
    pub dual_residual: f64,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// PSD block `b` of the primal solution.
    pub fn psd(&self, b: usize) -> &SymMatrix {
        self.primal_solution[b]
            .as_psd()
            .expect("block is not a PSD block")
    }

    pub fn nonneg(&self, b: usize) -> &[f64] {
        self.primal_solution[b]
            .as_nonneg()
            .expect("block is not an orthant block")
    }
}

fn check_size(p: &ConicProgram, opts: &SolveOptions) -> Result<()> {
    opts.validate()?;
    p.validate()?;
    let dim = p.total_psd_dim();
    if dim > opts.max_psd_dim {
        return capability(format!(
            "total PSD dimension {dim} exceeds cap {} (set {MAX_PSD_DIM_ENV} to raise it)",
            opts.max_psd_dim
        ));
    }
    Ok(())
}

/// Optimizes `p`. Slow progress and detected infeasibility are reported in
/// the status, not as errors.
pub fn solve(p: &ConicProgram, opts: &SolveOptions) -> Result<SolveReport> {
    check_size(p, opts)?;
    Ok(ipm::solve(p, opts))
}

/// Outcome of [`feasibility`].
#[derive(Clone, Debug)]
pub enum Feasibility {
    /// A point meeting every constraint and the cone within `10 * feas_tol`.
    Feasible(Vec<BlockValue>),
    /// The auxiliary program proves that no point of the cone meets the
    /// constraints; even after shifting by `margin` times the cone identity
    /// the constraints cannot be met. `certificate` holds the dual multipliers.
    Infeasible { certificate: Vec<f64>, margin: f64 },
    /// Neither of the above at the requested tolerance. `shift` is the
    /// auxiliary optimum (positive: apparently infeasible).
    Inconclusive { shift: f64, reason: String },
}

/// Decides whether `p`'s constraints admit a point of the cone; the
/// objective is ignored.
///
/// Solves `min t` over `X' ∈ K`, `t ≥ -1`, subject to `A(X' - t·E) = b`
/// where `E` is the identity of the cone. The lower bound on `t` keeps the
/// auxiliary program bounded without a large constant. `t* ≤ 0` means
/// `X = X' - t*·E` is feasible.
pub fn feasibility(p: &ConicProgram, opts: &SolveOptions) -> Result<Feasibility> {
    check_size(p, opts)?;
    let (aux, s_block) = shifted_program(p);
    let report = ipm::solve(&aux, opts);
    let shift = report.primal_value - 1.0;
    let lower = report.dual_value - 1.0;
    let tol = 10.0 * opts.feas_tol.max(1e-12);
    // Whatever the status, the last iterate is a candidate: it counts when
    // the recovered point passes the checks.
    let t = report.nonneg(s_block)[0] - 1.0;
    let point = unshift(p, &report.primal_solution, t);
    let viol = p.max_constraint_violation(&point);
    let cone = ConicProgram::max_cone_violation(&point)?;
    if viol <= tol && cone <= tol {
        return Ok(Feasibility::Feasible(point));
    }
    if report.status == SolveStatus::InfeasibleCertificate {
        // The auxiliary constraints themselves are inconsistent, so no shift helps.
        return Ok(Feasibility::Infeasible {
            certificate: report.dual_solution,
            margin: f64::INFINITY,
        });
    }
    // bᵀy bounds the auxiliary optimum from below once the dual is feasible
    if report.dual_residual <= tol && lower >= tol {
        return Ok(Feasibility::Infeasible {
            certificate: report.dual_solution,
            margin: lower,
        });
    }
    Ok(Feasibility::Inconclusive {
        shift,
        reason: format!(
            "auxiliary program ended {:?} with bounds [{lower:.3e}, {shift:.3e}]; \
             recovered point violates constraints by {viol:.3e}, cone by {cone:.3e}",
            report.status
        ),
    })
}

/// Builds the auxiliary program of [`feasibility`]. Returns it with the
/// index of the block holding `s = t + 1`.
fn shifted_program(p: &ConicProgram) -> (ConicProgram, usize) {
    let mut aux = ConicProgram::new(Sense::Minimize);
    for &b in &p.blocks {
        aux.add_block(b);
    }
    let s_block = aux.add_nonneg_block(1);
    aux.add_objective_term(Term::var(s_block, 0, 1.0));
    for (terms, rhs) in &p.constraints {
        // A(E): diagonal PSD coefficients and all orthant coefficients.
        let ae: f64 = terms
            .iter()
            .map(|t| match *t {
                Term::Entry { i, j, coef, .. } if i == j => coef,
                Term::Entry { .. } => 0.0,
                Term::Var { coef, .. } => coef,
            })
            .sum();
        let mut row = terms.clone();
        if ae != 0.0 {
            row.push(Term::var(s_block, 0, -ae));
        }
        aux.add_constraint(row, rhs - ae);
    }
    (aux, s_block)
}

fn unshift(p: &ConicProgram, point: &[BlockValue], t: f64) -> Vec<BlockValue> {
    p.blocks
        .iter()
        .zip(point)
        .map(|(_, v)| match v {
            BlockValue::Psd(m) => BlockValue::Psd(m.add_scaled(&SymMatrix::identity(m.dim()), -t)),
            BlockValue::Nonneg(x) => BlockValue::Nonneg(x.iter().map(|xi| xi - t).collect()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_trace_with_unit_corner() {
        let mut p = ConicProgram::new(Sense::Minimize);
        let b = p.add_psd_block(3);
        p.set_objective((0..3).map(|i| Term::entry(b, i, i, 1.0)).collect());
        p.add_constraint(vec![Term::entry(b, 0, 0, 1.0)], 1.0);
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal_value - 1.0).abs() < 1e-7, "{}", r.primal_value);
    }

    #[test]
    fn small_lp() {
        // max x0 + 2 x1 s.t. x0 + x1 + x2 = 4, x1 + x3 = 3
        let mut p = ConicProgram::new(Sense::Maximize);
        let b = p.add_nonneg_block(4);
        p.set_objective(vec![Term::var(b, 0, 1.0), Term::var(b, 1, 2.0)]);
        p.add_constraint(
            vec![
                Term::var(b, 0, 1.0),
                Term::var(b, 1, 1.0),
                Term::var(b, 2, 1.0),
            ],
            4.0,
        );
        p.add_constraint(vec![Term::var(b, 1, 1.0), Term::var(b, 3, 1.0)], 3.0);
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal_value - 7.0).abs() < 1e-7);
        assert!(r.dual_value <= r.primal_value + 1e-6);
    }

    #[test]
    fn trace_feasibility() {
        let mut p = ConicProgram::new(Sense::Minimize);
        let b = p.add_psd_block(3);
        p.add_constraint((0..3).map(|i| Term::entry(b, i, i, 1.0)).collect(), 1.0);
        match feasibility(&p, &SolveOptions::default()).unwrap() {
            Feasibility::Feasible(pt) => {
                assert!(p.max_constraint_violation(&pt) < 1e-7);
                assert!(ConicProgram::max_cone_violation(&pt).unwrap() <= 1e-8);
            }
            other => panic!("expected feasible, got {other:?}"),
        }

        let mut q = ConicProgram::new(Sense::Minimize);
        let b = q.add_psd_block(3);
        q.add_constraint((0..3).map(|i| Term::entry(b, i, i, 1.0)).collect(), -1.0);
        assert!(matches!(
            feasibility(&q, &SolveOptions::default()).unwrap(),
            Feasibility::Infeasible { .. }
        ));
    }

    #[test]
    fn validation_and_cap() {
        let mut p = ConicProgram::new(Sense::Minimize);
        let b = p.add_psd_block(2);
        p.add_constraint(vec![Term::entry(b, 0, 2, 1.0)], 1.0);
        assert!(matches!(
            solve(&p, &SolveOptions::default()),
            Err(crate::Error::Parameter(_))
        ));

        let mut q = ConicProgram::new(Sense::Minimize);
        q.add_psd_block(5);
        let opts = SolveOptions {
            max_psd_dim: 4,
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&q, &opts), Err(crate::Error::Capability(_))));
    }
}
