//! Conic graph homomorphisms.
//!
//! A strong K-homomorphism `X → Y` is a matrix `H ∈ K` indexed by
//! `V(X) × V(Y)` with
//!
//! 1. `Σ_{y,y'} H_{xy,x'y'} = 1` for all `x, x'`;
//! 2. `H_{xy,x'y'} = 0` whenever `x ~ x'` and `y ≁ y'` (including `y = y'`);
//! 3. `H_{xy,xy'} = 0` for `y ≠ y'`.
//!
//! A weak one drops condition 3 and is only defined over nonnegative cones.

mod construct;
pub mod exact;
mod transfer;
mod witness;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{classical_homomorphism, homomorphic_product, Graph, VertexPairIndex};
use crate::linalg::SymMatrix;
use crate::solver::{self, ConicProgram, Feasibility, Sense, SolveOptions, Term};
use crate::theta::{self, add_entry_slacks, ConeTag};

pub use construct::{
    block_sums, categorical_meet_witness, classical_lift, clique_cover_witness, compose_witnesses,
    degenerate_gamma, degenerate_weak_splus_witness, degenerate_with_gamma, disjoint_union_witness,
    gram_check, identity_witness, nonsignalling_check, repair_weak_to_strong_dnn,
    weak_hom_alpha_embedding, INPUT_TOL,
};
pub use exact::{alpha_exact, chi_exact, omega_exact};
pub use transfer::{
    hom_to_theta_witness, monotone_transform_big_theta, monotone_transform_theta,
    theta_to_hom_tolerance, theta_to_hom_witness,
};
pub use witness::{witness_residuals, HomMode, HomWitness, WitnessResiduals};

/// Why a homomorphism does not exist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Refutation {
    /// Exhaustive search found no vertex map.
    NoMap,
    /// Every entry of the `(x, x2)` block is forced to zero, so it cannot
    /// sum to one.
    ForcedBlock { x: usize, x2: usize },
    /// The auxiliary feasibility program is bounded away from zero by
    /// `margin`, and θ^K(X ⋉ Y) = `theta` is short of `|V(X)|`.
    Conic { margin: f64, theta: f64 },
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refutation::NoMap => f.write_str("no homomorphism exists (exhaustive search)"),
            Refutation::ForcedBlock { x, x2 } => {
                write!(f, "block ({x},{x2}) has no entry allowed to be nonzero")
            }
            Refutation::Conic { margin, theta } => {
                write!(
                    f,
                    "infeasible with margin {margin:.3e}; theta of the product is {theta:.9}"
                )
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Yes(Box<HomWitness>),
    No(Refutation),
    Inconclusive(String),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No(_) => "no",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn witness(&self) -> Option<&HomWitness> {
        match self {
            Verdict::Yes(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Combinatorial,
    DirectFeasibility,
    ThetaReduction,
}

/// What the direct feasibility program concluded.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum DirectOutcome {
    /// A point passed witness validation; `residual` is its largest residual.
    Witness {
        residual: f64,
    },
    Infeasible {
        margin: f64,
    },
    Unknown {
        reason: String,
    },
}

/// What θ^K(X ⋉ Y) says about `|V(X)|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ThetaOutcome {
    Reaches { value: f64 },
    Short { value: f64 },
    Unknown { reason: String },
}

#[derive(Clone, Debug)]
pub struct HomDecision {
    pub verdict: Verdict,
    /// The method whose result is reported; for DNN and PSD the θ test is
    /// always run as a cross-check.
    pub method: Method,
    pub direct: Option<DirectOutcome>,
    pub theta: Option<ThetaOutcome>,
    pub notes: Vec<String>,
}

impl HomDecision {
    fn combinatorial(verdict: Verdict) -> Self {
        HomDecision {
            verdict,
            method: Method::Combinatorial,
            direct: None,
            theta: None,
            notes: Vec::new(),
        }
    }

    /// `{"verdict", "method", "direct", "theta", "notes", "reason"?, "witness"?}`.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({
            "verdict": self.verdict.as_str(),
            "method": self.method,
            "direct": self.direct,
            "theta": self.theta,
            "notes": self.notes,
        });
        match &self.verdict {
            Verdict::Yes(w) => {
                v["witness"] = serde_json::from_str(&w.to_json()).expect("witness JSON is valid");
            }
            Verdict::No(r) => {
                v["refutation"] = serde_json::to_value(r).expect("plain enum");
                v["reason"] = r.to_string().into();
            }
            Verdict::Inconclusive(why) => v["reason"] = why.clone().into(),
        }
        v.to_string()
    }
}

/// Thresholds for [`decide_hom_with`].
#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub solve: SolveOptions,
    /// A "yes" needs a witness whose residuals are all at most this.
    pub witness_tol: f64,
    /// θ^K(X ⋉ Y) ≥ |V(X)| - `theta_yes_tol` counts as reaching `|V(X)|`.
    pub theta_yes_tol: f64,
    /// θ^K(X ⋉ Y) ≤ |V(X)| - `theta_no_gap` counts as falling short.
    pub theta_no_gap: f64,
    /// For DNN and PSD, answer yes with the lifted CP witness when a
    /// classical homomorphism exists, skipping both conic tests.
    pub classical_first: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            solve: SolveOptions {
                feas_tol: 1e-9,
                gap_tol: 1e-9,
                ..SolveOptions::default()
            },
            witness_tol: 1e-7,
            theta_yes_tol: 1e-6,
            theta_no_gap: 1e-4,
            classical_first: true,
        }
    }
}

/// Whether condition 2 or 3 forces `H_{xy,x'y'} = 0`.
pub fn forced_zero(
    x: &Graph,
    y: &Graph,
    mode: HomMode,
    (a, b): (usize, usize),
    (c, d): (usize, usize),
) -> bool {
    (mode == HomMode::Strong && a == c && b != d) || (x.has_edge(a, c) && !y.has_edge(b, d))
}

fn forced_block(x: &Graph, y: &Graph, mode: HomMode) -> Option<(usize, usize)> {
    if y.n() == 0 {
        return (x.n() > 0).then_some((0, 0));
    }
    for a in 0..x.n() {
        for c in a..x.n() {
            let all =
                (0..y.n()).all(|b| (0..y.n()).all(|d| forced_zero(x, y, mode, (a, b), (c, d))));
            if all {
                return Some((a, c));
            }
        }
    }
    None
}

/// The feasibility program for a K-homomorphism `X → Y` over
/// `K ∈ {DNN, S+}`. Block 0 holds `H`, indexed `x |V(Y)| + y`.
///
/// Forced entries are fixed at zero and each block sum is taken over the
/// remaining entries, which keeps the constraint rows independent.
pub fn hom_program(x: &Graph, y: &Graph, cone: ConeTag, mode: HomMode) -> Result<ConicProgram> {
    witness::check_mode(cone, mode)?;
    if cone == ConeTag::Cp {
        return crate::error::param("CP homomorphisms are decided combinatorially");
    }
    let idx = VertexPairIndex::new(x.n(), y.n());
    let mut p = ConicProgram::new(Sense::Minimize);
    let b = p.add_psd_block(idx.dim());
    let mut free_pairs = Vec::new();
    for a in 0..x.n() {
        for c in a..x.n() {
            let mut row = Vec::new();
            for (i, j) in witness::block_pairs(idx, a, c) {
                if i > j {
                    continue;
                }
                if forced_zero(x, y, mode, idx.pair(i), idx.pair(j)) {
                    p.add_constraint(vec![Term::entry(b, i, j, 1.0)], 0.0);
                    continue;
                }
                // a diagonal block counts (i, j) and (j, i) separately
                let coef = if a == c && i != j { 2.0 } else { 1.0 };
                row.push(Term::entry(b, i, j, coef));
                if i != j {
                    free_pairs.push((i, j));
                }
            }
            p.add_constraint(row, 1.0);
        }
    }
    if cone == ConeTag::Dnn {
        add_entry_slacks(&mut p, b, &free_pairs, 0.0);
    }
    Ok(p)
}

/// Decides `X → Y` over `cone` with default thresholds.
pub fn decide_hom(x: &Graph, y: &Graph, cone: ConeTag, mode: HomMode) -> Result<HomDecision> {
    decide_hom_with(x, y, cone, mode, &DecideOptions::default())
}

/// Decides `X → Y` over `cone`.
///
/// CP is decided by backtracking (strong and weak CP homomorphisms are both
/// ordinary homomorphisms). For DNN and PSD a classical homomorphism is
/// tried first unless [`DecideOptions::classical_first`] is off; otherwise,
/// or when there is none, two independent tests run: the
/// feasibility program of [`hom_program`], and whether θ^K(X ⋉ Y) reaches
/// `|V(X)|`. The answer is yes or no only when they agree. Weak DNN is
/// compared against strong θ^DNN, since the two notions coincide.
pub fn decide_hom_with(
    x: &Graph,
    y: &Graph,
    cone: ConeTag,
    mode: HomMode,
    opts: &DecideOptions,
) -> Result<HomDecision> {
    witness::check_mode(cone, mode)?;
    opts.solve.validate()?;
    if x.n() == 0 {
        let w = HomWitness::new(SymMatrix::zeros(0), x, y, cone, mode)?;
        return Ok(HomDecision::combinatorial(Verdict::Yes(Box::new(w))));
    }
    let lifted = |map: Vec<usize>| -> Result<Verdict> {
        let w = classical_lift(x, y, &map)?.widen(cone)?;
        Ok(Verdict::Yes(Box::new(if mode == HomMode::Weak {
            w.as_weak()?
        } else {
            w
        })))
    };
    if cone == ConeTag::Cp {
        let verdict = match classical_homomorphism(x, y) {
            Some(map) => lifted(map)?,
            None => Verdict::No(Refutation::NoMap),
        };
        return Ok(HomDecision::combinatorial(verdict));
    }
    if opts.classical_first {
        if let Some(map) = classical_homomorphism(x, y) {
            let mut d = HomDecision::combinatorial(lifted(map)?);
            d.notes
                .push("a classical homomorphism lifts to every cone".to_string());
            return Ok(d);
        }
    }
    if let Some((a, c)) = forced_block(x, y, mode) {
        return Ok(HomDecision::combinatorial(Verdict::No(
            Refutation::ForcedBlock { x: a, x2: c },
        )));
    }

    let (direct, witness) = direct_test(x, y, cone, mode, opts)?;
    let theta = theta_test(x, y, cone, opts)?;
    let mut notes =
        vec!["the theta test treats a value within tolerance of |V(X)| as attained".to_string()];
    let verdict = match (&direct, &theta) {
        (DirectOutcome::Witness { .. }, ThetaOutcome::Reaches { .. }) => {
            Verdict::Yes(Box::new(witness.expect("witness accompanies the outcome")))
        }
        (DirectOutcome::Infeasible { margin }, ThetaOutcome::Short { value }) => {
            Verdict::No(Refutation::Conic {
                margin: *margin,
                theta: *value,
            })
        }
        (d, t) => {
            let why = format!("direct test: {d:?}; theta test: {t:?}");
            if matches!(
                (d, t),
                (DirectOutcome::Witness { .. }, ThetaOutcome::Short { .. })
                    | (
                        DirectOutcome::Infeasible { .. },
                        ThetaOutcome::Reaches { .. }
                    )
            ) {
                notes.push("the two tests contradict each other".to_string());
            }
            Verdict::Inconclusive(why)
        }
    };
    Ok(HomDecision {
        verdict,
        method: Method::DirectFeasibility,
        direct: Some(direct),
        theta: Some(theta),
        notes,
    })
}

fn direct_test(
    x: &Graph,
    y: &Graph,
    cone: ConeTag,
    mode: HomMode,
    opts: &DecideOptions,
) -> Result<(DirectOutcome, Option<HomWitness>)> {
    let p = hom_program(x, y, cone, mode)?;
    Ok(match solver::feasibility(&p, &opts.solve)? {
        Feasibility::Feasible(point) => {
            let h = point[0].as_psd().expect("block 0 is PSD").clone();
            let w = HomWitness::new(h, x, y, cone, mode)?;
            let residual = w.max_residual();
            if w.is_valid(opts.witness_tol) {
                (DirectOutcome::Witness { residual }, Some(w))
            } else {
                let reason = format!("feasible point fails validation (residual {residual:.3e})");
                (DirectOutcome::Unknown { reason }, None)
            }
        }
        Feasibility::Infeasible { margin, .. } => (DirectOutcome::Infeasible { margin }, None),
        Feasibility::Inconclusive { reason, .. } => (DirectOutcome::Unknown { reason }, None),
    })
}

fn theta_test(x: &Graph, y: &Graph, cone: ConeTag, opts: &DecideOptions) -> Result<ThetaOutcome> {
    let n = x.n() as f64;
    let prod = homomorphic_product(x, y);
    let b = theta::theta_bounds(&prod, cone, &opts.solve)?;
    Ok(match (b.lower, b.upper) {
        (Some(lo), _) if lo >= n - opts.theta_yes_tol => ThetaOutcome::Reaches { value: lo },
        (_, Some(hi)) if hi <= n - opts.theta_no_gap => ThetaOutcome::Short { value: hi },
        (lo, hi) => ThetaOutcome::Unknown {
            reason: format!(
                "solver ended {:?}; bounds {lo:?}..{hi:?} do not decide against {n}",
                b.status
            ),
        },
    })
}

/// Width of the band around an integer inside which `⌊θ⌋` is not trusted.
pub const ALPHA_GUARD: f64 = 1e-5;

/// Both computations behind [`conic_alpha`].
#[derive(Clone, Debug)]
pub struct ConicAlpha {
    pub value: usize,
    pub theta: f64,
    /// `⌊θ⌋` when `θ` is clear of the guard band (or exact).
    pub theta_floor: Option<usize>,
    /// The largest `k` with `K_k → Ḡ` found by the incremental search.
    pub search: usize,
}

/// α^K(G) (strong) or α_K(G) (weak): the largest `k` with a conic
/// homomorphism `K_k → Ḡ`.
pub fn conic_alpha(g: &Graph, cone: ConeTag, mode: HomMode) -> Result<usize> {
    Ok(conic_alpha_report(g, cone, mode, &DecideOptions::default())?.value)
}

/// Computes α^K(G) twice: from `⌊θ^K(G)⌋`, and by deciding `K_k → Ḡ` for
/// increasing `k`. The search starts above `α(G)`, which a classical map
/// already certifies, and stops at the first refuted `k`. Disagreement or
/// an undecided step is an [`Error::Inconclusive`].
///
/// Weak mode is allowed for CP and DNN, where it equals strong mode, so
/// `⌊θ^K⌋` still applies.
pub fn conic_alpha_report(
    g: &Graph,
    cone: ConeTag,
    mode: HomMode,
    opts: &DecideOptions,
) -> Result<ConicAlpha> {
    witness::check_mode(cone, mode)?;
    if g.n() == 0 {
        return Ok(ConicAlpha {
            value: 0,
            theta: 0.0,
            theta_floor: Some(0),
            search: 0,
        });
    }
    let th = theta::theta_with(g, cone, &opts.solve)?;
    let exact = cone == ConeTag::Cp;
    let nearest = th.value.round();
    let theta_floor = if exact {
        Some(nearest as usize)
    } else if (th.value - nearest).abs() <= ALPHA_GUARD {
        None
    } else {
        Some(th.value.floor() as usize)
    };

    let gbar = g.complement();
    let mut k = alpha_exact(g)?;
    loop {
        let d = decide_hom_with(&Graph::complete(k + 1), &gbar, cone, mode, opts)?;
        match d.verdict {
            Verdict::Yes(_) => k += 1,
            Verdict::No(_) => break,
            Verdict::Inconclusive(why) => {
                return Err(Error::Inconclusive(format!(
                    "K_{} → complement undecided: {why}",
                    k + 1
                )))
            }
        }
    }

    let agree = match theta_floor {
        Some(f) => f == k,
        // θ is within the guard band of `nearest`: α is `nearest` if attained,
        // otherwise one less
        None => k as f64 == nearest || k as f64 == nearest - 1.0,
    };
    if !agree {
        return Err(Error::Inconclusive(format!(
            "theta {} (floor {:?}) disagrees with search result {k}",
            th.value, theta_floor
        )));
    }
    Ok(ConicAlpha {
        value: k,
        theta: th.value,
        theta_floor,
        search: k,
    })
}
