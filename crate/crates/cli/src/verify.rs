//! Invariant suites run over the deterministic corpus.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use conichom::corpus::{corpus, hom_pairs, of_size, CorpusGraph, CorpusOptions};
use conichom::graph::{
    classical_homomorphism, disjunctive_product, homomorphic_product, is_vertex_transitive,
    lexicographic_product,
};
use conichom::hom::*;
use conichom::linalg::{
    conjugate_by_permutation, contract, is_dnn, is_psd, kron, principal_submatrix,
};
use conichom::theta::{self, big_theta_residuals, theta_residuals, ThetaResult};
use conichom::{ConeTag, Error, Graph, Partition, SolveOptions, SymMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::report::{Instance, Status, SuiteEntry};

pub const SUITES: &[(&str, &str)] = &[
    (
        "closure",
        "contraction, Kronecker, principal submatrix and permutation keep PSD/DNN",
    ),
    (
        "cp-classical",
        "CP decisions match classical maps and alpha of the homomorphic product",
    ),
    (
        "gram-blocks",
        "witness block sums are one, via contraction and via Gram vectors",
    ),
    ("dnn-repair", "weak DNN witnesses repair to strong ones"),
    ("reflexive", "every graph maps to itself over every cone"),
    ("transitive", "composed witnesses validate"),
    (
        "theta-product",
        "theta times big theta is at least |V|, with equality if vertex transitive",
    ),
    (
        "hom-theta",
        "direct feasibility agrees with theta of the homomorphic product",
    ),
    (
        "theta-transport",
        "witnesses push theta solutions of complements forward",
    ),
    (
        "big-theta-transport",
        "witnesses pull big theta solutions back",
    ),
    (
        "multiplicativity",
        "theta is multiplicative on disjunctive and lexicographic products",
    ),
    (
        "meet",
        "product witnesses into the categorical product validate",
    ),
    (
        "join",
        "disjoint-union witnesses validate and stay in the cone",
    ),
    (
        "clique-cover",
        "integral theta equal to the clique cover number gives conic alpha",
    ),
    (
        "strong-alpha",
        "strong maps exist exactly when conic alpha of the product is |V(X)|",
    ),
    (
        "weak-alpha",
        "weak witnesses embed into complete-graph witnesses",
    ),
    ("alpha-floor", "conic alpha equals the floor of theta"),
    (
        "alpha-weak-strong",
        "weak and strong conic alpha coincide for CP and DNN",
    ),
    (
        "degenerate",
        "the degenerate PSD matrix maps every graph weakly to K2",
    ),
    (
        "nonsignalling",
        "weak witnesses have input-independent marginals",
    ),
];

pub fn is_suite(id: &str) -> bool {
    SUITES.iter().any(|(s, _)| *s == id)
}

const CONIC: [ConeTag; 2] = [ConeTag::Dnn, ConeTag::Splus];
/// Largest matrix built by meet, join and embedding checks.
const LATTICE_DIM: usize = 100;
const CLOSURE_SAMPLES: usize = 200;

pub enum Outcome {
    Pass(f64),
    Fail(f64, String),
    Inconclusive(String),
}

fn bound(residual: f64, tol: f64, what: impl FnOnce() -> String) -> Outcome {
    if residual <= tol {
        Outcome::Pass(residual)
    } else {
        Outcome::Fail(
            residual,
            format!("{} (residual {residual:.3e} > {tol:e})", what()),
        )
    }
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Pass(0.0)
    } else {
        Outcome::Fail(f64::NAN, what())
    }
}

/// The worse of two outcomes.
fn both(a: Outcome, b: Outcome) -> Outcome {
    match (a, b) {
        (f @ Outcome::Fail(..), _) | (_, f @ Outcome::Fail(..)) => f,
        (i @ Outcome::Inconclusive(_), _) | (_, i @ Outcome::Inconclusive(_)) => i,
        (Outcome::Pass(x), Outcome::Pass(y)) => Outcome::Pass(x.max(y)),
    }
}

fn instance(key: String, f: impl FnOnce() -> conichom::Result<Outcome>) -> Instance {
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Ok(Outcome::Fail(f64::NAN, format!("panicked: {msg}")))
    });
    let (status, residual, detail) = match result {
        Ok(Outcome::Pass(r)) => (Status::Pass, r, String::new()),
        Ok(Outcome::Fail(r, d)) => (Status::Fail, r, d),
        Ok(Outcome::Inconclusive(d)) => (Status::Inconclusive, f64::NAN, d),
        Err(e @ (Error::Numerical { .. } | Error::Inconclusive(_))) => {
            (Status::Inconclusive, f64::NAN, e.to_string())
        }
        Err(e) => (Status::Fail, f64::NAN, e.to_string()),
    };
    Instance {
        key,
        status,
        residual,
        detail,
    }
}

type ThetaTable = BTreeMap<(String, ConeTag), Result<(ThetaResult, ThetaResult), String>>;
type Decisions = BTreeMap<(String, String), Result<HomDecision, String>>;

/// Corpus, options and results shared between suites.
pub struct Context {
    pub corpus: Vec<CorpusGraph>,
    pub seed: u64,
    pub max_product: usize,
    pub solve: SolveOptions,
    /// Conic decisions skip the classical shortcut so witnesses come from
    /// the solver.
    pub decide: DecideOptions,
    /// DNN strong, PSD strong, DNN weak.
    decisions: [OnceLock<Decisions>; 3],
    /// θ^K of the complement and Θ^K, per graph and cone.
    thetas: OnceLock<ThetaTable>,
}

impl Context {
    pub fn new(
        seed: u64,
        max_size: usize,
        max_product: usize,
        solve: SolveOptions,
        decide: DecideOptions,
    ) -> Self {
        let corpus = corpus(&CorpusOptions {
            seed,
            max_size,
            ..CorpusOptions::default()
        });
        Context {
            corpus,
            seed,
            max_product,
            solve,
            decide: DecideOptions {
                classical_first: false,
                ..decide
            },
            decisions: Default::default(),
            thetas: OnceLock::new(),
        }
    }

    fn graph(&self, name: &str) -> &Graph {
        &self
            .corpus
            .iter()
            .find(|g| g.name == name)
            .expect("corpus name")
            .graph
    }

    fn pairs(&self) -> Vec<(&CorpusGraph, &CorpusGraph)> {
        hom_pairs(&self.corpus, self.max_product)
    }

    fn decisions(&self, cone: ConeTag, mode: HomMode) -> &Decisions {
        let slot = match (cone, mode) {
            (ConeTag::Dnn, HomMode::Strong) => 0,
            (ConeTag::Splus, HomMode::Strong) => 1,
            (ConeTag::Dnn, HomMode::Weak) => 2,
            _ => unreachable!("only conic decisions are cached"),
        };
        self.decisions[slot].get_or_init(|| {
            self.pairs()
                .par_iter()
                .map(|(x, y)| {
                    let d = decide_hom_with(&x.graph, &y.graph, cone, mode, &self.decide)
                        .map_err(|e| e.to_string());
                    ((x.name.clone(), y.name.clone()), d)
                })
                .collect()
        })
    }

    /// Strong witnesses for every cone: CP lifts of classical maps and
    /// solver witnesses for DNN and PSD.
    fn strong_witnesses(&self) -> Vec<((String, String, ConeTag), HomWitness)> {
        let mut out: Vec<((String, String, ConeTag), HomWitness)> = self
            .pairs()
            .par_iter()
            .filter_map(|(x, y)| {
                let map = classical_homomorphism(&x.graph, &y.graph)?;
                let w = classical_lift(&x.graph, &y.graph, &map).ok()?;
                Some(((x.name.clone(), y.name.clone(), ConeTag::Cp), w))
            })
            .collect();
        for cone in CONIC {
            out.extend(
                self.yes_witnesses(cone, HomMode::Strong)
                    .into_iter()
                    .map(|((x, y), w)| ((x, y, cone), w)),
            );
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn yes_witnesses(&self, cone: ConeTag, mode: HomMode) -> Vec<((String, String), HomWitness)> {
        self.decisions(cone, mode)
            .iter()
            .filter_map(|(k, d)| Some((k.clone(), d.as_ref().ok()?.verdict.witness()?.clone())))
            .collect()
    }

    fn theta_table(&self) -> &ThetaTable {
        self.thetas.get_or_init(|| {
            let keys: Vec<(String, ConeTag)> = self
                .corpus
                .iter()
                .flat_map(|g| ConeTag::ALL.map(|c| (g.name.clone(), c)))
                .collect();
            keys.into_par_iter()
                .map(|(name, cone)| {
                    let g = self.graph(&name);
                    let v = theta::theta_with(&g.complement(), cone, &self.solve)
                        .and_then(|t| Ok((t, theta::big_theta_with(g, cone, &self.solve)?)))
                        .map_err(|e| e.to_string());
                    ((name, cone), v)
                })
                .collect()
        })
    }

    fn thetas(&self, name: &str, cone: ConeTag) -> conichom::Result<&(ThetaResult, ThetaResult)> {
        self.theta_table()[&(name.to_string(), cone)]
            .as_ref()
            .map_err(|e| Error::Numerical {
                message: e.clone(),
                iterations: 0,
            })
    }
}

/// Runs one suite and aggregates its instances.
pub fn run_suite(id: &str, ctx: &Context) -> SuiteEntry {
    let start = Instant::now();
    let items = match id {
        "closure" => closure(ctx),
        "cp-classical" => cp_classical(ctx),
        "gram-blocks" => gram_blocks(ctx),
        "dnn-repair" => dnn_repair(ctx),
        "reflexive" => reflexive(ctx),
        "transitive" => transitive(ctx),
        "theta-product" => theta_product(ctx),
        "hom-theta" => hom_theta(ctx),
        "theta-transport" => theta_transport(ctx),
        "big-theta-transport" => big_theta_transport(ctx),
        "multiplicativity" => multiplicativity(ctx),
        "meet" => meet(ctx),
        "join" => join(ctx),
        "clique-cover" => clique_cover(ctx),
        "strong-alpha" => strong_alpha(ctx),
        "weak-alpha" => weak_alpha(ctx),
        "alpha-floor" => alpha_floor(ctx),
        "alpha-weak-strong" => alpha_weak_strong(ctx),
        "degenerate" => degenerate(ctx),
        "nonsignalling" => nonsignalling(ctx),
        other => panic!("unknown suite {other}"),
    };
    SuiteEntry::from_instances(id, items, start.elapsed().as_secs_f64())
}

fn random_gram(rng: &mut ChaCha8Rng, n: usize, nonneg: bool) -> SymMatrix {
    let r = rng.gen_range(1..=n + 1);
    let vecs: Vec<Vec<f64>> = (0..r)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if nonneg {
                        rng.gen_range(0.0..1.0)
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect();
    SymMatrix::from_fn(n, |i, j| vecs.iter().map(|v| v[i] * v[j]).sum())
}

fn closure(ctx: &Context) -> Vec<Instance> {
    let ops = ["contract", "kron", "submatrix", "permute"];
    let mut jobs = Vec::new();
    for op in ops {
        for cone in ["psd", "dnn"] {
            for k in 0..CLOSURE_SAMPLES {
                jobs.push((op, cone, k));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(op, cone, k)| {
            instance(format!("{op}/{cone}/{k:03}"), || {
                let nonneg = cone == "dnn";
                let mut rng = ChaCha8Rng::seed_from_u64(
                    ctx.seed
                        .wrapping_mul(1_000_003)
                        .wrapping_add((k * 17 + op.len()) as u64),
                );
                let n = rng.gen_range(2..=8);
                let m = random_gram(&mut rng, n, nonneg);
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let out = match op {
                    "contract" => {
                        let parts = rng.gen_range(1..=n);
                        let mut blocks = vec![Vec::new(); parts];
                        for (pos, &i) in idx.iter().enumerate() {
                            let b = if pos < parts {
                                pos
                            } else {
                                rng.gen_range(0..parts)
                            };
                            blocks[b].push(i);
                        }
                        contract(&m, &Partition::new(n, blocks)?)?
                    }
                    "kron" => {
                        let n2 = rng.gen_range(1..=6);
                        kron(&m, &random_gram(&mut rng, n2, nonneg))?
                    }
                    "submatrix" => {
                        idx.truncate(rng.gen_range(1..=n));
                        principal_submatrix(&m, &idx)?
                    }
                    _ => conjugate_by_permutation(&m, &idx)?,
                };
                let lmin = out.min_eigenvalue()?;
                let mut residual = (-lmin).max(0.0);
                if nonneg {
                    residual = residual.max(-out.min_entry());
                }
                Ok(bound(residual, 1e-9, || {
                    format!("{op} leaves the {cone} cone")
                }))
            })
        })
        .collect()
}

fn cp_classical(ctx: &Context) -> Vec<Instance> {
    ctx.pairs()
        .par_iter()
        .map(|(x, y)| {
            instance(format!("{} -> {}", x.name, y.name), || {
                let d = decide_hom(&x.graph, &y.graph, ConeTag::Cp, HomMode::Strong)?;
                let weak = decide_hom(&x.graph, &y.graph, ConeTag::Cp, HomMode::Weak)?;
                let alpha = alpha_exact(&homomorphic_product(&x.graph, &y.graph))?;
                let classical = classical_homomorphism(&x.graph, &y.graph).is_some();
                Ok(require(
                    d.verdict.is_yes() == classical
                        && weak.verdict.is_yes() == classical
                        && (alpha == x.graph.n()) == classical,
                    || {
                        format!(
                            "decision {}, classical {classical}, alpha of product {alpha}",
                            d.verdict.as_str()
                        )
                    },
                ))
            })
        })
        .collect()
}

/// `max |⟨Σ_y w_xy, Σ_y' w_x'y'⟩ - 1|` for Gram vectors `w` of `h`.
fn gram_vector_deviation(h: &SymMatrix, nx: usize, ny: usize) -> conichom::Result<f64> {
    let eig = h.eig()?;
    let d = h.dim();
    // s_x[k] = sqrt(λ_k) Σ_y V[(x, y), k]
    let sums: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            (0..d)
                .map(|k| {
                    let lam = eig.values[k].max(0.0).sqrt();
                    lam * (0..ny).map(|y| eig.vectors[(x * ny + y, k)]).sum::<f64>()
                })
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in &sums {
        for b in &sums {
            let ip: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
            worst = worst.max((ip - 1.0).abs());
        }
    }
    Ok(worst)
}

fn gram_blocks(ctx: &Context) -> Vec<Instance> {
    ctx.strong_witnesses()
        .into_par_iter()
        .map(|((x, y, cone), w)| {
            instance(format!("{x} -> {y} {cone}"), || {
                let contraction = require(gram_check(&w.h, 1e-6), || {
                    "block sums differ from one".into()
                });
                let dev = gram_vector_deviation(&w.h, w.x.n(), w.y.n())?;
                Ok(both(
                    contraction,
                    bound(dev, 1e-6, || "Gram row sums are not unit vectors".into()),
                ))
            })
        })
        .collect()
}

fn dnn_repair(ctx: &Context) -> Vec<Instance> {
    ctx.yes_witnesses(ConeTag::Dnn, HomMode::Weak)
        .into_par_iter()
        .map(|((x, y), w)| {
            instance(format!("{x} -> {y}"), || {
                let r = repair_weak_to_strong_dnn(&w)?;
                Ok(bound(r.residuals.max(HomMode::Strong), 1e-7, || {
                    "repaired witness invalid".into()
                }))
            })
        })
        .collect()
}

fn reflexive(ctx: &Context) -> Vec<Instance> {
    let jobs: Vec<(&CorpusGraph, ConeTag)> = ctx
        .corpus
        .iter()
        .flat_map(|g| ConeTag::ALL.map(|c| (g, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(g, cone)| {
            instance(format!("{} {cone}", g.name), || {
                let w = identity_witness(&g.graph).widen(cone)?;
                let d = decide_hom(&g.graph, &g.graph, cone, HomMode::Strong)?;
                Ok(both(
                    bound(w.max_residual(), 1e-12, || {
                        "identity witness invalid".into()
                    }),
                    require(d.verdict.is_yes(), || {
                        format!("decision {}", d.verdict.as_str())
                    }),
                ))
            })
        })
        .collect()
}

fn transitive(ctx: &Context) -> Vec<Instance> {
    let ws = ctx.strong_witnesses();
    let mut by_source: BTreeMap<(&str, ConeTag), Vec<&HomWitness>> = BTreeMap::new();
    for ((x, _, c), w) in &ws {
        by_source.entry((x.as_str(), *c)).or_default().push(w);
    }
    let mut jobs = Vec::new();
    for ((x, y, c), w1) in &ws {
        for w2 in by_source.get(&(y.as_str(), *c)).into_iter().flatten() {
            if w1.x.n() * w2.y.n() <= ctx.max_product {
                jobs.push((x, y, *c, w1, *w2));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(x, y, c, w1, w2)| {
            let z = ctx
                .corpus
                .iter()
                .find(|g| g.graph == w2.y)
                .map_or("?", |g| g.name.as_str());
            instance(format!("{x} -> {y} -> {z} {c}"), || {
                let comp = compose_witnesses(w1, w2)?;
                let tol = 10.0 * w1.max_residual().max(w2.max_residual()).max(1e-9);
                Ok(bound(comp.max_residual(), tol, || {
                    "composition invalid".into()
                }))
            })
        })
        .collect()
}

fn theta_product(ctx: &Context) -> Vec<Instance> {
    let jobs: Vec<(&CorpusGraph, ConeTag)> = ctx
        .corpus
        .iter()
        .flat_map(|g| CONIC.map(|c| (g, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(g, cone)| {
            instance(format!("{} {cone}", g.name), || {
                let t = theta::theta_with(&g.graph, cone, &ctx.solve)?;
                let b = theta::big_theta_with(&g.graph, cone, &ctx.solve)?;
                let n = g.graph.n() as f64;
                let prod = t.value * b.value;
                let lower = bound((n - prod).max(0.0), 1e-6, || {
                    format!("{} * {} < {n}", t.value, b.value)
                });
                if is_vertex_transitive(&g.graph)? {
                    Ok(both(
                        lower,
                        bound((prod - n).abs(), 1e-5, || {
                            format!("vertex transitive but product {prod}")
                        }),
                    ))
                } else {
                    Ok(lower)
                }
            })
        })
        .collect()
}

fn hom_theta(ctx: &Context) -> Vec<Instance> {
    let mut jobs = Vec::new();
    for cone in CONIC {
        for ((x, y), d) in ctx.decisions(cone, HomMode::Strong) {
            jobs.push((x, y, cone, d));
        }
    }
    jobs.into_par_iter()
        .map(|(x, y, cone, d)| {
            instance(format!("{x} -> {y} {cone}"), || {
                let d = d.as_ref().map_err(|e| Error::Inconclusive(e.clone()))?;
                let clash = matches!(
                    (&d.direct, &d.theta),
                    (
                        Some(DirectOutcome::Witness { .. }),
                        Some(ThetaOutcome::Short { .. })
                    ) | (
                        Some(DirectOutcome::Infeasible { .. }),
                        Some(ThetaOutcome::Reaches { .. })
                    )
                );
                if clash {
                    return Ok(Outcome::Fail(f64::NAN, d.to_json()));
                }
                match &d.verdict {
                    Verdict::Yes(w) => {
                        let m = hom_to_theta_witness(w)?;
                        let res = theta_residuals(&homomorphic_product(&w.x, &w.y), cone, &m)?;
                        let value = (m.sum() - w.x.n() as f64).abs();
                        Ok(bound(res.max().max(value), 1e-6, || {
                            "scaled witness is not a theta solution".into()
                        }))
                    }
                    Verdict::No(_) => Ok(Outcome::Pass(0.0)),
                    Verdict::Inconclusive(why) => Ok(Outcome::Inconclusive(why.clone())),
                }
            })
        })
        .collect()
}

fn theta_transport(ctx: &Context) -> Vec<Instance> {
    let ws = ctx.strong_witnesses();
    ctx.theta_table();
    ws.into_par_iter()
        .map(|((x, y, cone), w)| {
            instance(format!("{x} -> {y} {cone}"), || {
                let (mx, _) = ctx.thetas(&x, cone)?;
                let (my, _) = ctx.thetas(&y, cone)?;
                let n = monotone_transform_theta(&mx.solution, &w)?;
                let res = theta_residuals(&w.y.complement(), cone, &n)?.max();
                let moved = (n.sum() - mx.solution.sum()).abs();
                let order = (mx.value - my.value).max(0.0);
                Ok(both(
                    bound(res.max(moved), 1e-6, || {
                        "transported solution infeasible".into()
                    }),
                    bound(order, 1e-5, || format!("{} > {}", mx.value, my.value)),
                ))
            })
        })
        .collect()
}

fn big_theta_transport(ctx: &Context) -> Vec<Instance> {
    let mut ws: Vec<((String, String, ConeTag), HomWitness, &str)> = ctx
        .strong_witnesses()
        .into_iter()
        .map(|(k, w)| (k, w, "strong"))
        .collect();
    ws.extend(
        ctx.yes_witnesses(ConeTag::Dnn, HomMode::Weak)
            .into_iter()
            .map(|((x, y), w)| ((x, y, ConeTag::Dnn), w, "weak")),
    );
    ctx.theta_table();
    ws.into_par_iter()
        .map(|((x, y, cone), w, mode)| {
            instance(format!("{x} -> {y} {cone} {mode}"), || {
                let (_, bx) = ctx.thetas(&x, cone)?;
                let (_, by) = ctx.thetas(&y, cone)?;
                let (m, top) = monotone_transform_big_theta(&by.solution, by.value, &w)?;
                let res = big_theta_residuals(&w.x, cone, &m, by.value)?.max() / by.value.max(1.0);
                let negative = top.iter().fold(0.0f64, |a, &t| a.max(-t));
                let order = (bx.value - by.value).max(0.0);
                Ok(both(
                    bound(res.max(negative), 1e-6, || {
                        "pulled-back solution infeasible".into()
                    }),
                    bound(order, 1e-5, || format!("{} > {}", bx.value, by.value)),
                ))
            })
        })
        .collect()
}

fn multiplicativity(ctx: &Context) -> Vec<Instance> {
    let base = ["cycle:5", "complete:3", "path:3", "cycle:4"];
    let mut jobs = Vec::new();
    for cone in CONIC {
        for x in base {
            for y in base {
                for op in ["disjunctive", "lexicographic", "big-disjunctive"] {
                    jobs.push((cone, x, y, op));
                }
            }
        }
    }
    jobs.into_par_iter()
        .map(|(cone, xn, yn, op)| {
            instance(format!("{op} {xn} {yn} {cone}"), || {
                let x = Graph::from_generator(xn)?;
                let y = Graph::from_generator(yn)?;
                let s = &ctx.solve;
                if op == "big-disjunctive" {
                    let v = theta::big_theta_with(&disjunctive_product(&x, &y), cone, s)?.value;
                    let b = theta::big_theta_with(&x, cone, s)?.value
                        * theta::big_theta_with(&y, cone, s)?.value;
                    return Ok(bound((v - b).max(0.0), 1e-6, || format!("{v} > {b}")));
                }
                let prod = if op == "disjunctive" {
                    disjunctive_product(&x, &y)
                } else {
                    lexicographic_product(&x, &y)
                };
                let v = theta::theta_with(&prod, cone, s)?.value;
                let e =
                    theta::theta_with(&x, cone, s)?.value * theta::theta_with(&y, cone, s)?.value;
                Ok(bound((v - e).abs() / e, 1e-5, || format!("{v} vs {e}")))
            })
        })
        .collect()
}

fn name_of<'a>(ctx: &'a Context, g: &Graph) -> &'a str {
    ctx.corpus
        .iter()
        .find(|c| &c.graph == g)
        .map_or("?", |c| c.name.as_str())
}

fn meet(ctx: &Context) -> Vec<Instance> {
    let ws = ctx.strong_witnesses();
    let mut jobs = Vec::new();
    for (i, ((z, _, c), h1)) in ws.iter().enumerate() {
        for ((z2, _, c2), h2) in &ws[i..] {
            if z == z2 && c == c2 && h1.x.n() * h1.y.n() * h2.y.n() <= LATTICE_DIM {
                jobs.push((h1, h2));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(h1, h2)| {
            let key = format!(
                "{} -> {} x {} {}",
                name_of(ctx, &h1.x),
                name_of(ctx, &h1.y),
                name_of(ctx, &h2.y),
                h1.cone
            );
            instance(key, || {
                let m = categorical_meet_witness(h1, h2)?;
                Ok(bound(m.max_residual(), 1e-6, || {
                    "meet witness invalid".into()
                }))
            })
        })
        .collect()
}

fn join(ctx: &Context) -> Vec<Instance> {
    let ws = ctx.strong_witnesses();
    let mut jobs = Vec::new();
    for (i, ((_, y, c), h1)) in ws.iter().enumerate() {
        for ((_, y2, c2), h2) in &ws[i..] {
            if y == y2 && c == c2 && (h1.x.n() + h2.x.n()) * h1.y.n() <= LATTICE_DIM {
                jobs.push((h1, h2));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(h1, h2)| {
            let key = format!(
                "{} + {} -> {} {}",
                name_of(ctx, &h1.x),
                name_of(ctx, &h2.x),
                name_of(ctx, &h1.y),
                h1.cone
            );
            instance(key, || {
                let u = disjoint_union_witness(h1, h2)?;
                let member = if u.cone.is_nonnegative() {
                    is_dnn(&u.h, 1e-6)?
                } else {
                    is_psd(&u.h, 1e-6)?
                };
                Ok(both(
                    bound(u.max_residual(), 1e-6, || "union witness invalid".into()),
                    require(member, || "union leaves the cone".into()),
                ))
            })
        })
        .collect()
}

/// Residual allowed for [`clique_cover_witness`] built from a numerical
/// θ solution `m` of value near `c`.
///
/// Contracting `m` over the clique partition gives `P` with trace one and
/// sum `c - η`; its weight off the all-ones direction is `τ = η / c`, so
/// the entries of `c P` are within `c (τ + 2√τ)` of one. Residuals of `m`
/// itself are scaled by `c`.
fn cover_tolerance(g: &Graph, cone: ConeTag, m: &SymMatrix, c: usize) -> conichom::Result<f64> {
    let c = c as f64;
    let r = theta_residuals(g, cone, m)?.max();
    let tau = (c - m.sum()).abs() / c + r;
    Ok(c * (tau + 2.0 * tau.sqrt() + r) + 1e-9)
}

fn clique_cover(ctx: &Context) -> Vec<Instance> {
    let jobs: Vec<(&CorpusGraph, ConeTag)> = ctx
        .corpus
        .iter()
        .flat_map(|g| CONIC.map(|c| (g, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(g, cone)| {
            instance(format!("{} {cone}", g.name), || {
                let t = theta::theta_with(&g.graph, cone, &ctx.solve)?;
                let c = chi_exact(&g.graph.complement())?;
                if (t.value - c as f64).abs() > 1e-6 {
                    return Ok(require(t.value < c as f64, || {
                        format!("theta {} above {c}", t.value)
                    }));
                }
                let w = clique_cover_witness(&g.graph, &t.solution, cone, 1e-6)?;
                let tol = cover_tolerance(&g.graph, cone, &t.solution, c)?;
                let a = conic_alpha(&g.graph, cone, HomMode::Strong)?;
                Ok(both(
                    bound(w.max_residual(), tol, || {
                        "clique-cover witness invalid".into()
                    }),
                    require(a == c, || {
                        format!("conic alpha {a} but clique cover number {c}")
                    }),
                ))
            })
        })
        .collect()
}

fn strong_alpha(ctx: &Context) -> Vec<Instance> {
    let mut jobs = Vec::new();
    for cone in CONIC {
        for ((x, y), d) in ctx.decisions(cone, HomMode::Strong) {
            let (gx, gy) = (ctx.graph(x), ctx.graph(y));
            if gx.n() * gx.n() * gy.n() <= 4 * LATTICE_DIM {
                jobs.push((x, y, cone, d));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(x, y, cone, d)| {
            instance(format!("{x} -> {y} {cone}"), || {
                let d = d.as_ref().map_err(|e| Error::Inconclusive(e.clone()))?;
                let (gx, gy) = (ctx.graph(x), ctx.graph(y));
                let prod = homomorphic_product(gx, gy);
                let t = theta::theta_with(&prod, cone, &ctx.solve)?;
                let n = gx.n();
                match &d.verdict {
                    // K_n → complement(X ⋉ Y) from the θ solution
                    Verdict::Yes(_) => {
                        let w = clique_cover_witness(&prod, &t.solution, cone, 1e-6)?;
                        let tol = cover_tolerance(&prod, cone, &t.solution, n)?;
                        Ok(bound(w.max_residual(), tol, || {
                            "no K_n witness into the complement".into()
                        }))
                    }
                    // α^K ≤ ⌊θ^K⌋ < n
                    Verdict::No(_) => Ok(require(t.value < n as f64 - 1e-6, || {
                        format!("theta {} not below {n}", t.value)
                    })),
                    Verdict::Inconclusive(why) => Ok(Outcome::Inconclusive(why.clone())),
                }
            })
        })
        .collect()
}

fn weak_alpha(ctx: &Context) -> Vec<Instance> {
    ctx.yes_witnesses(ConeTag::Dnn, HomMode::Weak)
        .into_par_iter()
        .filter(|(_, w)| w.x.n() * w.h.dim() <= 2 * LATTICE_DIM)
        .map(|((x, y), w)| {
            instance(format!("{x} -> {y}"), || {
                let e = weak_hom_alpha_embedding(&w)?;
                Ok(bound(e.residuals.max(HomMode::Weak), 1e-6, || {
                    "embedded witness invalid".into()
                }))
            })
        })
        .collect()
}

fn alpha_floor(ctx: &Context) -> Vec<Instance> {
    let jobs: Vec<(&CorpusGraph, ConeTag)> = ctx
        .corpus
        .iter()
        .flat_map(|g| ConeTag::ALL.map(|c| (g, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(g, cone)| {
            instance(format!("{} {cone}", g.name), || {
                let r =
                    conic_alpha_report(&g.graph, cone, HomMode::Strong, &DecideOptions::default())?;
                Ok(require(r.theta_floor.is_none_or(|f| f == r.search), || {
                    format!("{r:?}")
                }))
            })
        })
        .collect()
}

fn alpha_weak_strong(ctx: &Context) -> Vec<Instance> {
    let jobs: Vec<(&CorpusGraph, ConeTag)> = ctx
        .corpus
        .iter()
        .flat_map(|g| [ConeTag::Cp, ConeTag::Dnn].map(|c| (g, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(g, cone)| {
            instance(format!("{} {cone}", g.name), || {
                let s = conic_alpha(&g.graph, cone, HomMode::Strong)?;
                let w = conic_alpha(&g.graph, cone, HomMode::Weak)?;
                let cp_ok = cone != ConeTag::Cp || s == alpha_exact(&g.graph)?;
                Ok(require(s == w && cp_ok, || format!("strong {s}, weak {w}")))
            })
        })
        .collect()
}

fn degenerate(ctx: &Context) -> Vec<Instance> {
    let k2 = Graph::complete(2);
    let mut jobs = Vec::new();
    for n in 2..=6 {
        for g in of_size(&ctx.corpus, n) {
            jobs.push((n, g.name.clone(), g.graph.clone()));
        }
        jobs.push((n, format!("complete:{n}"), Graph::complete(n)));
    }
    jobs.dedup_by(|a, b| a.1 == b.1);
    jobs.into_par_iter()
        .map(|(n, name, g)| {
            instance(name, || {
                let h = degenerate_weak_splus_witness(n);
                let r = witness_residuals(&h, &g, &k2, ConeTag::Splus)?;
                Ok(bound(r.max(HomMode::Weak), 1e-9, || format!("{r:?}")))
            })
        })
        .collect()
}

/// Largest ratio of a marginal difference to what the block sums allow.
///
/// With Gram vectors `w` and row sums `s_x = Σ_y w_xy`, the marginal
/// `Σ_y' H_{p,x'y'}` is `⟨w_p, s_x'⟩`. Block sums within `ε` of one give
/// `|s_x - s_x'| ≤ 2√ε`, so marginals may differ by `2√(ε H_pp)`. A
/// smallest eigenvalue `-δ` is handled by applying this to `H + δI`.
fn marginal_excess(w: &HomWitness) -> (f64, f64) {
    let h = &w.h;
    let idx = w.labels();
    let delta = (-h.min_eigenvalue().unwrap_or(f64::NEG_INFINITY)).max(0.0);
    let eps = w.residuals.block_sum_dev + idx.ny as f64 * delta;
    let mut worst: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for p in 0..idx.dim() {
        let m: Vec<f64> = (0..idx.nx)
            .map(|x2| idx.block(x2).map(|q| h.get(p, q)).sum())
            .collect();
        let spread =
            m.iter().fold(f64::MIN, |a, &b| a.max(b)) - m.iter().fold(f64::MAX, |a, &b| a.min(b));
        let allowed = 2.0 * (eps * (h.get(p, p) + delta)).sqrt() + 2.0 * delta + 1e-12;
        worst = worst.max(spread);
        ratio = ratio.max(spread / allowed);
    }
    (worst, ratio)
}

fn nonsignalling(ctx: &Context) -> Vec<Instance> {
    let mut ws: Vec<(String, HomWitness)> = ctx
        .yes_witnesses(ConeTag::Dnn, HomMode::Weak)
        .into_iter()
        .map(|((x, y), w)| (format!("{x} -> {y} dnn weak"), w))
        .collect();
    ws.extend(
        ctx.strong_witnesses()
            .into_iter()
            .map(|((x, y, c), w)| (format!("{x} -> {y} {c}"), w)),
    );
    ws.into_par_iter()
        .map(|(key, w)| {
            instance(key, || {
                let (spread, ratio) = marginal_excess(&w);
                if ratio <= 1.0 {
                    Ok(Outcome::Pass(spread))
                } else {
                    Ok(Outcome::Fail(
                        spread,
                        format!(
                            "marginals differ by {spread:.3e}, {ratio:.2}x the block-sum bound"
                        ),
                    ))
                }
            })
        })
        .collect()
}
