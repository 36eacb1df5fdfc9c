//! The acceptance gate: criteria 1-10, one line each.
//!
//! Every criterion runs even when an earlier one fails; the test fails at
//! the end if any line says FAIL.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{
    brute_force_alpha, brute_force_hom, cycle_theta, lambda_min, petersen_theta, psd_by_cholesky,
};
use conichom::corpus::{default_corpus, hom_pairs, of_size, CorpusGraph};
use conichom::graph::{classical_homomorphism, disjunctive_product, lexicographic_product};
use conichom::hom::*;
use conichom::linalg::{conjugate_by_permutation, contract, kron, principal_submatrix};
use conichom::theta::{big_theta, big_theta_residuals, theta, theta_residuals, ThetaResult};
use conichom::{ConeTag, Graph, Partition, SymMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

const CONIC: [ConeTag; 2] = [ConeTag::Dnn, ConeTag::Splus];
const MAX_PRODUCT: usize = 40;

/// Decisions and witnesses shared between criteria.
struct Shared {
    corpus: Vec<CorpusGraph>,
    /// Strong witnesses keyed by (X, Y, cone): CP lifts of classical maps,
    /// and DNN / PSD witnesses from the direct feasibility program.
    strong: BTreeMap<(String, String, ConeTag), HomWitness>,
}

impl Shared {
    fn graph(&self, name: &str) -> &Graph {
        &self
            .corpus
            .iter()
            .find(|g| g.name == name)
            .expect("corpus name")
            .graph
    }
}

fn conic_only() -> DecideOptions {
    DecideOptions {
        classical_first: false,
        ..DecideOptions::default()
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c5 = Graph::cycle(5).unwrap();
    let t = theta(&c5, ConeTag::Splus).map_err(|e| e.to_string())?;
    let want = cycle_theta(5);
    ensure((t.value - want).abs() <= 1e-6, || {
        format!("theta S+ (C5) = {} vs {want}", t.value)
    })?;
    ensure((want - 2.2360680).abs() < 1e-7, || format!("oracle {want}"))?;

    let p = theta(&Graph::petersen(), ConeTag::Splus).map_err(|e| e.to_string())?;
    let pw = petersen_theta();
    ensure((p.value - pw).abs() <= 1e-5, || {
        format!("theta S+ (Petersen) = {} vs {pw}", p.value)
    })?;

    let cp = theta(&c5, ConeTag::Cp).map_err(|e| e.to_string())?;
    let alpha = brute_force_alpha(&c5) as f64;
    ensure(cp.value == alpha && alpha == 2.0, || {
        format!("theta CP (C5) = {}", cp.value)
    })?;

    // C5 is vertex transitive, so χ_f = n / α
    let bt = big_theta(&c5, ConeTag::Cp).map_err(|e| e.to_string())?;
    let chi_f = 5.0 / alpha;
    ensure((bt.value - chi_f).abs() <= 1e-9, || {
        format!("big theta CP (C5) = {} vs {chi_f}", bt.value)
    })?;
    let res = big_theta_residuals(&c5, ConeTag::Cp, &bt.solution, bt.value).unwrap();
    ensure(res.max() <= 1e-9, || {
        format!("big theta CP solution residual {res:?}")
    })?;

    let el = start.elapsed();
    ensure(el < Duration::from_secs(10), || format!("took {el:?}"))?;
    Ok(format!(
        "{:.9} {:.9} {} {} in {:.2}s",
        t.value,
        p.value,
        cp.value,
        bt.value,
        el.as_secs_f64()
    ))
}

fn criterion_2(s: &Shared) -> Outcome {
    let start = Instant::now();
    let transitive = ["cycle:5", "cycle:7", "complete:5", "petersen"];
    let mut worst: f64 = f64::INFINITY;
    let mut worst_eq: f64 = 0.0;
    for g in &s.corpus {
        for cone in CONIC {
            let t = theta(&g.graph, cone).map_err(|e| format!("{} {cone}: {e}", g.name))?;
            let bt = big_theta(&g.graph, cone).map_err(|e| format!("{} {cone}: {e}", g.name))?;
            let n = g.graph.n() as f64;
            let slack = t.value * bt.value - n;
            worst = worst.min(slack);
            ensure(slack >= -1e-6, || {
                format!("{} {cone}: {} * {} < {n}", g.name, t.value, bt.value)
            })?;
            if transitive.contains(&g.name.as_str()) {
                worst_eq = worst_eq.max(slack.abs());
                ensure(slack.abs() <= 1e-5, || {
                    format!(
                        "{} {cone}: product {} differs from {n}",
                        g.name,
                        t.value * bt.value
                    )
                })?;
            }
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(120), || format!("took {el:?}"))?;
    Ok(format!(
        "{} graphs, min slack {worst:.3e}, transitive max |slack| {worst_eq:.3e} in {:.1}s",
        s.corpus.len(),
        el.as_secs_f64()
    ))
}

fn criterion_3(s: &mut Shared) -> Outcome {
    let opts = conic_only();
    let pairs: Vec<(String, String)> = hom_pairs(&s.corpus, MAX_PRODUCT)
        .into_iter()
        .map(|(x, y)| (x.name.clone(), y.name.clone()))
        .collect();
    let (mut yes, mut no, mut undecided) = (0, 0, 0);
    for (xn, yn) in &pairs {
        let (x, y) = (s.graph(xn).clone(), s.graph(yn).clone());
        for cone in CONIC {
            let d =
                decide_hom_with(&x, &y, cone, HomMode::Strong, &opts).map_err(|e| e.to_string())?;
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
            ensure(!clash, || {
                format!("{xn} -> {yn} over {cone}: {}", d.to_json())
            })?;
            match d.verdict {
                Verdict::Yes(w) => {
                    yes += 1;
                    ensure(w.is_valid(1e-7), || {
                        format!("{xn} -> {yn} {cone}: residual {:e}", w.max_residual())
                    })?;
                    s.strong.insert((xn.clone(), yn.clone(), cone), *w);
                }
                Verdict::No(_) => no += 1,
                Verdict::Inconclusive(_) => undecided += 1,
            }
        }
        if let Some(map) = classical_homomorphism(&x, &y) {
            let w = classical_lift(&x, &y, &map).map_err(|e| e.to_string())?;
            s.strong.insert((xn.clone(), yn.clone(), ConeTag::Cp), w);
        }
    }

    let mut cp_checked = 0;
    for x in &s.corpus {
        for y in &s.corpus {
            if (y.graph.n() as f64).powi(x.graph.n() as i32) > 1e6 {
                continue;
            }
            let d = decide_hom(&x.graph, &y.graph, ConeTag::Cp, HomMode::Strong)
                .map_err(|e| e.to_string())?;
            let expect = brute_force_hom(&x.graph, &y.graph);
            ensure(
                d.verdict.is_yes() == expect && d.verdict.is_no() != expect,
                || {
                    format!(
                        "CP {} -> {}: {} but brute force says {expect}",
                        x.name,
                        y.name,
                        d.verdict.as_str()
                    )
                },
            )?;
            cp_checked += 1;
        }
    }
    Ok(format!(
        "{} conic instances: {yes} yes, {no} no, {undecided} inconclusive, 0 disagreements; {cp_checked} CP pairs match enumeration",
        pairs.len() * 2
    ))
}

fn criterion_4(s: &Shared) -> Outcome {
    let opts = conic_only();
    let (mut repaired, mut worst) = (0, 0.0f64);
    for (x, y) in hom_pairs(&s.corpus, MAX_PRODUCT) {
        let d = decide_hom_with(&x.graph, &y.graph, ConeTag::Dnn, HomMode::Weak, &opts)
            .map_err(|e| e.to_string())?;
        if let Some(w) = d.verdict.witness() {
            let r = repair_weak_to_strong_dnn(w)
                .map_err(|e| format!("{} -> {}: {e}", x.name, y.name))?;
            let res = r.residuals.max(HomMode::Strong);
            worst = worst.max(res);
            ensure(r.mode == HomMode::Strong && res <= 1e-7, || {
                format!(
                    "{} -> {}: repaired residuals {:?}",
                    x.name, y.name, r.residuals
                )
            })?;
            repaired += 1;
        }
    }
    Ok(format!(
        "{repaired} weak witnesses repaired, worst residual {worst:.3e}"
    ))
}

fn criterion_5(s: &Shared) -> Outcome {
    let cones = [ConeTag::Cp, ConeTag::Dnn, ConeTag::Splus];
    let mut small: BTreeMap<(String, ConeTag), ThetaResult> = BTreeMap::new();
    let mut big: BTreeMap<(String, ConeTag), ThetaResult> = BTreeMap::new();
    for g in &s.corpus {
        for cone in cones {
            let t = theta(&g.graph.complement(), cone).map_err(|e| format!("{}: {e}", g.name))?;
            small.insert((g.name.clone(), cone), t);
            let b = big_theta(&g.graph, cone).map_err(|e| format!("{}: {e}", g.name))?;
            big.insert((g.name.clone(), cone), b);
        }
    }
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for ((xn, yn, cone), w) in &s.strong {
        let key_x = (xn.clone(), *cone);
        let key_y = (yn.clone(), *cone);
        let tag = || format!("{xn} -> {yn} over {cone}");

        let m = &small[&key_x];
        let n = monotone_transform_theta(&m.solution, w).map_err(|e| format!("{}: {e}", tag()))?;
        let res = theta_residuals(&w.y.complement(), *cone, &n).unwrap();
        worst = worst.max(res.max());
        ensure(res.max() <= 1e-6, || {
            format!("{}: transformed theta solution residual {res:?}", tag())
        })?;
        ensure((n.sum() - m.solution.sum()).abs() <= 1e-6, || {
            format!("{}: value moved", tag())
        })?;
        ensure(m.value <= small[&key_y].value + 1e-5, || {
            format!("{}: {} > {}", tag(), m.value, small[&key_y].value)
        })?;

        let b = &big[&key_y];
        let (mx, top) = monotone_transform_big_theta(&b.solution, b.value, w)
            .map_err(|e| format!("{}: {e}", tag()))?;
        let res = big_theta_residuals(&w.x, *cone, &mx, b.value).unwrap();
        worst = worst.max(res.max());
        ensure(res.max() <= 1e-6 * b.value.max(1.0), || {
            format!("{}: transformed big theta solution residual {res:?}", tag())
        })?;
        ensure(top.iter().all(|&t| t >= -1e-6), || {
            format!("{}: negative top-up {top:?}", tag())
        })?;
        ensure(big[&key_x].value <= b.value + 1e-5, || {
            format!("{}: {} > {}", tag(), big[&key_x].value, b.value)
        })?;
        count += 1;
    }
    Ok(format!(
        "{count} strong witnesses transported, worst residual {worst:.3e}"
    ))
}

fn criterion_6() -> Outcome {
    let base = [
        ("cycle:5", Graph::cycle(5).unwrap()),
        ("complete:3", Graph::complete(3)),
        ("path:3", Graph::path(3)),
        ("cycle:4", Graph::cycle(4).unwrap()),
    ];
    let mut worst_rel: f64 = 0.0;
    let mut worst_sub: f64 = f64::INFINITY;
    for cone in CONIC {
        let th: Vec<f64> = base
            .iter()
            .map(|(_, g)| theta(g, cone).unwrap().value)
            .collect();
        let bt: Vec<f64> = base
            .iter()
            .map(|(_, g)| big_theta(g, cone).unwrap().value)
            .collect();
        for (i, (xn, x)) in base.iter().enumerate() {
            for (j, (yn, y)) in base.iter().enumerate() {
                let expect = th[i] * th[j];
                for (what, prod) in [
                    ("disjunctive", disjunctive_product(x, y)),
                    ("lexicographic", lexicographic_product(x, y)),
                ] {
                    let v = theta(&prod, cone).map_err(|e| e.to_string())?.value;
                    let rel = (v - expect).abs() / expect;
                    worst_rel = worst_rel.max(rel);
                    ensure(rel <= 1e-5, || {
                        format!("{cone} {what} {xn} {yn}: {v} vs {expect}")
                    })?;
                }
                let v = big_theta(&disjunctive_product(x, y), cone)
                    .map_err(|e| e.to_string())?
                    .value;
                let bound = bt[i] * bt[j];
                worst_sub = worst_sub.min(bound - v);
                ensure(v <= bound + 1e-6, || {
                    format!("{cone} big theta {xn} * {yn}: {v} > {bound}")
                })?;
            }
        }
    }
    Ok(format!(
        "32 pairs per product, worst relative deviation {worst_rel:.3e}; big theta slack ≥ {worst_sub:.3e}"
    ))
}

const LATTICE_DIM: usize = 100;

fn criterion_7(s: &Shared) -> Outcome {
    let mut meets = 0;
    let mut unions = 0;
    let mut worst: f64 = 0.0;
    let all: Vec<(&(String, String, ConeTag), &HomWitness)> = s.strong.iter().collect();
    for cone in [ConeTag::Cp, ConeTag::Dnn, ConeTag::Splus] {
        let ws: Vec<_> = all.iter().filter(|((_, _, c), _)| *c == cone).collect();
        for ((z1, x, _), h1) in &ws {
            for ((z2, y, _), h2) in &ws {
                if z1 == z2 && h1.x.n() * h1.y.n() * h2.y.n() <= LATTICE_DIM {
                    let m = categorical_meet_witness(h1, h2).map_err(|e| e.to_string())?;
                    worst = worst.max(m.max_residual());
                    ensure(m.is_valid(1e-6), || {
                        format!("meet {z1}->{x}, {z1}->{y} over {cone}: {:?}", m.residuals)
                    })?;
                    meets += 1;
                }
                let (a, b) = (h1.x.n(), h2.x.n());
                if x == y && (a + b) * h1.y.n() <= LATTICE_DIM {
                    let u = disjoint_union_witness(h1, h2)
                        .map_err(|e| format!("union {z1}+{z2}->{x} over {cone}: {e}"))?;
                    worst = worst.max(u.max_residual());
                    ensure(u.is_valid(1e-6), || {
                        format!("union {z1}+{z2}->{x} over {cone}: {:?}", u.residuals)
                    })?;
                    // cone membership through a factorization instead of an eigensolver
                    ensure(psd_by_cholesky(&u.h.rows(), 1e-6), || {
                        format!("union {z1}+{z2}->{x} over {cone}: not PSD")
                    })?;
                    if cone != ConeTag::Splus {
                        ensure(u.h.min_entry() >= -1e-6, || {
                            format!("union {z1}+{z2}->{x}: negative entry")
                        })?;
                    }
                    unions += 1;
                }
            }
        }
    }
    Ok(format!(
        "{meets} meets and {unions} unions validated, worst residual {worst:.3e}"
    ))
}

fn criterion_8(s: &Shared) -> Outcome {
    let mut checked = 0;
    let mut summary = Vec::new();
    for cone in ConeTag::ALL {
        let mut guarded = 0;
        for g in &s.corpus {
            let r = conic_alpha_report(&g.graph, cone, HomMode::Strong, &DecideOptions::default())
                .map_err(|e| format!("{} {cone}: {e}", g.name))?;
            ensure(r.search == r.value, || format!("{} {cone}: {r:?}", g.name))?;
            if let Some(f) = r.theta_floor {
                ensure(f == r.search, || {
                    format!("{} {cone}: floor {f} vs search {}", g.name, r.search)
                })?;
            } else {
                guarded += 1;
            }
            checked += 1;
        }
        summary.push(format!("{cone}: {guarded} in guard band"));
    }
    Ok(format!(
        "{checked} graph/cone pairs agree ({})",
        summary.join(", ")
    ))
}

fn criterion_9(s: &Shared) -> Outcome {
    let k2 = Graph::complete(2);
    let mut checked = 0;
    for n in 2..=6 {
        let h = degenerate_weak_splus_witness(n);
        let mut graphs: Vec<Graph> = of_size(&s.corpus, n)
            .into_iter()
            .map(|g| g.graph.clone())
            .collect();
        graphs.push(Graph::complete(n));
        for x in &graphs {
            let r = witness_residuals(&h, x, &k2, ConeTag::Splus).map_err(|e| e.to_string())?;
            ensure(r.passes(HomMode::Weak, 1e-9), || format!("n={n}: {r:?}"))?;
            checked += 1;
        }
        ensure(
            decide_hom(&Graph::complete(n), &k2, ConeTag::Splus, HomMode::Weak).is_err(),
            || "weak PSD decisions must be refused".to_string(),
        )?;
    }
    Ok(format!(
        "{checked} graphs map weakly to K2 through the degenerate matrix"
    ))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, nonneg: bool) -> SymMatrix {
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

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for nonneg in [false, true] {
        let check = |m: &SymMatrix, what: &str, worst: &mut f64| -> Result<(), String> {
            let l = lambda_min(&m.rows());
            *worst = worst.min(l);
            ensure(l >= -1e-9, || format!("{what}: λ_min {l}"))?;
            if nonneg {
                ensure(m.min_entry() >= 0.0, || format!("{what}: negative entry"))?;
            }
            Ok(())
        };
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            let m = random_psd(&mut rng, n, nonneg);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let k = rng.gen_range(1..=n);
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
            for (pos, &i) in idx.iter().enumerate() {
                let b = if pos < k { pos } else { rng.gen_range(0..k) };
                blocks[b].push(i);
            }
            let c = contract(&m, &Partition::new(n, blocks).unwrap()).unwrap();
            check(&c, "contraction", &mut worst)?;
        }
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
            let k = kron(
                &random_psd(&mut rng, a, nonneg),
                &random_psd(&mut rng, b, nonneg),
            )
            .unwrap();
            check(&k, "kronecker", &mut worst)?;
        }
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let m = random_psd(&mut rng, n, nonneg);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(rng.gen_range(1..=n));
            check(
                &principal_submatrix(&m, &idx).unwrap(),
                "principal submatrix",
                &mut worst,
            )?;
        }
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let m = random_psd(&mut rng, n, nonneg);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let p = conjugate_by_permutation(&m, &perm).unwrap();
            check(&p, "permutation", &mut worst)?;
            let back = SymMatrix::from_fn(n, |i, j| {
                p.get(
                    perm.iter().position(|&v| v == i).unwrap(),
                    perm.iter().position(|&v| v == j).unwrap(),
                )
            });
            ensure(back.max_abs_diff(&m) == 0.0, || {
                "permutation does not invert".to_string()
            })?;
        }
    }
    Ok(format!("1600 instances, smallest eigenvalue {worst:.3e}"))
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (passed, line) = match outcome {
        Ok(detail) => (
            true,
            format!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {detail}"),
        ),
        Err(why) => (
            false,
            format!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {why}"),
        ),
    };
    // straight to the handle so the line shows without --nocapture
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").and_then(|_| out.flush()).ok();
    passed
}

#[test]
fn acceptance() {
    let mut shared = Shared {
        corpus: default_corpus(),
        strong: BTreeMap::new(),
    };
    let mut ok = Vec::new();
    ok.push(run(1, "golden thetas", criterion_1));
    ok.push(run(2, "theta times big theta", || criterion_2(&shared)));
    ok.push(run(3, "decision oracles agree", || {
        criterion_3(&mut shared)
    }));
    ok.push(run(4, "weak DNN repair", || criterion_4(&shared)));
    ok.push(run(5, "monotonicity transports", || criterion_5(&shared)));
    ok.push(run(6, "multiplicativity", criterion_6));
    ok.push(run(7, "meet and union witnesses", || criterion_7(&shared)));
    ok.push(run(8, "conic alpha two ways", || criterion_8(&shared)));
    ok.push(run(9, "degenerate weak PSD matrix", || {
        criterion_9(&shared)
    }));
    ok.push(run(10, "closure of PSD and DNN", criterion_10));
    let failed: Vec<usize> = ok
        .iter()
        .enumerate()
        .filter(|(_, &p)| !p)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
