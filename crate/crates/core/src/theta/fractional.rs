use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hom::exact::maximal_independent_sets;
use crate::linalg::SymMatrix;
use crate::solver::{self, ConicProgram, Sense, SolveOptions, SolveStatus, Term};

/// An optimal fractional colouring.
#[derive(Clone, Debug)]
pub struct FractionalColoring {
    /// χ_f(G).
    pub value: f64,
    /// Independent sets with positive weight, trimmed so that every vertex
    /// is covered with total weight one.
    pub sets: Vec<(Vec<usize>, f64)>,
    /// `N = t Σ_S w_S 1_S 1_Sᵀ`, feasible for Θ^CP with value `t`.
    pub matrix: SymMatrix,
    pub gap: f64,
}

const LP_TOL: f64 = 1e-11;
const WEIGHT_FLOOR: f64 = 1e-13;

/// χ_f(G) as `min Σ_S w_S` over the maximal independent sets of `G`,
/// subject to every vertex being covered with weight at least one.
pub fn fractional_chromatic(g: &Graph) -> Result<FractionalColoring> {
    let n = g.n();
    let sets = maximal_independent_sets(g)?;
    let mut p = ConicProgram::new(Sense::Minimize);
    let w = p.add_nonneg_block(sets.len());
    let surplus = p.add_nonneg_block(n);
    p.set_objective((0..sets.len()).map(|s| Term::var(w, s, 1.0)).collect());
    let mut rows: Vec<Vec<Term>> = (0..n).map(|v| vec![Term::var(surplus, v, -1.0)]).collect();
    for (s, set) in sets.iter().enumerate() {
        for &v in set {
            rows[v].push(Term::var(w, s, 1.0));
        }
    }
    for row in rows {
        p.add_constraint(row, 1.0);
    }
    let opts = SolveOptions {
        feas_tol: LP_TOL,
        gap_tol: LP_TOL,
        ..SolveOptions::default()
    };
    let r = solver::solve(&p, &opts)?;
    if r.status != SolveStatus::Optimal {
        return Err(Error::Numerical {
            message: format!("fractional colouring LP ended with status {:?}", r.status),
            iterations: r.iterations,
        });
    }
    let weights = r.nonneg(w);
    let mut weighted: Vec<(Vec<usize>, f64)> = sets
        .into_iter()
        .zip(weights.iter().copied())
        .filter(|(_, x)| *x > WEIGHT_FLOOR)
        .collect();
    trim_to_exact_cover(n, &mut weighted);
    let t = r.primal_value;
    let mut m = SymMatrix::zeros(n);
    for (set, x) in &weighted {
        for &i in set {
            for &j in set {
                if i <= j {
                    m.add_to(i, j, t * x);
                }
            }
        }
    }
    Ok(FractionalColoring {
        value: t,
        sets: weighted,
        matrix: m,
        gap: r.gap,
    })
}

/// Removes over-coverage by moving weight from a set to the same set minus
/// the over-covered vertex. Subsets of independent sets stay independent.
fn trim_to_exact_cover(n: usize, sets: &mut Vec<(Vec<usize>, f64)>) {
    for v in 0..n {
        let cover: f64 = sets
            .iter()
            .filter(|(s, _)| s.contains(&v))
            .map(|(_, x)| x)
            .sum();
        let mut excess = cover - 1.0;
        if excess <= 0.0 {
            continue;
        }
        let mut split = Vec::new();
        for (s, x) in sets.iter_mut() {
            if excess <= 0.0 {
                break;
            }
            if !s.contains(&v) {
                continue;
            }
            let moved = x.min(excess);
            *x -= moved;
            excess -= moved;
            let rest: Vec<usize> = s.iter().copied().filter(|&u| u != v).collect();
            split.push((rest, moved));
        }
        sets.extend(split);
        sets.retain(|(s, x)| !s.is_empty() && *x > 0.0);
    }
    sets.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Vec<usize>, f64)> = Vec::new();
    for (s, x) in sets.drain(..) {
        match merged.last_mut() {
            Some(last) if last.0 == s => last.1 += x,
            _ => merged.push((s, x)),
        }
    }
    *sets = merged;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_cycle() {
        let fc = fractional_chromatic(&Graph::cycle(5).unwrap()).unwrap();
        assert!((fc.value - 2.5).abs() < 1e-9, "{}", fc.value);
        for v in 0..5 {
            let cover: f64 = fc
                .sets
                .iter()
                .filter(|(s, _)| s.contains(&v))
                .map(|(_, x)| x)
                .sum();
            assert!((cover - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn complete_and_empty() {
        assert!((fractional_chromatic(&Graph::complete(4)).unwrap().value - 4.0).abs() < 1e-9);
        assert!((fractional_chromatic(&Graph::empty(3)).unwrap().value - 1.0).abs() < 1e-9);
        assert!((fractional_chromatic(&Graph::petersen()).unwrap().value - 2.5).abs() < 1e-9);
    }
}
