//! Exact independence, clique and chromatic numbers by branch and bound.

use crate::error::{capability, Result};
use crate::graph::Graph;

/// Largest graph accepted by the bitset searches.
pub const EXACT_VERTEX_LIMIT: usize = 128;

/// Largest graph accepted by [`chi_exact`].
pub const CHROMATIC_VERTEX_LIMIT: usize = 40;

/// Cap on the number of maximal independent sets [`maximal_independent_sets`]
/// will enumerate.
pub const MAX_INDEPENDENT_SETS: usize = 100_000;

fn bitsets(g: &Graph, complement: bool) -> Result<Vec<u128>> {
    let n = g.n();
    if n > EXACT_VERTEX_LIMIT {
        return capability(format!(
            "exact search limited to {EXACT_VERTEX_LIMIT} vertices, graph has {n}"
        ));
    }
    Ok((0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v && g.has_edge(u, v) != complement)
                .fold(0u128, |m, u| m | (1u128 << u))
        })
        .collect())
}

fn members(mut set: u128) -> Vec<usize> {
    let mut out = Vec::new();
    while set != 0 {
        let v = set.trailing_zeros() as usize;
        out.push(v);
        set &= set - 1;
    }
    out
}

/// A maximum clique, sorted.
pub fn max_clique(g: &Graph) -> Result<Vec<usize>> {
    let adj = bitsets(g, false)?;
    let all = if g.n() == 128 {
        u128::MAX
    } else {
        (1u128 << g.n()) - 1
    };
    let mut best = Vec::new();
    let mut current = Vec::new();
    expand(&adj, all, &mut current, &mut best);
    best.sort_unstable();
    Ok(best)
}

/// A maximum independent set, sorted.
pub fn max_independent_set(g: &Graph) -> Result<Vec<usize>> {
    max_clique(&g.complement())
}

pub fn alpha_exact(g: &Graph) -> Result<usize> {
    Ok(max_independent_set(g)?.len())
}

pub fn omega_exact(g: &Graph) -> Result<usize> {
    Ok(max_clique(g)?.len())
}

// Greedy colouring of the candidates gives the bound; vertices are tried in
// reverse colour order so the bound is tight as early as possible.
fn expand(adj: &[u128], cand: u128, current: &mut Vec<usize>, best: &mut Vec<usize>) {
    let mut order = Vec::new();
    let mut uncolored = cand;
    let mut color = 0;
    while uncolored != 0 {
        color += 1;
        let mut q = uncolored;
        while q != 0 {
            let v = q.trailing_zeros() as usize;
            q &= !(1u128 << v) & !adj[v];
            uncolored &= !(1u128 << v);
            order.push((v, color));
        }
    }
    let mut remaining = cand;
    for &(v, c) in order.iter().rev() {
        if current.len() + c <= best.len() {
            return;
        }
        current.push(v);
        let next = remaining & adj[v];
        if next == 0 {
            if current.len() > best.len() {
                *best = current.clone();
            }
        } else {
            expand(adj, next, current, best);
        }
        current.pop();
        remaining &= !(1u128 << v);
    }
}

/// All maximal independent sets (Bron-Kerbosch with pivoting on the
/// complement), each sorted, in discovery order.
pub fn maximal_independent_sets(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let adj = bitsets(g, true)?;
    let n = g.n();
    let all = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    let mut out = Vec::new();
    bron_kerbosch(&adj, 0, all, 0, &mut out)?;
    Ok(out.into_iter().map(members).collect())
}

fn bron_kerbosch(adj: &[u128], r: u128, p: u128, x: u128, out: &mut Vec<u128>) -> Result<()> {
    if p == 0 && x == 0 {
        if out.len() >= MAX_INDEPENDENT_SETS {
            return capability(format!(
                "more than {MAX_INDEPENDENT_SETS} maximal independent sets"
            ));
        }
        out.push(r);
        return Ok(());
    }
    let pivot = members(p | x)
        .into_iter()
        .max_by_key(|&u| (p & adj[u]).count_ones())
        .expect("p | x is nonempty");
    let (mut p, mut x) = (p, x);
    for v in members(p & !adj[pivot]) {
        let bit = 1u128 << v;
        bron_kerbosch(adj, r | bit, p & adj[v], x & adj[v], out)?;
        p &= !bit;
        x |= bit;
    }
    Ok(())
}

/// Chromatic number: DSATUR upper bound, then exact `k`-colourability tests
/// for `k` from the clique number upwards.
pub fn chi_exact(g: &Graph) -> Result<usize> {
    Ok(optimal_coloring(g)?.into_iter().max().map_or(0, |c| c + 1))
}

/// A proper colouring with the minimum number of colours.
pub fn optimal_coloring(g: &Graph) -> Result<Vec<usize>> {
    let n = g.n();
    if n > CHROMATIC_VERTEX_LIMIT {
        return capability(format!(
            "chromatic number limited to {CHROMATIC_VERTEX_LIMIT} vertices, graph has {n}"
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let upper = dsatur_greedy(g);
    let upper_k = upper.iter().max().map_or(0, |c| c + 1);
    let lower = omega_exact(g)?;
    for k in lower..upper_k {
        let mut colors = vec![usize::MAX; n];
        if color_search(g, k, &mut colors, 0) {
            return Ok(colors);
        }
    }
    Ok(upper)
}

fn saturation(g: &Graph, colors: &[usize], v: usize) -> usize {
    let mut seen = 0u128;
    for u in g.neighbors(v) {
        if colors[u] != usize::MAX {
            seen |= 1u128 << colors[u];
        }
    }
    seen.count_ones() as usize
}

fn pick_dsatur(g: &Graph, colors: &[usize]) -> Option<usize> {
    (0..g.n())
        .filter(|&v| colors[v] == usize::MAX)
        .max_by_key(|&v| (saturation(g, colors, v), g.degree(v), usize::MAX - v))
}

fn dsatur_greedy(g: &Graph) -> Vec<usize> {
    let mut colors = vec![usize::MAX; g.n()];
    while let Some(v) = pick_dsatur(g, &colors) {
        let c = (0..)
            .find(|&c| g.neighbors(v).all(|u| colors[u] != c))
            .expect("some colour is free");
        colors[v] = c;
    }
    colors
}

fn color_search(g: &Graph, k: usize, colors: &mut [usize], used: usize) -> bool {
    let Some(v) = pick_dsatur(g, colors) else {
        return true;
    };
    // a fresh colour is interchangeable with any other fresh colour
    for c in 0..k.min(used + 1) {
        if g.neighbors(v).any(|u| colors[u] == c) {
            continue;
        }
        colors[v] = c;
        if color_search(g, k, colors, used.max(c + 1)) {
            return true;
        }
    }
    colors[v] = usize::MAX;
    false
}
