use super::Graph;
use crate::error::{capability, Result};

/// `perm[v]` is the image of vertex `v`.
pub type Permutation = Vec<usize>;

/// Default vertex limit for the backtracking automorphism search.
pub const AUTOMORPHISM_VERTEX_LIMIT: usize = 12;

/// All automorphisms of `g`, i.e. permutations `π` with `Pπᵀ A Pπ = A`,
/// in lexicographic order. Identity first.
pub fn automorphisms(g: &Graph) -> Result<Vec<Permutation>> {
    automorphisms_with_limit(g, AUTOMORPHISM_VERTEX_LIMIT)
}

pub fn automorphisms_with_limit(g: &Graph, limit: usize) -> Result<Vec<Permutation>> {
    let n = g.n();
    if n > limit {
        return capability(format!(
            "automorphism search limited to {limit} vertices, graph has {n}"
        ));
    }
    // Refinement: a vertex can only map to one with the same degree and the
    // same sorted neighbour-degree sequence.
    let degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let signature: Vec<(usize, Vec<usize>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<usize> = g.neighbors(v).map(|u| degree[u]).collect();
            nd.sort_unstable();
            (degree[v], nd)
        })
        .collect();

    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(g, &signature, 0, &mut image, &mut used, &mut out);
    Ok(out)
}

fn extend(
    g: &Graph,
    sig: &[(usize, Vec<usize>)],
    v: usize,
    image: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Permutation>,
) {
    let n = g.n();
    if v == n {
        out.push(image.clone());
        return;
    }
    for w in 0..n {
        if used[w] || sig[w] != sig[v] {
            continue;
        }
        // adjacency to every already-placed vertex must be preserved
        if (0..v).any(|u| g.has_edge(u, v) != g.has_edge(image[u], w)) {
            continue;
        }
        image[v] = w;
        used[w] = true;
        extend(g, sig, v + 1, image, used, out);
        used[w] = false;
    }
    image[v] = usize::MAX;
}

/// Orbits of the automorphism group, each sorted, ordered by least element.
pub fn orbits(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let group = automorphisms(g)?;
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let mut orbit: Vec<usize> = group.iter().map(|p| p[v]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &u in &orbit {
            seen[u] = true;
        }
        out.push(orbit);
    }
    Ok(out)
}

/// Whether the automorphism group acts transitively on vertices.
pub fn is_vertex_transitive(g: &Graph) -> Result<bool> {
    Ok(orbits(g)?.len() <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_groups() {
        assert_eq!(automorphisms(&Graph::complete(3)).unwrap().len(), 6);
        assert_eq!(automorphisms(&Graph::cycle(5).unwrap()).unwrap().len(), 10);
        assert_eq!(automorphisms(&Graph::path(3)).unwrap().len(), 2);
        assert_eq!(automorphisms(&Graph::petersen()).unwrap().len(), 120);
        assert_eq!(
            automorphisms(&Graph::empty(0)).unwrap(),
            vec![Vec::<usize>::new()]
        );
    }

    #[test]
    fn transitivity() {
        assert!(is_vertex_transitive(&Graph::cycle(5).unwrap()).unwrap());
        assert!(!is_vertex_transitive(&Graph::path(3)).unwrap());
        assert!(is_vertex_transitive(&Graph::petersen()).unwrap());
    }

    #[test]
    fn over_limit_is_capability_error() {
        let g = Graph::cycle(13).unwrap();
        assert!(matches!(
            automorphisms(&g),
            Err(crate::Error::Capability(_))
        ));
        assert_eq!(automorphisms_with_limit(&g, 13).unwrap().len(), 26);
    }
}
