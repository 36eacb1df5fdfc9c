use super::Graph;

/// Checks `x ~ x' ⇒ φ(x) ~ φ(x')`.
pub fn is_homomorphism(x: &Graph, y: &Graph, map: &[usize]) -> bool {
    map.len() == x.n()
        && map.iter().all(|&v| v < y.n())
        && x.edges().iter().all(|&(a, b)| y.has_edge(map[a], map[b]))
}

/// Finds a homomorphism `X → Y` by backtracking with forward checking and a
/// smallest-domain-first variable order. Returns `map[x] = φ(x)`.
pub fn classical_homomorphism(x: &Graph, y: &Graph) -> Option<Vec<usize>> {
    let nx = x.n();
    if nx == 0 {
        return Some(Vec::new());
    }
    if y.n() == 0 {
        return None;
    }
    let domains: Vec<Vec<bool>> = vec![vec![true; y.n()]; nx];
    let mut assignment = vec![usize::MAX; nx];
    search(x, y, domains, &mut assignment).then_some(assignment)
}

fn search(x: &Graph, y: &Graph, domains: Vec<Vec<bool>>, assignment: &mut [usize]) -> bool {
    // most constrained unassigned vertex; ties broken by degree then index
    let next = (0..x.n())
        .filter(|&v| assignment[v] == usize::MAX)
        .min_by_key(|&v| {
            let size = domains[v].iter().filter(|&&b| b).count();
            (size, usize::MAX - x.degree(v), v)
        });
    let Some(v) = next else { return true };

    for target in 0..y.n() {
        if !domains[v][target] {
            continue;
        }
        let mut pruned = domains.clone();
        let mut wiped = false;
        for u in x.neighbors(v) {
            if assignment[u] != usize::MAX {
                continue;
            }
            for (t, allowed) in pruned[u].iter_mut().enumerate() {
                if *allowed && !y.has_edge(target, t) {
                    *allowed = false;
                }
            }
            if !pruned[u].iter().any(|&b| b) {
                wiped = true;
                break;
            }
        }
        if wiped {
            continue;
        }
        assignment[v] = target;
        if search(x, y, pruned, assignment) {
            return true;
        }
        assignment[v] = usize::MAX;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_cycle_to_triangle() {
        let c5 = Graph::cycle(5).unwrap();
        let k3 = Graph::complete(3);
        let map = classical_homomorphism(&c5, &k3).expect("C5 is 3-colourable");
        assert!(is_homomorphism(&c5, &k3, &map));
        assert!(classical_homomorphism(&k3, &c5).is_none());
    }

    #[test]
    fn identity_and_edge_cases() {
        let p = Graph::petersen();
        assert!(classical_homomorphism(&p, &p).is_some());
        assert_eq!(classical_homomorphism(&Graph::empty(0), &p), Some(vec![]));
        assert!(classical_homomorphism(&Graph::empty(1), &Graph::empty(0)).is_none());
        // any graph with an edge has no homomorphism to an edgeless graph
        assert!(classical_homomorphism(&Graph::complete(2), &Graph::empty(4)).is_none());
    }
}
