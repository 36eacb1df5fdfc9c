//! The deterministic graph corpus: small named graphs plus seeded
//! `G(n, 1/2)` samples. Every entry is named by the generator string that
//! rebuilds it.

use crate::graph::Graph;

pub const DEFAULT_SEED: u64 = 1;

/// Named graphs in the order they are listed.
pub const NAMED: [&str; 11] = [
    "complete:2",
    "complete:3",
    "complete:4",
    "complete:5",
    "path:3",
    "path:4",
    "cycle:4",
    "cycle:5",
    "cycle:6",
    "cycle:7",
    "petersen",
];

#[derive(Clone, Debug)]
pub struct CorpusGraph {
    /// Generator string, accepted by [`Graph::from_generator`].
    pub name: String,
    pub graph: Graph,
}

#[derive(Clone, Debug)]
pub struct CorpusOptions {
    pub seed: u64,
    /// Graphs with more vertices are left out.
    pub max_size: usize,
    /// Random samples are drawn for each `n` in this range.
    pub random_sizes: std::ops::RangeInclusive<usize>,
    pub samples_per_size: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            seed: DEFAULT_SEED,
            max_size: 10,
            random_sizes: 4..=8,
            samples_per_size: 1,
        }
    }
}

/// Named graphs first, then random graphs by increasing size.
pub fn corpus(opts: &CorpusOptions) -> Vec<CorpusGraph> {
    let mut out: Vec<CorpusGraph> = NAMED
        .iter()
        .map(|name| CorpusGraph {
            name: name.to_string(),
            graph: Graph::from_generator(name).expect("named generators are valid"),
        })
        .collect();
    for n in opts.random_sizes.clone() {
        for k in 0..opts.samples_per_size {
            let seed = opts
                .seed
                .wrapping_mul(1000)
                .wrapping_add((n * 10 + k) as u64);
            let name = format!("random:{n}:{seed}");
            out.push(CorpusGraph {
                graph: Graph::random(n, seed),
                name,
            });
        }
    }
    out.retain(|g| g.graph.n() <= opts.max_size);
    out
}

/// The default corpus.
pub fn default_corpus() -> Vec<CorpusGraph> {
    corpus(&CorpusOptions::default())
}

/// Ordered pairs `(X, Y)` with `|V(X)| |V(Y)| ≤ max_product`.
pub fn hom_pairs(graphs: &[CorpusGraph], max_product: usize) -> Vec<(&CorpusGraph, &CorpusGraph)> {
    let mut out = Vec::new();
    for x in graphs {
        for y in graphs {
            if x.graph.n() * y.graph.n() <= max_product {
                out.push((x, y));
            }
        }
    }
    out
}

/// Corpus graphs on exactly `n` vertices.
pub fn of_size(graphs: &[CorpusGraph], n: usize) -> Vec<&CorpusGraph> {
    graphs.iter().filter(|g| g.graph.n() == n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_rebuild_graphs() {
        for g in default_corpus() {
            assert_eq!(
                Graph::from_generator(&g.name).unwrap(),
                g.graph,
                "{}",
                g.name
            );
        }
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let a = default_corpus();
        let b = default_corpus();
        assert!(a.iter().zip(&b).all(|(p, q)| p.graph == q.graph));
        let c = corpus(&CorpusOptions {
            seed: 7,
            ..CorpusOptions::default()
        });
        assert!(a.iter().zip(&c).any(|(p, q)| p.graph != q.graph));
    }
}
