//! Conic graph homomorphisms and generalized Lovász theta functions.
//!
//! For graphs `X`, `Y` and a matrix cone `K`, a *K-homomorphism* `X → Y` is
//! witnessed by a matrix `H ∈ K` indexed by `V(X) × V(Y)` whose `(x, x')`
//! blocks each sum to one and which vanishes on the positions forced to zero
//! by the adjacency structure. Over the completely positive cone this is the
//! ordinary graph homomorphism; over the doubly nonnegative and positive
//! semidefinite cones it is a tractable relaxation decided by semidefinite
//! programming.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: simple graphs, generators, the graph products, automorphisms
//!   and classical homomorphism search.
//! * [`linalg`]: dense symmetric matrices, eigendecomposition and the closure
//!   operations (Kronecker product, principal submatrix, permutation
//!   conjugation, contraction).
//! * [`solver`]: a primal-dual interior-point method for linear programs over
//!   products of PSD blocks and a nonnegative orthant.
//! * [`theta`]: the two generalized theta programs `θ^K` and `Θ^K`.
//! * [`hom`]: conic homomorphism decisions, witness constructions and conic
//!   independence numbers.
//! * [`corpus`]: the deterministic graph corpus used by property checks.

pub mod corpus;
pub mod error;
pub mod graph;
pub mod hom;
pub mod linalg;
pub mod solver;
pub mod theta;

pub use error::{Error, Result};
pub use graph::{Graph, VertexPairIndex};
pub use hom::{HomDecision, HomMode, HomWitness, Verdict};
pub use linalg::{Partition, SymMatrix};
pub use solver::{ConicProgram, SolveOptions, SolveReport, SolveStatus};
pub use theta::{ConeTag, ThetaKind, ThetaResult};
