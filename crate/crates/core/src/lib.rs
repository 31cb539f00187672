//! Laboratory for the matching-recovery problem on correlated Erdős–Rényi graphs.
//!
//! Two graphs `G` and `Ḡ` are sub-sampled from a common `G(n, p)` parent (each
//! edge kept independently with probability `s`), and the second one is relabeled
//! through a hidden uniform bijection `π*`. The crate provides:
//!
//! - [`graph`], [`bijection`], [`model`]: graph and matching types, the correlated
//!   and independent generative laws, intersection graphs and the overlap metric;
//! - [`orbits`]: node cycles of `φ = π⁻¹∘π*` and the induced edge orbits;
//! - [`moments`]: exact exponential moments of orbit edge counts, Markov tail
//!   bounds, the combinatorial minimum `M(T, n₁..n_N)` and permutation counts;
//! - [`density`]: exact densest subgraph via max-flow, the empirical `ρ(λ)` curve
//!   and its inversion `λ* = ρ⁻¹(1/α)`;
//! - [`admissibility`]: the truncation event and good sets;
//! - [`inference`]: likelihood ratios, exact posteriors, estimators and TV distance.
//!
//! Every random operation takes an explicit [`RandomSeed`]; replicate `i` of an
//! experiment always draws from `seed.derive(i)`, so parallel and sequential runs
//! produce identical results.

pub mod admissibility;
pub mod bijection;
pub mod density;
pub mod flow;
pub mod graph;
pub mod inference;
pub mod model;
pub mod moments;
pub mod orbits;
pub mod par;
pub mod rng;
pub mod stats;

#[cfg(any(test, feature = "oracles"))]
pub mod oracle;

pub use bijection::{Bijection, Embedding};
pub use graph::Graph;
pub use model::{CorrelatedSample, ModelParams};
pub use rng::RandomSeed;
