//! Propagators for linear matrix ODEs `Φ' = L(t)Φ` whose generator commutes
//! with itself at different times, plus the open-quantum-system layer that
//! motivates them.
//!
//! - [`linalg`]: dense complex matrices and kernels (exponential, Kronecker,
//!   vec, rank, Hermitian eigenvalues).
//! - [`scalar`], [`quad`]: coefficient expressions and their integrals.
//! - [`generator`]: `L(t) = Σ β_k(t)·G_k`.
//! - [`commutativity`]: the commutativity check, sampled decomposition and
//!   the second Magnus term.
//! - [`solver`]: exponential, factored product and RK4 propagators.
//! - [`quantum`], [`problem`]: superoperators, density matrices, the two
//!   worked examples and the JSON problem format.
//!
//! The `parallel` feature (on by default) lets [`par::Exec::Parallel`] use
//! rayon; without it every code path runs sequentially with identical
//! results.

pub mod error;
pub mod generator;
pub mod linalg;
pub mod par;
pub mod quad;
pub mod scalar;
pub mod commutativity;
pub mod output;
pub mod solver;
pub mod problem;
pub mod quantum;
