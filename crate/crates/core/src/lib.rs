//! Constrained online convex optimization by Mirror Descent.
//!
//! A sequence of convex Lipschitz objectives `f_1, …, f_N` is revealed one
//! at a time, each allowing a single subgradient query, and the iterates
//! must respect a convex functional constraint `g(x) ≤ 0` over a simple
//! closed set Q. Steps where `g(x^k) ≤ ε` consume the next objective
//! (productive); the rest move along a constraint subgradient
//! (non-productive). Each run reports a guaranteed accuracy δ bounding the
//! regret against the best fixed feasible point.
//!
//! Modules:
//!
//! * [`prox`]: Euclidean-ball, entropy-simplex and ℓ_p-ball prox setups.
//! * [`oracles`]: value/subgradient oracles and Lipschitz bounds.
//! * [`solver`]: the three step rules, certificates, comparator, bound checks.
//! * [`problem_gen`]: seeded benchmark instances.
//! * [`bench`]: the `omd-bench` command-line harness.

pub mod bench;
pub mod error;
pub mod instance;
pub mod oracles;
pub mod problem_gen;
pub mod prox;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};
pub use instance::ProblemInstance;
pub use prox::{ProxKind, ProxSetup};
pub use solver::{Algorithm, RunConfig, RunReport, StepRecord};
