//! Exact-arithmetic weight reduction for weighted combinatorial optimization.
//!
//! The central service of this crate is *losing weight*: replacing the
//! rational weight vector of a problem instance by a small integer vector
//! that provably preserves the sign of every linear test a solver could ever
//! pose, and therefore preserves optimal-solution sets and threshold
//! decisions exactly. Everything is computed in exact rational and
//! big-integer arithmetic; there is no floating point anywhere.
//!
//! Module map:
//!
//! * [`numeric`] — big integers and exact rationals, dot products, norms.
//! * [`lattice`] — exact-rational LLL reduction and simultaneous Diophantine
//!   approximation, the computational engine behind weight reduction.
//! * [`equivalence`] — the sign-test equivalence relation on weight vectors,
//!   exhaustive class membership checking, sign/order/metric reports.
//! * [`weight_reduction`] — the weight-reduction contract itself: integer
//!   representatives with certified max-norm bounds, plus threshold and
//!   rational-coefficient variants and a brute-force reference search.
//! * [`linearizable`] — goal-function expression trees with a linearizability
//!   budget (`alpha`) computed by composition rules, evaluation,
//!   representation vectors, and weight shrinking for whole goal functions.
//! * [`problems`] — nine concrete problem encodings with goal builders,
//!   kernelizers, the routing shortcut rule, and the power-cover
//!   reformulation.
//! * [`oracle`] — brute-force solvers and exhaustive verifiers that certify
//!   every kernelization claim at small scale.
//! * [`io`] — JSON instance and report formats used by the CLI.
//! * [`generate`] — deterministic pseudo-random instance generation.
//! * [`cli`] — command implementations for the `kernelsmith` binary.

pub mod cli;
pub mod equivalence;
mod error;
pub mod generate;
pub mod io;
pub mod lattice;
pub mod linearizable;
pub mod numeric;
pub mod oracle;
pub mod problems;
pub mod weight_reduction;

pub use error::{Error, Result};
