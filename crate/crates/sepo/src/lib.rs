//! Stackelberg-equilibrium policy optimization for sequential Markov games.
//!
//! Agents act in a fixed priority order inside every environment step:
//! superiors commit first, inferiors observe those commitments and respond.
//! Training transmits sampled superior actions directly (asymmetric
//! training); execution recomputes them from the shared policy model
//! (symmetric execution), so no messages are exchanged at run time.
//!
//! The crate bundles:
//! - a small f64 tensor kernel with tape-based reverse-mode gradients
//!   ([`tensor`]),
//! - exact game solvers used as ground truth: pure Nash enumeration and
//!   n-level Stackelberg backward induction ([`oracle`]),
//! - desk-scale environments: repeated matrix games, a two-lane merge
//!   corridor, and a cooperative particle task ([`env`]),
//! - the priority-conditioned hypernetwork policy ([`policy`]),
//! - the clipped-surrogate training loop with the hypernetwork drift
//!   penalty, plus independent-PPO and central-critic baselines
//!   ([`trainer`]),
//! - a seeded experiment harness with config files, sweeps, and
//!   convergence reports ([`harness`]).

pub mod action;
pub mod error;
pub mod gradcheck;
pub mod nn;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod tensor;

pub use action::Action;
pub use error::{Error, Result};
