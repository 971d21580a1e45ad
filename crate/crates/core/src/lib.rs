//! Exact analysis of discrete-time switched linear systems
//! `x(t+1) = A_σ(t) x(t) + B_σ(t) u(t)` under arbitrary switching.
//!
//! Everything except the sampling-based rate estimator runs in arbitrary
//! precision rational arithmetic, so subspace dimensions, stabilizability
//! verdicts and synthesized gains are exact, not floating approximations.
//!
//! The crate is organized around one pipeline:
//!
//! * [`matrix`] / [`subspace`]: rational matrices, RREF, kernels, and a
//!   subspace calculus with a canonical basis form (structural equality is
//!   subspace equality).
//! * [`ladder`]: the controllability-style ladder `E_0 ⊆ E_1 ⊆ …` whose fixed
//!   point decides fixed-horizon stabilizability, for mode-dependent and
//!   mode-independent feedback.
//! * [`synthesis`]: gain construction from a ladder, certification of
//!   arbitrary gains against a ladder, and redundant-input reduction.
//! * [`normalform`]: block-triangular decomposition splitting the state into a
//!   dead-beat part and a residual part.
//! * [`rate`]: exact scalar minimax growth rates, decay certificates, and a
//!   floating-point lower-bound estimator (the only inexact surface).
//! * [`simulate`]: exact trajectory stepping, exhaustive closed-loop checks
//!   over all switching sequences, and greedy adversarial switching.
//!
//! `no_std` compatible; requires `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ladder;
pub mod matrix;
pub mod normalform;
pub mod rate;
pub mod rational;
pub mod simulate;
pub mod subspace;
pub mod synthesis;
pub mod system;

#[cfg(test)]
pub(crate) mod testing;

pub use ladder::{FeedbackKind, Ladder, LadderStep, ModeMatrices};
pub use matrix::{Matrix, SolvePolicy};
pub use rational::Rational;
pub use subspace::Subspace;
pub use synthesis::{decide_fts, FtsVerdict, GainSet};
pub use system::SwitchedSystem;
