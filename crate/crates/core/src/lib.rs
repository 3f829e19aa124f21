//! # oneshot-rsp
//!
//! One-shot quantum information quantities and remote state preparation.
//!
//! The crate computes smooth max-relative entropy, smooth max-information and
//! hypothesis-testing relative entropy for small dense states, simulates the
//! rejection-sampling remote state preparation protocol and LOCC
//! bit-transmission protocols exactly, and evaluates the communication-cost
//! brackets that relate them.
//!
//! - [`operators`]: density operators, fidelity, purified distance, partial
//!   trace, purification, Uhlmann extension.
//! - [`divergences`]: entropies, relative entropies, max-information, `T(Q)`.
//! - [`hypothesis`]: optimal tests, `β^ε` and `D_h^ε`.
//! - [`smoothing`]: a dense interior-point SDP kernel and the smoothed quantities.
//! - [`minimax`]: the convex–concave testing game and the worst-case lower bound.
//! - [`rsp`]: the protocol construction, its simulation and the bound brackets.
//! - [`locc`]: LOCC protocol simulation and the `m_A ≥ n + log p` bound.
//! - [`nets`]: ν-nets and error transfer between a state set and its net.
//!
//! All logarithms are base 2.

#![forbid(unsafe_code)]

pub mod divergences;
pub mod error;
pub mod hypothesis;
pub mod io;
pub mod linalg;
pub mod locc;
pub mod minimax;
pub mod nets;
pub mod operators;
pub mod random;
pub mod rsp;
pub mod selftest;
pub mod smoothing;

pub use error::{Error, Result};
pub use operators::{BipartiteShape, DensityOperator, PureState, Side, StateKind};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
