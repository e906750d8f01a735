//! Dirichlet optimal transport on the open unit simplex.
//!
//! The simplex carries a multiplicative group structure (coordinatewise
//! product followed by normalization) and an asymmetric transport cost
//!
//! ```text
//! c(p, q) = log( (1/n) Σᵢ qᵢ/pᵢ ) − (1/n) Σᵢ log(qᵢ/pᵢ)
//! ```
//!
//! Monge solutions of the induced Kantorovich problem are gradients of
//! exponentially concave functions, the stochastic picture is driven by
//! gamma/Dirichlet noise, and entropy behaves semiconvexly along the
//! displacement interpolation. This crate implements that calculus end to
//! end at desk scale, together with the experiment harnesses that probe it:
//!
//! - [`simplex`] — group operations, cost, relative entropy, the reference
//!   measure μ₀ and exponential coordinates.
//! - [`portfolio`] — exponentially concave generators, portfolio maps,
//!   transport maps, L-divergence and regularity estimation.
//! - [`ot`] — exact discrete optimal transport (assignment and Kantorovich
//!   LP via min-cost flow) plus c-cyclical-monotonicity certification.
//! - [`schrodinger`] — multiplicative transition densities, the permutation
//!   mixture coupling and its convergence experiment.
//! - [`dynamics`] — measures on (0,1], the Lagrangian action, gamma
//!   subordinators, Dirichlet-process bridges and path convergence.
//! - [`interpolation`] — displacement interpolation of maps and measures.
//! - [`geometry`] — Jacobian identities, the Monge–Ampère density and the
//!   entropy-convexity experiment.
//! - [`bounds`] — order-statistics gaps and the dimension-free cost bound.
//!
//! All samplers take explicit RNG streams derived from a single master seed
//! ([`rng::StreamFactory`]); experiment results are bit-identical for a fixed
//! seed regardless of worker-thread count.

#![forbid(unsafe_code)]
// negated float comparisons like !(x > 0.0) are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops over small dense matrices read better than iterator chains here
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod interpolation;
pub mod linalg;
pub mod ot;
pub mod portfolio;
pub mod quadrature;
pub mod rng;
pub mod schrodinger;
pub mod simplex;
pub mod special;

pub use error::{Error, Result};
pub use simplex::SimplexPoint;

// Samplers take explicit ChaCha streams; re-exported so downstream callers
// name the same type.
pub use rand_chacha::ChaCha8Rng;

/// Library version, echoed into experiment payloads.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
