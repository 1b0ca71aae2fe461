//! Automorphisms of the Lorentz (second-order) cone `{x : ‖x̄‖ ≤ x₀}`.
//!
//! Every cone automorphism factors as
//! `S = ν · diag(1, V) · T_α · diag(1, Vᵀ) · diag(1, U)` with `ν > 0`,
//! `α ≥ 0`, `U` and `V` orthogonal and `T_α` a hyperbolic boost, or more
//! compactly as `S = ν · [[a, cᵀ], [c, P]] · diag(1, U)` with
//! `a = √(1 + ‖c‖²)` and `P = √(I + ccᵀ)`. This crate tests membership,
//! computes both factorizations, composes them back and samples random
//! automorphisms.

pub mod automorphism;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod matrix;
pub mod spin;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use spin::{ConeRegion, SpinVector};

/// Default relative tolerance for double-precision comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
