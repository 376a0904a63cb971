//! Robust estimation of spiked covariance matrices under complex elliptical data.
//!
//! A spiked covariance matrix has the form `R = I_p + U Σ Uᴴ` where `U` is a
//! `p×k` orthonormal frame (`k ≪ p`) and `Σ` is a `k×k` Hermitian positive
//! definite matrix. The pair `(U, Σ)` is only identified up to a unitary
//! change of basis `(U O, Oᴴ Σ O)`, so the parameter space is a quotient
//! manifold. This crate provides:
//!
//! * [`numkernel`] — complex Hermitian linear-algebra primitives,
//! * [`manifold`]  — the quotient geometry (metric, projections, geodesics,
//!   retraction, gradient/Hessian conversion),
//! * [`model`]     — the data model: Tyler's robust cost, its derivatives,
//!   heavy-tailed sampling and a principal-subspace initializer,
//! * [`optim`]     — Riemannian gradient-descent and trust-region solvers,
//! * [`crb`]       — intrinsic Cramér-Rao bounds and the error divergence
//!   used to compare estimators against them.

pub mod crb;
pub mod error;
pub mod manifold;
pub mod model;
pub mod numkernel;
pub mod optim;

pub use error::{CoreError, Result};
