//! Maximum observable correlation for bipartite quantum states.
//!
//! Computes, bounds, and certifies the largest coincidence rate achievable by
//! local rank-one measurements on a shared state: the exact two-qubit law
//! `(1 + s1)/2` from the spin-correlation spectral norm, singular-value bounds
//! for n-outcome measurements, variational optimization over Naimark-lifted
//! orthogonal measurement pairs with first- and second-order certification,
//! and a seeded Monte-Carlo harness for the minimal-outcome conjecture.

pub mod bounds;
pub mod fano;
pub mod files;
pub mod linalg;
pub mod measurement;
pub mod optimizer;
pub mod scan;
pub mod state;
pub mod tol;

pub use linalg::{CMatrix, CVector, RMatrix, RVector, C64};
pub use state::DensityOperator;
pub use tol::Tolerances;
