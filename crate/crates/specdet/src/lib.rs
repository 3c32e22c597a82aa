//! Numerical engine for ζ-regularized determinants, relative ζ-determinants
//! and η-invariants of boundary value problems for ordinary differential
//! operators on an interval.
//!
//! The computation runs in three layers:
//!
//! * [`transport`] reduces an order-`r` operator on `[0, β]` to its
//!   first-order companion system and integrates the parallel-transport
//!   matrix `K_λ(x)` solving `(D − λ)K = 0`, `K_λ(0) = I`.
//! * [`reglim`] tracks a continuous logarithm of the boundary determinant
//!   `det(M + N K_λ)` along a spectral ray, fits the asymptotic expansion in
//!   powers of `(−λ)` and `log(−λ)`, and extracts the regularized limit
//!   (the constant term) together with the `log(−λ)` coefficient `ζ_rel(0)`.
//! * [`bvp`] combines both into determinant and eta-invariant formulas for
//!   boundary problems given by Stiefel frames `[M N]`.
//!
//! [`findim`] is a finite-dimensional matrix laboratory exercising the same
//! regularized-limit pipeline against exact determinants, and [`oracle`]
//! provides independent spectral ground truth (eigenvalue scans by the
//! argument principle, Hurwitz-zeta closed forms and tail-completed spectral
//! sums). The [`cli`] module implements the `specdet` command-line tool.
//!
//! The runnable programs in `examples/` demonstrate each capability.

pub mod numerics;
pub mod reglim;
pub mod findim;
pub mod transport;
pub mod bvp;
pub mod oracle;
pub mod cli;

mod threads;

pub use threads::thread_pool;
