//! Hecke operators on genus-2 Siegel modular forms and sign changes of their
//! normalized eigenvalues.
//!
//! - [`matrix`], [`symplectic`], [`snf`]: GSp(4) arithmetic and congruence subgroups.
//! - [`hecke`]: right-coset decomposition of `T(p)` and its action on Satake parameters.
//! - [`satake`]: spin Euler factors and their Dirichlet coefficients.
//! - [`eigenform`]: normalized eigenvalue streams from newforms or synthetic angles.
//! - [`sums`]: prime sums, exceedance counts and the sign-change report.
//! - [`cli`]: the `gsp4` command-line tool.

pub mod cli;
pub mod eigenform;
pub mod hecke;
pub mod matrix;
pub mod satake;
pub mod snf;
pub mod sums;
pub mod symplectic;
