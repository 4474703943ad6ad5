//! Feynman-path analysis of pre- and post-selected quantum systems with a
//! zero Hamiltonian.
//!
//! A transition amplitude `⟨f|i⟩` is split into one virtual path per basis
//! state, `Φ{n} = ⟨f|n⟩⟨n|i⟩`. An accurate intermediate measurement of a
//! diagonal observable groups those paths into exclusive real pathways (one
//! per eigenvalue), while a finite-width Gaussian meter interpolates between
//! that regime and the weak regime where the mean reading tends to the weak
//! value `Re Σ F(n)Φ{n} / Σ Φ{n}`.
//!
//! - [`statespace`]: kets, diagonal observables, inner and tensor products
//! - [`pathsum`]: path decomposition and amplitude tables
//! - [`measurement`]: pathway networks, sum and product rule reports
//! - [`meter`]: Gaussian pointer, mean readings, weak values
//! - [`oracle`]: independent projector and quadrature cross-checks
//! - [`scenarios`]: built-in three-box and Hardy setups
//! - [`scenario_io`]: the `.scn` scenario file format

// `!(x > tol)` is used on purpose so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measurement;
pub mod meter;
pub mod oracle;
pub mod pathsum;
pub mod scenario_io;
pub mod scenarios;
pub mod statespace;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Tolerance for algebraic identities between exact quantities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// A conditional probability at least `1 - CERTAINTY_TOL` counts as certain.
pub const CERTAINTY_TOL: f64 = 1e-10;
