//! Exact and numerical analysis of random subset-state ensembles.
//!
//! A subset state on `N` basis labels is the uniform superposition over an
//! `m`-element subset `S`, optionally decorated with `±1` phases drawn with a
//! bias `b`.  Averaging `t` tensor copies of such states over all subsets (and
//! phases) produces a moment matrix that lives in the symmetric subspace; this
//! crate computes that matrix exactly in the type basis, diagonalises its
//! unique-type block through the Johnson association scheme, and measures how
//! close the ensemble is to the maximally mixed state on the symmetric
//! subspace.
//!
//! The pieces fit together as follows:
//!
//! * [`combinatorics`] — big-integer binomials, two-row irreducible dimensions,
//!   subset/type enumeration, and the alternating binomial identity used to
//!   collapse the top eigenvalue into closed form.
//! * [`sqrt_rational`] — the exact scalar `q·√r` (rational `q`, square-free
//!   integer `r`) that moment-matrix entries live in.
//! * [`johnson`] — spherical functions of the Johnson scheme, the exact
//!   circulant entry profile of the unique-type block, and its spectrum.
//! * [`density`] — moment matrices themselves: per-subset, ensemble-averaged
//!   (closed form and brute force), and the flat Haar moment.
//! * [`spectral`] — trace distances, the nearby-matrices (two-block) bound,
//!   circulant symmetry checks, and a Johnson-graph eigenspace oracle that is
//!   independent of the closed-form spectrum.
//! * [`ensembles`] — samplers: uniform subsets, biased phases, Feistel-network
//!   pseudorandom subsets, and Haar states.
//! * [`attacks`] — birthday and plus-overlap distinguishers with exact
//!   reference probabilities and Monte-Carlo advantage estimation.
//! * [`verify`] — grid-driven verification runs and sweep rows shared by the
//!   CLI and the acceptance suite.
//!
//! Exact arithmetic is `num`'s `BigRational` throughout; floating point enters
//! only at the eigensolver boundary and in sampling.

pub mod attacks;
pub mod budget;
pub mod combinatorics;
pub mod density;
pub mod ensembles;
mod error;
pub mod johnson;
pub mod spectral;
pub mod sqrt_rational;
pub mod verify;

pub use budget::Budget;
pub use error::{Error, Result};

/// Canonical exact rational type used across the crate.
pub use num_rational::BigRational;
