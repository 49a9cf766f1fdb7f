//! Random walks on graphs with group actions and on affine buildings.
//!
//! The crate is organised bottom-up:
//!
//! * [`coxeter`]: exact root-system and Weyl-group combinatorics (lengths,
//!   reduced words, Poincaré sums, the multiplicative function `chi` and the
//!   sphere sizes `N_lambda`).
//! * [`netwalk`]: networks with conductances, Markov kernels, exact solvers
//!   and a seeded, worker-count independent Monte Carlo engine.
//! * [`action`]: conductance-preserving group actions, quotient networks and
//!   return-time statistics.
//! * [`discretize`]: induced walks on recurrent subsets and the discretization
//!   of a walk to a probability measure on a lattice.
//! * [`buildings`]: regular trees, balls in the `Ã₂` building of `PGL₃(Q_p)`
//!   and the flag complexes of projective planes.
//! * [`boundary`]: harmonic cylinder measures, isotropic walks, boundary
//!   hitting statistics and the special-subgroup detector.

pub mod action;
pub mod boundary;
pub mod buildings;
pub mod coxeter;
pub mod discretize;
mod error;
pub mod netwalk;
pub mod rational;

pub use error::{Error, Result};
