//! Bregman divergences, lowest distortion aggregators and the economic
//! production functions they generate.
//!
//! The crate is organised bottom-up: [`numerics`] holds the scalar kernels,
//! [`generators`] the catalog of convex potentials, [`lda`] the aggregators,
//! [`epf`] the production function catalog, [`demand`] the demand solvers and
//! [`transition`] the transition-cost geometry.  [`verify`] bundles the
//! randomized property suites used by the command-line front-end.

pub mod demand;
pub mod epf;
pub mod error;
pub mod generators;
pub mod lda;
pub mod numerics;
pub mod rng;
pub mod transition;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
pub use generators::{catalog_generator, Family, Generator, GeneratorSpec, Interval, VectorGenerator};
pub use lda::WeightedInputs;
pub use numerics::Tolerance;
