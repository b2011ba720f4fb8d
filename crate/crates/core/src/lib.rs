//! Hyperbolic secant distribution and numerical checks of its
//! characterizations: the identical-distribution property with a random
//! Bernoulli coefficient, independence of random-coefficient linear forms, and
//! the random-sum limit law with a Chebyshev-generated index.

pub mod cf_lab;
pub mod cheb_index;
pub mod error;
pub mod harness;
pub mod rng;
pub mod sech;
pub mod simulate;

pub use error::{Error, Result};
pub use rng::{Provenance, RngStream};
pub use sech::{CharFn, SampleBatch};
