//! Moving-frame geometry of negatively curved surfaces, checked numerically.
//!
//! The crate follows one pipeline: a parametric immersion gives fundamental
//! forms and a principal frame ([`surface`]); the frame's coframe and
//! connection forms live on a parameter grid ([`frames`]); the asymptotic
//! directions integrate to a Chebyshev net whose angle satisfies the
//! sine-Gordon equation ([`net`]). The Poincaré disk ([`hyperbolic`]) supplies
//! the model hyperbolic plane for isometry and area checks.

pub mod dual;
pub mod error;
pub mod frames;
pub mod hyperbolic;
pub mod net;
pub mod surface;

pub use error::{GeomError, Result};
