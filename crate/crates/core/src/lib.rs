pub mod construct;
pub mod curve;
pub mod error;
pub mod jet;
pub mod manifold;
pub mod monoid;
pub mod spin;
pub mod spline;

pub use error::{Error, Result};
