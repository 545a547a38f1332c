pub mod curvature;
pub mod derivjet;
pub mod error;
pub mod expr;
pub mod landsberg;
pub mod linalg;
pub mod manifold;
pub mod metrics;
pub mod sampling;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
