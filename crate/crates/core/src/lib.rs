pub mod approx;
pub mod bounds;
pub mod error;
pub mod instances;
pub mod krylov;
pub mod matfunc;
pub mod optimal;
pub mod xlinalg;

pub use error::{Error, Result};
