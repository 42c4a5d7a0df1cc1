//! Suboptimal H-infinity synthesis for discrete-time descriptor systems,
//! including improper ones, through centered realizations.

pub mod error;
pub mod linalg;
pub mod pencil;
pub mod realization;
pub mod riccati;
pub mod analysis;
pub mod random;
pub mod synthesis;
pub mod tf;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
