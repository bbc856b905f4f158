pub mod abel;
pub mod cli;
pub mod curve;
pub mod cycles;
pub mod error;
pub mod kleinian;
pub mod path;
pub mod periods;
pub mod quad;
pub mod roots;
pub mod theta;
pub mod tol;
pub mod verify;

pub use curve::{AdmissiblePolynomial, CurvePoint, Divisor};
pub use error::{Error, Result};
pub use num_complex::Complex64;
