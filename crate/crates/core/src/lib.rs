//! Pfaffian formulas for massive partition functions and complex eigenvalue
//! correlators of the non-Hermitean symplectic and chiral symplectic random
//! matrix ensembles, with independent quadrature and Monte Carlo checks.

pub mod cli;
pub mod correlators;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod skewortho;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
