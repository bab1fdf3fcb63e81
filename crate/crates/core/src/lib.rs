//! Certificates for discrete Monge–Kantorovich transport with costs in
//! `[0, ∞]`.
//!
//! Given an instance and a plan, the crate decides and certifies four
//! properties: optimality, c-cyclical monotonicity, strong c-monotonicity
//! (dual potentials) and robust optimality (defense against storage
//! extensions). Every check returns a verifiable witness.
//!
//! ```
//! use otcert::prelude::*;
//!
//! let inst = ambrosio_pratelli::<Rational>(3, Rational::from_ratio(2, 1), Rational::from_ratio(1, 1)).unwrap();
//! let best = solve_exact(&inst);
//! assert_eq!(best.value.finite().unwrap(), &Rational::from_ratio(1, 1));
//! assert!(check_c_monotone(&inst, &best.plan).unwrap().is_monotone());
//! ```

// matrix code reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod connectivity;
pub mod error;
mod flow;
pub mod generators;
pub mod io;
pub mod kellerer;
pub mod model;
pub mod monotonicity;
pub mod potentials;
pub mod report;
pub mod robustness;
pub mod scalar;
pub mod simplex;
pub mod solver;

pub mod prelude {
    pub use crate::connectivity::*;
    pub use crate::generators::*;
    pub use crate::kellerer::*;
    pub use crate::model::*;
    pub use crate::monotonicity::*;
    pub use crate::potentials::*;
    pub use crate::robustness::*;
    pub use crate::scalar::{Rational, Scalar};
    pub use crate::solver::*;
}
