//! Quasi-pseudometric spaces, Hausdorff set functionals and successor-selection
//! solvers for startpoint, endpoint and fixed-point problems of set-valued maps.

pub mod cli;
pub mod config;
pub mod error;
pub mod gauge;
pub mod hausdorff;
pub mod oracle;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
