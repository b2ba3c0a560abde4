// Negated comparisons are deliberate: they treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dfindex;
pub mod error;
pub mod exterior;
pub mod forms;
pub mod fourier;
pub mod io;
pub mod model;
pub mod optimize;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
