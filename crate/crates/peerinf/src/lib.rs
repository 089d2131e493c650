//! File formats, command line and HTTP service around `peerinf-core`.
//!
//! * [`io`] reads and writes datasets (CSV), schema and generator files.
//! * [`store`] holds the versioned model file.
//! * [`document`] defines the JSON attribution and result documents.
//! * [`pipeline`] turns user input into instances and runs the full
//!   peer-influence computation.
//! * [`service`] is the what-if HTTP API, [`cli`] the `peerinf` binary.

pub mod cli;
pub mod document;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod service;
pub mod store;

pub use error::{AppError, AppResult, EXIT_ENVIRONMENT, EXIT_INPUT};
