//! Files, parallel drivers, benchmarks and the `evkit` command line on top
//! of [`evkit_core`].

pub mod bench;
pub mod cli;
mod error;
pub mod formats;
pub mod parallel;

pub use error::{Error, Result};
