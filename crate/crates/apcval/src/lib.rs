//! File formats, reports, the parallel simulation driver and the `apcval`
//! command line built on [`apcval_core`].

pub mod cli;
pub mod curves_csv;
pub mod error;
pub mod events_csv;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
