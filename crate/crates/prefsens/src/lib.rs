//! File formats, figure export, the verification suite and the command-line
//! frontend built on [`prefsens_core`].

pub mod cli;
pub mod counts_io;
pub mod dataset_io;
pub mod export;
pub mod format;
pub mod verify;

mod error;

pub use error::{Error, Result};
