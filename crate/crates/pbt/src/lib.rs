pub mod cli;
pub mod error;
pub mod formulas;
pub mod oracle;
pub mod partitions;
pub mod precise;
pub mod symrep;

pub use error::{PbtError, Result};
