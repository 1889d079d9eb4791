//! Compressed random-oracle simulation, transition capacities and a Simple
//! proof-of-sequential-work implementation at desk scale.

mod error;
pub mod group;
pub mod linalg;
pub mod oracle;
pub mod properties;
pub mod bounds;
pub mod capacity;
pub mod posw;
pub mod report;
pub mod suites;
pub mod cli;

pub use error::{Error, Result};
