pub mod catalog;
pub mod composition;
pub mod error;
pub mod linalg;
pub mod qseries;
pub mod registry;
pub mod solutions;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
