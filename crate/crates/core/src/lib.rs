pub mod error;
pub mod spectral;

pub use error::{Error, Result};
pub mod estimators;
pub mod tomosar;
pub mod bench;
pub mod io;
