pub mod config;
pub mod error;
pub mod fitting;
pub mod formats;
pub mod lineshape;
pub mod model;
pub mod photonics;
pub mod tuning;
pub mod wgm;

pub use error::{Error, Result};
