pub mod bounds;
pub mod error;
pub mod gsrp;
pub mod numerics;
pub mod properties;
pub mod signals;

pub use error::{Error, Result};
