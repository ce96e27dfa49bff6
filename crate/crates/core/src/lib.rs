pub mod adversary;
pub mod channel;
pub mod code;
pub mod error;
pub mod exec;
pub mod math;
pub mod overwrite;
pub mod reproduce;
pub mod sim;
pub mod tag;
pub mod tolerances;

pub use error::{Error, Result};
pub use exec::Execution;
pub use tolerances::Tolerances;
