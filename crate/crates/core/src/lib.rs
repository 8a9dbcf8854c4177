pub mod channel;
pub mod commands;
pub mod defaults;
pub mod doppler;
pub mod error;
pub mod intensity;
pub mod mdi;
pub mod numerics;
pub mod orbit;
pub mod output;
pub mod scenario;
pub mod sweep;
pub mod time;

pub use error::{Error, Result};
