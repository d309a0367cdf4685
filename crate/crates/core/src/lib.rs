pub mod enumerate;
pub mod error;
pub mod instance;
pub mod io;
pub mod pipeline;
pub mod quantum;
pub mod rng;
pub mod sa;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
