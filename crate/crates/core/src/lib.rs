pub mod apriori;
pub mod causal;
pub mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod process;
pub mod scenarios;
pub mod quantum;
pub mod structures;
pub mod verify;

pub use error::{Error, Result};
