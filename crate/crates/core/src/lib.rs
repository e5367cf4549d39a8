pub mod channels;
pub mod cli;
pub mod error;
pub mod families;
pub mod histories;
pub mod info;
pub mod ode;
pub mod ptm;
pub mod trajectories;

pub use error::{Error, Result};
