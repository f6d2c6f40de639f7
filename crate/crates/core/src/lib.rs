pub mod ck;
pub mod ensemble;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod lp;
pub mod monitors;
pub mod nonlinearity;
pub mod spectral;

pub use error::{Error, Result};
