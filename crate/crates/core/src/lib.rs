pub mod body;
pub mod bott;
pub mod certify;
pub mod clarke;
pub mod cz;
pub mod ellipsoid;
pub mod error;
pub mod integrator;
pub mod optimize;
pub mod rational;
pub mod reeb;
pub mod symplectic;
pub mod util;

pub use error::{Error, Result};
