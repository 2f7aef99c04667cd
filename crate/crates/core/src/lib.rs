pub mod analysis;
pub mod ed;
pub mod error;
pub mod hs;
pub mod meanfield;
pub mod model;
pub mod newton;
pub mod numeric;
pub mod richardson;
pub mod solver;

pub use error::{Error, Result};
pub use model::{Family, ModelPoint, Parity, Side};
