//! Precision-generic numerical kernels.

pub mod assign;
pub mod dd;
pub mod eigen;
pub mod linalg;
pub mod poly;
pub mod real;
pub mod roots;

pub use dd::Dd;
pub use real::Real;
