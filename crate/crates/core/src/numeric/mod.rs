//! Special functions and quadrature used by the reliability and pricing code.

pub mod gamma;
pub mod normal;
pub mod quadrature;

pub use gamma::gamma;
pub use quadrature::{integrate, Estimate, Tolerance};
