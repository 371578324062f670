//! Cyber-insurance pricing for distribution grids exposed to load variation
//! and load-altering attacks.
//!
//! The pipeline runs a LinDistFlow day-ahead dispatch with batteries, PV and
//! paid curtailment ([`opf`]), samples load scenarios and searches for the
//! worst one ([`scenario`]), estimates the attack failure probability with a
//! semi-Markov model ([`smp`]) and prices cover from an inverse-Gaussian fit
//! of the cost distribution ([`pricing`]). [`pipeline`] chains the stages.

pub mod cli;
pub mod error;
pub mod lp;
pub mod network;
pub mod numeric;
pub mod opf;
pub mod pipeline;
pub mod pricing;
pub mod scenario;
pub mod smp;

pub use error::{Error, Result};
