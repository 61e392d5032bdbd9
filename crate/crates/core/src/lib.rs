//! Monte-Carlo and semiclassical simulation of an optically driven
//! electron-spin qubit coupled to a nuclear-spin bath.

pub mod analysis;
pub mod bath;
pub mod bloch;
pub mod centralspin;
pub mod config;
pub mod constants;
pub mod cooling;
pub mod error;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod sequences;
pub mod units;

pub use error::{Error, Result};
