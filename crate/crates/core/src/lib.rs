//! Compression molding simulation for sheet molding compound.

pub mod bundles;
pub mod characterization;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod macro1d;
pub mod material;
pub mod optim;
pub mod orientation;
pub mod plot;

pub use error::{Error, Result};
