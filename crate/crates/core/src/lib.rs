//! Semiclassical pseudospectral analysis of one-dimensional non-self-adjoint
//! second-order operators `L_h f = -h^2 a f'' - i h b f' + c f`.

pub mod boundary;
pub mod cli;
pub mod config;
pub mod error;
pub mod fbi;
pub mod frame;
pub mod grid;
pub mod linalg;
#[cfg(test)]
mod properties;
pub mod quadrature;
pub mod series;
pub mod symbol;
pub mod wkb;

pub use error::{Error, Result};
