//! Spectral solver and estimate checks for the "good" Boussinesq equation
//! `u_tt - u_xx + u_xxxx + (u^2)_xx = 0` on the half-line `x > 0`.

pub mod boundary;
pub mod cli;
pub mod cutoff;
pub mod duhamel;
pub mod error;
pub mod fd_oracle;
pub mod halfline;
pub mod linear_flow;
pub mod picard;
pub mod quad;
pub mod report;
pub mod spacetime;
pub mod spectral;
pub mod xsb;

pub use error::{Error, Result};
pub use spectral::{Field, GridSpec, SobolevIndex, Spectrum, C64};
