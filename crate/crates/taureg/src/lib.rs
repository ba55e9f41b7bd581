//! Spectral regularization of linear ill-posed problems with a one-parameter
//! filter family interpolating between Tikhonov regularization and spectral
//! cutoff, exercised on 1D periodic deconvolution and a 2D multi-frequency
//! Helmholtz inverse source problem.

pub mod config;
pub mod deconv1d;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod isp2d;
pub mod numerics;
pub mod param_select;
pub mod report;

pub use error::{Error, Result};
