//! Construction and validation of activation/initialization pairs that keep
//! pre-activations Gaussian in finite-width multilayer perceptrons.
//!
//! The library covers:
//! - the symmetric Weibull initialization law and related distributions
//!   ([`distributions`]),
//! - Gaussian-measure quadrature ([`quadrature`]),
//! - variance/correlation maps, fixed points and Edge-of-Chaos analysis
//!   ([`eoc`]),
//! - Mellin transforms of the half-normal/half-Weibull laws and the
//!   Laguerre-series inversion diagnostic ([`mellin`]),
//! - fitting the activation-output density and building the tabulated
//!   activation ([`activation_fit`]),
//! - Kolmogorov-Smirnov testing ([`kstest`]),
//! - Monte-Carlo propagation experiments ([`propagation`]).

pub mod activation_fit;
pub mod distributions;
pub mod eoc;
pub mod interp;
pub mod kstest;
pub mod mellin;
pub mod propagation;
pub mod quadrature;
pub mod rng;
pub mod special;

use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
