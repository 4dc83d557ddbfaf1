//! Design toolkit for packetized linear sensing of random vectors.
//!
//! Data vectors with a known covariance are probed by `N` noisy packets, each
//! an orthogonal projection onto an `m`-dimensional subspace. The crate picks
//! how often each coordinate is probed ([`allocation`]), enumerates and samples
//! packet arrangements that realize that allocation ([`arrangement`]), scores
//! them for order-independent progressive recovery ([`mse`]), and checks the
//! closed forms against dense Wiener filtering, Monte Carlo simulation and
//! fusion-frame erasure analysis ([`estimator`], [`frames`]).

pub mod allocation;
pub mod arrangement;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod frames;
pub mod linalg;
pub mod mse;
pub mod report;
pub mod rng;
pub mod spectrum;

pub use allocation::{allocate, AllocationResult, DesignParams, Rounding};
pub use arrangement::Arrangement;
pub use error::{Error, Result};
pub use mse::{MseProfile, RankedDesign};
pub use spectrum::{Spectrum, SpectrumModel};
