//! Blind spherical deconvolution with second-generation (needlet) wavelets.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerical core:
//!
//! - [`harmonics`]: real orthonormal spherical harmonics and quadrature transforms,
//! - [`quadrature`]: cubature rules on the sphere,
//! - [`needlets`]: the Littlewood–Paley window, needlet frames and diagnostics,
//! - [`operators`]: blockwise convolution operators, noisy observation and block thresholding,
//! - [`simulate`]: target densities, white-noise observations and experiment fixtures,
//! - [`estimators`]: the needlet estimator (BND) and the blockwise-SVD baseline (BBD),
//! - [`calibrate`]: data-driven choice of the thresholding constants,
//! - [`metrics`]: evaluation grids and normalized loss functions,
//! - [`study`]: the Monte Carlo error study over noise levels.
//!
//! IO, file formats, parallel execution and the command line live in the
//! `sphdeconv` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calibrate;
mod error;
pub mod estimators;
pub mod harmonics;
pub mod metrics;
pub mod needlets;
pub mod operators;
pub mod quadrature;
pub mod simulate;
pub mod study;
mod transform;

pub use error::{Error, Result};
pub use estimators::{
    bbd_estimate, bnd_estimate, max_level, signal_threshold, EstimateResult, Method,
    ThresholdConfig,
};
pub use harmonics::{HarmonicCoeffs, SphPoint};
pub use needlets::{NeedletCoeffs, NeedletFrame, Window};
pub use operators::{Block, BlockOperator, NoisyOperator, ThresholdedOperator};
pub use quadrature::CubatureSet;
pub use simulate::{Fixture, FixtureConfig, Observation, Scenario, TargetDensity};
