//! Fourier kernel, angular power spectrum, covariance and Gaussian
//! simulation of the spherical fractional hyperbolic diffusion random field.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod error;
pub mod fieldsim;
pub mod kernel;
mod quad;
pub mod specfun;
pub mod spectra;

pub use covariance::{CovarianceGrid, CovarianceRequest};
pub use error::{Error, Result};
pub use fieldsim::{HarmonicCoefficients, SimulationConfig, Snapshot, SphereGrid};
pub use kernel::{h_eval, h_eval_with_route, KernelConfig, ModelParams, Route};
pub use spectra::{
    AngularSpectrum, DiscreteMeasure, MaternSpectrum, SpectralMeasure, WeightConvention,
};
