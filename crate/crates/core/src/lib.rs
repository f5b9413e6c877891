//! Statistical EMF exposure and coverage for cellular networks whose base
//! stations form a Poisson hole process.
//!
//! The analytic side ([`downlink`], [`uplink`], [`joint`]) evaluates coverage
//! integrals and Laplace transforms and inverts them with Gil-Pelaez
//! ([`numerics`]). The [`montecarlo`] module is an independent simulator used
//! to validate every analytic law, and [`optimizer`] solves the deployment
//! problems built on top of them.
//!
//! Everything is generic over [`Scalar`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN.

pub mod downlink;
pub mod error;
pub mod fading;
pub mod joint;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
pub mod point_process;
pub mod scalar;
pub mod uplink;
pub mod validate;

pub use error::{Error, Result};
pub use model::{default_model, effective_bs_density, Scenario, UserLocation};
pub use scalar::{ComplexValue, Scalar};

/// Network model in double precision.
pub type Model = model::NetworkModel<f64>;
/// Quadrature settings in double precision.
pub type Quadrature = numerics::QuadratureConfig<f64>;
/// Complex double.
pub type Complex64 = num_complex::Complex<f64>;
/// Tabulated CDF in double precision.
pub type Cdf = numerics::CdfCurve<f64>;
/// Monte Carlo sample collection in double precision.
pub type Samples = montecarlo::SampleSet<f64>;
/// Planar point pattern in double precision.
pub type Pattern = point_process::PointPattern<f64>;
