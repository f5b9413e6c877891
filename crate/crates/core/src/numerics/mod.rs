//! Generic numerical machinery: adaptive quadrature, Gil-Pelaez inversion
//! and monotone percentile search.

pub mod gil_pelaez;
pub mod quadrature;

pub use gil_pelaez::{
    cdf_from_laplace, invert_monotone, percentile_from_laplace, raw_cdf_from_laplace, CdfCurve,
    LaplaceTransform, QuadratureConfig,
};
pub use quadrature::{integrate, semiinfinite_quadrature, AdaptiveOptions, Estimate, QuadValue, Tail};
