//! Uplink with fractional power control: transmit power, coverage and the
//! exposure caused by the user's own device.

use num_complex::Complex;

use crate::downlink::{truncation_radius, typical_distance};
use crate::error::Result;
use crate::fading::{gain_laplace, upper_gamma_ratio};
use crate::model::{NetworkModel, UserLocation};
use crate::numerics::{cdf_from_laplace, integrate, percentile_from_laplace, QuadratureConfig};
use crate::point_process::{contact_distance_pdf, contact_distance_survival};
use crate::scalar::Scalar;

/// `p_u · x0^(αε)` below the switch distance, `p_max` beyond it.
pub fn ul_transmit_power<T: Scalar>(x0: T, model: &NetworkModel<T>) -> T {
    let ul = &model.uplink;
    if x0 >= model.x_max() {
        return ul.p_max;
    }
    (ul.pu_coeff * x0.powf(model.downlink.alpha * ul.epsilon)).min(ul.p_max)
}

/// Mean power received at the serving BS from a device at distance `x0`.
pub fn ul_received_power_mean<T: Scalar>(x0: T, model: &NetworkModel<T>) -> T {
    ul_transmit_power(x0, model) * model.downlink.ref_path_gain * x0.powf(-model.downlink.alpha)
}

/// `1 / (4π u0^β)`: power density per watt transmitted by the own device.
pub fn device_density_factor<T: Scalar>(model: &NetworkModel<T>) -> T {
    T::one() / (T::lit(4.0) * T::PI() * model.uplink.device_distance.powf(model.downlink.beta))
}

/// Probability that the uplink SNR at the serving BS exceeds the threshold.
pub fn ul_coverage<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    let ul = &model.uplink;
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let v = loc.support_start(r);
    let m = model.nakagami_m();
    let mt = T::from_u32(m).expect("u32");
    let integrand = |x0: T| {
        if x0 <= T::zero() {
            return T::zero();
        }
        let g = mt * ul.snr_threshold * ul.noise_power / ul_received_power_mean(x0, model);
        upper_gamma_ratio(m, g) * contact_distance_pdf(x0, lambda, r, loc)
    };
    let upper = truncation_radius(lambda, v);
    let split = model.x_max().max(v).min(upper);
    let opts = quad.inner_options(T::lit(1e-11));
    let mut total = T::zero();
    if split > v {
        total += integrate(integrand, v, split, opts)?.value;
    }
    if upper > split {
        total += integrate(integrand, split, upper, opts)?.value;
    }
    Ok(total.max(T::zero()).min(T::one()))
}

/// `E[e^{-s W}]` of the own-device power density `P(x0)·H / (4π u0^β)`.
///
/// The full-power part beyond the switch distance uses the closed-form
/// contact-distance survival function.
pub fn ul_exposure_laplace<T: Scalar>(
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let v = loc.support_start(r);
    let m = model.nakagami_m();
    let k = device_density_factor(model);
    let x_max = model.x_max();
    let capped = gain_laplace(s * (model.uplink.p_max * k), m) * contact_distance_survival(x_max, lambda, r, loc);
    if x_max <= v {
        return Ok(capped);
    }
    let f = |x0: T| gain_laplace(s * (ul_transmit_power(x0, model) * k), m) * contact_distance_pdf(x0, lambda, r, loc);
    // Keep the range matched to the contact-distance scale so no mass is missed.
    let upper = x_max.min(truncation_radius(lambda, v));
    let head = integrate(f, v, upper, quad.inner_options(T::lit(1e-12)))?.value;
    Ok(head + capped)
}

pub fn ul_exposure_cdf<T: Scalar>(w: T, model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    cdf_from_laplace(&|s| ul_exposure_laplace(s, model, loc, quad), w, quad)
}

pub fn ul_exposure_percentile<T: Scalar>(
    rho: T,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    model.validate()?;
    let v = loc.support_start(model.point_process.hole_radius);
    let x = typical_distance(model.lambda_bs(), v);
    let hint = ul_transmit_power(x, model) * device_density_factor(model);
    percentile_from_laplace(&|s| ul_exposure_laplace(s, model, loc, quad), rho, hint, quad)
}
