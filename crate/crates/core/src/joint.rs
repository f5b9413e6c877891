//! Exposure index: SAR-weighted sum of the own-device transmit power and the
//! downlink power density.
//!
//! Given the serving distance `x0` the uplink part is deterministic, while the
//! serving BS and every other BS contribute faded terms.

use std::str::FromStr;

use num_complex::Complex;

use crate::downlink::{dl_exposure_laplace, truncation_radius, typical_distance, ExponentTable, FieldKernel};
use crate::error::{Error, Result};
use crate::model::{NetworkModel, UserLocation};
use crate::numerics::gil_pelaez::ErrorSlot;
use crate::fading::{gain_laplace, upper_gamma_ratio};
use crate::numerics::{cdf_from_laplace, integrate, invert_monotone, AdaptiveOptions, QuadratureConfig};
use crate::point_process::{contact_distance_cdf, contact_distance_pdf, contact_distance_survival};
use crate::scalar::Scalar;
use crate::uplink::ul_transmit_power;

/// Which part of the exposure index to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EiComponent {
    Total,
    Uplink,
    Downlink,
}

impl EiComponent {
    pub fn label(self) -> &'static str {
        match self {
            EiComponent::Total => "total",
            EiComponent::Uplink => "ul",
            EiComponent::Downlink => "dl",
        }
    }
}

impl FromStr for EiComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "total" | "ei" => Ok(EiComponent::Total),
            "ul" | "uplink" => Ok(EiComponent::Uplink),
            "dl" | "downlink" => Ok(EiComponent::Downlink),
            other => Err(Error::InvalidParameter {
                name: "component",
                reason: format!("expected total, ul or dl, got `{other}`"),
            }),
        }
    }
}

fn sar_kernel<T: Scalar>(model: &NetworkModel<T>) -> FieldKernel<T> {
    FieldKernel::downlink(model).scaled(model.sar.sar_dl)
}

/// Uplink part of the index at serving distance `x0`.
pub fn ei_uplink_term<T: Scalar>(x0: T, model: &NetworkModel<T>) -> T {
    model.sar.sar_ul * ul_transmit_power(x0, model)
}

/// Transform of the index given the serving BS at `x0`.
pub fn ei_conditional_laplace<T: Scalar>(
    s: Complex<T>,
    x0: T,
    model: &NetworkModel<T>,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    if !(x0 > T::zero()) {
        return Err(Error::InvalidParameter { name: "x0", reason: format!("must be positive, got {x0}") });
    }
    let kernel = sar_kernel(model);
    let uplink = (-s * ei_uplink_term(x0, model)).exp();
    let serving = kernel.kappa(s, x0);
    let others = (-kernel.exponent(s, x0, model.lambda_bs(), quad)?).exp();
    Ok(uplink * serving * others)
}

/// Serving-distance ranges `[v, split)` and `[split, upper]`: the device
/// transmits at full power from `split` on.
struct Regions<T> {
    start: T,
    split: T,
    upper: T,
}

impl<T: Scalar> Regions<T> {
    fn new(model: &NetworkModel<T>, loc: UserLocation) -> Self {
        let start = loc.support_start(model.point_process.hole_radius);
        let upper = truncation_radius(model.lambda_bs(), start);
        let split = model.x_max().max(start).min(upper);
        Self { start, split, upper }
    }
}

/// `E[exp(-s·EI); a ≤ X0 < b]`, optionally without the uplink factor.
fn ei_range_laplace<T: Scalar>(
    s: Complex<T>,
    a: T,
    b: T,
    with_uplink: bool,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    if !(b > a) {
        return Ok(zero);
    }
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let kernel = sar_kernel(model);
    if s.norm() == T::zero() {
        let mass = contact_distance_survival(a, lambda, r, loc) - contact_distance_survival(b, lambda, r, loc);
        return Ok(Complex::new(mass, T::zero()));
    }
    let table = ExponentTable::build(kernel, s, lambda, a.max(b * T::lit(1e-3)), b, quad)?;
    let slot = ErrorSlot::new();
    let f = |x0: T| {
        if x0 <= T::zero() {
            return zero;
        }
        let others = match table.eval(x0) {
            Ok(e) => (-e).exp(),
            Err(e) => {
                slot.record(e);
                return zero;
            }
        };
        let uplink = if with_uplink { (-s * ei_uplink_term(x0, model)).exp() } else { Complex::new(T::one(), T::zero()) };
        uplink * kernel.kappa(s, x0) * others * contact_distance_pdf(x0, lambda, r, loc)
    };
    let est = integrate(f, a, b, quad.inner_options(T::lit(1e-10)))?;
    slot.take()?;
    Ok(est.value)
}

/// Transform of the index averaged over the serving distance.
pub fn ei_laplace<T: Scalar>(
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    if s.norm() == T::zero() {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let g = Regions::new(model, loc);
    let below = ei_range_laplace(s, g.start, g.split, true, model, loc, quad)?;
    let above = ei_range_laplace(s, g.split, g.upper, false, model, loc, quad)?;
    let capped = (-s * (model.sar.sar_ul * model.uplink.p_max)).exp();
    Ok(below + capped * above)
}

/// `E[exp(-s·SAR_UL·P(X0)); a ≤ X0 < b]`.
fn ul_range_laplace<T: Scalar>(
    s: Complex<T>,
    a: T,
    b: T,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    if !(b > a) {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let f = |x0: T| (-s * ei_uplink_term(x0, model)).exp() * contact_distance_pdf(x0, lambda, r, loc);
    Ok(integrate(f, a, b, quad.inner_options(T::lit(1e-10)))?.value)
}

/// Transform of the uplink part alone, `E[exp(-s·SAR_UL·P(x0))]`.
pub fn ei_ul_laplace<T: Scalar>(
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let g = Regions::new(model, loc);
    let mass_above = contact_distance_survival(g.split, model.lambda_bs(), model.point_process.hole_radius, loc);
    let capped = (-s * (model.sar.sar_ul * model.uplink.p_max)).exp() * mass_above;
    Ok(ul_range_laplace(s, g.start, g.split, model, loc, quad)? + capped)
}

/// Transform of the downlink part alone: the downlink exposure transform at `s·SAR_DL`.
pub fn ei_dl_laplace<T: Scalar>(
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    dl_exposure_laplace(s * model.sar.sar_dl, model, loc, quad)
}

/// Transform of the requested component.
pub fn ei_component_laplace<T: Scalar>(
    component: EiComponent,
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    match component {
        EiComponent::Total => ei_laplace(s, model, loc, quad),
        EiComponent::Uplink => ei_ul_laplace(s, model, loc, quad),
        EiComponent::Downlink => ei_dl_laplace(s, model, loc, quad),
    }
}

fn component_hint<T: Scalar>(component: EiComponent, model: &NetworkModel<T>, loc: UserLocation) -> T {
    let v = loc.support_start(model.point_process.hole_radius);
    let x = typical_distance(model.lambda_bs(), v);
    let ul = ei_uplink_term(x, model);
    let dl = model.sar.sar_dl * model.downlink.density_coefficient() * x.powf(-model.downlink.beta);
    let hint = match component {
        EiComponent::Total => ul + dl,
        EiComponent::Uplink => ul,
        EiComponent::Downlink => dl,
    };
    if hint > T::zero() {
        hint
    } else {
        T::one()
    }
}

fn sars_vanish<T: Scalar>(component: EiComponent, model: &NetworkModel<T>) -> bool {
    let ul = model.sar.sar_ul == T::zero();
    let dl = model.sar.sar_dl == T::zero();
    match component {
        EiComponent::Total => ul && dl,
        EiComponent::Uplink => ul,
        EiComponent::Downlink => dl,
    }
}

/// Width in `ln τ` of one Chebyshev piece of a [`NormalizedField`] table.
const PIECE_WIDTH: f64 = 1.5;
const PIECE_NODES: usize = 20;
/// Table range of `τ = |Im σ|`; the series or direct quadrature covers the rest.
const TABLE_TAU_MIN: f64 = 1e-6;
const TABLE_TAU_MAX: f64 = 1e9;
/// CDF values within this of 0 or 1 are snapped by the tail bounds.
const SNAP: f64 = 1e-9;

/// Law of `H0 + Z_μ`, the downlink exposure given the serving distance in
/// units of the serving term's mean.
///
/// With the serving BS at `x0` and the remaining BSs a PPP of intensity `λ`
/// beyond it, scaling distances by `x0` turns the field into `Z_μ`, the field
/// of a PPP with `μ = πλx0²` points per unit disk area outside the unit disk.
/// Its log-transform is `-μ J(σ)` with `J(σ) = 2∫_1^∞ (1 - κ(r, σ)) r dr`,
/// which depends only on `β` and `m` and is tabulated once on the imaginary axis.
pub struct NormalizedField<'q, T> {
    kernel: FieldKernel<T>,
    ln_lo: T,
    pieces: Vec<Vec<Complex<T>>>,
    chernoff_j: T,
    quad: &'q QuadratureConfig<T>,
}

impl<'q, T: Scalar> NormalizedField<'q, T> {
    pub fn build(beta: T, m: u32, quad: &'q QuadratureConfig<T>) -> Result<Self> {
        let kernel = FieldKernel { coef: T::one(), beta, m };
        let ln_lo = T::lit(TABLE_TAU_MIN.ln());
        let width = T::lit(PIECE_WIDTH);
        let count = ((TABLE_TAU_MAX.ln() - TABLE_TAU_MIN.ln()) / PIECE_WIDTH).ceil() as usize;
        let n = PIECE_NODES;
        let theta = |k: usize| T::PI() * (T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(n);
        let unit = T::one() / T::PI();
        let mut pieces = Vec::with_capacity(count);
        for p in 0..count {
            let centre = ln_lo + width * (T::from_usize_lossy(p) + T::lit(0.5));
            let values = (0..n)
                .map(|k| {
                    let tau = (centre + T::lit(0.5) * width * theta(k).cos()).exp();
                    kernel.exponent(Complex::new(T::zero(), tau), T::one(), unit, quad)
                })
                .collect::<Result<Vec<_>>>()?;
            let scale = T::lit(2.0) / T::from_usize_lossy(n);
            let mut coeffs: Vec<Complex<T>> = (0..n)
                .map(|j| {
                    values.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (k, v)| {
                        acc + *v * (T::from_usize_lossy(j) * theta(k)).cos()
                    }) * scale
                })
                .collect();
            coeffs[0] *= T::lit(0.5);
            pieces.push(coeffs);
        }
        let theta = T::from_u32(m).expect("u32") * T::lit(0.5);
        let chernoff_j = kernel.exponent(Complex::new(-theta, T::zero()), T::one(), unit, quad)?.re;
        Ok(Self { kernel, ln_lo, pieces, chernoff_j, quad })
    }

    /// `J(σ)`; tabulated on the imaginary axis, direct elsewhere.
    pub fn j(&self, sigma: Complex<T>) -> Result<Complex<T>> {
        let tau = sigma.im.abs();
        if sigma.re != T::zero() || tau == T::zero() {
            return self.kernel.exponent(sigma, T::one(), T::one() / T::PI(), self.quad);
        }
        let value = if tau < T::lit(TABLE_TAU_MIN) {
            // Two-term series; the remainder is O(τ³).
            let s = Complex::new(T::zero(), tau);
            let beta = self.kernel.beta;
            let mt = T::from_u32(self.kernel.m).expect("u32");
            let two = T::lit(2.0);
            s * (two / (beta - two)) - s * s * ((mt + T::one()) / mt / (two * beta - two))
        } else {
            let ln_tau = tau.ln();
            let width = T::lit(PIECE_WIDTH);
            let idx = ((ln_tau - self.ln_lo) / width).floor().to_usize().unwrap_or(usize::MAX);
            match self.pieces.get(idx) {
                Some(coeffs) => {
                    let centre = self.ln_lo + width * (T::from_usize_lossy(idx) + T::lit(0.5));
                    let u = ((ln_tau - centre) / (T::lit(0.5) * width)).max(-T::one()).min(T::one());
                    clenshaw(coeffs, u)
                }
                None => self.kernel.exponent(Complex::new(T::zero(), tau), T::one(), T::one() / T::PI(), self.quad)?,
            }
        };
        Ok(if sigma.im < T::zero() { value.conj() } else { value })
    }

    /// `E[exp(-s (H0 + Z_μ))]`.
    pub fn laplace(&self, s: Complex<T>, mu: T) -> Result<Complex<T>> {
        Ok(gain_laplace(s, self.kernel.m) * (-self.j(s)? * mu).exp())
    }

    /// `P(H0 + Z_μ ≤ z)`.
    pub fn cdf(&self, z: T, mu: T) -> Result<T> {
        if z <= T::zero() {
            return Ok(T::zero());
        }
        let m = self.kernel.m;
        let mt = T::from_u32(m).expect("u32");
        let snap = T::lit(SNAP);
        // P(H0 + Z ≤ z) ≤ P(H0 ≤ z).
        if T::one() - upper_gamma_ratio(m, mt * z) < snap {
            return Ok(T::zero());
        }
        // Chernoff at θ = m/2: P(X > z) ≤ 2^m e^{-μ J(-θ)} e^{-θz}.
        let theta = mt * T::lit(0.5);
        let log_bound = mt * T::LN_2() - mu * self.chernoff_j - theta * z;
        if log_bound < snap.ln() {
            return Ok(T::one());
        }
        cdf_from_laplace(&|s| self.laplace(s, mu), z, self.quad)
    }
}

fn clenshaw<T: Scalar>(coeffs: &[Complex<T>], u: T) -> Complex<T> {
    let two_u = u + u;
    let zero = Complex::new(T::zero(), T::zero());
    let (mut b1, mut b2) = (zero, zero);
    for c in coeffs.iter().skip(1).rev() {
        let b0 = *c + b1 * two_u - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + b1 * u - b2
}

/// Serving distance below which the uplink term stays under `e`, capped at `upper`.
fn uplink_inverse<T: Scalar>(e: T, model: &NetworkModel<T>, upper: T) -> T {
    let cap = model.sar.sar_ul * model.uplink.p_max;
    if e >= cap || model.sar.sar_ul == T::zero() {
        return upper;
    }
    let ul = &model.uplink;
    (e / (model.sar.sar_ul * ul.pu_coeff)).powf(T::one() / (model.downlink.alpha * ul.epsilon)).min(upper)
}

/// CDF of the total index, conditioning on the serving distance:
/// `F(e) = ∫ f(x0) P(SAR_DL·W_DL ≤ e - SAR_UL·P(x0) | x0) dx0`.
fn total_cdf<T: Scalar>(
    e_val: T,
    field: &NormalizedField<'_, T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let g = Regions::new(model, loc);
    let top = uplink_inverse(e_val, model, g.upper);
    if top <= g.start {
        return Ok(T::zero());
    }
    let serving = model.sar.sar_dl * model.downlink.density_coefficient();
    let slot = ErrorSlot::new();
    let integrand = |x0: T| {
        if x0 <= T::zero() {
            return T::zero();
        }
        let margin = e_val - ei_uplink_term(x0, model);
        if margin <= T::zero() {
            return T::zero();
        }
        let conditional = if serving == T::zero() {
            Ok(T::one())
        } else {
            field.cdf(margin * x0.powf(model.downlink.beta) / serving, T::PI() * lambda * x0 * x0)
        };
        match conditional {
            Ok(p) => p * contact_distance_pdf(x0, lambda, r, loc),
            Err(e) => {
                slot.record(e);
                T::zero()
            }
        }
    };
    let opts = AdaptiveOptions::new(quad.cdf_tolerance * T::lit(0.1), T::lit(1e-6)).with_max_subdivisions(quad.max_subdivisions);
    let mut total = T::zero();
    let split = g.split.min(top);
    if split > g.start {
        total += integrate(integrand, g.start, split, opts)?.value;
    }
    if top > split {
        total += integrate(integrand, split, top, opts)?.value;
    }
    slot.take()?;
    Ok(total.max(T::zero()).min(T::one()))
}

/// CDF of the requested component.
///
/// The uplink part is a monotone function of the serving distance and has a
/// closed form, with an atom at `SAR_UL·p_max`. The downlink part inverts its
/// transform directly. The total conditions on the serving distance and
/// inverts the normalised downlink law for each distance, which stays
/// well-posed next to the near-atom at the full-power level.
pub fn ei_component_cdf<T: Scalar>(
    component: EiComponent,
    e_val: T,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    model.validate()?;
    let field = match component {
        EiComponent::Total => Some(NormalizedField::build(model.downlink.beta, model.nakagami_m(), quad)?),
        _ => None,
    };
    component_cdf_with(component, e_val, field.as_ref(), model, loc, quad)
}

fn component_cdf_with<T: Scalar>(
    component: EiComponent,
    e_val: T,
    field: Option<&NormalizedField<'_, T>>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    if e_val < T::zero() {
        return Ok(T::zero());
    }
    if sars_vanish(component, model) {
        return Ok(T::one());
    }
    match component {
        EiComponent::Downlink => cdf_from_laplace(&|s| ei_dl_laplace(s, model, loc, quad), e_val, quad),
        EiComponent::Uplink => {
            let x = uplink_inverse(e_val, model, T::infinity());
            if x.is_infinite() {
                return Ok(T::one());
            }
            Ok(contact_distance_cdf(x, model.lambda_bs(), model.point_process.hole_radius, loc))
        }
        EiComponent::Total => match field {
            Some(field) => total_cdf(e_val, field, model, loc, quad),
            None => ei_component_cdf(component, e_val, model, loc, quad),
        },
    }
}

/// Total-index CDF by direct inversion of [`ei_laplace`]. Slow when a large
/// share of users transmits at full power; kept as a cross-check.
pub fn ei_cdf_by_inversion<T: Scalar>(e_val: T, model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    cdf_from_laplace(&|s| ei_laplace(s, model, loc, quad), e_val, quad)
}

/// `rho`-quantile of the requested component; 0 when its SAR weights vanish.
pub fn ei_component_percentile<T: Scalar>(
    component: EiComponent,
    rho: T,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    model.validate()?;
    if sars_vanish(component, model) {
        return Ok(T::zero());
    }
    let hint = component_hint(component, model, loc);
    let field = match component {
        EiComponent::Total => Some(NormalizedField::build(model.downlink.beta, model.nakagami_m(), quad)?),
        _ => None,
    };
    invert_monotone(|e| component_cdf_with(component, e, field.as_ref(), model, loc, quad), rho, hint, quad)
}

pub fn ei_cdf<T: Scalar>(e_val: T, model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    ei_component_cdf(EiComponent::Total, e_val, model, loc, quad)
}

pub fn ei_percentile<T: Scalar>(rho: T, model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    ei_component_percentile(EiComponent::Total, rho, model, loc, quad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn transforms_at_zero() {
        let model = NetworkModel::<f64>::worst_case();
        for loc in [UserLocation::InsideHole, UserLocation::OutsideHole] {
            for comp in [EiComponent::Total, EiComponent::Uplink, EiComponent::Downlink] {
                let l = ei_component_laplace(comp, c(0.0, 0.0), &model, loc, &quad()).unwrap();
                assert!((l - c(1.0, 0.0)).norm() < 1e-9, "{comp:?} {loc:?} {l}");
            }
        }
        assert_eq!(ei_conditional_laplace(c(0.0, 0.0), 30.0, &model, &quad()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn conditional_reductions() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.sar.sar_dl = 0.0;
        for s in [c(3.0, 0.0), c(0.0, 250.0)] {
            let l = ei_conditional_laplace(s, 120.0, &model, &quad()).unwrap();
            let expected = (-s * model.sar.sar_ul * ul_transmit_power(120.0, &model)).exp();
            assert!((l - expected).norm() < 1e-12);
        }
        model.sar.sar_ul = 0.0;
        assert!((ei_conditional_laplace(c(0.0, 9.0), 40.0, &model, &quad()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(ei_cdf(1e-9, &model, UserLocation::OutsideHole, &quad()).unwrap(), 1.0);
    }

    #[test]
    fn downlink_part_is_rescaled_downlink_transform() {
        let model = NetworkModel::<f64>::worst_case();
        for t in [0.5, 40.0, 3e3] {
            let a = ei_dl_laplace(c(0.0, t), &model, UserLocation::InsideHole, &quad()).unwrap();
            let b = dl_exposure_laplace(c(0.0, t * model.sar.sar_dl), &model, UserLocation::InsideHole, &quad()).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn coupling_breaks_factorisation() {
        let model = NetworkModel::<f64>::worst_case();
        let s = c(300.0, 0.0);
        let loc = UserLocation::OutsideHole;
        let joint = ei_laplace(s, &model, loc, &quad()).unwrap();
        let product = ei_ul_laplace(s, &model, loc, &quad()).unwrap() * ei_dl_laplace(s, &model, loc, &quad()).unwrap();
        assert!((joint - product).norm() > 1e-4, "{joint} {product}");
    }

    #[test]
    fn normalised_field_table_matches_direct() {
        let q = quad();
        for (beta, m) in [(4.0, 1u32), (3.0, 2)] {
            let field = NormalizedField::build(beta, m, &q).unwrap();
            let kernel = FieldKernel { coef: 1.0, beta, m };
            for tau in [3e-8, 2e-6, 0.01, 0.7, 13.0, 4e3, 2e6, 5e8] {
                let direct = kernel.exponent(c(0.0, tau), 1.0, 1.0 / std::f64::consts::PI, &q).unwrap();
                let tab = field.j(c(0.0, tau)).unwrap();
                assert!((tab - direct).norm() <= 1e-8 * direct.norm().max(1e-12), "beta={beta} tau={tau} {tab} {direct}");
                assert!((field.j(c(0.0, -tau)).unwrap() - direct.conj()).norm() <= 1e-8 * direct.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn empty_field_leaves_the_serving_gain() {
        let q = quad();
        let field = NormalizedField::build(4.0, 2, &q).unwrap();
        for z in [0.2, 1.0, 2.5] {
            let expected = 1.0 - upper_gamma_ratio(2, 2.0 * z);
            assert!((field.cdf(z, 0.0).unwrap() - expected).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn conditional_cdf_agrees_with_inversion() {
        let q = quad();
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.lambda_b = 1e-4;
        for loc in [UserLocation::InsideHole, UserLocation::OutsideHole] {
            for e in [2e-4, 4e-4, 8e-4] {
                let a = ei_cdf(e, &model, loc, &q).unwrap();
                let b = ei_cdf_by_inversion(e, &model, loc, &q).unwrap();
                assert!((a - b).abs() < 1e-5, "{loc:?} e={e} {a} {b}");
            }
        }
    }

    #[test]
    fn uplink_closed_form_matches_transform() {
        // L(s) = s∫_0^cap e^{-se} F(e) de + e^{-s·cap} for a law supported on [0, cap].
        let q = quad();
        let model = NetworkModel::<f64>::worst_case();
        let cap = model.sar.sar_ul * model.uplink.p_max;
        let loc = UserLocation::InsideHole;
        for s in [0.5 / cap, 3.0 / cap, 20.0 / cap] {
            let f = |e: f64| (-s * e).exp() * ei_component_cdf(EiComponent::Uplink, e, &model, loc, &q).unwrap();
            let body = integrate(f, 0.0, cap, AdaptiveOptions::new(1e-13, 1e-10)).unwrap().value;
            let from_cdf = s * body + (-s * cap).exp();
            let direct = ei_ul_laplace(c(s, 0.0), &model, loc, &q).unwrap().re;
            assert!((from_cdf - direct).abs() < 1e-8, "s={s} {from_cdf} {direct}");
        }
        assert_eq!(ei_component_cdf(EiComponent::Uplink, cap, &model, loc, &q).unwrap(), 1.0);
    }

    #[test]
    fn component_parsing() {
        assert_eq!("UL".parse::<EiComponent>().unwrap(), EiComponent::Uplink);
        assert!("both".parse::<EiComponent>().is_err());
    }
}
