//! Downlink coverage, exposure law, exposure conditioned on the serving
//! distance, and the compliance distance.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fading::{gain_laplace, one_minus_gain_laplace, upper_gamma_ratio};
use crate::model::{NetworkModel, UserLocation};
use crate::numerics::{
    cdf_from_laplace, integrate, percentile_from_laplace, QuadratureConfig, Tail,
};
use crate::numerics::quadrature::algebraic_tail;
use crate::point_process::contact_distance_pdf;
use crate::scalar::Scalar;

/// Absolute accuracy targeted for a Laplace exponent.
const EXPONENT_TOLERANCE: f64 = 1e-10;
/// Contact-distance mass ignored beyond the truncation radius.
const TRUNCATION_MASS: f64 = 1e-9;

/// Faded power density `coef · H · x^(-beta)` seen from a single transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldKernel<T> {
    pub coef: T,
    pub beta: T,
    pub m: u32,
}

impl<T: Scalar> FieldKernel<T> {
    /// Kernel of the BS field, `coef = p / 4π`.
    pub fn downlink(model: &NetworkModel<T>) -> Self {
        Self { coef: model.downlink.density_coefficient(), beta: model.downlink.beta, m: model.nakagami_m() }
    }

    /// Same kernel with the coefficient scaled, e.g. by a SAR weight.
    pub fn scaled(self, factor: T) -> Self {
        Self { coef: self.coef * factor, ..self }
    }

    /// `κ(x, s) = (m / (m + s·coef·x^(-β)))^m`.
    pub fn kappa(&self, s: Complex<T>, x: T) -> Complex<T> {
        gain_laplace(s * (self.coef * x.powf(-self.beta)), self.m)
    }

    pub fn one_minus_kappa(&self, s: Complex<T>, x: T) -> Complex<T> {
        one_minus_gain_laplace(s * (self.coef * x.powf(-self.beta)), self.m)
    }

    /// Distance at which `|s|·coef·x^(-β)/m = 1`.
    fn knee(&self, s: Complex<T>) -> T {
        (s.norm() * self.coef / T::from_u32(self.m).expect("u32")).powf(T::one() / self.beta)
    }

    /// `2πλ ∫_lower^∞ (1 - κ(x, s)) x dx`, the exponent of the field transform.
    pub fn exponent(&self, s: Complex<T>, lower: T, lambda: T, quad: &QuadratureConfig<T>) -> Result<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        if s.norm() == T::zero() || lambda == T::zero() || self.coef == T::zero() {
            return Ok(zero);
        }
        if !(self.beta > T::lit(2.0)) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("field exponent diverges for beta = {} <= 2", self.beta),
            });
        }
        let two_pi_l = T::lit(2.0) * T::PI() * lambda;
        let opts = quad.inner_options(T::lit(EXPONENT_TOLERANCE) / two_pi_l);
        let f = |x: T| self.one_minus_kappa(s, x) * x;
        let knee = self.knee(s);
        let decay = self.beta - T::one();
        let value = if lower < knee {
            let head = integrate(f, lower, knee, opts)?.value;
            head + algebraic_tail(&f, knee, decay, opts)?.value
        } else {
            crate::numerics::semiinfinite_quadrature(f, lower, Tail::Algebraic(decay), opts)?.value
        };
        Ok(value * two_pi_l)
    }
}

/// Chebyshev nodes of an [`ExponentTable`].
const TABLE_NODES: usize = 96;

/// Interpolant of `x ↦ kernel.exponent(s, x, λ)` on `[lo, hi]` in log-distance.
///
/// Built from one tail integral at the top node and short increments between
/// neighbouring nodes, so evaluating many lower limits for the same `s` costs
/// a single pass. Arguments outside the table fall back to direct quadrature.
pub struct ExponentTable<'q, T> {
    kernel: FieldKernel<T>,
    s: Complex<T>,
    lambda: T,
    lo: T,
    hi: T,
    centre: T,
    half_width: T,
    coeffs: Vec<Complex<T>>,
    quad: &'q QuadratureConfig<T>,
}

impl<'q, T: Scalar> ExponentTable<'q, T> {
    pub fn build(
        kernel: FieldKernel<T>,
        s: Complex<T>,
        lambda: T,
        lo: T,
        hi: T,
        quad: &'q QuadratureConfig<T>,
    ) -> Result<Self> {
        if !(lo > T::zero() && hi > lo) {
            return Err(Error::InvalidParameter { name: "table range", reason: format!("need 0 < lo < hi, got [{lo}, {hi}]") });
        }
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        let centre = T::lit(0.5) * (ln_lo + ln_hi);
        let half_width = T::lit(0.5) * (ln_hi - ln_lo);
        let n = TABLE_NODES;
        let theta = |k: usize| T::PI() * (T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(n);
        // Node 0 is the largest distance; later nodes step inwards.
        let xs: Vec<T> = (0..n).map(|k| (centre + half_width * theta(k).cos()).exp()).collect();
        let two_pi_l = T::lit(2.0) * T::PI() * lambda;
        let opts = quad.inner_options(T::lit(EXPONENT_TOLERANCE) / (two_pi_l * T::from_usize_lossy(n)));
        let mut values = Vec::with_capacity(n);
        values.push(kernel.exponent(s, xs[0], lambda, quad)?);
        for k in 1..n {
            let step = if s.norm() == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                integrate(|x: T| kernel.one_minus_kappa(s, x) * x, xs[k], xs[k - 1], opts)?.value * two_pi_l
            };
            let prev = values[k - 1];
            values.push(prev + step);
        }
        let scale = T::lit(2.0) / T::from_usize_lossy(n);
        let mut coeffs: Vec<Complex<T>> = (0..n)
            .map(|j| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, v) in values.iter().enumerate() {
                    acc += *v * (T::from_usize_lossy(j) * theta(k)).cos();
                }
                acc * scale
            })
            .collect();
        coeffs[0] *= T::lit(0.5);
        Ok(Self { kernel, s, lambda, lo, hi, centre, half_width, coeffs, quad })
    }

    pub fn eval(&self, x: T) -> Result<Complex<T>> {
        if x < self.lo || x > self.hi {
            return self.kernel.exponent(self.s, x, self.lambda, self.quad);
        }
        let u = ((x.ln() - self.centre) / self.half_width).max(-T::one()).min(T::one());
        let two_u = u + u;
        let zero = Complex::new(T::zero(), T::zero());
        let (mut b1, mut b2) = (zero, zero);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = *c + b1 * two_u - b2;
            b2 = b1;
            b1 = b0;
        }
        Ok(self.coeffs[0] + b1 * u - b2)
    }
}

/// Distance beyond which the contact-distance mass is below `TRUNCATION_MASS`.
pub(crate) fn truncation_radius<T: Scalar>(lambda: T, support_start: T) -> T {
    let extra = -T::lit(TRUNCATION_MASS).ln() / (lambda * T::PI());
    (support_start * support_start + extra).sqrt()
}

/// Typical distance to the serving BS, used to seed percentile brackets.
pub(crate) fn typical_distance<T: Scalar>(lambda: T, support_start: T) -> T {
    support_start + T::one() / (T::PI() * lambda).sqrt()
}

/// Mean received power from the serving BS at distance `x0`: `p·G_u·η·x0^(-α)`.
pub fn dl_received_power_mean<T: Scalar>(x0: T, model: &NetworkModel<T>) -> T {
    let dl = &model.downlink;
    dl.eirp() * dl.user_gain * dl.ref_path_gain * x0.powf(-dl.alpha)
}

/// Probability that the downlink SNR exceeds the threshold.
pub fn dl_coverage<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    let dl = &model.downlink;
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let v = loc.support_start(r);
    let m = dl.nakagami_m;
    let mt = T::from_u32(m).expect("u32");
    let integrand = |x0: T| {
        if x0 <= T::zero() {
            return if loc == UserLocation::OutsideHole { T::zero() } else { contact_distance_pdf(x0, lambda, r, loc) };
        }
        let g = mt * dl.snr_threshold * dl.noise_power / dl_received_power_mean(x0, model);
        upper_gamma_ratio(m, g) * contact_distance_pdf(x0, lambda, r, loc)
    };
    let upper = truncation_radius(lambda, v);
    let est = integrate(integrand, v, upper, quad.inner_options(T::lit(1e-11)))?;
    Ok(est.value.max(T::zero()).min(T::one()))
}

/// `E[e^{-sW}]` of the aggregate downlink power density at the typical user.
pub fn dl_exposure_laplace<T: Scalar>(
    s: Complex<T>,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let kernel = FieldKernel::downlink(model);
    let v = loc.support_start(model.point_process.hole_radius);
    Ok((-kernel.exponent(s, v, model.lambda_bs(), quad)?).exp())
}

pub fn dl_exposure_cdf<T: Scalar>(w: T, model: &NetworkModel<T>, loc: UserLocation, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    cdf_from_laplace(&|s| dl_exposure_laplace(s, model, loc, quad), w, quad)
}

pub fn dl_exposure_percentile<T: Scalar>(
    rho: T,
    model: &NetworkModel<T>,
    loc: UserLocation,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    model.validate()?;
    let v = loc.support_start(model.point_process.hole_radius);
    let hint = model.downlink.density_coefficient() * typical_distance(model.lambda_bs(), v).powf(-model.downlink.beta);
    percentile_from_laplace(&|s| dl_exposure_laplace(s, model, loc, quad), rho, hint, quad)
}

/// Transform of the exposure given the serving BS at `x0` and the rest beyond it.
pub fn dl_conditional_exposure_laplace<T: Scalar>(
    s: Complex<T>,
    x0: T,
    model: &NetworkModel<T>,
    quad: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    if !(x0 > T::zero()) {
        return Err(Error::InvalidParameter { name: "x0", reason: format!("must be positive, got {x0}") });
    }
    let kernel = FieldKernel::downlink(model);
    Ok(kernel.kappa(s, x0) * (-kernel.exponent(s, x0, model.lambda_bs(), quad)?).exp())
}

pub fn dl_conditional_exposure_cdf<T: Scalar>(w: T, x0: T, model: &NetworkModel<T>, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    cdf_from_laplace(&|s| dl_conditional_exposure_laplace(s, x0, model, quad), w, quad)
}

pub fn dl_conditional_exposure_percentile<T: Scalar>(
    rho: T,
    x0: T,
    model: &NetworkModel<T>,
    quad: &QuadratureConfig<T>,
) -> Result<T> {
    model.validate()?;
    let hint = model.downlink.density_coefficient() * x0.powf(-model.downlink.beta);
    percentile_from_laplace(&|s| dl_conditional_exposure_laplace(s, x0, model, quad), rho, hint, quad)
}

/// Resolution of the compliance-distance search (m).
pub const COMPLIANCE_RESOLUTION: f64 = 0.1;
/// Largest serving distance considered by the compliance search (m).
pub const COMPLIANCE_CAP: f64 = 1e5;

/// Smallest serving distance whose conditional exposure CDF at `w_max`
/// reaches `rho`, to [`COMPLIANCE_RESOLUTION`]. Zero when even the
/// smallest distance complies.
pub fn compliance_distance<T: Scalar>(model: &NetworkModel<T>, w_max: T, rho: T, quad: &QuadratureConfig<T>) -> Result<T> {
    model.validate()?;
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::InvalidParameter { name: "rho", reason: format!("must lie in (0, 1), got {rho}") });
    }
    if !(w_max > T::zero()) {
        return Err(Error::InvalidParameter { name: "w_max", reason: format!("must be positive, got {w_max}") });
    }
    if w_max.is_infinite() {
        return Ok(T::zero());
    }
    let complies = |x0: T| -> Result<bool> { Ok(dl_conditional_exposure_cdf(w_max, x0, model, quad)? >= rho) };
    let resolution = T::lit(COMPLIANCE_RESOLUTION);
    if complies(resolution)? {
        return Ok(T::zero());
    }
    let mut lo = resolution;
    let mut hi = T::one().max(resolution + resolution);
    while !complies(hi)? {
        lo = hi;
        hi = hi + hi;
        if hi > T::lit(COMPLIANCE_CAP) {
            return Err(Error::BracketFailure(format!(
                "no compliant serving distance below {COMPLIANCE_CAP} m for w_max = {w_max}"
            )));
        }
    }
    while hi - lo > resolution {
        let mid = T::lit(0.5) * (lo + hi);
        if complies(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{semiinfinite_quadrature, AdaptiveOptions};

    fn quad() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// `πλ (s c)^{2/β} (2π/β) / sin(2π/β)` for `m = 1`, lower limit 0.
    fn closed_form_exponent(s: Complex<f64>, coef: f64, beta: f64, lambda: f64) -> Complex<f64> {
        let d = 2.0 / beta;
        let pi = std::f64::consts::PI;
        (s * coef).powf(d) * (pi * lambda * (pi * d) / (pi * d).sin())
    }

    #[test]
    fn received_power_examples() {
        let model = NetworkModel::<f64>::worst_case();
        let p1 = dl_received_power_mean(1.0, &model);
        assert!((p1 - model.eirp() * 1e-4).abs() < 1e-15);
        let p100 = dl_received_power_mean(100.0, &model);
        assert!((p100 - 6.3246e-9).abs() < 1e-12);
        assert!((dl_received_power_mean(50.0, &model) / dl_received_power_mean(100.0, &model) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn exponent_matches_closed_form() {
        let model = NetworkModel::<f64>::worst_case();
        let kernel = FieldKernel::downlink(&model);
        let lambda = 1e-5;
        for s in [c(1e3, 0.0), c(0.0, 5.0), c(0.0, -400.0), c(2.0, 3.0), c(1e-4, 0.0)] {
            let numeric = kernel.exponent(s, 0.0, lambda, &quad()).unwrap();
            let exact = closed_form_exponent(s, kernel.coef, kernel.beta, lambda);
            assert!((numeric - exact).norm() < 1e-9 * exact.norm().max(1.0), "s={s} {numeric} {exact}");
        }
    }

    #[test]
    fn exponent_m1_reduction() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.downlink.nakagami_m = 1;
        let kernel = FieldKernel::downlink(&model);
        let s = c(0.0, 30.0);
        let lower = 50.0;
        let opts = AdaptiveOptions::new(1e-14, 1e-12);
        let direct = semiinfinite_quadrature(
            |x: f64| {
                let y = s * (kernel.coef * x.powf(-kernel.beta));
                y / (c(1.0, 0.0) + y) * x
            },
            lower,
            Tail::Algebraic(1.5),
            opts,
        )
        .unwrap()
        .value
            * (2.0 * std::f64::consts::PI * 1e-5);
        let ours = kernel.exponent(s, lower, 1e-5, &quad()).unwrap();
        assert!((direct - ours).norm() < 1e-10, "{direct} {ours}");
    }

    #[test]
    fn laplace_at_zero_and_bounded() {
        let model = NetworkModel::<f64>::worst_case();
        for loc in [UserLocation::InsideHole, UserLocation::OutsideHole] {
            assert_eq!(dl_exposure_laplace(c(0.0, 0.0), &model, loc, &quad()).unwrap(), c(1.0, 0.0));
            for t in [0.1, 3.0, 50.0, 1e4] {
                assert!(dl_exposure_laplace(c(0.0, t), &model, loc, &quad()).unwrap().norm() <= 1.0 + 1e-12);
            }
        }
        assert_eq!(dl_conditional_exposure_laplace(c(0.0, 0.0), 10.0, &model, &quad()).unwrap(), c(1.0, 0.0));
        // The field beyond x0 decays like x0^(2-β), slowly for β = 2.5.
        let near = dl_conditional_exposure_laplace(c(0.0, 1.0), 1e6, &model, &quad()).unwrap();
        let far = dl_conditional_exposure_laplace(c(0.0, 1.0), 1e12, &model, &quad()).unwrap();
        assert!((far - c(1.0, 0.0)).norm() < 1e-4);
        assert!((far - c(1.0, 0.0)).norm() < (near - c(1.0, 0.0)).norm());
    }

    #[test]
    fn coverage_m1_oracle() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.hole_radius = 0.0;
        let lambda = model.lambda_bs();
        let k = model.downlink.snr_threshold * model.downlink.noise_power
            / (model.eirp() * model.downlink.ref_path_gain);
        let opts = AdaptiveOptions::new(1e-13, 1e-12);
        let oracle = semiinfinite_quadrature(
            |x: f64| {
                2.0 * std::f64::consts::PI * lambda * x * (-lambda * std::f64::consts::PI * x * x - k * x.powi(4)).exp()
            },
            0.0,
            Tail::Rapid,
            opts,
        )
        .unwrap()
        .value;
        let ours = dl_coverage(&model, UserLocation::OutsideHole, &quad()).unwrap();
        assert!((ours - oracle).abs() < 1e-6, "{ours} {oracle}");
    }

    #[test]
    fn coverage_limits_and_ordering() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.downlink.snr_threshold = 1e-12;
        assert!((dl_coverage(&model, UserLocation::OutsideHole, &quad()).unwrap() - 1.0).abs() < 1e-6);
        let model = NetworkModel::<f64>::worst_case();
        let out = dl_coverage(&model, UserLocation::OutsideHole, &quad()).unwrap();
        let inside = dl_coverage(&model, UserLocation::InsideHole, &quad()).unwrap();
        assert!(out >= inside);
    }

    #[test]
    fn exponent_table_matches_direct() {
        let model = NetworkModel::<f64>::worst_case();
        let kernel = FieldKernel::downlink(&model).scaled(0.0042);
        for (s, lo, hi, lambda) in [
            (c(0.0, 1e3), 50.0, 2600.0, 1e-6),
            (c(0.0, 3e6), 0.08, 80.0, 1e-3),
            (c(2e4, -7e5), 1.0, 800.0, 1e-5),
            (c(0.0, 1.0), 10.0, 300.0, 1e-4),
        ] {
            let q = quad();
            let table = ExponentTable::build(kernel, s, lambda, lo, hi, &q).unwrap();
            for i in 0..=40 {
                let x = lo * (hi / lo).powf(i as f64 / 40.0);
                let direct = kernel.exponent(s, x, lambda, &quad()).unwrap();
                let tab = table.eval(x).unwrap();
                assert!((direct - tab).norm() < 1e-9 * direct.norm().max(1.0), "s={s} x={x} {direct} {tab}");
            }
        }
    }

    #[test]
    fn compliance_distance_reference_case() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.lambda_b = 1e-4;
        let x = compliance_distance(&model, 10.0, 0.95, &quad()).unwrap();
        assert!((x - 7.5).abs() <= 1.0, "{x}");
        assert_eq!(compliance_distance(&model, f64::INFINITY, 0.95, &quad()).unwrap(), 0.0);
        let tighter = compliance_distance(&model, 5.0, 0.95, &quad()).unwrap();
        assert!(tighter >= x);
    }
}
