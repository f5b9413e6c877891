//! Adaptive Gauss–Kronrod quadrature over finite and semi-infinite ranges.
//!
//! The integrator is generic over the value type so the same code evaluates
//! real integrals (coverage, normalisation checks) and complex ones
//! (Laplace-transform exponents at imaginary arguments).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kronrod abscissae on [-1, 1], nonnegative half, descending.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: real scalars and complex numbers.
pub trait QuadValue<T: Scalar>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> + Zero + Send + Sync
{
    fn magnitude(&self) -> T;
}

impl<T: Scalar> QuadValue<T> for T {
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Scalar> QuadValue<T> for Complex<T> {
    fn magnitude(&self) -> T {
        self.norm()
    }
}

/// Tolerances for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> AdaptiveOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self { abs_tol, rel_tol, max_subdivisions: 400 }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

/// Integral estimate together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V, T> {
    pub value: V,
    pub error: T,
    pub evaluations: usize,
}

struct Segment<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

fn gk15<T, V, F>(f: &F, a: T, b: T) -> (V, T)
where
    T: Scalar,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK[..7].iter().zip(WGK[..7].iter()).enumerate() {
        let dx = half_len * T::lit(x);
        let sum = f(center - dx) + f(center + dx);
        kronrod = kronrod + sum * T::lit(w);
        if j % 2 == 1 {
            gauss = gauss + sum * T::lit(WG[j / 2]);
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).magnitude();
    (value, error)
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// error is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T, V, F>(f: F, a: T, b: T, opts: AdaptiveOptions<T>) -> Result<Estimate<V, T>>
where
    T: Scalar,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    if a == b {
        return Ok(Estimate { value: V::zero(), error: T::zero(), evaluations: 0 });
    }
    let (value, error) = gk15(&f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    loop {
        if !total.magnitude().is_finite() || !total_err.is_finite() {
            return Err(Error::NonConvergence(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err <= target {
            return Ok(Estimate { value: total, error: total_err, evaluations });
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::NonConvergence(format!(
                "error {total_err:e} above target {target:e} after {} subdivisions on [{a}, {b}]",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::NonConvergence(format!(
                "interval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        evaluations += 30;
        total = total - seg.value + v1 + v2;
        total_err = total_err - seg.error + e1 + e2;
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        // Re-sum occasionally so cancellation in the running totals cannot drift.
        if segments.len() % 64 == 0 {
            total = segments.iter().fold(V::zero(), |acc, s| acc + s.value);
            total_err = segments.iter().fold(T::zero(), |acc, s| acc + s.error);
        }
    }
}

/// Asymptotic behaviour of an integrand on `[lower, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail<T> {
    /// `|f(x)| ~ x^(-decay)` with `decay > 1`.
    Algebraic(T),
    /// Exponential or faster decay.
    Rapid,
}

/// Integral of `f` over `[lower, ∞)`.
///
/// The half-line is mapped onto `(0, 1]` so no truncation is needed:
/// algebraic tails use `x = lower · z^(-1/(d-1))`, which turns an
/// `x^(-d)` tail into a bounded integrand near `z = 0`; rapid tails use
/// `x = lower + (1 - z)/z`. An algebraic map needs `lower > 0`; for
/// `lower ≤ 0` the range is split at `lower + 1`.
pub fn semiinfinite_quadrature<T, V, F>(
    f: F,
    lower: T,
    tail: Tail<T>,
    opts: AdaptiveOptions<T>,
) -> Result<Estimate<V, T>>
where
    T: Scalar,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    match tail {
        Tail::Algebraic(decay) => {
            if !(decay > T::one()) {
                return Err(Error::NonConvergence(format!(
                    "algebraic tail with decay {decay} is not integrable"
                )));
            }
            if lower > T::zero() {
                algebraic_tail(&f, lower, decay, opts)
            } else {
                let split = lower + T::one();
                let head = integrate(&f, lower, split, opts)?;
                let rest = algebraic_tail(&f, split, decay, opts)?;
                Ok(Estimate {
                    value: head.value + rest.value,
                    error: head.error + rest.error,
                    evaluations: head.evaluations + rest.evaluations,
                })
            }
        }
        Tail::Rapid => {
            let g = |z: T| {
                if z <= T::zero() {
                    return V::zero();
                }
                let x = lower + (T::one() - z) / z;
                let v = f(x);
                if v.magnitude() == T::zero() {
                    V::zero()
                } else {
                    v * (T::one() / (z * z))
                }
            };
            integrate(g, T::zero(), T::one(), opts)
        }
    }
}

/// `∫_lower^∞ f` for an integrand decaying like `x^(-decay)`, `lower > 0`.
pub fn algebraic_tail<T, V, F>(f: &F, lower: T, decay: T, opts: AdaptiveOptions<T>) -> Result<Estimate<V, T>>
where
    T: Scalar,
    V: QuadValue<T>,
    F: Fn(T) -> V,
{
    let k = T::one() / (decay - T::one());
    let g = |z: T| {
        if z <= T::zero() {
            return V::zero();
        }
        let zk = z.powf(-k);
        let x = lower * zk;
        if !x.is_finite() {
            return V::zero();
        }
        f(x) * (lower * k * zk / z)
    };
    integrate(g, T::zero(), T::one(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> AdaptiveOptions<f64> {
        AdaptiveOptions::new(1e-13, 1e-12)
    }

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, opts()).unwrap();
        assert_relative_eq!(est.value, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
        assert_eq!(est.evaluations, 15);
    }

    #[test]
    fn semi_infinite_examples() {
        let e = semiinfinite_quadrature(|x: f64| (-x).exp(), 0.0, Tail::Rapid, opts()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-8);

        let e = semiinfinite_quadrature(|x: f64| x.powf(1.0 - 2.5), 50.0, Tail::Algebraic(1.5), opts()).unwrap();
        let exact = 50f64.powf(-0.5) / 0.5;
        assert!((e.value - exact).abs() < 1e-6);
        assert_relative_eq!(e.value, 0.282_842_712_474_619, max_relative = 1e-10);

        let e = semiinfinite_quadrature(|x: f64| x * (-x * x).exp(), 0.0, Tail::Rapid, opts()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn algebraic_split_at_zero() {
        // ∫_0^∞ 1/(1+x)^3 dx = 1/2
        let e = semiinfinite_quadrature(|x: f64| (1.0 + x).powi(-3), 0.0, Tail::Algebraic(3.0), opts()).unwrap();
        assert_relative_eq!(e.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^1 e^{i x} dx = (e^{i} - 1)/i
        let e = integrate(|x: f64| Complex::new(0.0, x).exp(), 0.0, 1.0, opts()).unwrap();
        let exact = (Complex::new(0.0, 1.0_f64).exp() - 1.0) / Complex::new(0.0, 1.0);
        assert!((e.value - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 x^{-1/2} dx = 2
        let e = integrate(|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, AdaptiveOptions::new(1e-9, 1e-9)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = integrate(
            |x: f64| (1.0 / x).sin() / x,
            1e-9,
            1.0,
            AdaptiveOptions::new(1e-14, 1e-14).with_max_subdivisions(10),
        );
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn f32_integration() {
        let e = integrate(|x: f32| x * x, 0.0, 3.0, AdaptiveOptions::new(1e-5, 1e-5)).unwrap();
        assert!((e.value - 9.0).abs() < 1e-4);
    }
}
