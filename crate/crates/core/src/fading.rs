//! Nakagami-m small-scale fading on the power gain.
//!
//! The power gain follows a Gamma law with integer shape `m` and scale `1/m`,
//! so its mean is 1. Integer `m` keeps the upper incomplete gamma ratio a
//! finite sum, which the coverage expressions rely on.

use num_complex::Complex;
use rand::Rng;

use crate::scalar::Scalar;

/// Nonnegative linear power gain.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FadingGain<T>(pub T);

impl<T: Scalar> FadingGain<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// `f(ω) = m^m ω^(m-1) e^(-mω) / Γ(m)`.
pub fn nakagami_gain_pdf<T: Scalar>(omega: T, m: u32) -> T {
    assert!(m >= 1, "Nakagami shape must be at least 1");
    if omega < T::zero() {
        return T::zero();
    }
    let mt = T::from_u32(m).expect("u32 fits scalar");
    if omega == T::zero() {
        return if m == 1 { T::one() } else { T::zero() };
    }
    let ln_gamma_m = (1..m).fold(T::zero(), |acc, k| acc + T::from_u32(k).expect("u32").ln());
    (mt * mt.ln() + (mt - T::one()) * omega.ln() - ln_gamma_m - mt * omega).exp()
}

/// Fading CDF, `1 - Γ_u(m, mω)/Γ(m)`.
pub fn nakagami_gain_cdf<T: Scalar>(omega: T, m: u32) -> T {
    if omega <= T::zero() {
        return T::zero();
    }
    T::one() - upper_gamma_ratio(m, T::from_u32(m).expect("u32") * omega)
}

/// `Γ_u(m, g) / Γ(m) = e^(-g) Σ_{k<m} g^k / k!` for integer `m`.
pub fn upper_gamma_ratio<T: Scalar>(m: u32, g: T) -> T {
    assert!(m >= 1, "Nakagami shape must be at least 1");
    if g <= T::zero() {
        return T::one();
    }
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..m {
        term = term * g / T::from_u32(k).expect("u32");
        sum += term;
    }
    ((-g).exp() * sum).min(T::one())
}

/// Draws a gain: `-ln U` for `m = 1`, otherwise the mean of `m` unit exponentials.
pub fn sample_gain<T: Scalar, R: Rng + ?Sized>(m: u32, rng: &mut R) -> FadingGain<T> {
    assert!(m >= 1, "Nakagami shape must be at least 1");
    let mut acc = 0.0_f64;
    for _ in 0..m {
        let u: f64 = 1.0 - rng.random::<f64>();
        acc -= u.ln();
    }
    FadingGain(T::lit(acc / f64::from(m)))
}

/// Laplace transform of the gain, `E[e^{-sH}] = (m / (m + s))^m`.
pub fn gain_laplace<T: Scalar>(s: Complex<T>, m: u32) -> Complex<T> {
    let mt = T::from_u32(m).expect("u32");
    let base = Complex::new(T::one(), T::zero()) + s / mt;
    base.powi(-(m as i32))
}

/// `1 - (m / (m + s))^m` without cancellation for small `|s|`.
///
/// Uses `((1 + y)^m - 1) / (1 + y)^m` with the numerator expanded as a
/// binomial sum, `y = s/m`.
pub fn one_minus_gain_laplace<T: Scalar>(s: Complex<T>, m: u32) -> Complex<T> {
    let mt = T::from_u32(m).expect("u32");
    let y = s / mt;
    let one = Complex::new(T::one(), T::zero());
    if m == 1 {
        return y / (one + y);
    }
    let mut numerator = Complex::new(T::zero(), T::zero());
    let mut power = one;
    let mut binom = T::one();
    for k in 1..=m {
        binom = binom * T::from_u32(m - k + 1).expect("u32") / T::from_u32(k).expect("u32");
        power *= y;
        numerator += power * binom;
    }
    numerator / (one + y).powi(m as i32)
}
