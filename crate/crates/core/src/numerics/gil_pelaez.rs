//! CDF recovery from a Laplace transform by Gil-Pelaez inversion.
//!
//! For a nonnegative random variable with transform `L(s) = E[e^{-sW}]`
//! the characteristic function is `φ(t) = L(-jt)` and
//!
//! ```text
//! F(w) = 1/2 - (1/π) ∫_0^∞ Im{ e^{-jtw} L(-jt) } / t dt
//! ```
//!
//! The two conjugate terms of the symmetric form collapse into the single
//! imaginary part above. The integrand has a removable singularity at 0; the
//! range is opened at `t_min = t_min_scale / w`, lowered further when `w`
//! lies far below the bulk of the law.

use std::cell::RefCell;

use num_complex::Complex;

use super::quadrature::{integrate, AdaptiveOptions};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Factor-1000 steps allowed when moving the start of the inversion head down.
const MAX_T_MIN_STEPS: usize = 12;

/// A Laplace transform `s ↦ E[e^{-sW}]` of a nonnegative random variable.
///
/// Implementations must accept `Re(s) ≥ 0` including the imaginary axis,
/// satisfy `L(0) = 1` and `|L(jt)| ≤ 1`, and be safe to call from several
/// threads.
pub trait LaplaceTransform<T: Scalar>: Sync {
    fn eval(&self, s: Complex<T>) -> Result<Complex<T>>;
}

impl<T, F> LaplaceTransform<T> for F
where
    T: Scalar,
    F: Fn(Complex<T>) -> Result<Complex<T>> + Sync,
{
    fn eval(&self, s: Complex<T>) -> Result<Complex<T>> {
        self(s)
    }
}

/// Tolerances and limits for transform inversion and the integrals behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Target accuracy of a recovered CDF value.
    pub cdf_tolerance: T,
    /// Truncation criterion for the oscillatory tail and per-panel accuracy.
    pub tail_tolerance: T,
    /// Relative accuracy of inner (Laplace-exponent, coverage) integrals.
    pub inner_rel_tolerance: T,
    /// Relative bracket width at which percentile bisection stops.
    pub percentile_rel_tolerance: T,
    /// Subdivision budget of a single adaptive integration.
    pub max_subdivisions: usize,
    /// Maximum number of panel doublings beyond `1/w`.
    pub max_panel_doublings: usize,
    /// Initial `t_min = t_min_scale / w`.
    pub t_min_scale: T,
    /// Maximum number of factor-2 bracket expansions in percentile search.
    pub max_bracket_expansions: usize,
    /// Budget of oscillation pieces integrated in the tail of one inversion.
    pub max_tail_pieces: usize,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            cdf_tolerance: T::lit(1e-4),
            tail_tolerance: T::lit(1e-6),
            inner_rel_tolerance: T::lit(1e-9),
            percentile_rel_tolerance: T::lit(1e-4),
            max_subdivisions: 400,
            max_panel_doublings: 64,
            t_min_scale: T::lit(1e-8),
            max_bracket_expansions: 80,
            max_tail_pieces: 1_000_000,
        }
    }
}

impl<T: Scalar> QuadratureConfig<T> {
    /// Options for an inner integral whose absolute accuracy should be `abs_tol`.
    ///
    /// The relative tolerance is floored at a small multiple of the scalar's
    /// machine epsilon so single precision stays attainable.
    pub fn inner_options(&self, abs_tol: T) -> AdaptiveOptions<T> {
        let rel = self.inner_rel_tolerance.max(T::epsilon() * T::lit(64.0));
        AdaptiveOptions::new(abs_tol, rel).with_max_subdivisions(self.max_subdivisions)
    }
}

/// Records the first error raised inside an integrand that must return a value.
pub(crate) struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    pub(crate) fn new() -> Self {
        Self(RefCell::new(None))
    }

    pub(crate) fn record(&self, e: Error) {
        let mut slot = self.0.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
    }

    pub(crate) fn take(&self) -> Result<()> {
        match self.0.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Raw Gil-Pelaez value before clamping; may stray slightly outside [0, 1].
pub fn raw_cdf_from_laplace<T, L>(lt: &L, w: T, quad: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    L: LaplaceTransform<T> + ?Sized,
{
    if w < T::zero() {
        return Ok(T::zero());
    }
    Ok(T::lit(0.5) - oscillatory_part(lt, w, quad)?)
}

/// `(1/π) ∫_0^∞ Im{e^{-jtw} L(-jt)} / t dt` for `w ≥ 0`.
fn oscillatory_part<T, L>(lt: &L, w: T, quad: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    L: LaplaceTransform<T> + ?Sized,
{
    let scale = if w > T::zero() { T::one() / w } else { T::one() };
    let pi = T::PI();
    let slot = ErrorSlot::new();

    let integrand = |t: T| -> T {
        match lt.eval(Complex::new(T::zero(), -t)) {
            Ok(l) => {
                let phase = Complex::new(T::zero(), -t * w).exp();
                (phase * l).im / t
            }
            Err(e) => {
                slot.record(e);
                T::zero()
            }
        }
    };

    let panel_tol = T::lit(0.1) * pi * quad.tail_tolerance;
    let panel_opts = AdaptiveOptions::new(panel_tol, T::lit(1e-10)).with_max_subdivisions(quad.max_subdivisions);

    // Near 0 the numerator grows like t (E[W] - w), so the part skipped below
    // t_min is about the numerator at t_min. Far below the bulk of the law
    // 1/w overstates the time scale; step t_min down until that part is negligible.
    let mut t_min = quad.t_min_scale * scale;
    for _ in 0..MAX_T_MIN_STEPS {
        if (integrand(t_min) * t_min).abs() < panel_tol {
            break;
        }
        t_min *= T::lit(1e-3);
    }
    slot.take()?;

    // Head [t_min, scale] in log-time: the integrand times t is bounded and smooth in ln t.
    let head = integrate(
        |u: T| {
            let t = u.exp();
            integrand(t) * t
        },
        t_min.ln(),
        scale.ln(),
        panel_opts,
    )?;
    slot.take()?;
    let mut total = head.value;

    // Tail: doubling panels [T, 2T], each cut into pieces spanning two periods of e^{-jtw}.
    let mut a = scale;
    let mut converged = false;
    let mut spent = 0usize;
    for _ in 0..quad.max_panel_doublings {
        let b = a + a;
        let pieces = if w > T::zero() {
            ((b - a) * w / (T::lit(4.0) * pi)).ceil().to_usize().unwrap_or(usize::MAX).max(1)
        } else {
            1
        };
        spent = spent.saturating_add(pieces);
        if spent > quad.max_tail_pieces {
            return Err(Error::NonConvergence(format!(
                "Gil-Pelaez tail at w = {w} exceeds the budget of {} pieces",
                quad.max_tail_pieces
            )));
        }
        let piece_opts = AdaptiveOptions::new(panel_tol / T::from_usize_lossy(pieces), T::lit(1e-10))
            .with_max_subdivisions(quad.max_subdivisions);
        let width = (b - a) / T::from_usize_lossy(pieces);
        let mut panel = T::zero();
        for k in 0..pieces {
            let lo = a + width * T::from_usize_lossy(k);
            let hi = if k + 1 == pieces { b } else { lo + width };
            panel += integrate(integrand, lo, hi, piece_opts)?.value;
        }
        slot.take()?;
        total += panel;
        let edge = lt.eval(Complex::new(T::zero(), b))?.norm() / b;
        a = b;
        if (panel / pi).abs() < quad.tail_tolerance && edge < quad.tail_tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "Gil-Pelaez tail at w = {w} not below {:e} after {} panel doublings",
            quad.tail_tolerance, quad.max_panel_doublings
        )));
    }
    Ok(total / pi)
}

/// CDF of the variable with transform `lt`, evaluated at `w` and clamped to [0, 1].
///
/// Raw values outside [-0.02, 1.02] indicate a broken transform or
/// quadrature and are reported as [`Error::CdfOutOfRange`].
pub fn cdf_from_laplace<T, L>(lt: &L, w: T, quad: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    L: LaplaceTransform<T> + ?Sized,
{
    let raw = raw_cdf_from_laplace(lt, w, quad)?;
    if !(raw >= T::lit(-0.02) && raw <= T::lit(1.02)) {
        return Err(Error::CdfOutOfRange { at: w.as_f64(), value: raw.as_f64() });
    }
    Ok(raw.max(T::zero()).min(T::one()))
}

/// Smallest `w` with `F(w) ≥ rho` (to tolerance) for a nondecreasing CDF.
///
/// Expands a geometric bracket around `hint` by factors of two, then bisects
/// in log-space until `|F(w) - rho|` is a small fraction of the CDF tolerance
/// or the bracket is relatively narrower than `percentile_rel_tolerance`.
pub fn invert_monotone<T, F>(cdf: F, rho: T, hint: T, quad: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::InvalidParameter { name: "rho", reason: format!("must lie in (0, 1), got {rho}") });
    }
    if !(hint > T::zero() && hint.is_finite()) {
        return Err(Error::BracketFailure(format!("bracket hint must be positive, got {hint}")));
    }
    let two = T::lit(2.0);
    let close = quad.cdf_tolerance * T::lit(0.01);
    let f0 = cdf(hint)?;
    if (f0 - rho).abs() <= close {
        return Ok(hint);
    }
    let (mut lo, mut hi);
    if f0 < rho {
        lo = hint;
        hi = hint * two;
        let mut found = false;
        for _ in 0..quad.max_bracket_expansions {
            if cdf(hi)? >= rho {
                found = true;
                break;
            }
            lo = hi;
            hi *= two;
        }
        if !found {
            return Err(Error::BracketFailure(format!("CDF stays below {rho} up to {hi}")));
        }
    } else {
        hi = hint;
        lo = hint / two;
        let mut found = false;
        for _ in 0..quad.max_bracket_expansions {
            if cdf(lo)? < rho {
                found = true;
                break;
            }
            hi = lo;
            lo /= two;
        }
        if !found {
            return Err(Error::BracketFailure(format!("CDF stays above {rho} down to {lo}")));
        }
    }
    loop {
        let mid = (lo * hi).sqrt();
        if hi / lo - T::one() <= quad.percentile_rel_tolerance || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f = cdf(mid)?;
        if (f - rho).abs() <= close {
            return Ok(mid);
        }
        if f < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `rho`-quantile of the variable with transform `lt`.
pub fn percentile_from_laplace<T, L>(lt: &L, rho: T, bracket_hint: T, quad: &QuadratureConfig<T>) -> Result<T>
where
    T: Scalar,
    L: LaplaceTransform<T> + ?Sized,
{
    invert_monotone(|w| cdf_from_laplace(lt, w, quad), rho, bracket_hint, quad)
}

/// Tabulated CDF on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> CdfCurve<T> {
    /// Tabulates `f` on `grid` and repairs the result into a valid CDF.
    pub fn tabulate<F>(grid: Vec<T>, f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<T>,
    {
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let mut curve = Self { grid, values };
        curve.repair();
        Ok(curve)
    }

    /// Running-maximum repair plus clamping to [0, 1].
    pub fn repair(&mut self) {
        let mut running = T::zero();
        for v in &mut self.values {
            let clamped = v.max(T::zero()).min(T::one());
            running = running.max(clamped);
            *v = running;
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1]) && self.grid.windows(2).all(|g| g[0] < g[1])
    }

    /// Linear interpolation; 0 left of the grid, the last value right of it.
    pub fn value_at(&self, x: T) -> T {
        match self.grid.iter().position(|&g| g > x) {
            Some(0) => T::zero(),
            Some(i) => {
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let (y0, y1) = (self.values[i - 1], self.values[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            None => self.values.last().copied().unwrap_or_else(T::zero),
        }
    }

    /// Smallest tabulated abscissa, refined linearly, where the curve reaches `rho`.
    pub fn percentile(&self, rho: T) -> Option<T> {
        let i = self.values.iter().position(|&v| v >= rho)?;
        if i == 0 {
            return Some(self.grid[0]);
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        if y1 == y0 {
            return Some(x1);
        }
        Some(x0 + (x1 - x0) * (rho - y0) / (y1 - y0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn exponential(s: C) -> Result<C> {
        Ok(C::new(1.0, 0.0) / (C::new(1.0, 0.0) + s))
    }

    fn gamma2(s: C) -> Result<C> {
        let d = C::new(1.0, 0.0) + s;
        Ok(C::new(1.0, 0.0) / (d * d))
    }

    #[test]
    fn exponential_cdf() {
        let q = QuadratureConfig::default();
        let f = cdf_from_laplace(&exponential, 1.0, &q).unwrap();
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-4, "{f}");
    }

    #[test]
    fn gamma2_cdf() {
        let q = QuadratureConfig::default();
        let f = cdf_from_laplace(&gamma2, 1.0, &q).unwrap();
        assert!((f - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-4, "{f}");
    }

    #[test]
    fn far_left_tail_of_a_wide_law() {
        let q = QuadratureConfig::default();
        let lt = |s: C| Ok(C::new(1.0, 0.0) / (C::new(1.0, 0.0) + s * 1e3));
        for w in [1e-6, 1e-3, 1.0] {
            let f = cdf_from_laplace(&lt, w, &q).unwrap();
            assert!((f - (1.0 - (-w / 1e3f64).exp())).abs() < 1e-4, "{w}: {f}");
        }
    }

    #[test]
    fn point_mass() {
        let q = QuadratureConfig::default();
        let c = 1.5;
        let lt = move |s: C| Ok((-s * c).exp());
        let above = cdf_from_laplace(&lt, 2.0 * c, &q).unwrap();
        let below = cdf_from_laplace(&lt, 0.5 * c, &q).unwrap();
        assert!(above > 1.0 - 1e-4, "{above}");
        assert!(below < 1e-4, "{below}");
        // The step itself is ill-posed; a sharply concentrated Gamma law stands in.
        let k = 400.0;
        let narrow = move |s: C| Ok((C::new(1.0, 0.0) + s * (c / k)).powf(-k));
        let p = percentile_from_laplace(&narrow, 0.5, 1.0, &q).unwrap();
        assert!((p - c).abs() < 0.01 * c, "{p}");
    }

    #[test]
    fn step_percentile_hits_budget() {
        let q = QuadratureConfig { max_tail_pieces: 10_000, ..QuadratureConfig::default() };
        let lt = |s: C| Ok((-s * 1.5).exp());
        assert!(matches!(cdf_from_laplace(&lt, 1.5001, &q), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn quantiles() {
        let q = QuadratureConfig::default();
        let p = percentile_from_laplace(&exponential, 0.95, 1.0, &q).unwrap();
        assert!((p - 0.05f64.ln().abs()).abs() < 1e-3, "{p}");
        let p = percentile_from_laplace(&gamma2, 0.95, 1.0, &q).unwrap();
        assert!((p - 4.743_864_518_373_97).abs() < 1e-3, "{p}");
    }

    #[test]
    fn negative_argument_is_zero() {
        let q = QuadratureConfig::default();
        assert_eq!(cdf_from_laplace(&exponential, -1.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn broken_transform_is_rejected() {
        // Not a Laplace transform of a probability law: L(0) = 3.
        let q = QuadratureConfig::default();
        let bad = |s: C| Ok(C::new(3.0, 0.0) / (C::new(1.0, 0.0) + s));
        assert!(matches!(cdf_from_laplace(&bad, 3.0, &q), Err(Error::CdfOutOfRange { .. })));
    }

    #[test]
    fn errors_inside_the_transform_propagate() {
        let q = QuadratureConfig::default();
        let failing = |_: C| -> Result<C> { Err(Error::NonConvergence("inner".into())) };
        assert!(matches!(cdf_from_laplace(&failing, 1.0, &q), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn bracket_failure() {
        let q = QuadratureConfig { max_bracket_expansions: 3, ..QuadratureConfig::default() };
        let r = invert_monotone(|_| Ok(0.0), 0.5, 1.0, &q);
        assert!(matches!(r, Err(Error::BracketFailure(_))));
        assert!(invert_monotone(|_| Ok(0.0), 1.5, 1.0, &q).is_err());
    }

    #[test]
    fn curve_repair_and_percentile() {
        let mut c = CdfCurve { grid: vec![0.0, 1.0, 2.0, 3.0], values: vec![-0.01, 0.5, 0.49, 1.01] };
        c.repair();
        assert_eq!(c.values, vec![0.0, 0.5, 0.5, 1.0]);
        assert!(c.is_monotone());
        assert_eq!(c.percentile(0.75), Some(2.5));
        assert_eq!(c.value_at(-1.0), 0.0);
        assert_eq!(c.value_at(0.5), 0.25);
        assert_eq!(c.value_at(10.0), 1.0);
    }

    #[test]
    fn f32_inversion() {
        let q: QuadratureConfig<f32> = QuadratureConfig {
            tail_tolerance: 1e-4,
            cdf_tolerance: 1e-3,
            ..QuadratureConfig::default()
        };
        let lt = |s: Complex<f32>| Ok(Complex::new(1.0f32, 0.0) / (Complex::new(1.0, 0.0) + s));
        let f = cdf_from_laplace(&lt, 1.0f32, &q).unwrap();
        assert!((f - 0.632_12).abs() < 2e-3, "{f}");
    }
}
