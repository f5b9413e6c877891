//! Deployment problems: the largest baseline density whose downlink exposure
//! percentile stays compliant, and the density or hole radius minimising an
//! exposure-index percentile.

use rayon::prelude::*;

use crate::downlink::{dl_coverage, dl_exposure_percentile};
use crate::error::{Error, Result};
use crate::joint::ei_percentile;
use crate::model::{NetworkModel, UserLocation};
use crate::numerics::QuadratureConfig;
use crate::scalar::Scalar;

/// Points of the monotonicity pre-check.
const MONOTONE_POINTS: usize = 5;
/// Points of the unimodality pre-grid.
const PRE_GRID_POINTS: usize = 9;
/// Default relative tolerance of the minimiser search.
pub const GOLDEN_TOLERANCE: f64 = 0.02;

/// Search interval with a relative tolerance on the parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBracket<T> {
    pub lo: T,
    pub hi: T,
    pub tolerance: T,
}

impl<T: Scalar> SearchBracket<T> {
    pub fn new(lo: T, hi: T, tolerance: T) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter { name: "bracket", reason: format!("need lo < hi, got [{lo}, {hi}]") });
        }
        if !(tolerance > T::zero()) {
            return Err(Error::InvalidParameter { name: "tolerance", reason: format!("must be positive, got {tolerance}") });
        }
        Ok(Self { lo, hi, tolerance })
    }

    /// `count` points from `lo` to `hi`, geometric when `lo > 0`.
    pub fn grid(&self, count: usize) -> Vec<T> {
        let last = T::from_usize_lossy(count.max(2) - 1);
        (0..count.max(2))
            .map(|i| {
                let t = T::from_usize_lossy(i) / last;
                if i + 1 == count.max(2) {
                    self.hi
                } else if self.lo > T::zero() {
                    self.lo * (self.hi / self.lo).powf(t)
                } else {
                    self.lo + (self.hi - self.lo) * t
                }
            })
            .collect()
    }

    fn mid(&self, a: T, b: T) -> T {
        if a > T::zero() {
            (a * b).sqrt()
        } else {
            (a + b) * T::lit(0.5)
        }
    }
}

fn converged<T: Scalar>(a: T, b: T, tol: T) -> bool {
    if a > T::zero() {
        b / a - T::one() <= tol
    } else {
        b - a <= tol * b.abs().max(T::one())
    }
}

/// Result of the compliance-constrained density search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op1Solution<T> {
    pub lambda_b: T,
    /// Downlink exposure percentile at the returned density.
    pub percentile: T,
    pub coverage: T,
    /// `w_max` minus the percentile.
    pub slack: T,
    /// Even the top of the bracket complies.
    pub unconstrained: bool,
}

fn with_lambda_b<T: Scalar>(model: &NetworkModel<T>, lambda_b: T) -> NetworkModel<T> {
    let mut m = *model;
    m.point_process.lambda_b = lambda_b;
    m
}

/// Largest baseline density in the bracket whose `rho`-percentile of downlink
/// exposure stays at or below `w_max`.
///
/// The percentile grows with the density, which a 5-point pre-check
/// confirms, so the feasible set is an interval and bisection on a log scale
/// finds its end.
pub fn solve_op1<T: Scalar>(
    model: &NetworkModel<T>,
    w_max: T,
    rho: T,
    loc: UserLocation,
    bracket: SearchBracket<T>,
    quad: &QuadratureConfig<T>,
) -> Result<Op1Solution<T>> {
    let percentile = |lambda_b: T| dl_exposure_percentile(rho, &with_lambda_b(model, lambda_b), loc, quad);
    let finish = |lambda_b: T, p: T, unconstrained: bool| -> Result<Op1Solution<T>> {
        Ok(Op1Solution {
            lambda_b,
            percentile: p,
            coverage: dl_coverage(&with_lambda_b(model, lambda_b), loc, quad)?,
            slack: w_max - p,
            unconstrained,
        })
    };
    if w_max.is_infinite() && w_max > T::zero() {
        let p = percentile(bracket.hi)?;
        return finish(bracket.hi, p, true);
    }
    let grid = bracket.grid(MONOTONE_POINTS);
    let values = grid.iter().map(|&x| percentile(x)).collect::<Result<Vec<_>>>()?;
    if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::NotMonotone(format!(
            "exposure percentile drops from {} at λ_b = {} to {} at λ_b = {}",
            values[k],
            grid[k],
            values[k + 1],
            grid[k + 1]
        )));
    }
    let (p_lo, p_hi) = (values[0], values[MONOTONE_POINTS - 1]);
    if p_lo > w_max {
        return Err(Error::Infeasible(format!("percentile {p_lo} at λ_b = {} already exceeds {w_max}", bracket.lo)));
    }
    if p_hi <= w_max {
        return finish(bracket.hi, p_hi, true);
    }
    // Narrow to the grid cell holding the crossing before bisecting.
    let k = values.iter().position(|&p| p > w_max).expect("top of the grid violates");
    let (mut a, mut b) = (grid[k - 1], grid[k]);
    let mut p_a = values[k - 1];
    while !converged(a, b, bracket.tolerance) {
        let mid = bracket.mid(a, b);
        let p = percentile(mid)?;
        if p <= w_max {
            a = mid;
            p_a = p;
        } else {
            b = mid;
        }
    }
    finish(a, p_a, false)
}

/// Parameter searched by [`solve_op3`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op3Parameter {
    LambdaB,
    HoleRadius,
}

impl Op3Parameter {
    pub fn label(self) -> &'static str {
        match self {
            Op3Parameter::LambdaB => "lambda_b",
            Op3Parameter::HoleRadius => "R",
        }
    }

    fn apply<T: Scalar>(self, model: &NetworkModel<T>, value: T) -> NetworkModel<T> {
        let mut m = *model;
        match self {
            Op3Parameter::LambdaB => m.point_process.lambda_b = value,
            Op3Parameter::HoleRadius => m.point_process.hole_radius = value,
        }
        m
    }
}

impl std::str::FromStr for Op3Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lambda_b" | "lambda-b" | "density" => Ok(Op3Parameter::LambdaB),
            "r" | "radius" | "hole_radius" => Ok(Op3Parameter::HoleRadius),
            other => Err(Error::InvalidParameter { name: "param", reason: format!("expected lambda_b or R, got `{other}`") }),
        }
    }
}

/// Why the pre-grid distrusts the golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodalityWarning {
    /// Local minima seen on the pre-grid.
    pub local_minima: usize,
    /// The objective is constant over the pre-grid.
    pub flat: bool,
}

/// Result of the percentile minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Op3Solution<T> {
    pub argmin: T,
    pub objective: T,
    pub warning: Option<UnimodalityWarning>,
    /// Every `(parameter, objective)` pair evaluated, sorted by parameter.
    pub evaluations: Vec<(T, T)>,
}

/// Minimises the `rho`-percentile of the exposure index over one parameter.
///
/// A 9-point pre-grid (geometric when the bracket is positive) is evaluated
/// first. A single interior or boundary minimum is refined by golden section
/// on the log of the parameter between its grid neighbours. Otherwise the
/// best grid point is returned with a [`UnimodalityWarning`].
pub fn solve_op3<T: Scalar>(
    model: &NetworkModel<T>,
    rho: T,
    param: Op3Parameter,
    loc: UserLocation,
    bracket: SearchBracket<T>,
    quad: &QuadratureConfig<T>,
) -> Result<Op3Solution<T>> {
    let objective = |x: T| ei_percentile(rho, &param.apply(model, x), loc, quad);
    minimise(objective, bracket)
}

/// Pre-grid plus golden section for a scalar objective; see [`solve_op3`].
pub fn minimise<T, F>(objective: F, bracket: SearchBracket<T>) -> Result<Op3Solution<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<T> + Sync,
{
    let grid = bracket.grid(PRE_GRID_POINTS);
    let values = grid.par_iter().map(|&x| objective(x)).collect::<Result<Vec<_>>>()?;
    let mut evaluations: Vec<(T, T)> = grid.iter().copied().zip(values.iter().copied()).collect();

    let top = values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let low = values.iter().copied().fold(T::infinity(), T::min);
    let high = values.iter().copied().fold(T::neg_infinity(), T::max);
    let flat = high - low <= T::lit(1e-12) * top;
    let minima = local_minima(&values);
    let best = (0..values.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    if flat || minima != 1 {
        return Ok(Op3Solution {
            argmin: grid[best],
            objective: values[best],
            warning: Some(UnimodalityWarning { local_minima: minima, flat }),
            evaluations,
        });
    }

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let log_scale = a > T::zero();
    let (to, from) = (
        move |x: T| if log_scale { x.ln() } else { x },
        move |u: T| if log_scale { u.exp() } else { u },
    );
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut lo, mut hi) = (to(a), to(b));
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = objective(from(c))?;
    let mut fd = objective(from(d))?;
    evaluations.push((from(c), fc));
    evaluations.push((from(d), fd));
    while !converged(from(lo), from(hi), bracket.tolerance) {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(from(c))?;
            evaluations.push((from(c), fc));
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(from(d))?;
            evaluations.push((from(d), fd));
        }
    }
    evaluations.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let (argmin, value) = evaluations
        .iter()
        .copied()
        .fold((grid[best], values[best]), |acc, e| if e.1 < acc.1 { e } else { acc });
    Ok(Op3Solution { argmin, objective: value, warning: None, evaluations })
}

/// Relative rise a pre-grid minimum needs on both sides to count as distinct.
const PROMINENCE: f64 = 0.01;

/// Local minima of a sampled curve, endpoints included, that rise by at
/// least [`PROMINENCE`] before reaching a lower value on either side.
fn local_minima<T: Scalar>(values: &[T]) -> usize {
    let n = values.len();
    let rise = |i: usize, side: &mut dyn Iterator<Item = usize>| -> T {
        let mut peak = values[i];
        for j in side {
            if values[j] < values[i] {
                return peak - values[i];
            }
            peak = peak.max(values[j]);
        }
        // No lower value on this side: only the other side can disqualify.
        T::infinity()
    };
    (0..n)
        .filter(|&i| {
            let strict = (i == 0 || values[i] < values[i - 1]) && (i + 1 == n || values[i] < values[i + 1]);
            if !strict {
                return false;
            }
            let need = T::lit(PROMINENCE) * values[i].abs();
            let left = rise(i, &mut (0..i).rev());
            let right = rise(i, &mut (i + 1..n));
            left.min(right) >= need
        })
        .count()
}
