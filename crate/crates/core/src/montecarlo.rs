//! Independent simulator: draws network realizations and returns empirical
//! samples of exposure and coverage indicators.
//!
//! Every realization `i` owns the ChaCha8 stream `i` of the run seed, so the
//! sorted sample set does not depend on the number of worker threads.
//!
//! Downlink exposure and coverage carve a Poisson hole process explicitly.
//! An `OutsideHole` user is the typical point of the plane, an `InsideHole`
//! user gets one extra hole pinned at the origin. Uplink exposure and the exposure
//! index draw the serving distance from the contact law and put a PPP of
//! intensity `λ_B` beyond it, which is the model the analytic side uses.
//!
//! The field beyond the simulation window enters through its mean. The
//! window is sized so that the standard deviation of that neglected part
//! stays under 1% of the median; a run whose samples break the bound fails
//! with [`Error::WindowTooSmall`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::downlink::dl_received_power_mean;
use crate::error::{Error, Result};
use crate::fading::sample_gain;
use crate::joint::ei_uplink_term;
use crate::model::{NetworkModel, UserLocation};
use crate::numerics::CdfCurve;
use crate::point_process::{carve_php, poisson_count, sample_contact_distance, sample_ppp, PointPattern};
use crate::scalar::Scalar;
use crate::uplink::{device_density_factor, ul_received_power_mean, ul_transmit_power};

/// Mass of the contact law allowed beyond the window.
const CONTACT_TRUNCATION: f64 = 1e-6;
/// Bound on the neglected far-field standard deviation, relative to the median.
const TAIL_SHARE: f64 = 0.01;
/// Largest expected number of baseline points per realization.
const MAX_WINDOW_POINTS: f64 = 2e6;

/// Run settings shared by every simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    /// Overrides the automatic window radius (m).
    pub window_radius: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { seed: 1, threads: 0, window_radius: None }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }
}

/// What produced a [`SampleSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta<T> {
    pub model: NetworkModel<T>,
    pub location: UserLocation,
    pub realizations: usize,
    pub window_radius: T,
    pub seed: u64,
}

/// Sorted empirical samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    pub values: Vec<T>,
    pub meta: SampleMeta<T>,
}

impl<T: Scalar> SampleSet<T> {
    fn new(mut values: Vec<T>, meta: SampleMeta<T>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Self { values, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a + v) / T::from_usize_lossy(self.len())
    }

    pub fn median(&self) -> T {
        empirical_percentile(&self.values, T::lit(0.5))
    }

    pub fn percentile(&self, rho: T) -> T {
        empirical_percentile(&self.values, rho)
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf_at(&self, x: T) -> T {
        let k = self.values.partition_point(|&v| v <= x);
        T::from_usize_lossy(k) / T::from_usize_lossy(self.len())
    }

    pub fn cdf_curve(&self) -> CdfCurve<T> {
        empirical_cdf(&self.values)
    }
}

/// Right-continuous step CDF of sorted `values`, one node per distinct value.
pub fn empirical_cdf<T: Scalar>(values: &[T]) -> CdfCurve<T> {
    let n = T::from_usize_lossy(values.len());
    let mut grid: Vec<T> = Vec::new();
    let mut probs: Vec<T> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let p = T::from_usize_lossy(i + 1) / n;
        if grid.last() == Some(&v) {
            *probs.last_mut().expect("paired with grid") = p;
        } else {
            grid.push(v);
            probs.push(p);
        }
    }
    CdfCurve { grid, values: probs }
}

/// Order statistic `ceil(ρn)` of sorted `values`.
pub fn empirical_percentile<T: Scalar>(values: &[T], rho: T) -> T {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let n = values.len();
    let k = (rho * T::from_usize_lossy(n)).ceil().to_usize().unwrap_or(0).clamp(1, n);
    values[k - 1]
}

/// Kolmogorov-Smirnov distance between sorted samples and `cdf`.
///
/// With `points` below the sample size the analytic CDF is evaluated only at
/// that many evenly spaced order statistics, which keeps expensive CDFs cheap.
pub fn ks_statistic<T, F>(values: &[T], cdf: F, points: usize) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Result<T> + Sync,
{
    let n = values.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let nt = T::from_usize_lossy(n);
    let picks: Vec<usize> = if points == 0 || points >= n {
        (0..n).collect()
    } else {
        let mut idx: Vec<usize> = (0..points).map(|k| ((k as f64 + 0.5) / points as f64 * n as f64) as usize).collect();
        idx.dedup();
        idx
    };
    let gaps = picks
        .par_iter()
        .map(|&i| {
            let x = values[i];
            let f = cdf(x)?;
            let below = values.partition_point(|&v| v < x);
            let upto = values.partition_point(|&v| v <= x);
            let lo = T::from_usize_lossy(below) / nt;
            let hi = T::from_usize_lossy(upto) / nt;
            Ok((f - lo).abs().max((f - hi).abs()))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(gaps.into_iter().fold(T::zero(), T::max))
}

/// Mean of the downlink field beyond `window`, `2πλ_B c window^{2-β} / (β-2)`.
pub fn tail_mean<T: Scalar>(model: &NetworkModel<T>, window: T) -> T {
    let beta = model.downlink.beta;
    let two = T::lit(2.0);
    two * T::PI() * model.lambda_bs() * model.downlink.density_coefficient() * window.powf(two - beta) / (beta - two)
}

/// Standard deviation of the downlink field beyond `window`.
pub fn tail_sd<T: Scalar>(model: &NetworkModel<T>, window: T) -> T {
    let beta = model.downlink.beta;
    let two = T::lit(2.0);
    let mt = T::from_u32(model.nakagami_m()).expect("u32");
    let second_moment = (mt + T::one()) / mt;
    let c = model.downlink.density_coefficient();
    let var = two * T::PI() * model.lambda_bs() * c * c * second_moment * window.powf(two - two * beta) / (two * beta - two);
    var.sqrt()
}

/// Window radius covering all but [`CONTACT_TRUNCATION`] of the contact law.
pub fn contact_window<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation) -> T {
    let v = loc.support_start(model.point_process.hole_radius);
    let lambda = model.lambda_bs();
    v + (-T::lit(CONTACT_TRUNCATION).ln() / (T::PI() * lambda)).sqrt()
}

/// Window radius for exposure runs: the contact window, widened until the
/// neglected far field has a standard deviation below 1% of the mean field
/// beyond the typical contact distance, a lower proxy for the median.
pub fn exposure_window<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation) -> T {
    let v = loc.support_start(model.point_process.hole_radius);
    let lambda = model.lambda_bs();
    let beta = model.downlink.beta;
    let typical = v + (T::LN_2() / (T::PI() * lambda)).sqrt();
    let target = T::lit(TAIL_SHARE) * tail_mean(model, typical);
    // tail_sd(w) = tail_sd(1) · w^{1-β}
    let sized = (tail_sd(model, T::one()) / target).powf(T::one() / (beta - T::one()));
    sized.max(contact_window(model, loc))
}

fn check_model<T: Scalar>(model: &NetworkModel<T>) -> Result<bool> {
    if model.point_process.lambda_b == T::zero() {
        return Ok(false);
    }
    model.validate()?;
    if model.downlink.beta <= T::lit(2.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("the field sum needs an exposure exponent above 2, got {}", model.downlink.beta),
        });
    }
    Ok(true)
}

fn pick_window<T: Scalar>(cfg: &McConfig, auto: T) -> Result<T> {
    let w = cfg.window_radius.map(T::lit).unwrap_or(auto);
    if !(w > T::zero() && w.is_finite()) {
        return Err(Error::InvalidParameter { name: "window_radius", reason: format!("must be positive, got {w}") });
    }
    Ok(w)
}

fn check_budget<T: Scalar>(model: &NetworkModel<T>, window: T) -> Result<()> {
    let expected = model.point_process.lambda_b.as_f64() * std::f64::consts::PI * window.as_f64().powi(2);
    if expected > MAX_WINDOW_POINTS {
        return Err(Error::WindowTooSmall(format!(
            "a {window:.1} m window would hold {expected:.3e} base stations per realization"
        )));
    }
    Ok(())
}

/// Fails when the neglected far field is too wide relative to the sample median.
fn check_tail<T: Scalar>(samples: &SampleSet<T>, sd: T) -> Result<()> {
    let median = samples.median();
    if sd > T::lit(TAIL_SHARE) * median {
        return Err(Error::WindowTooSmall(format!(
            "far-field standard deviation {sd:e} exceeds 1% of the sample median {median:e} at window {}",
            samples.meta.window_radius
        )));
    }
    Ok(())
}

/// Evaluates `f` once per realization, each on its own RNG stream, in index order.
fn run_realizations<T, F>(n: usize, cfg: &McConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidParameter { name: "realizations", reason: "need at least one".into() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidParameter { name: "threads", reason: e.to_string() })?;
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                f(&mut rng)
            })
            .collect()
    })
}

/// Retained BSs of one PHP realization seen from the user at the origin.
fn sample_php<T: Scalar, R: Rng + ?Sized>(
    model: &NetworkModel<T>,
    loc: UserLocation,
    window: T,
    rng: &mut R,
) -> Result<PointPattern<T>> {
    let pp = &model.point_process;
    let r = pp.hole_radius;
    let mut holes = sample_ppp(pp.lambda_r, window + r, rng)?;
    if loc == UserLocation::InsideHole {
        holes.points.push([T::zero(), T::zero()]);
    }
    let baseline = sample_ppp(pp.lambda_b, window, rng)?;
    carve_php(&baseline, &holes, r)
}

/// Sum of faded power densities from the given BS distances.
fn field_sum<T: Scalar, R: Rng + ?Sized>(distances: impl Iterator<Item = T>, model: &NetworkModel<T>, rng: &mut R) -> T {
    let c = model.downlink.density_coefficient();
    let beta = model.downlink.beta;
    let m = model.nakagami_m();
    distances.fold(T::zero(), |acc, x| acc + c * sample_gain::<T, _>(m, rng).0 * x.powf(-beta))
}

/// PPP distances in the annulus `inner < x < outer` at intensity `lambda`.
fn annulus_distances<T: Scalar, R: Rng + ?Sized>(lambda: T, inner: T, outer: T, rng: &mut R) -> Vec<T> {
    let (a2, b2) = ((inner * inner).as_f64(), (outer * outer).as_f64());
    let n = poisson_count(lambda.as_f64() * std::f64::consts::PI * (b2 - a2), rng);
    (0..n).map(|_| T::lit((a2 + rng.random::<f64>() * (b2 - a2)).sqrt())).collect()
}

fn meta<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, window: T, cfg: &McConfig) -> SampleMeta<T> {
    SampleMeta { model: *model, location: loc, realizations: n, window_radius: window, seed: cfg.seed }
}

/// Downlink power density at the user, one value per PHP realization.
pub fn simulate_dl_exposure<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, cfg: &McConfig) -> Result<SampleSet<T>> {
    if !check_model(model)? {
        let window = pick_window(cfg, T::one())?;
        let values = run_realizations(n, cfg, |_| Ok(T::zero()))?;
        return Ok(SampleSet::new(values, meta(model, loc, n, window, cfg)));
    }
    let window = pick_window(cfg, exposure_window(model, loc))?;
    check_budget(model, window)?;
    let correction = tail_mean(model, window);
    let values = run_realizations(n, cfg, |rng| {
        let bs = sample_php(model, loc, window, rng)?;
        Ok(field_sum(bs.distances(), model, rng) + correction)
    })?;
    let samples = SampleSet::new(values, meta(model, loc, n, window, cfg));
    check_tail(&samples, tail_sd(model, window))?;
    Ok(samples)
}

/// Power density from the user's own device.
pub fn simulate_ul_exposure<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, cfg: &McConfig) -> Result<SampleSet<T>> {
    model.validate()?;
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let k = device_density_factor(model);
    let m = model.nakagami_m();
    let values = run_realizations(n, cfg, |rng| {
        let x0 = sample_contact_distance(lambda, r, loc, rng);
        Ok(ul_transmit_power(x0, model) * k * sample_gain::<T, _>(m, rng).0)
    })?;
    Ok(SampleSet::new(values, meta(model, loc, n, T::infinity(), cfg)))
}

/// Exposure index: uplink term, faded serving BS at the contact distance and
/// the PPP field beyond it.
pub fn simulate_ei<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, cfg: &McConfig) -> Result<SampleSet<T>> {
    check_model(model)?;
    let window = pick_window(cfg, exposure_window(model, loc))?;
    check_budget(model, window)?;
    let samples = ei_realizations(model, loc, n, window, cfg)?;
    check_tail(&samples, model.sar.sar_dl * tail_sd(model, window))?;
    Ok(samples)
}

/// Exposure-index samples, each paired with its uplink term before sorting.
fn ei_pairs<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, window: T, cfg: &McConfig) -> Result<Vec<(T, T)>> {
    let lambda = model.lambda_bs();
    let r = model.point_process.hole_radius;
    let c = model.downlink.density_coefficient();
    let beta = model.downlink.beta;
    let m = model.nakagami_m();
    let sar_dl = model.sar.sar_dl;
    run_realizations(n, cfg, |rng| {
        let x0 = sample_contact_distance(lambda, r, loc, rng);
        let uplink = ei_uplink_term(x0, model);
        let serving = c * sample_gain::<T, _>(m, rng).0 * x0.powf(-beta);
        let outer = window.max(x0);
        let others = field_sum(annulus_distances(lambda, x0, outer, rng).into_iter(), model, rng);
        Ok((uplink, uplink + sar_dl * (serving + others + tail_mean(model, outer))))
    })
}

fn ei_realizations<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, n: usize, window: T, cfg: &McConfig) -> Result<SampleSet<T>> {
    let values = ei_pairs(model, loc, n, window, cfg)?.into_iter().map(|(_, ei)| ei).collect();
    Ok(SampleSet::new(values, meta(model, loc, n, window, cfg)))
}

/// Per-realization `(uplink term, exposure index)` pairs in realization order.
pub fn simulate_ei_with_uplink<T: Scalar>(
    model: &NetworkModel<T>,
    loc: UserLocation,
    n: usize,
    cfg: &McConfig,
) -> Result<Vec<(T, T)>> {
    check_model(model)?;
    let window = pick_window(cfg, exposure_window(model, loc))?;
    ei_pairs(model, loc, n, window, cfg)
}

/// Which link a coverage run tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Downlink,
    Uplink,
}

/// Fraction of PHP realizations whose SNR to the nearest retained BS exceeds the threshold.
pub fn simulate_coverage<T: Scalar>(model: &NetworkModel<T>, loc: UserLocation, link: Link, n: usize, cfg: &McConfig) -> Result<T> {
    model.validate()?;
    let window = pick_window(cfg, contact_window(model, loc))?;
    check_budget(model, window)?;
    let m = model.nakagami_m();
    let ul = &model.uplink;
    let dl = &model.downlink;
    let hits = run_realizations(n, cfg, |rng| {
        let bs = sample_php(model, loc, window, rng)?;
        let gain = sample_gain::<T, _>(m, rng).0;
        let Some(x0) = bs.distances().fold(None, |best: Option<T>, x| Some(best.map_or(x, |b| b.min(x)))) else {
            return Ok(false);
        };
        let covered = match link {
            Link::Downlink => dl_received_power_mean(x0, model) * gain / dl.noise_power > dl.snr_threshold,
            Link::Uplink => ul_received_power_mean(x0, model) * gain / ul.noise_power > ul.snr_threshold,
        };
        Ok(covered)
    })?;
    let count = hits.iter().filter(|&&h| h).count();
    Ok(T::from_usize_lossy(count) / T::from_usize_lossy(n))
}

/// Outcome of the retention experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetentionReport<T> {
    /// Retained over baseline BS counts, pooled over realizations.
    pub empirical: T,
    /// `exp(-λ_r R²)`.
    pub without_pi: T,
    /// `exp(-λ_r π R²)`.
    pub with_pi: T,
    pub realizations: usize,
}

impl<T: Scalar> RetentionReport<T> {
    /// True when the empirical ratio is closer to the `π` form.
    pub fn favours_pi(&self) -> bool {
        (self.empirical - self.with_pi).abs() < (self.empirical - self.without_pi).abs()
    }
}

/// Pools baseline and retained BS counts over `n` PHP realizations in a disk of radius `window`.
pub fn php_retention_ratio<T: Scalar>(model: &NetworkModel<T>, window: T, n: usize, cfg: &McConfig) -> Result<RetentionReport<T>> {
    model.validate()?;
    let pp = &model.point_process;
    let counts = run_realizations(n, cfg, |rng| {
        let holes = sample_ppp(pp.lambda_r, window + pp.hole_radius, rng)?;
        let baseline = sample_ppp(pp.lambda_b, window, rng)?;
        let kept = carve_php(&baseline, &holes, pp.hole_radius)?;
        Ok((baseline.len(), kept.len()))
    })?;
    let (total, kept) = counts.iter().fold((0usize, 0usize), |(a, b), &(t, k)| (a + t, b + k));
    let r2 = pp.hole_radius * pp.hole_radius;
    Ok(RetentionReport {
        empirical: if total == 0 { T::zero() } else { T::from_usize_lossy(kept) / T::from_usize_lossy(total) },
        without_pi: (-pp.lambda_r * r2).exp(),
        with_pi: (-pp.lambda_r * T::PI() * r2).exp(),
        realizations: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> McConfig {
        McConfig::with_seed(seed)
    }

    #[test]
    fn zero_density_gives_zero_exposure() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.lambda_b = 0.0;
        let s = simulate_dl_exposure(&model, UserLocation::OutsideHole, 50, &cfg(1)).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn percentile_order_statistic() {
        let grid: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_percentile(&grid, 0.95), 95.0);
        assert_eq!(empirical_percentile(&grid, 0.0), 1.0);
        assert_eq!(empirical_percentile(&grid, 1.0), 100.0);
        let flat = vec![2.5; 7];
        for rho in [0.1, 0.5, 0.99] {
            assert_eq!(empirical_percentile(&flat, rho), 2.5);
        }
        let c = empirical_cdf(&flat);
        assert_eq!(c.grid, vec![2.5]);
        assert_eq!(c.values, vec![1.0]);
    }

    #[test]
    fn exponential_quantile() {
        let n = 1_000_000;
        let values = run_realizations(n, &cfg(3), |rng| Ok(-(1.0 - rng.random::<f64>()).ln())).unwrap();
        let mut sorted = values;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Quantile sd ≈ sqrt(ρ(1-ρ)/n)/f(q) = 0.0044.
        let q = empirical_percentile(&sorted, 0.95);
        assert!((q - 20f64.ln()).abs() < 0.02, "{q}");
    }

    #[test]
    fn streams_independent_of_thread_count() {
        let model = NetworkModel::<f64>::worst_case();
        let a = simulate_dl_exposure(&model, UserLocation::InsideHole, 300, &cfg(9).threads(1)).unwrap();
        let b = simulate_dl_exposure(&model, UserLocation::InsideHole, 300, &cfg(9).threads(4)).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_dl_exposure(&model, UserLocation::InsideHole, 300, &cfg(10)).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn mean_matches_campbell() {
        // PPP field mean beyond v: 2πλ c v^{2-β}/(β-2), with no holes to remove.
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.lambda_r = 1e-12;
        model.point_process.hole_radius = 100.0;
        let n = 100_000;
        let loc = UserLocation::InsideHole;
        let s = simulate_dl_exposure(&model, loc, n, &cfg(2)).unwrap();
        let expected = tail_mean(&model, 100.0);
        assert!((s.mean() / expected - 1.0).abs() < 0.02, "{} vs {expected}", s.mean());
    }

    #[test]
    fn uplink_collapses_without_compensation() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.uplink.epsilon = 1e-9;
        let k = device_density_factor(&model);
        let pairs = run_realizations(2000, &cfg(4), |rng| {
            let x0 = sample_contact_distance(model.lambda_bs(), 50.0, UserLocation::InsideHole, rng);
            Ok(ul_transmit_power(x0, &model) * k)
        })
        .unwrap();
        let expected = model.uplink.pu_coeff * k;
        assert!(pairs.iter().all(|&w| (w / expected - 1.0).abs() < 1e-6));
    }

    #[test]
    fn index_dominates_uplink_term() {
        let model = NetworkModel::<f64>::worst_case();
        let pairs = simulate_ei_with_uplink(&model, UserLocation::OutsideHole, 2000, &cfg(5)).unwrap();
        assert!(pairs.iter().all(|&(ul, ei)| ei >= ul));
    }

    #[test]
    fn coverage_with_vanishing_threshold() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.downlink.snr_threshold = 1e-9;
        model.uplink.snr_threshold = 1e-9;
        for link in [Link::Downlink, Link::Uplink] {
            let p = simulate_coverage(&model, UserLocation::OutsideHole, link, 2000, &cfg(6)).unwrap();
            assert!(p > 0.999, "{link:?} {p}");
        }
    }

    #[test]
    fn retention_distinguishes_forms() {
        let mut model = NetworkModel::<f64>::worst_case();
        model.point_process.hole_radius = 200.0;
        let report = php_retention_ratio(&model, 2000.0, 500, &cfg(8)).unwrap();
        assert!((report.without_pi - 0.9608).abs() < 1e-4);
        assert!((report.with_pi - 0.8819).abs() < 1e-4);
        assert!(report.favours_pi(), "{report:?}");
    }

    #[test]
    fn ks_of_matching_law_is_small() {
        let mut values = run_realizations(20_000, &cfg(12), |rng| Ok(-(1.0 - rng.random::<f64>()).ln())).unwrap();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let exact = |x: f64| Ok(1.0 - (-x).exp());
        let full = ks_statistic(&values, exact, 0).unwrap();
        let coarse = ks_statistic(&values, exact, 400).unwrap();
        assert!(full < 0.015, "{full}");
        assert!(coarse <= full + 1e-12);
        let shifted = ks_statistic(&values, |x: f64| Ok(1.0 - (-x / 1.2).exp()), 0).unwrap();
        assert!(shifted > 0.05);
    }

    #[test]
    fn rejects_narrow_window() {
        let model = NetworkModel::<f64>::worst_case();
        let narrow = McConfig { window_radius: Some(300.0), ..cfg(1) };
        let err = simulate_dl_exposure(&model, UserLocation::OutsideHole, 200, &narrow).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall(_)), "{err}");
    }
}
