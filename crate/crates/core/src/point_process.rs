//! Poisson and Poisson-hole point patterns on disks, and the contact-distance law.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::model::UserLocation;
use crate::scalar::Scalar;

/// Points inside a disk of radius `window_radius` centred at the origin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointPattern<T> {
    pub points: Vec<[T; 2]>,
    pub window_radius: T,
}

impl<T: Scalar> PointPattern<T> {
    pub fn new(points: Vec<[T; 2]>, window_radius: T) -> Self {
        Self { points, window_radius }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distances of all points to the origin.
    pub fn distances(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p[0].hypot(p[1]))
    }

    /// Points per unit area.
    pub fn empirical_density(&self) -> T {
        T::from_usize_lossy(self.len()) / (T::PI() * self.window_radius * self.window_radius)
    }
}

/// A point drawn uniformly on the disk of radius `radius`.
pub fn uniform_in_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    [r * theta.cos(), r * theta.sin()]
}

/// Poisson count with mean `mean`; zero for a nonpositive mean.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    // Poisson::new only fails for nonpositive or non-finite means.
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as usize
}

/// Homogeneous PPP of intensity `density` on the disk of radius `window_radius`.
pub fn sample_ppp<T: Scalar, R: Rng + ?Sized>(density: T, window_radius: T, rng: &mut R) -> Result<PointPattern<T>> {
    if !(density >= T::zero() && density.is_finite()) {
        return Err(Error::InvalidParameter { name: "density", reason: format!("must be nonnegative, got {density}") });
    }
    if !(window_radius > T::zero() && window_radius.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "window_radius",
            reason: format!("must be positive, got {window_radius}"),
        });
    }
    let w = window_radius.as_f64();
    let n = poisson_count(density.as_f64() * std::f64::consts::PI * w * w, rng);
    let points = (0..n)
        .map(|_| {
            let [x, y] = uniform_in_disk(w, rng);
            [T::lit(x), T::lit(y)]
        })
        .collect();
    Ok(PointPattern { points, window_radius })
}

/// Uniform hash grid over hole centres for radius queries.
struct HoleGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<[f64; 2]>>,
}

impl HoleGrid {
    fn new(holes: &[[f64; 2]], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<[f64; 2]>> = HashMap::new();
        for &h in holes {
            buckets.entry(Self::key(h, cell)).or_default().push(h);
        }
        Self { cell, buckets }
    }

    fn key(p: [f64; 2], cell: f64) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    fn any_within(&self, p: [f64; 2], radius: f64) -> bool {
        let (kx, ky) = Self::key(p, self.cell);
        let r2 = radius * radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.buckets.get(&(kx + dx, ky + dy)) {
                    if bucket.iter().any(|h| {
                        let (ex, ey) = (h[0] - p[0], h[1] - p[1]);
                        ex * ex + ey * ey < r2
                    }) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Removes every baseline point closer than `hole_radius` to some hole centre.
///
/// The hole window must extend at least `hole_radius` beyond the baseline
/// window so that holes centred just outside still carve.
pub fn carve_php<T: Scalar>(baseline: &PointPattern<T>, holes: &PointPattern<T>, hole_radius: T) -> Result<PointPattern<T>> {
    if !(hole_radius >= T::zero()) {
        return Err(Error::InvalidParameter { name: "hole_radius", reason: format!("must be nonnegative, got {hole_radius}") });
    }
    let needed = baseline.window_radius + hole_radius;
    if holes.window_radius < needed * (T::one() - T::epsilon() * T::lit(16.0)) {
        return Err(Error::WindowMismatch {
            bs_window: baseline.window_radius.as_f64(),
            hole_window: holes.window_radius.as_f64(),
            radius: hole_radius.as_f64(),
        });
    }
    if hole_radius == T::zero() || holes.is_empty() {
        return Ok(baseline.clone());
    }
    let r = hole_radius.as_f64();
    let centres: Vec<[f64; 2]> = holes.points.iter().map(|p| [p[0].as_f64(), p[1].as_f64()]).collect();
    let grid = HoleGrid::new(&centres, r);
    let points = baseline
        .points
        .iter()
        .copied()
        .filter(|p| !grid.any_within([p[0].as_f64(), p[1].as_f64()], r))
        .collect();
    Ok(PointPattern { points, window_radius: baseline.window_radius })
}

/// Density of the distance to the nearest BS under the PPP approximation.
pub fn contact_distance_pdf<T: Scalar>(x: T, lambda_bs: T, hole_radius: T, loc: UserLocation) -> T {
    let v = loc.support_start(hole_radius);
    if x < v || x < T::zero() {
        return T::zero();
    }
    let two_pi_l = T::lit(2.0) * T::PI() * lambda_bs;
    two_pi_l * x * (-lambda_bs * T::PI() * (x * x - v * v)).exp()
}

/// `P(X > x)`.
pub fn contact_distance_survival<T: Scalar>(x: T, lambda_bs: T, hole_radius: T, loc: UserLocation) -> T {
    let v = loc.support_start(hole_radius);
    if x <= v {
        return T::one();
    }
    (-lambda_bs * T::PI() * (x * x - v * v)).exp()
}

pub fn contact_distance_cdf<T: Scalar>(x: T, lambda_bs: T, hole_radius: T, loc: UserLocation) -> T {
    T::one() - contact_distance_survival(x, lambda_bs, hole_radius, loc)
}

/// Inverse of the survival function: the distance with `P(X > x) = u`.
pub fn contact_distance_from_uniform<T: Scalar>(u: T, lambda_bs: T, hole_radius: T, loc: UserLocation) -> T {
    let v = loc.support_start(hole_radius);
    (v * v - u.ln() / (T::PI() * lambda_bs)).sqrt()
}

pub fn sample_contact_distance<T: Scalar, R: Rng + ?Sized>(
    lambda_bs: T,
    hole_radius: T,
    loc: UserLocation,
    rng: &mut R,
) -> T {
    let u = 1.0 - rng.random::<f64>();
    contact_distance_from_uniform(T::lit(u), lambda_bs, hole_radius, loc)
}

/// Writes `x,y,kind` rows for a BS pattern and its hole centres.
pub fn write_pattern_csv<T: Scalar, W: Write>(out: &mut W, bs: &PointPattern<T>, holes: &PointPattern<T>) -> std::io::Result<()> {
    writeln!(out, "x,y,kind")?;
    for p in &bs.points {
        writeln!(out, "{},{},bs", p[0], p[1])?;
    }
    for p in &holes.points {
        writeln!(out, "{},{},hole", p[0], p[1])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{semiinfinite_quadrature, AdaptiveOptions, Tail};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_for_zero_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ppp(0.0, 100.0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn poisson_mean_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 1000;
        let counts: Vec<f64> = (0..draws).map(|_| sample_ppp(1e-5, 1e4, &mut rng).unwrap().len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / draws as f64;
        let expected = std::f64::consts::PI * 1e3;
        let stderr = (expected / draws as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * stderr, "{mean}");
    }

    #[test]
    fn points_inside_window_and_repeatable() {
        let a = sample_ppp(1e-4, 500.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_ppp(1e-4, 500.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.distances().all(|d| d <= 500.0));
    }

    #[test]
    fn carving_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bs = sample_ppp(1e-3, 300.0, &mut rng).unwrap();
        let holes = PointPattern::new(vec![[0.0, 0.0]], 350.0);
        let none = carve_php(&bs, &PointPattern::new(vec![], 300.0), 0.0).unwrap();
        assert_eq!(none, bs);
        let carved = carve_php(&bs, &holes, 50.0).unwrap();
        assert!(carved.distances().all(|d| d >= 50.0));
        let kept = bs.distances().filter(|&d| d >= 50.0).count();
        assert_eq!(carved.len(), kept);
        assert!(matches!(carve_php(&bs, &PointPattern::new(vec![], 320.0), 50.0), Err(Error::WindowMismatch { .. })));
    }

    #[test]
    fn carving_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bs: PointPattern<f64> = sample_ppp(2e-4, 800.0, &mut rng).unwrap();
        let holes = sample_ppp(2e-5, 900.0, &mut rng).unwrap();
        let carved = carve_php(&bs, &holes, 100.0).unwrap();
        let brute: Vec<[f64; 2]> = bs
            .points
            .iter()
            .copied()
            .filter(|p| holes.points.iter().all(|h| (p[0] - h[0]).hypot(p[1] - h[1]) >= 100.0))
            .collect();
        assert_eq!(carved.points, brute);
    }

    #[test]
    fn contact_law_basics() {
        assert_eq!(contact_distance_pdf(0.0, 1e-5, 0.0, UserLocation::OutsideHole), 0.0);
        assert_eq!(contact_distance_pdf(49.0, 1e-5, 50.0, UserLocation::InsideHole), 0.0);
        let lambda = 9.975e-6;
        let median = (std::f64::consts::LN_2 / (std::f64::consts::PI * lambda)).sqrt();
        assert!((median - 148.7).abs() < 0.1);
        assert!((contact_distance_cdf(median, lambda, 0.0, UserLocation::OutsideHole) - 0.5).abs() < 1e-12);
        assert_eq!(contact_distance_from_uniform(1.0, lambda, 0.0, UserLocation::OutsideHole), 0.0);
    }

    #[test]
    fn contact_pdf_normalises() {
        let opts = AdaptiveOptions::new(1e-10, 1e-10);
        for loc in [UserLocation::OutsideHole, UserLocation::InsideHole] {
            let lower = loc.support_start(80.0);
            let mass = semiinfinite_quadrature(|x: f64| contact_distance_pdf(x, 1e-5, 80.0, loc), lower, Tail::Rapid, opts)
                .unwrap();
            assert!((mass.value - 1.0).abs() < 1e-6, "{loc:?}");
        }
        for &x in &[0.0, 10.0, 300.0] {
            assert_eq!(
                contact_distance_pdf(x, 1e-5, 0.0, UserLocation::InsideHole),
                contact_distance_pdf(x, 1e-5, 0.0, UserLocation::OutsideHole)
            );
        }
    }

    #[test]
    fn contact_samples_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for loc in [UserLocation::OutsideHole, UserLocation::InsideHole] {
            let mut xs: Vec<f64> = (0..100_000).map(|_| sample_contact_distance(1e-5, 50.0, loc, &mut rng)).collect();
            if loc == UserLocation::InsideHole {
                assert!(xs.iter().all(|&x| x >= 50.0));
            }
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = xs.len() as f64;
            let ks = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = contact_distance_cdf(x, 1e-5, 50.0, loc);
                    (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
                })
                .fold(0.0, f64::max);
            assert!(ks < 0.01, "{loc:?} {ks}");
        }
    }

    #[test]
    fn csv_dump() {
        let bs = PointPattern::new(vec![[1.0, 2.0]], 10.0);
        let holes = PointPattern::new(vec![[3.0, -4.0]], 20.0);
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &bs, &holes).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,kind\n1,2,bs\n3,-4,hole\n");
    }
}
