use num_complex::Complex;
use proptest::prelude::*;

use emf_php::downlink::{dl_coverage, dl_exposure_cdf, dl_exposure_laplace};
use emf_php::joint::{ei_component_cdf, ei_dl_laplace, ei_laplace, ei_ul_laplace, EiComponent};
use emf_php::montecarlo::{empirical_cdf, empirical_percentile};
use emf_php::numerics::{cdf_from_laplace, integrate, AdaptiveOptions};
use emf_php::point_process::{contact_distance_cdf, contact_distance_pdf, contact_distance_survival};
use emf_php::uplink::{ul_coverage, ul_exposure_cdf, ul_exposure_laplace, ul_transmit_power};
use emf_php::{Model, Quadrature, UserLocation};

fn location() -> impl Strategy<Value = UserLocation> {
    prop_oneof![Just(UserLocation::InsideHole), Just(UserLocation::OutsideHole)]
}

/// Worst-case model with a random density and hole radius.
fn model() -> impl Strategy<Value = Model> {
    (-6.0f64..-3.0, 0.0f64..250.0, any::<bool>()).prop_map(|(log_lb, r, pi)| {
        let mut m = Model::worst_case();
        m.point_process.lambda_b = 10f64.powf(log_lb);
        m.point_process.hole_radius = r;
        m.point_process.php_pi_correction = pi;
        m
    })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn transforms_carry_unit_mass(m in model(), loc in location()) {
        let quad = Quadrature::default();
        // Small enough that s times any mean exposure is far below the tolerance.
        let s = Complex::new(1e-13, 0.0);
        let values = [
            dl_exposure_laplace(s, &m, loc, &quad).unwrap(),
            ul_exposure_laplace(s, &m, loc, &quad).unwrap(),
            ei_laplace(s, &m, loc, &quad).unwrap(),
            ei_ul_laplace(s, &m, loc, &quad).unwrap(),
            ei_dl_laplace(s, &m, loc, &quad).unwrap(),
        ];
        for v in values {
            prop_assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-8, "{v}");
        }
    }

    #[test]
    fn transforms_are_bounded_on_the_right_half_plane(m in model(), loc in location(), re in 0.0f64..1e3, im in -1e3f64..1e3) {
        let quad = Quadrature::default();
        let s = Complex::new(re, im);
        prop_assert!(dl_exposure_laplace(s, &m, loc, &quad).unwrap().norm() <= 1.0 + 1e-9);
        prop_assert!(ul_exposure_laplace(s, &m, loc, &quad).unwrap().norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn contact_density_integrates_to_one(m in model(), loc in location()) {
        let lambda = m.lambda_bs();
        let r = m.point_process.hole_radius;
        let start = loc.support_start(r);
        // Mass beyond `top` is below 1e-12.
        let top = (start * start + 28.0 / (std::f64::consts::PI * lambda)).sqrt();
        let mass = integrate(|x| contact_distance_pdf(x, lambda, r, loc), start, top, AdaptiveOptions::new(1e-12, 1e-12)).unwrap().value;
        prop_assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn contact_cdf_is_a_distribution(m in model(), loc in location(), a in 0.0f64..2000.0, b in 0.0f64..2000.0) {
        let (lambda, r) = (m.lambda_bs(), m.point_process.hole_radius);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (f_lo, f_hi) = (contact_distance_cdf(lo, lambda, r, loc), contact_distance_cdf(hi, lambda, r, loc));
        prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
        prop_assert!(f_lo <= f_hi);
        prop_assert!((f_hi + contact_distance_survival(hi, lambda, r, loc) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coverage_is_a_probability(m in model(), loc in location()) {
        let quad = Quadrature::default();
        let c_dl = dl_coverage(&m, loc, &quad).unwrap();
        let c_ul = ul_coverage(&m, loc, &quad).unwrap();
        prop_assert!((0.0..=1.0).contains(&c_dl), "{c_dl}");
        prop_assert!((0.0..=1.0).contains(&c_ul), "{c_ul}");
    }

    #[test]
    fn transmit_power_is_capped_and_nondecreasing(x in 0.0f64..5e3, dx in 0.0f64..100.0, eps in 0.0f64..=1.0) {
        let mut m = Model::worst_case();
        m.uplink.epsilon = eps;
        let (p, q) = (ul_transmit_power(x, &m), ul_transmit_power(x + dx, &m));
        prop_assert!(p <= q + 1e-18);
        prop_assert!(q <= m.uplink.p_max);
    }

    #[test]
    fn inverted_exponential_matches_closed_form(rate in 0.1f64..10.0, u in 0.005f64..0.995) {
        let quad = Quadrature::default();
        let w = -(1.0 - u).ln() / rate;
        let lt = move |s: Complex<f64>| Ok(Complex::new(rate, 0.0) / (s + rate));
        let f = cdf_from_laplace(&lt, w, &quad).unwrap();
        prop_assert!((f - u).abs() < 1e-4, "{f} vs {u}");
    }

    #[test]
    fn empirical_percentile_inverts_empirical_cdf(values in prop::collection::vec(0.0f64..1e3, 1..200), rho in 0.01f64..1.0) {
        let mut v = values;
        v.sort_by(f64::total_cmp);
        let p = empirical_percentile(&v, rho);
        let curve = empirical_cdf(&v);
        prop_assert!(curve.value_at(p) >= rho - 1e-12);
        let below = v.iter().filter(|&&x| x < p).count() as f64 / v.len() as f64;
        prop_assert!(below < rho + 1e-12);
    }

    #[test]
    fn config_text_round_trips(m in model()) {
        let back = Model::from_config_str(&m.to_config_string()).unwrap();
        prop_assert_eq!(back, m);
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn exposure_cdfs_are_monotone(m in model(), loc in location()) {
        let quad = Quadrature::default();
        let grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        let dl: Vec<f64> = grid.iter().map(|&w| dl_exposure_cdf(w, &m, loc, &quad).unwrap()).collect();
        let ul: Vec<f64> = grid.iter().map(|&w| ul_exposure_cdf(w * 1e-3, &m, loc, &quad).unwrap()).collect();
        let ei: Vec<f64> = grid.iter().map(|&e| ei_component_cdf(EiComponent::Total, e * 1e-2, &m, loc, &quad).unwrap()).collect();
        for cdf in [dl, ul, ei] {
            for pair in cdf.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-4, "{cdf:?}");
            }
            prop_assert!(cdf.iter().all(|f| (0.0..=1.0).contains(f)));
        }
    }
}
