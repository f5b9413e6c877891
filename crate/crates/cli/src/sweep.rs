use clap::ValueEnum;
use rayon::prelude::*;

use emf_php::downlink::{compliance_distance, dl_coverage, dl_exposure_percentile};
use emf_php::joint::{ei_component_percentile, EiComponent};
use emf_php::uplink::{ul_coverage, ul_exposure_percentile};
use emf_php::{Model, Quadrature, Result, UserLocation};

use crate::CliError;

/// Scalar outputs a sweep can tabulate. Percentiles use the model's `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    DlCoverage,
    DlOutage,
    DlP95,
    UlCoverage,
    UlP95,
    EiP95,
    EiUlP95,
    EiDlP95,
    Xcom,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::DlCoverage => "dl_coverage",
            Metric::DlOutage => "dl_outage",
            Metric::DlP95 => "dl_percentile",
            Metric::UlCoverage => "ul_coverage",
            Metric::UlP95 => "ul_percentile",
            Metric::EiP95 => "ei_percentile",
            Metric::EiUlP95 => "ei_ul_percentile",
            Metric::EiDlP95 => "ei_dl_percentile",
            Metric::Xcom => "x_com",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::DlCoverage | Metric::DlOutage | Metric::UlCoverage => "probability",
            Metric::DlP95 => "W/m^2",
            Metric::UlP95 => "W/m^2",
            Metric::EiP95 | Metric::EiUlP95 | Metric::EiDlP95 => "W/kg",
            Metric::Xcom => "m",
        }
    }

    pub fn eval(self, model: &Model, loc: UserLocation, quad: &Quadrature) -> Result<f64> {
        let rho = model.compliance.rho;
        match self {
            Metric::DlCoverage => dl_coverage(model, loc, quad),
            Metric::DlOutage => dl_coverage(model, loc, quad).map(|c| 1.0 - c),
            Metric::DlP95 => dl_exposure_percentile(rho, model, loc, quad),
            Metric::UlCoverage => ul_coverage(model, loc, quad),
            Metric::UlP95 => ul_exposure_percentile(rho, model, loc, quad),
            Metric::EiP95 => ei_component_percentile(EiComponent::Total, rho, model, loc, quad),
            Metric::EiUlP95 => ei_component_percentile(EiComponent::Uplink, rho, model, loc, quad),
            Metric::EiDlP95 => ei_component_percentile(EiComponent::Downlink, rho, model, loc, quad),
            Metric::Xcom => compliance_distance(model, model.compliance.w_max, rho, quad),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Logarithmic when both ends are positive and span two decades or more.
    Auto,
    Log,
    Lin,
}

/// `points` values from `from` to `to`, both included.
pub fn axis(from: f64, to: f64, points: usize, scale: Scale) -> std::result::Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let log = match scale {
        Scale::Log => true,
        Scale::Lin => false,
        Scale::Auto => from > 0.0 && to > 0.0 && (to / from).max(from / to) >= 100.0,
    };
    if log && !(from > 0.0 && to > 0.0) {
        return Err(CliError::Usage("a log axis needs positive end points".into()));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                from
            } else if i == points - 1 {
                to
            } else if log {
                (from.ln() + (to.ln() - from.ln()) * step(i)).exp()
            } else {
                from + (to - from) * step(i)
            }
        })
        .collect())
}

/// Runs `jobs` on a pool of `threads` workers (0 = all cores); results keep job order.
pub fn run_parallel<J, F>(threads: usize, jobs: &[J], f: F) -> std::result::Result<Vec<f64>, CliError>
where
    J: Sync,
    F: Fn(&J) -> Result<f64> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Pool(e.to_string()))?;
    let out: Result<Vec<f64>> = pool.install(|| jobs.par_iter().map(&f).collect());
    Ok(out?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_ends_exactly_and_picks_log() {
        let a = axis(1e-6, 1e-3, 13, Scale::Auto).unwrap();
        assert_eq!(a.len(), 13);
        assert_eq!(a[0], 1e-6);
        assert_eq!(a[12], 1e-3);
        assert!((a[4] / 1e-5 - 1.0).abs() < 1e-12);
        let b = axis(0.0, 250.0, 6, Scale::Auto).unwrap();
        assert_eq!(b, vec![0.0, 50.0, 100.0, 150.0, 200.0, 250.0]);
        assert!(axis(0.0, 1.0, 3, Scale::Log).is_err());
    }

    #[test]
    fn parallel_results_keep_order() {
        let jobs: Vec<f64> = (0..50).map(f64::from).collect();
        let out = run_parallel(4, &jobs, |&x| Ok(x * 2.0)).unwrap();
        assert_eq!(out, jobs.iter().map(|x| x * 2.0).collect::<Vec<_>>());
    }
}
