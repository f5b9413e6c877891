//! Canned sweeps, one per published figure.

use emf_php::downlink::{dl_conditional_exposure_percentile, dl_coverage, dl_exposure_percentile};
use emf_php::joint::{ei_component_percentile, EiComponent};
use emf_php::optimizer::{solve_op1, SearchBracket};
use emf_php::scalar::db_to_linear;
use emf_php::uplink::{ul_coverage, ul_exposure_cdf, ul_exposure_percentile};
use emf_php::{Error, Model, Result, UserLocation};

use crate::sweep::{axis, run_parallel, Scale};
use crate::table::{num, Table};
use crate::{CliError, Ctx};

const IN: UserLocation = UserLocation::InsideHole;
const OUT: UserLocation = UserLocation::OutsideHole;
const LOCATIONS: [UserLocation; 2] = [IN, OUT];
const HOLE_DENSITIES: [f64; 3] = [1e-7, 1e-6, 1e-5];
const EPSILONS: [f64; 4] = [0.2, 0.4, 0.6, 1.0];
const EPSILONS_SHORT: [f64; 3] = [0.2, 0.6, 1.0];
const COMPONENTS: [EiComponent; 3] = [EiComponent::Total, EiComponent::Uplink, EiComponent::Downlink];

type Eval<'a> = Box<dyn Fn(f64) -> Result<f64> + Sync + Send + 'a>;

/// One curve: a column name and the value at each x.
struct Series<'a> {
    name: String,
    eval: Eval<'a>,
}

fn series<'a>(name: impl Into<String>, eval: impl Fn(f64) -> Result<f64> + Sync + Send + 'a) -> Series<'a> {
    Series { name: name.into(), eval: Box::new(eval) }
}

/// Evaluates every (x, series) cell on the worker pool and lays the result out row by row.
fn tabulate(ctx: &Ctx, x_name: &str, xs: &[f64], cols: Vec<Series<'_>>) -> std::result::Result<Table, CliError> {
    let jobs: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (0..cols.len()).map(move |j| (i, j))).collect();
    let values = run_parallel(ctx.threads, &jobs, |&(i, j)| (cols[j].eval)(xs[i]))?;
    let mut header = vec![x_name.to_string()];
    header.extend(cols.iter().map(|c| c.name.clone()));
    let mut table = Table::new(&header);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![num(x)];
        row.extend(values[i * cols.len()..(i + 1) * cols.len()].iter().map(|&v| num(v)));
        table.push(row);
    }
    Ok(table)
}

fn with(model: &Model, key: &str, value: f64) -> Result<Model> {
    let mut m = *model;
    m.set_value(key, value)?;
    Ok(m)
}

fn tag(x: f64) -> String {
    format!("{x:e}")
}

fn radii() -> Vec<f64> {
    (0..6).map(|k| 50.0 * k as f64).collect()
}

/// Builds the table of figure `n`; the caller adds the run metadata.
pub fn figure(n: u32, ctx: &Ctx) -> std::result::Result<Table, CliError> {
    let base = &ctx.model;
    let quad = &ctx.quad;
    let rho = base.compliance.rho;
    let (table, axes): (Table, [&str; 3]) = match n {
        2 => {
            let cols = LOCATIONS
                .iter()
                .map(|&loc| {
                    series(format!("percentile_{}", loc.label()), move |r| {
                        dl_exposure_percentile(rho, &with(base, "hole_radius", r)?, loc, quad)
                    })
                })
                .collect();
            (
                tabulate(ctx, "R", &radii(), cols)?,
                ["downlink exposure percentile vs hole radius", "R (m)", "power density (W/m^2)"],
            )
        }
        3 => {
            let cols = LOCATIONS
                .iter()
                .map(|&loc| {
                    series(format!("coverage_{}", loc.label()), move |r| dl_coverage(&with(base, "hole_radius", r)?, loc, quad))
                })
                .collect();
            (tabulate(ctx, "R", &radii(), cols)?, ["downlink coverage vs hole radius", "R (m)", "P(SNR > tau_dl)"])
        }
        4 | 5 => {
            let xs = axis(1e-6, 1e-2, 17, Scale::Log)?;
            let cols = HOLE_DENSITIES
                .iter()
                .map(|&lr| {
                    let name = if n == 4 { format!("percentile_lr{}", tag(lr)) } else { format!("coverage_lr{}", tag(lr)) };
                    series(name, move |lb| {
                        let m = with(&with(base, "lambda_r", lr)?, "lambda_b", lb)?;
                        if n == 4 {
                            dl_exposure_percentile(rho, &m, OUT, quad)
                        } else {
                            dl_coverage(&m, OUT, quad)
                        }
                    })
                })
                .collect();
            let axes = if n == 4 {
                ["downlink exposure percentile outside holes vs baseline density", "lambda_b (1/m^2)", "power density (W/m^2)"]
            } else {
                ["downlink coverage outside holes vs baseline density", "lambda_b (1/m^2)", "P(SNR > tau_dl)"]
            };
            (tabulate(ctx, "lambda_b", &xs, cols)?, axes)
        }
        6 => {
            let xs = axis(1.0, 100.0, 21, Scale::Log)?;
            let cols = [1e-5, 1e-4, 1e-3]
                .iter()
                .map(|&lb| {
                    series(format!("percentile_lb{}", tag(lb)), move |x0| {
                        dl_conditional_exposure_percentile(rho, x0, &with(base, "lambda_b", lb)?, quad)
                    })
                })
                .collect();
            (
                tabulate(ctx, "x0", &xs, cols)?,
                ["downlink exposure percentile given the serving distance", "x0 (m)", "power density (W/m^2)"],
            )
        }
        7 => {
            let xs = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
            let bracket = SearchBracket::new(1e-6, 1e-2, 0.01)?;
            let at_r = with(base, "hole_radius", 200.0)?;
            let cols = HOLE_DENSITIES
                .iter()
                .map(|&lr| {
                    let at_r = &at_r;
                    series(format!("lambda_b_star_lr{}", tag(lr)), move |w_max| {
                        let m = with(at_r, "lambda_r", lr)?;
                        match solve_op1(&m, w_max, rho, OUT, bracket, quad) {
                            Ok(sol) if !sol.unconstrained => Ok(sol.lambda_b),
                            Ok(_) | Err(Error::Infeasible(_)) => Ok(f64::NAN),
                            Err(e) => Err(e),
                        }
                    })
                })
                .collect();
            let mut t = tabulate(ctx, "w_max", &xs, cols)?;
            t.meta("note", "R = 200 m; nan marks a limit met nowhere or everywhere in lambda_b [1e-6, 1e-2]");
            (t, ["largest baseline density meeting the exposure limit", "W_max (W/m^2)", "lambda_b* (1/m^2)"])
        }
        8 => {
            let typical = Model::typical_case();
            let typical = &typical;
            let xs = axis(1e-6, 1e-2, 17, Scale::Log)?;
            let mut cols = Vec::new();
            for loc in LOCATIONS {
                cols.push(series(format!("percentile_{}", loc.label()), move |lb| {
                    dl_exposure_percentile(rho, &with(typical, "lambda_b", lb)?, loc, quad)
                }));
            }
            for loc in LOCATIONS {
                cols.push(series(format!("outage_{}", loc.label()), move |lb| {
                    Ok(1.0 - dl_coverage(&with(typical, "lambda_b", lb)?, loc, quad)?)
                }));
            }
            let mut t = tabulate(ctx, "lambda_b", &xs, cols)?;
            t.meta("note", "typical-case parameters regardless of --scenario");
            (t, ["typical-case downlink exposure percentile and outage", "lambda_b (1/m^2)", "W/m^2 and P(SNR <= tau_dl)"])
        }
        9 => {
            let xs = axis(1e-6, 1e2, 25, Scale::Log)?;
            let cols = EPSILONS
                .iter()
                .map(|&eps| {
                    series(format!("cdf_eps{eps}"), move |w| ul_exposure_cdf(w, &with(base, "epsilon", eps)?, OUT, quad))
                })
                .collect();
            (tabulate(ctx, "w", &xs, cols)?, ["uplink exposure CDF outside holes", "w (W/m^2)", "P(W_ul <= w)"])
        }
        10 => {
            let xs = axis(-40.0, 40.0, 17, Scale::Lin)?;
            let cols = EPSILONS
                .iter()
                .map(|&eps| {
                    series(format!("ccdf_eps{eps}"), move |tau_db| {
                        let m = with(&with(base, "epsilon", eps)?, "tau_ul", db_to_linear(tau_db))?;
                        ul_coverage(&m, OUT, quad)
                    })
                })
                .collect();
            (tabulate(ctx, "tau_ul_db", &xs, cols)?, ["uplink SNR CCDF outside holes", "tau (dB)", "P(SNR > tau)"])
        }
        11 | 12 => {
            let xs = axis(1e-6, 1e-3, 13, Scale::Log)?;
            let mut cols = Vec::new();
            for loc in LOCATIONS {
                for eps in EPSILONS_SHORT {
                    let name = if n == 11 { "percentile" } else { "coverage" };
                    cols.push(series(format!("{name}_{}_eps{eps}", loc.label()), move |lb| {
                        let m = with(&with(base, "epsilon", eps)?, "lambda_b", lb)?;
                        if n == 11 {
                            ul_exposure_percentile(rho, &m, loc, quad)
                        } else {
                            ul_coverage(&m, loc, quad)
                        }
                    }));
                }
            }
            let axes = if n == 11 {
                ["uplink exposure percentile vs baseline density", "lambda_b (1/m^2)", "power density (W/m^2)"]
            } else {
                ["uplink coverage vs baseline density", "lambda_b (1/m^2)", "P(SNR > tau_ul)"]
            };
            (tabulate(ctx, "lambda_b", &xs, cols)?, axes)
        }
        13 => {
            let xs: Vec<f64> = (0..13).map(|k| 25.0 * k as f64).collect();
            let mut cols = Vec::new();
            for lb in [1e-5, 10f64.powf(-4.5), 1e-4] {
                for comp in COMPONENTS {
                    cols.push(series(format!("{}_lb{lb:.3e}", comp.label()), move |r| {
                        let m = with(&with(base, "lambda_b", lb)?, "hole_radius", r)?;
                        ei_component_percentile(comp, rho, &m, IN, quad)
                    }));
                }
            }
            (tabulate(ctx, "R", &xs, cols)?, ["exposure index percentile inside holes vs hole radius", "R (m)", "W/kg"])
        }
        14 => {
            let xs = axis(1e-6, 1e-3, 13, Scale::Log)?;
            let mut cols = Vec::new();
            for loc in LOCATIONS {
                for comp in COMPONENTS {
                    cols.push(series(format!("{}_{}", comp.label(), loc.label()), move |lb| {
                        ei_component_percentile(comp, rho, &with(base, "lambda_b", lb)?, loc, quad)
                    }));
                }
            }
            (tabulate(ctx, "lambda_b", &xs, cols)?, ["exposure index percentile vs baseline density", "lambda_b (1/m^2)", "W/kg"])
        }
        _ => return Err(CliError::Usage(format!("figure must lie in 2..=14, got {n}"))),
    };
    let mut table = table;
    table.meta("title", axes[0]).meta("x_axis", axes[1]).meta("y_axis", axes[2]);
    Ok(table)
}
