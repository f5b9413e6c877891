//! `emf-php`: batch front end that writes every result as a CSV table.

mod figures;
mod sweep;
mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use emf_php::downlink::{compliance_distance, dl_coverage, dl_exposure_cdf, dl_exposure_percentile};
use emf_php::joint::{ei_component_cdf, ei_component_percentile, EiComponent};
use emf_php::model::{parse_ratio, CONFIG_KEYS};
use emf_php::optimizer::{solve_op1, solve_op3, Op3Parameter, SearchBracket};
use emf_php::uplink::{ul_coverage, ul_exposure_cdf, ul_exposure_percentile};
use emf_php::validate::{run_validation, ValidationPlan, KS_POINTS};
use emf_php::{Model, Quadrature, UserLocation};

use sweep::{axis, run_parallel, Metric, Scale};
use table::{num, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] emf_php::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "emf-php", version, about = "EMF exposure and coverage of networks with base-station exclusion zones")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// `key = value` configuration file applied on top of the scenario defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Target accuracy of each recovered CDF value.
    #[arg(long, global = true)]
    tol_cdf: Option<f64>,
    /// Truncation criterion of the inversion tail.
    #[arg(long, global = true)]
    tol_tail: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Location::Out)]
    location: Location,
    #[arg(long, global = true, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Override one parameter, e.g. `--set lambda_b=20/km2`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Location {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Worst,
    Typical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Component {
    Total,
    Ul,
    Dl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Op3Param {
    #[value(name = "lambda_b")]
    LambdaB,
    #[value(name = "R")]
    R,
}

/// Uplink overrides shared by the uplink subcommands.
#[derive(Debug, Args)]
struct UplinkOpts {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    u0: Option<f64>,
}

/// Percentile levels or CDF points; percentiles at the model's rho when neither is given.
#[derive(Debug, Args)]
struct Query {
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,
    /// Evaluate the CDF at these exposure levels instead.
    #[arg(long = "w", alias = "e", value_delimiter = ',', conflicts_with = "rho")]
    levels: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Downlink coverage probability.
    CoverageDl {
        /// Threshold override, linear or with a dB suffix.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
    },
    /// Downlink exposure CDF values or percentiles.
    ExposureDl {
        #[command(flatten)]
        query: Query,
    },
    /// Compliance distance.
    Xcom {
        #[arg(long)]
        w_max: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Uplink coverage probability.
    CoverageUl {
        #[command(flatten)]
        uplink: UplinkOpts,
        /// Threshold override, linear or with a dB suffix.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
    },
    /// Uplink exposure CDF values or percentiles.
    ExposureUl {
        #[command(flatten)]
        uplink: UplinkOpts,
        #[command(flatten)]
        query: Query,
    },
    /// Exposure index, or one of its link components.
    Ei {
        #[arg(long, value_enum, default_value_t = Component::Total)]
        component: Component,
        #[command(flatten)]
        query: Query,
    },
    /// Largest baseline density whose exposure percentile stays under a limit.
    Op1 {
        #[arg(long)]
        w_max: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        lo: f64,
        #[arg(long, default_value_t = 1e-2)]
        hi: f64,
        /// Relative bracket width at which the search stops.
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Parameter value minimising the exposure index percentile.
    Op3 {
        #[arg(long, value_enum)]
        param: Op3Param,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = emf_php::optimizer::GOLDEN_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Analytic results against Monte Carlo; exits with status 2 if any row fails.
    McValidate {
        #[arg(long, default_value_t = 100_000)]
        realizations: usize,
        /// Analytic CDF evaluations per KS statistic.
        #[arg(long, default_value_t = KS_POINTS)]
        ks_points: usize,
    },
    /// One metric over a grid of one parameter.
    Sweep {
        /// Any configuration key.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Scale::Auto)]
        scale: Scale,
        #[arg(long, value_enum)]
        metric: Metric,
    },
    /// Data behind one published figure (2 to 14).
    Figure {
        n: u32,
    },
}

/// Everything a subcommand needs.
pub struct Ctx {
    pub model: Model,
    pub quad: Quadrature,
    pub loc: UserLocation,
    pub threads: usize,
    pub seed: u64,
}

fn build_model(opts: &GlobalOpts) -> CliResult<Model> {
    let mut text = match &opts.config {
        Some(path) => fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => String::new(),
    };
    // A scenario line is applied before every other line, so the flag only picks the base.
    if let Some(s) = opts.scenario {
        text.push_str(match s {
            ScenarioArg::Worst => "\nscenario = worst\n",
            ScenarioArg::Typical => "\nscenario = typical\n",
        });
    }
    let mut model = Model::from_config_str(&text)?;
    for item in &opts.overrides {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        model.set(key, value)?;
    }
    model.validate()?;
    Ok(model)
}

fn build_quad(opts: &GlobalOpts) -> CliResult<Quadrature> {
    let mut quad = Quadrature::default();
    for (flag, value, slot) in
        [("--tol-cdf", opts.tol_cdf, &mut quad.cdf_tolerance), ("--tol-tail", opts.tol_tail, &mut quad.tail_tolerance)]
    {
        if let Some(v) = value {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Usage(format!("{flag} must lie in (0, 1), got {v}")));
            }
            *slot = v;
        }
    }
    Ok(quad)
}

/// Argument list without the flags that cannot change the output.
fn reproducible_args() -> String {
    let mut kept = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--threads" || a == "--out" {
            args.next();
        } else if !(a.starts_with("--threads=") || a.starts_with("--out=")) {
            kept.push(a);
        }
    }
    kept.join(" ")
}

fn stamp(table: &mut Table, ctx: &Ctx, command: &str) {
    let mut meta = vec![
        ("tool".to_string(), format!("emf-php {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), command.to_string()),
        ("args".to_string(), reproducible_args()),
        ("seed".to_string(), ctx.seed.to_string()),
        ("location".to_string(), ctx.loc.label().to_string()),
        ("tol_cdf".to_string(), format!("{:e}", ctx.quad.cdf_tolerance)),
        ("tol_tail".to_string(), format!("{:e}", ctx.quad.tail_tolerance)),
    ];
    meta.extend(ctx.model.to_config_string().lines().map(|l| ("model".to_string(), l.to_string())));
    meta.append(&mut table.meta);
    table.meta = meta;
}

fn with_uplink(model: &Model, opts: &UplinkOpts) -> CliResult<Model> {
    let mut m = *model;
    for (key, value) in [("epsilon", opts.epsilon), ("p_max", opts.pmax), ("u0", opts.u0)] {
        if let Some(v) = value {
            m.set_value(key, v)?;
        }
    }
    m.validate()?;
    Ok(m)
}

fn with_threshold(model: &Model, key: &str, tau: &Option<String>) -> CliResult<Model> {
    let mut m = *model;
    if let Some(raw) = tau {
        m.set_value(key, parse_ratio(raw)?)?;
    }
    m.validate()?;
    Ok(m)
}

/// Answers a [`Query`] with `cdf` and `percentile`, evaluated on the pool.
fn query_table<C, P>(ctx: &Ctx, query: &Query, cdf: C, percentile: P) -> CliResult<Table>
where
    C: Fn(f64) -> emf_php::Result<f64> + Sync + Send,
    P: Fn(f64) -> emf_php::Result<f64> + Sync + Send,
{
    let (header, xs, values) = if !query.levels.is_empty() {
        let v = run_parallel(ctx.threads, &query.levels, |&w| cdf(w))?;
        (["level", "cdf"], query.levels.clone(), v)
    } else {
        let rhos = if query.rho.is_empty() { vec![ctx.model.compliance.rho] } else { query.rho.clone() };
        if let Some(r) = rhos.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(CliError::Usage(format!("--rho must lie in (0, 1), got {r}")));
        }
        let v = run_parallel(ctx.threads, &rhos, |&r| percentile(r))?;
        (["rho", "percentile"], rhos, v)
    };
    let mut t = Table::new(&header);
    for (x, v) in xs.iter().zip(values) {
        t.push(vec![num(*x), num(v)]);
    }
    Ok(t)
}

fn single(header: &[&str], row: Vec<String>) -> Table {
    let mut t = Table::new(header);
    t.push(row);
    t
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::CoverageDl { .. } => "coverage-dl".into(),
        Command::ExposureDl { .. } => "exposure-dl".into(),
        Command::Xcom { .. } => "xcom".into(),
        Command::CoverageUl { .. } => "coverage-ul".into(),
        Command::ExposureUl { .. } => "exposure-ul".into(),
        Command::Ei { .. } => "ei".into(),
        Command::Op1 { .. } => "op1".into(),
        Command::Op3 { .. } => "op3".into(),
        Command::McValidate { .. } => "mc-validate".into(),
        Command::Sweep { .. } => "sweep".into(),
        Command::Figure { n } => format!("figure {n}"),
    }
}

/// Runs one subcommand; the flag is false when a validation row failed.
fn execute(cmd: &Command, ctx: &Ctx) -> CliResult<(Table, bool)> {
    let (model, loc, quad) = (&ctx.model, ctx.loc, &ctx.quad);
    let table = match cmd {
        Command::CoverageDl { tau } => {
            let m = with_threshold(model, "tau_dl", tau)?;
            single(&["location", "tau_dl", "coverage"], vec![loc.label().into(), num(m.downlink.snr_threshold), num(dl_coverage(&m, loc, quad)?)])
        }
        Command::ExposureDl { query } => {
            query_table(ctx, query, |w| dl_exposure_cdf(w, model, loc, quad), |r| dl_exposure_percentile(r, model, loc, quad))?
        }
        Command::Xcom { w_max, rho } => {
            let w_max = w_max.unwrap_or(model.compliance.w_max);
            let rho = rho.unwrap_or(model.compliance.rho);
            single(&["w_max", "rho", "x_com"], vec![num(w_max), num(rho), num(compliance_distance(model, w_max, rho, quad)?)])
        }
        Command::CoverageUl { uplink, tau } => {
            let m = with_threshold(&with_uplink(model, uplink)?, "tau_ul", tau)?;
            single(
                &["location", "epsilon", "tau_ul", "coverage"],
                vec![loc.label().into(), num(m.uplink.epsilon), num(m.uplink.snr_threshold), num(ul_coverage(&m, loc, quad)?)],
            )
        }
        Command::ExposureUl { uplink, query } => {
            let m = with_uplink(model, uplink)?;
            query_table(ctx, query, |w| ul_exposure_cdf(w, &m, loc, quad), |r| ul_exposure_percentile(r, &m, loc, quad))?
        }
        Command::Ei { component, query } => {
            let comp = match component {
                Component::Total => EiComponent::Total,
                Component::Ul => EiComponent::Uplink,
                Component::Dl => EiComponent::Downlink,
            };
            let mut t = query_table(
                ctx,
                query,
                |e| ei_component_cdf(comp, e, model, loc, quad),
                |r| ei_component_percentile(comp, r, model, loc, quad),
            )?;
            t.meta("component", comp.label());
            t
        }
        Command::Op1 { w_max, rho, lo, hi, tol } => {
            let w_max = w_max.unwrap_or(model.compliance.w_max);
            let rho = rho.unwrap_or(model.compliance.rho);
            let sol = solve_op1(model, w_max, rho, loc, SearchBracket::new(*lo, *hi, *tol)?, quad)?;
            let mut t = single(
                &["lambda_b_star", "percentile", "coverage", "slack", "unconstrained"],
                vec![num(sol.lambda_b), num(sol.percentile), num(sol.coverage), num(sol.slack), sol.unconstrained.to_string()],
            );
            t.meta("w_max", w_max).meta("rho", rho);
            t
        }
        Command::Op3 { param, lo, hi, tol, rho } => {
            let rho = rho.unwrap_or(model.compliance.rho);
            let p = match param {
                Op3Param::LambdaB => Op3Parameter::LambdaB,
                Op3Param::R => Op3Parameter::HoleRadius,
            };
            let sol = solve_op3(model, rho, p, loc, SearchBracket::new(*lo, *hi, *tol)?, quad)?;
            let warning = match sol.warning {
                None => "none".to_string(),
                Some(w) if w.flat => "flat".to_string(),
                Some(w) => format!("{}-minima", w.local_minima),
            };
            let mut t = single(&["parameter", "argmin", "objective", "warning"], vec![p.label().into(), num(sol.argmin), num(sol.objective), warning]);
            t.meta("rho", rho);
            for (x, y) in &sol.evaluations {
                t.meta("evaluation", format!("{} {}", num(*x), num(*y)));
            }
            t
        }
        Command::McValidate { realizations, ks_points } => {
            let plan = ValidationPlan { realizations: *realizations, seed: ctx.seed, threads: ctx.threads, ks_points: *ks_points };
            let report = run_validation(model, &plan, quad)?;
            eprint!("{}", report.summary());
            let mut t = Table::new(&["metric", "location", "setting", "analytic", "empirical", "ks", "tolerance", "pass"]);
            let mut csv = Vec::new();
            report.write_csv(&mut csv).expect("writing to memory");
            for line in String::from_utf8(csv).expect("ascii csv").lines().skip(1) {
                t.push(line.split(',').map(str::to_string).collect());
            }
            t.meta("realizations", realizations).meta("ks_points", ks_points);
            t.meta("retention_matches", if report.retention_favours_pi { "exp(-lambda_r*pi*R^2)" } else { "exp(-lambda_r*R^2)" });
            return Ok((t, report.all_pass()));
        }
        Command::Sweep { param, from, to, points, scale, metric } => {
            if !CONFIG_KEYS.contains(&param.as_str()) {
                return Err(CliError::Usage(format!("unknown parameter `{param}`; expected one of {}", CONFIG_KEYS.join(", "))));
            }
            let xs = axis(*from, *to, *points, *scale)?;
            let values = run_parallel(ctx.threads, &xs, |&x| {
                let mut m = *model;
                m.set_value(param, x)?;
                metric.eval(&m, loc, quad)
            })?;
            let mut t = Table::new(&[param.as_str(), metric.label()]);
            for (x, v) in xs.iter().zip(values) {
                t.push(vec![num(*x), num(v)]);
            }
            t.meta("x_axis", param).meta("y_axis", format!("{} ({})", metric.label(), metric.unit()));
            t
        }
        Command::Figure { n } => figures::figure(*n, ctx)?,
    };
    Ok((table, true))
}

fn emit(table: &Table, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, table.render()).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            table.write_to(&mut stdout).and_then(|_| stdout.flush()).map_err(|source| CliError::Io { path: "stdout".into(), source })
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    let g = &cli.global;
    let ctx = Ctx {
        model: build_model(g)?,
        quad: build_quad(g)?,
        loc: match g.location {
            Location::In => UserLocation::InsideHole,
            Location::Out => UserLocation::OutsideHole,
        },
        threads: g.threads,
        seed: g.seed,
    };
    let (mut table, ok) = execute(&cli.command, &ctx)?;
    stamp(&mut table, &ctx, &command_name(&cli.command));
    emit(&table, &g.out)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
