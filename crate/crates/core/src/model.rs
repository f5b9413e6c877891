//! Network model parameters, presets and the plain-text configuration format.
//!
//! Every other module reads its parameters from a [`NetworkModel`]. Derived
//! quantities (EIRP, the uplink power-cap distance, the effective BS density)
//! are methods, so they always agree with the fields they depend on.
//!
//! Units: densities per m², distances in m, powers in W, power densities in
//! W/m², SAR in (W/kg)/W and (W/kg)/(W/m²). Gains and thresholds are linear.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::scalar::{db_to_linear, Scalar};

/// Speed of light used when the reference path gain is recomputed from the carrier.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Maximum BS power and antenna gain, α = 4 for SNR and β = 2.5 for exposure.
    WorstCase,
    /// 100 W scaled by the 0.31 statistical reduction factor, α = β = 4.
    TypicalCase,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "worst" | "worst-case" | "worst_case" | "worstcase" => Ok(Scenario::WorstCase),
            "typical" | "typical-case" | "typical_case" | "typicalcase" => Ok(Scenario::TypicalCase),
            other => Err(invalid("scenario", format!("unknown scenario `{other}`"))),
        }
    }
}

/// Where the typical user sits relative to the exclusion zones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserLocation {
    /// Inside a hole: no BS closer than the hole radius.
    InsideHole,
    /// Outside every hole.
    OutsideHole,
}

impl UserLocation {
    /// Lower limit of the BS distance support, `R` inside a hole and `0` outside.
    pub fn support_start<T: Scalar>(self, hole_radius: T) -> T {
        match self {
            UserLocation::InsideHole => hole_radius,
            UserLocation::OutsideHole => T::zero(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            UserLocation::InsideHole => "in",
            UserLocation::OutsideHole => "out",
        }
    }
}

impl FromStr for UserLocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in" | "inside" => Ok(UserLocation::InsideHole),
            "out" | "outside" => Ok(UserLocation::OutsideHole),
            other => Err(invalid("location", format!("expected `in` or `out`, got `{other}`"))),
        }
    }
}

/// Baseline BS process, restricted-area process and hole radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointProcessParams<T> {
    /// Baseline BS density (per m²).
    pub lambda_b: T,
    /// Restricted-area (hole centre) density (per m²).
    pub lambda_r: T,
    /// Exclusion-zone radius (m).
    pub hole_radius: T,
    /// Use `exp(-λ_r π R²)` instead of the default `exp(-λ_r R²)` retention factor.
    pub php_pi_correction: bool,
}

impl<T: Scalar> PointProcessParams<T> {
    pub fn effective_density(&self) -> T {
        effective_bs_density(self)
    }

    /// Fraction of baseline BSs that survive the carving.
    pub fn retention(&self) -> T {
        let area_factor = if self.php_pi_correction { T::PI() } else { T::one() };
        (-self.lambda_r * area_factor * self.hole_radius * self.hole_radius).exp()
    }
}

/// Density of the hole-carved BS process approximated as a PPP:
/// `λ_B = λ_b · exp(-λ_r R²)`, or with `π` in the exponent when
/// `php_pi_correction` is set.
pub fn effective_bs_density<T: Scalar>(pp: &PointProcessParams<T>) -> T {
    pp.lambda_b * pp.retention()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownlinkRadioParams<T> {
    /// BS transmit power `P_t` (W).
    pub bs_transmit_power: T,
    /// BS antenna gain `G_t` (linear).
    pub antenna_gain: T,
    /// User antenna gain `G_u` (linear).
    pub user_gain: T,
    /// Path gain at the 1 m reference distance (linear).
    pub ref_path_gain: T,
    /// Carrier frequency (Hz).
    pub carrier_freq: T,
    /// Path-loss exponent on the serving link (SNR).
    pub alpha: T,
    /// Path-loss exponent for exposure.
    pub beta: T,
    /// Downlink noise power (W).
    pub noise_power: T,
    /// Nakagami shape, a positive integer.
    pub nakagami_m: u32,
    /// SNR threshold (linear).
    pub snr_threshold: T,
}

impl<T: Scalar> DownlinkRadioParams<T> {
    /// Effective radiated power `p = P_t · G_t`.
    pub fn eirp(&self) -> T {
        self.bs_transmit_power * self.antenna_gain
    }

    /// `p / 4π`, the numerator of the per-BS power density.
    pub fn density_coefficient(&self) -> T {
        self.eirp() / (T::lit(4.0) * T::PI())
    }
}

/// `η = (c / f / (4π d₀))²` with `d₀ = 1 m`.
pub fn ref_path_gain_from_frequency<T: Scalar>(carrier_freq: T) -> T {
    let wavelength = T::lit(SPEED_OF_LIGHT) / carrier_freq;
    let g = wavelength / (T::lit(4.0) * T::PI());
    g * g
}

/// Fractional power control at the user equipment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkParams<T> {
    /// Power-control coefficient `p_u` (W).
    pub pu_coeff: T,
    /// Maximum UE transmit power (W).
    pub p_max: T,
    /// Path-loss compensation factor in (0, 1].
    pub epsilon: T,
    /// Distance from the user to its own device (m).
    pub device_distance: T,
    /// Uplink noise power (W).
    pub noise_power: T,
    /// Uplink SNR threshold (linear).
    pub snr_threshold: T,
}

impl<T: Scalar> UplinkParams<T> {
    /// Serving distance beyond which the device transmits at `p_max`:
    /// `(p_max / p_u)^(1 / (α ε))`.
    pub fn x_max(&self, alpha: T) -> T {
        (self.p_max / self.pu_coeff).powf(T::one() / (alpha * self.epsilon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarParams<T> {
    /// Reference SAR per watt of UE transmit power.
    pub sar_ul: T,
    /// Reference SAR per W/m² of incident power density.
    pub sar_dl: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceParams<T> {
    /// Maximum permitted power density (W/m²).
    pub w_max: T,
    /// Required compliance probability.
    pub rho: T,
}

/// Full parameter bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkModel<T> {
    pub point_process: PointProcessParams<T>,
    pub downlink: DownlinkRadioParams<T>,
    pub uplink: UplinkParams<T>,
    pub sar: SarParams<T>,
    pub compliance: ComplianceParams<T>,
}

/// Builds one of the named presets.
pub fn default_model<T: Scalar>(scenario: Scenario) -> NetworkModel<T> {
    let lit = T::lit;
    let mut model = NetworkModel {
        point_process: PointProcessParams {
            lambda_b: lit(1e-5),
            lambda_r: lit(1e-6),
            hole_radius: lit(50.0),
            php_pi_correction: false,
        },
        downlink: DownlinkRadioParams {
            bs_transmit_power: lit(200.0),
            antenna_gain: db_to_linear(lit(15.0)),
            user_gain: T::one(),
            ref_path_gain: lit(1e-4),
            carrier_freq: lit(2.6e9),
            alpha: lit(4.0),
            beta: lit(2.5),
            noise_power: lit(1e-11),
            nakagami_m: 1,
            snr_threshold: db_to_linear(lit(40.0)),
        },
        uplink: UplinkParams {
            pu_coeff: lit(8e-6),
            p_max: lit(0.2),
            epsilon: lit(0.4),
            device_distance: lit(0.2),
            noise_power: lit(1e-12),
            snr_threshold: db_to_linear(lit(30.0)),
        },
        sar: SarParams { sar_ul: lit(0.0053), sar_dl: lit(0.0042) },
        compliance: ComplianceParams { w_max: lit(10.0), rho: lit(0.95) },
    };
    if scenario == Scenario::TypicalCase {
        model.downlink.bs_transmit_power = lit(100.0) * lit(0.31);
        model.downlink.alpha = lit(4.0);
        model.downlink.beta = lit(4.0);
    }
    model
}

impl<T: Scalar> Default for NetworkModel<T> {
    fn default() -> Self {
        default_model(Scenario::WorstCase)
    }
}

impl<T: Scalar> NetworkModel<T> {
    pub fn worst_case() -> Self {
        default_model(Scenario::WorstCase)
    }

    pub fn typical_case() -> Self {
        default_model(Scenario::TypicalCase)
    }

    /// Effective (PHP-approximated) BS density `λ_B`.
    pub fn lambda_bs(&self) -> T {
        effective_bs_density(&self.point_process)
    }

    pub fn eirp(&self) -> T {
        self.downlink.eirp()
    }

    pub fn x_max(&self) -> T {
        self.uplink.x_max(self.downlink.alpha)
    }

    pub fn nakagami_m(&self) -> u32 {
        self.downlink.nakagami_m
    }

    /// Replaces the tabulated reference path gain by the free-space value at the carrier.
    pub fn recompute_ref_path_gain(&mut self) {
        self.downlink.ref_path_gain = ref_path_gain_from_frequency(self.downlink.carrier_freq);
    }

    pub fn validate(&self) -> Result<()> {
        let pp = &self.point_process;
        let dl = &self.downlink;
        let ul = &self.uplink;
        let positive = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        let nonneg = |name: &'static str, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be nonnegative and finite, got {v}")))
            }
        };
        positive("lambda_b", pp.lambda_b)?;
        nonneg("lambda_r", pp.lambda_r)?;
        nonneg("hole_radius", pp.hole_radius)?;
        positive("bs_power", dl.bs_transmit_power)?;
        positive("antenna_gain", dl.antenna_gain)?;
        positive("user_gain", dl.user_gain)?;
        positive("eta", dl.ref_path_gain)?;
        positive("carrier_freq", dl.carrier_freq)?;
        positive("noise_dl", dl.noise_power)?;
        nonneg("tau_dl", dl.snr_threshold)?;
        if !(dl.alpha > T::lit(2.0)) {
            return Err(invalid("alpha", format!("must exceed 2, got {}", dl.alpha)));
        }
        if !(dl.beta > T::lit(2.0)) {
            return Err(invalid("beta", format!("must exceed 2, got {}", dl.beta)));
        }
        if dl.nakagami_m < 1 {
            return Err(invalid("nakagami_m", "must be a positive integer"));
        }
        positive("pu", ul.pu_coeff)?;
        positive("p_max", ul.p_max)?;
        if ul.p_max < ul.pu_coeff {
            return Err(invalid("p_max", "must be at least the power-control coefficient pu"));
        }
        if !(ul.epsilon > T::zero() && ul.epsilon <= T::one()) {
            return Err(invalid("epsilon", format!("must lie in (0, 1], got {}", ul.epsilon)));
        }
        positive("u0", ul.device_distance)?;
        positive("noise_ul", ul.noise_power)?;
        nonneg("tau_ul", ul.snr_threshold)?;
        nonneg("sar_ul", self.sar.sar_ul)?;
        nonneg("sar_dl", self.sar.sar_dl)?;
        positive("w_max", self.compliance.w_max)?;
        let rho = self.compliance.rho;
        if !(rho > T::zero() && rho < T::one()) {
            return Err(invalid("rho", format!("must lie in (0, 1), got {rho}")));
        }
        Ok(())
    }

    /// Sets a numeric parameter by its configuration key. Values are in
    /// internal units (per m², m, W, linear ratios).
    pub fn set_value(&mut self, key: &str, value: T) -> Result<()> {
        let key = key.trim();
        match key {
            "lambda_b" => self.point_process.lambda_b = value,
            "lambda_r" => self.point_process.lambda_r = value,
            "hole_radius" | "R" | "r" => self.point_process.hole_radius = value,
            "bs_power" => self.downlink.bs_transmit_power = value,
            "antenna_gain" => self.downlink.antenna_gain = value,
            "user_gain" => self.downlink.user_gain = value,
            "eta" => self.downlink.ref_path_gain = value,
            "carrier_freq" => self.downlink.carrier_freq = value,
            "alpha" => self.downlink.alpha = value,
            "beta" => self.downlink.beta = value,
            "noise_dl" => self.downlink.noise_power = value,
            "tau_dl" | "tau" => self.downlink.snr_threshold = value,
            "nakagami_m" | "m" => {
                let v = value.as_f64();
                if v < 1.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
                    return Err(invalid("nakagami_m", format!("must be a positive integer, got {v}")));
                }
                self.downlink.nakagami_m = v as u32;
            }
            "pu" => self.uplink.pu_coeff = value,
            "p_max" | "pmax" => self.uplink.p_max = value,
            "epsilon" => self.uplink.epsilon = value,
            "u0" => self.uplink.device_distance = value,
            "noise_ul" => self.uplink.noise_power = value,
            "tau_ul" => self.uplink.snr_threshold = value,
            "sar_ul" => self.sar.sar_ul = value,
            "sar_dl" => self.sar.sar_dl = value,
            "w_max" => self.compliance.w_max = value,
            "rho" => self.compliance.rho = value,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "key",
                    reason: format!("unknown parameter `{key}`"),
                })
            }
        }
        Ok(())
    }

    /// Reads a numeric parameter by its configuration key.
    pub fn get_value(&self, key: &str) -> Option<T> {
        let v = match key.trim() {
            "lambda_b" => self.point_process.lambda_b,
            "lambda_r" => self.point_process.lambda_r,
            "hole_radius" | "R" | "r" => self.point_process.hole_radius,
            "bs_power" => self.downlink.bs_transmit_power,
            "antenna_gain" => self.downlink.antenna_gain,
            "user_gain" => self.downlink.user_gain,
            "eta" => self.downlink.ref_path_gain,
            "carrier_freq" => self.downlink.carrier_freq,
            "alpha" => self.downlink.alpha,
            "beta" => self.downlink.beta,
            "noise_dl" => self.downlink.noise_power,
            "tau_dl" | "tau" => self.downlink.snr_threshold,
            "nakagami_m" | "m" => T::from_u32(self.downlink.nakagami_m)?,
            "pu" => self.uplink.pu_coeff,
            "p_max" | "pmax" => self.uplink.p_max,
            "epsilon" => self.uplink.epsilon,
            "u0" => self.uplink.device_distance,
            "noise_ul" => self.uplink.noise_power,
            "tau_ul" => self.uplink.snr_threshold,
            "sar_ul" => self.sar.sar_ul,
            "sar_dl" => self.sar.sar_dl,
            "w_max" => self.compliance.w_max,
            "rho" => self.compliance.rho,
            _ => return None,
        };
        Some(v)
    }

    /// Sets a parameter from its textual form, honouring unit suffixes
    /// (`/km2`, `/m2` on densities, `dB` on gains and thresholds).
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let key = key.trim();
        let raw = raw.trim();
        match key {
            "scenario" => {
                let scenario: Scenario = raw.parse()?;
                let keep_pi = self.point_process.php_pi_correction;
                *self = default_model(scenario);
                self.point_process.php_pi_correction = keep_pi;
                Ok(())
            }
            "php_pi_correction" => {
                self.point_process.php_pi_correction = parse_bool(raw)
                    .ok_or_else(|| invalid("php_pi_correction", format!("expected a boolean, got `{raw}`")))?;
                Ok(())
            }
            "recompute_eta" => {
                let flag = parse_bool(raw)
                    .ok_or_else(|| invalid("recompute_eta", format!("expected a boolean, got `{raw}`")))?;
                if flag {
                    self.recompute_ref_path_gain();
                }
                Ok(())
            }
            "lambda_b" | "lambda_r" => {
                let v = parse_density(raw)?;
                self.set_value(key, T::lit(v))
            }
            "antenna_gain" | "user_gain" | "eta" | "tau_dl" | "tau" | "tau_ul" => {
                let v = parse_ratio(raw)?;
                self.set_value(key, T::lit(v))
            }
            _ => {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| invalid("value", format!("`{raw}` is not a number (key `{key}`)")))?;
                self.set_value(key, T::lit(v))
            }
        }
    }

    /// Parses the `key = value` configuration format. A `scenario` line is
    /// applied first wherever it appears; the remaining lines override it.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut scenario = Scenario::WorstCase;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "scenario" {
                scenario = value.parse().map_err(|e: Error| Error::Config { line: line_no, reason: e.to_string() })?;
            } else {
                entries.push((line_no, key.to_string(), value.to_string()));
            }
        }
        let mut model = default_model(scenario);
        for (line, key, value) in entries {
            model
                .set(&key, &value)
                .map_err(|e| Error::Config { line, reason: e.to_string() })?;
        }
        model.validate()?;
        Ok(model)
    }

    /// Writes every parameter in the configuration format; reading the
    /// output back reproduces the model.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let v = self.get_value(key).expect("known key");
            let _ = writeln!(out, "{key} = {v:e}");
        }
        let _ = writeln!(out, "php_pi_correction = {}", self.point_process.php_pi_correction);
        out
    }
}

/// Numeric keys accepted in configuration files, in canonical order.
pub const CONFIG_KEYS: [&str; 23] = [
    "lambda_b",
    "lambda_r",
    "hole_radius",
    "bs_power",
    "antenna_gain",
    "user_gain",
    "eta",
    "carrier_freq",
    "alpha",
    "beta",
    "noise_dl",
    "nakagami_m",
    "tau_dl",
    "pu",
    "p_max",
    "epsilon",
    "u0",
    "noise_ul",
    "tau_ul",
    "sar_ul",
    "sar_dl",
    "w_max",
    "rho",
];

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// Parses a density with an optional unit suffix and returns it per m².
///
/// Accepted forms: `1e-5`, `1e-5/m2`, `1e-5/m^2`, `20/km2`, `20/km^2`.
pub fn parse_density(raw: &str) -> Result<f64> {
    let compact: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    // Divisor rather than factor: 20/1e6 is exactly 2e-5, 20*1e-6 is not.
    let (number, per) = if let Some(n) = strip_any(&lower, &["/km2", "/km^2", "perkm2"]) {
        (n, 1e6)
    } else if let Some(n) = strip_any(&lower, &["/m2", "/m^2", "perm2"]) {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let v: f64 = number
        .parse()
        .map_err(|_| invalid("density", format!("cannot parse density `{raw}`")))?;
    Ok(v / per)
}

/// Parses a linear ratio, or decibels when suffixed with `dB`.
pub fn parse_ratio(raw: &str) -> Result<f64> {
    let compact: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    if let Some(n) = lower.strip_suffix("db") {
        let db: f64 = n
            .parse()
            .map_err(|_| invalid("ratio", format!("cannot parse decibel value `{raw}`")))?;
        Ok(db_to_linear(db))
    } else {
        lower
            .parse()
            .map_err(|_| invalid("ratio", format!("cannot parse value `{raw}`")))
    }
}

fn strip_any<'a>(s: &'a str, suffixes: &[&str]) -> Option<&'a str> {
    suffixes.iter().find_map(|suf| s.strip_suffix(suf))
}
