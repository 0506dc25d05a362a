//! Scenario parameterization: typed, validated configuration with
//! defaults, a flat TOML-subset file format, and the dBm↔watt boundary
//! conversions.
//!
//! All numerical core code works in linear SI units (watts, meters); decibel
//! quantities appear only here and at the CSV boundary. Every config key is
//! documented on the corresponding [`ScenarioConfig`] field; unknown keys in
//! a file are a hard error so typos cannot silently fall back to defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{LosModel, Orientation, HIGH_ALTITUDE_B, HIGH_ALTITUDE_C};
use crate::{cast, Scalar};

/// Convert dBm to watts: `10^((p − 30)/10)`.
pub fn dbm_to_watts<T: Scalar>(p_dbm: T) -> T {
    cast::<T>(10.0).powf((p_dbm - cast(30.0)) / cast(10.0))
}

/// Convert watts to dBm: `10·log10(p) + 30`.
pub fn watts_to_dbm<T: Scalar>(p_w: T) -> T {
    cast::<T>(10.0) * p_w.log10() + cast(30.0)
}

/// Full parameterization of one network scenario.
///
/// Field names double as config-file keys. Defaults (via
/// [`ScenarioConfig::default`]) are the baseline suburban operating point
/// used throughout the test suite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig<T> {
    /// `uav_density` — total transmitter density λ_U, platforms per m².
    /// Default `1e-4`.
    pub uav_density: T,
    /// `cluster_sigma` — user-offset standard deviation σ_c, meters.
    /// Default `10`.
    pub cluster_sigma: T,
    /// `heights` — platform heights per tier, meters (`[H]` or `[H_1..H_M]`).
    /// Default `[50]`.
    pub heights: Vec<T>,
    /// `tier_densities` — per-tier densities λ_{U,1..M}, per m²; must sum to
    /// `uav_density`. Default: `uav_density` split equally.
    pub tier_densities: Vec<T>,
    /// `tx_power_dbm` — transmit powers, dBm; index 0 is the cluster-center
    /// platform, then one entry per tier. Length `M + 1`. Default `[37, 37]`.
    pub tx_power_dbm: Vec<T>,
    /// `alpha_los` — LOS path-loss exponent, `≥ 2`. Default `2`.
    pub alpha_los: T,
    /// `alpha_nlos` — NLOS path-loss exponent, `≥ alpha_los`. Default `4`.
    pub alpha_nlos: T,
    /// `los_model` — `"high"` | `"low"` | `"always"`, with optional `los_b`,
    /// `los_c` parameters for the high-altitude model. Default `"high"` with
    /// the suburban fit (11.95, 0.136).
    pub los_model: LosModel<T>,
    /// `orientation` — `"hh"` | `"hv"` | `"vv"` dipole orientation pair.
    /// Default `"hh"` (the only orientation with an analytic path).
    pub orientation: Orientation,
    /// `energy_threshold_dbm` — energy-outage threshold Γ, dBm. Default `0`.
    pub energy_threshold_dbm: T,
    /// `rectifier_efficiency` — linear harvester efficiency ξ ∈ (0, 1].
    /// Default `1`.
    pub rectifier_efficiency: T,
    /// `alzer_terms` — term count 𝒩 of the exponential-step expansion used
    /// by the analytic coverage engine, `≥ 1`. Default `5`.
    pub alzer_terms: usize,
    /// `quadrature_rel_tol` — relative tolerance for all outer integrals
    /// (inner nested integrals run 10× tighter), in `(1e-12, 1e-2)`.
    /// Default `1e-6`.
    pub quadrature_rel_tol: T,
    /// `mc_trials` — Monte Carlo trial count, `≥ 1` (estimators require
    /// `≥ 100`). Default `20000`.
    pub mc_trials: u64,
    /// `mc_window_radius_m` — radius of the simulated disc, meters.
    /// Default `2000`.
    pub mc_window_radius_m: T,
    /// `rng_seed` — Monte Carlo seed; equal seeds give bit-identical results
    /// at any thread count. Default `1`.
    pub rng_seed: u64,
}

impl<T: Scalar> Default for ScenarioConfig<T> {
    fn default() -> Self {
        ScenarioConfig {
            uav_density: cast(1e-4),
            cluster_sigma: cast(10.0),
            heights: vec![cast(50.0)],
            tier_densities: vec![cast(1e-4)],
            tx_power_dbm: vec![cast(37.0), cast(37.0)],
            alpha_los: cast(2.0),
            alpha_nlos: cast(4.0),
            los_model: LosModel::high_altitude_default(),
            orientation: Orientation::Hh,
            energy_threshold_dbm: T::zero(),
            rectifier_efficiency: T::one(),
            alzer_terms: 5,
            quadrature_rel_tol: cast(1e-6),
            mc_trials: 20_000,
            mc_window_radius_m: cast(2000.0),
            rng_seed: 1,
        }
    }
}

impl<T: Scalar> ScenarioConfig<T> {
    /// Two-tier demo: heights 50 m and 80 m, total density split evenly,
    /// all powers 37 dBm.
    pub fn multi_height_demo() -> Self {
        ScenarioConfig {
            heights: vec![cast(50.0), cast(80.0)],
            tier_densities: vec![cast(5e-5), cast(5e-5)],
            tx_power_dbm: vec![cast(37.0); 3],
            ..Self::default()
        }
    }

    /// Number of planar tiers M (the cluster-center platform is extra).
    pub fn tier_count(&self) -> usize {
        self.heights.len()
    }

    /// Transmit power of index `k` in watts (0 = cluster-center platform,
    /// then tiers 1..=M).
    pub fn tx_power_w(&self, k: usize) -> T {
        dbm_to_watts(self.tx_power_dbm[k])
    }

    /// All transmit powers in watts, indexed as [`Self::tx_power_w`].
    pub fn tx_powers_w(&self) -> Vec<T> {
        self.tx_power_dbm.iter().map(|&p| dbm_to_watts(p)).collect()
    }

    /// Energy-outage threshold in watts.
    pub fn threshold_w(&self) -> T {
        dbm_to_watts(self.energy_threshold_dbm)
    }

    /// Path-loss exponent of a link state.
    pub fn alpha(&self, state: crate::channel::LinkState) -> T {
        match state {
            crate::channel::LinkState::Los => self.alpha_los,
            crate::channel::LinkState::Nlos => self.alpha_nlos,
        }
    }

    /// Check every config invariant; error messages name the violated key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Validation(msg));
        if !(self.uav_density > T::zero() && self.uav_density.is_finite()) {
            return fail(format!("uav_density must be > 0, got {}", self.uav_density));
        }
        if !(self.cluster_sigma > T::zero() && self.cluster_sigma.is_finite()) {
            return fail(format!(
                "cluster_sigma must be > 0, got {}",
                self.cluster_sigma
            ));
        }
        if self.heights.is_empty() {
            return fail("heights must contain at least one tier".into());
        }
        if self
            .heights
            .iter()
            .any(|&h| !(h >= T::one() && h.is_finite()))
        {
            return fail(format!(
                "heights must all be >= 1 m, got {:?}",
                self.heights
            ));
        }
        if self.tier_densities.len() != self.heights.len() {
            return fail(format!(
                "tier_densities has {} entries but heights has {}",
                self.tier_densities.len(),
                self.heights.len()
            ));
        }
        if self
            .tier_densities
            .iter()
            .any(|&l| !(l > T::zero() && l.is_finite()))
        {
            return fail(format!(
                "tier_densities must all be > 0, got {:?}",
                self.tier_densities
            ));
        }
        let sum: T = self.tier_densities.iter().copied().sum();
        if (sum - self.uav_density).abs() > cast::<T>(1e-12) * self.uav_density {
            return fail(format!(
                "tier_densities sums to {sum:e} but uav_density is {:e}",
                self.uav_density
            ));
        }
        if self.tx_power_dbm.len() != self.heights.len() + 1 {
            return fail(format!(
                "tx_power_dbm needs {} entries (cluster-center platform + {} tiers), got {}",
                self.heights.len() + 1,
                self.heights.len(),
                self.tx_power_dbm.len()
            ));
        }
        if self.tx_power_dbm.iter().any(|p| !p.is_finite()) {
            return fail("tx_power_dbm entries must be finite".into());
        }
        if !(self.alpha_los >= cast(2.0)) {
            return fail(format!("alpha_los must be >= 2, got {}", self.alpha_los));
        }
        if !(self.alpha_nlos >= self.alpha_los) {
            return fail(format!(
                "alpha_nlos ({}) must be >= alpha_los ({})",
                self.alpha_nlos, self.alpha_los
            ));
        }
        if let Err(e) = self.los_model.validate() {
            return fail(e.to_string());
        }
        if !self.energy_threshold_dbm.is_finite() {
            return fail("energy_threshold_dbm must be finite".into());
        }
        if !(self.rectifier_efficiency > T::zero() && self.rectifier_efficiency <= T::one()) {
            return fail(format!(
                "rectifier_efficiency must lie in (0, 1], got {}",
                self.rectifier_efficiency
            ));
        }
        if self.alzer_terms < 1 {
            return fail("alzer_terms must be >= 1".into());
        }
        if !(self.quadrature_rel_tol > cast(1e-12) && self.quadrature_rel_tol < cast(1e-2)) {
            return fail(format!(
                "quadrature_rel_tol must lie in (1e-12, 1e-2), got {:e}",
                self.quadrature_rel_tol
            ));
        }
        if self.mc_trials == 0 {
            return fail("mc_trials must be >= 1".into());
        }
        if !(self.mc_window_radius_m > T::zero() && self.mc_window_radius_m.is_finite()) {
            return fail(format!(
                "mc_window_radius_m must be > 0, got {}",
                self.mc_window_radius_m
            ));
        }
        Ok(())
    }

    /// Parse a config from the flat key-value (TOML-subset) text format,
    /// filling omitted keys with defaults and validating the result.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Load and validate a config file (see [`Self::from_toml_str`]).
    pub fn load_config(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Serialize to the same format accepted by [`Self::from_toml_str`];
    /// load → serialize → load is field-wise idempotent.
    pub fn to_toml_string(&self) -> String {
        let to64 = |v: T| v.to_f64().expect("scalar must convert to f64");
        let (los_b, los_c) = match self.los_model {
            LosModel::HighAltitude { b, c } => (Some(to64(b)), Some(to64(c))),
            _ => (None, None),
        };
        let full = RawConfigOut {
            uav_density: to64(self.uav_density),
            cluster_sigma: to64(self.cluster_sigma),
            heights: self.heights.iter().map(|&h| to64(h)).collect(),
            tier_densities: self.tier_densities.iter().map(|&l| to64(l)).collect(),
            tx_power_dbm: self.tx_power_dbm.iter().map(|&p| to64(p)).collect(),
            alpha_los: to64(self.alpha_los),
            alpha_nlos: to64(self.alpha_nlos),
            los_model: self.los_model.as_str().to_string(),
            los_b,
            los_c,
            orientation: self.orientation.as_str().to_string(),
            energy_threshold_dbm: to64(self.energy_threshold_dbm),
            rectifier_efficiency: to64(self.rectifier_efficiency),
            alzer_terms: self.alzer_terms as u64,
            quadrature_rel_tol: to64(self.quadrature_rel_tol),
            mc_trials: self.mc_trials,
            mc_window_radius_m: to64(self.mc_window_radius_m),
            rng_seed: self.rng_seed,
        };
        toml::to_string(&full).expect("config serialization cannot fail")
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let fail = |msg: String| Err(ConfigError::Validation(msg));

        // Tier count comes from whichever per-tier list is present; if both
        // are, their lengths must agree (validated below via the struct).
        let tiers = raw
            .heights
            .as_ref()
            .map(Vec::len)
            .or_else(|| raw.tier_densities.as_ref().map(Vec::len))
            .unwrap_or(1);
        if tiers == 0 {
            return fail("heights must contain at least one tier".into());
        }

        let heights: Vec<f64> = raw.heights.unwrap_or_else(|| vec![50.0; tiers]);
        let uav_density = match (raw.uav_density, &raw.tier_densities) {
            (Some(l), _) => l,
            (None, Some(list)) => list.iter().sum(),
            (None, None) => 1e-4,
        };
        let tier_densities: Vec<f64> = raw
            .tier_densities
            .unwrap_or_else(|| vec![uav_density / tiers as f64; tiers]);
        let tx_power_dbm: Vec<f64> = raw
            .tx_power_dbm
            .unwrap_or_else(|| vec![37.0; heights.len() + 1]);

        let los_model = match raw.los_model.as_deref().unwrap_or("high") {
            "high" => LosModel::HighAltitude {
                b: cast(raw.los_b.unwrap_or(HIGH_ALTITUDE_B)),
                c: cast(raw.los_c.unwrap_or(HIGH_ALTITUDE_C)),
            },
            other => {
                if raw.los_b.is_some() || raw.los_c.is_some() {
                    return fail(format!(
                        "los_b/los_c apply only to the high-altitude model, not \"{other}\""
                    ));
                }
                match other {
                    "low" => LosModel::LowAltitude,
                    "always" => LosModel::AlwaysLos,
                    _ => {
                        return fail(format!(
                            "los_model must be \"high\", \"low\" or \"always\", got \"{other}\""
                        ))
                    }
                }
            }
        };

        let orientation = match raw.orientation.as_deref().unwrap_or("hh") {
            "hh" => Orientation::Hh,
            "hv" => Orientation::Hv,
            "vv" => Orientation::Vv,
            other => {
                return fail(format!(
                    "orientation must be \"hh\", \"hv\" or \"vv\", got \"{other}\""
                ))
            }
        };

        let config = ScenarioConfig {
            uav_density: cast(uav_density),
            cluster_sigma: cast(raw.cluster_sigma.unwrap_or(10.0)),
            heights: heights.into_iter().map(cast).collect(),
            tier_densities: tier_densities.into_iter().map(cast).collect(),
            tx_power_dbm: tx_power_dbm.into_iter().map(cast).collect(),
            alpha_los: cast(raw.alpha_los.unwrap_or(2.0)),
            alpha_nlos: cast(raw.alpha_nlos.unwrap_or(4.0)),
            los_model,
            orientation,
            energy_threshold_dbm: cast(raw.energy_threshold_dbm.unwrap_or(0.0)),
            rectifier_efficiency: cast(raw.rectifier_efficiency.unwrap_or(1.0)),
            alzer_terms: raw.alzer_terms.unwrap_or(5) as usize,
            quadrature_rel_tol: cast(raw.quadrature_rel_tol.unwrap_or(1e-6)),
            mc_trials: raw.mc_trials.unwrap_or(20_000),
            mc_window_radius_m: cast(raw.mc_window_radius_m.unwrap_or(2000.0)),
            rng_seed: raw.rng_seed.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }
}

/// File-format view: every key optional, unknown keys rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    uav_density: Option<f64>,
    cluster_sigma: Option<f64>,
    heights: Option<Vec<f64>>,
    tier_densities: Option<Vec<f64>>,
    tx_power_dbm: Option<Vec<f64>>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    los_model: Option<String>,
    los_b: Option<f64>,
    los_c: Option<f64>,
    orientation: Option<String>,
    energy_threshold_dbm: Option<f64>,
    rectifier_efficiency: Option<f64>,
    alzer_terms: Option<u64>,
    quadrature_rel_tol: Option<f64>,
    mc_trials: Option<u64>,
    mc_window_radius_m: Option<f64>,
    rng_seed: Option<u64>,
}

/// Serialization view: concrete values, stable key order.
#[derive(Debug, Serialize)]
struct RawConfigOut {
    uav_density: f64,
    cluster_sigma: f64,
    heights: Vec<f64>,
    tier_densities: Vec<f64>,
    tx_power_dbm: Vec<f64>,
    alpha_los: f64,
    alpha_nlos: f64,
    los_model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    los_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    los_c: Option<f64>,
    orientation: String,
    energy_threshold_dbm: f64,
    rectifier_efficiency: f64,
    alzer_terms: u64,
    quadrature_rel_tol: f64,
    mc_trials: u64,
    mc_window_radius_m: f64,
    rng_seed: u64,
}

/// Configuration loading/validation failures.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// Filesystem-level failure reading the config file.
    #[error("cannot read config file {path}: {source}")]
    Io {
        /// Offending path.
        path: String,
        /// Underlying I/O error.
        #[source]
        source: std::io::Error,
    },
    /// File does not parse in the documented key-value format (including
    /// unknown keys).
    #[error("config parse error: {0}")]
    Parse(String),
    /// Parsed values violate an invariant; the message names the key.
    #[error("invalid config: {0}")]
    Validation(String),
}
