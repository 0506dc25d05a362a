//! Sweep specifications: which parameter varies over which grid, and which
//! quantities, engines, LOS models and antenna orientations are evaluated at
//! every grid point.

use skyharvest::{Engine, LosModel, Orientation, ScenarioConfig};

use crate::CliError;

/// Scenario parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweptParameter {
    /// Cluster standard deviation `sigma_c` (meters).
    SigmaC,
    /// Platform height (meters), applied to every tier.
    Height,
    /// Total platform density (per square meter); tier densities are
    /// rescaled proportionally.
    UavDensity,
    /// Transmit power (dBm), applied to the cluster-center platform and
    /// every tier.
    TxPowerDbm,
    /// Energy-outage threshold (dBm).
    ThresholdDbm,
}

impl SweptParameter {
    /// Every sweepable parameter, in display order.
    pub const ALL: [SweptParameter; 5] = [
        SweptParameter::SigmaC,
        SweptParameter::Height,
        SweptParameter::UavDensity,
        SweptParameter::TxPowerDbm,
        SweptParameter::ThresholdDbm,
    ];

    /// Name used on the command line and in the CSV `param_name` column.
    pub fn as_str(self) -> &'static str {
        match self {
            SweptParameter::SigmaC => "sigma_c",
            SweptParameter::Height => "height",
            SweptParameter::UavDensity => "uav_density",
            SweptParameter::TxPowerDbm => "tx_power_dbm",
            SweptParameter::ThresholdDbm => "threshold_dbm",
        }
    }

    /// Inverse of [`Self::as_str`].
    pub fn parse(s: &str) -> Result<Self, CliError> {
        SweptParameter::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "unknown sweep parameter \"{s}\"; expected one of sigma_c, height, \
                     uav_density, tx_power_dbm, threshold_dbm"
                ))
            })
    }
}

impl core::fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Variant knobs of an energy-coverage request, encoded as suffixes on the
/// CSV quantity label (`energy_coverage_mu2`, `energy_coverage_h50`,
/// `energy_coverage_n3`, ...).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EcVariant {
    /// Tier hosting the user's cluster parent (1-based).
    pub parent_tier: usize,
    /// Label the quantity with `_mu<k>` even for the default parent; set
    /// whenever several parent choices appear side by side.
    pub tag_parent: bool,
    /// Collapse the network to a single tier at this height (total density
    /// and the first two power entries preserved) before evaluating.
    pub single_height_m: Option<f64>,
    /// Expansion term count override (analytic engine only).
    pub alzer_terms: Option<usize>,
}

impl Default for EcVariant {
    fn default() -> Self {
        EcVariant {
            parent_tier: 1,
            tag_parent: false,
            single_height_m: None,
            alzer_terms: None,
        }
    }
}

/// One output quantity of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    /// Association probabilities per (tier, state), with tier totals.
    Association,
    /// Mean harvested power per tier and total, reported in dBm.
    AvgPower,
    /// Energy coverage at the configured outage threshold.
    EnergyCoverage(EcVariant),
}

impl Quantity {
    /// Plain energy coverage with no variant suffixes.
    pub fn energy_coverage() -> Self {
        Quantity::EnergyCoverage(EcVariant::default())
    }

    /// CSV label: the base name plus `_mu<k>`/`_h<height>`/`_n<terms>`
    /// variant suffixes.
    pub fn label(&self) -> String {
        match self {
            Quantity::Association => "association".to_string(),
            Quantity::AvgPower => "avg_power".to_string(),
            Quantity::EnergyCoverage(v) => {
                let mut s = "energy_coverage".to_string();
                if v.tag_parent || v.parent_tier != 1 {
                    s.push_str(&format!("_mu{}", v.parent_tier));
                }
                if let Some(h) = v.single_height_m {
                    if h.fract() == 0.0 {
                        s.push_str(&format!("_h{}", h as u64));
                    } else {
                        s.push_str(&format!("_h{h}"));
                    }
                }
                if let Some(n) = v.alzer_terms {
                    s.push_str(&format!("_n{n}"));
                }
                s
            }
        }
    }

    /// Inverse of [`Self::label`].
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        match s {
            "association" => Ok(Quantity::Association),
            "avg_power" => Ok(Quantity::AvgPower),
            _ => {
                let Some(rest) = s.strip_prefix("energy_coverage") else {
                    return bad(format!(
                        "unknown quantity \"{s}\"; expected association, avg_power or \
                         energy_coverage (with optional _mu<k>/_h<height>/_n<terms> suffixes)"
                    ));
                };
                let mut v = EcVariant::default();
                for tok in rest.split('_').filter(|t| !t.is_empty()) {
                    if let Some(x) = tok.strip_prefix("mu") {
                        v.parent_tier = x.parse().map_err(|_| {
                            CliError::Validation(format!(
                                "bad parent-tier suffix \"{tok}\" in \"{s}\""
                            ))
                        })?;
                        v.tag_parent = true;
                    } else if let Some(x) = tok.strip_prefix('h') {
                        v.single_height_m = Some(x.parse().map_err(|_| {
                            CliError::Validation(format!("bad height suffix \"{tok}\" in \"{s}\""))
                        })?);
                    } else if let Some(x) = tok.strip_prefix('n') {
                        v.alzer_terms = Some(x.parse().map_err(|_| {
                            CliError::Validation(format!(
                                "bad term-count suffix \"{tok}\" in \"{s}\""
                            ))
                        })?);
                    } else {
                        return bad(format!("unknown quantity suffix \"{tok}\" in \"{s}\""));
                    }
                }
                Ok(Quantity::EnergyCoverage(v))
            }
        }
    }

    /// Apply any variant overrides to `cfg` and return the evaluation
    /// config together with the cluster-parent tier.
    pub fn instantiate(&self, cfg: ScenarioConfig) -> (ScenarioConfig, usize) {
        match self {
            Quantity::Association | Quantity::AvgPower => (cfg, 1),
            Quantity::EnergyCoverage(v) => {
                let mut cfg = cfg;
                let mu = if let Some(h) = v.single_height_m {
                    let p0 = cfg.tx_power_dbm[0];
                    let p1 = cfg.tx_power_dbm.get(1).copied().unwrap_or(p0);
                    cfg.heights = vec![h];
                    cfg.tier_densities = vec![cfg.uav_density];
                    cfg.tx_power_dbm = vec![p0, p1];
                    1
                } else {
                    v.parent_tier
                };
                if let Some(n) = v.alzer_terms {
                    cfg.alzer_terms = n;
                }
                (cfg, mu)
            }
        }
    }
}

/// A full sweep request: the varied parameter and grid, the otherwise-fixed
/// scenario, and the requested quantity/engine/model/orientation facets.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Parameter substituted at each grid point.
    pub swept_parameter: SweptParameter,
    /// Grid values, strictly increasing.
    pub grid: Vec<f64>,
    /// Scenario evaluated at every grid point (before substitution).
    pub fixed: ScenarioConfig,
    /// Quantities emitted per grid point.
    pub quantities: Vec<Quantity>,
    /// Engines evaluated per grid point.
    pub engines: Vec<Engine>,
    /// LOS models evaluated per grid point.
    pub models: Vec<LosModel<f64>>,
    /// Antenna orientations evaluated per grid point.
    pub orientations: Vec<Orientation>,
    /// Originating preset, if any (used for default output naming).
    pub preset_name: Option<String>,
}

impl SweepSpec {
    /// Check every spec invariant; error messages name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.grid.is_empty() {
            return fail("sweep grid must be non-empty".into());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return fail("sweep grid values must be finite".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!(
                "sweep grid must be strictly increasing, got {:?}",
                self.grid
            ));
        }
        let positive = |name: &str| -> Result<(), CliError> {
            if self.grid[0] <= 0.0 {
                Err(CliError::Validation(format!(
                    "{name} grid values must be > 0"
                )))
            } else {
                Ok(())
            }
        };
        match self.swept_parameter {
            SweptParameter::SigmaC | SweptParameter::UavDensity => {
                positive(self.swept_parameter.as_str())?
            }
            SweptParameter::Height => {
                if self.grid[0] < 1.0 {
                    return fail("height grid values must be >= 1 m".into());
                }
            }
            SweptParameter::TxPowerDbm | SweptParameter::ThresholdDbm => {}
        }
        if self.quantities.is_empty() {
            return fail("at least one quantity is required".into());
        }
        if self.engines.is_empty() {
            return fail("at least one engine is required".into());
        }
        if self.models.is_empty() {
            return fail("at least one LOS model is required".into());
        }
        if self.orientations.is_empty() {
            return fail("at least one antenna orientation is required".into());
        }
        let only_analytic = self.engines.iter().all(|&e| e == Engine::Analytic);
        if only_analytic && self.orientations.iter().any(|&o| o != Orientation::Hh) {
            return fail(
                "the analytic engine supports only the hh antenna orientation; add the \
                 monte_carlo engine (or drop hv/vv) to sweep other orientations"
                    .into(),
            );
        }
        for q in &self.quantities {
            if let Quantity::EnergyCoverage(v) = q {
                if v.parent_tier < 1 {
                    return fail("cluster-parent tier must be >= 1".into());
                }
                if v.single_height_m.is_none() && v.parent_tier > self.fixed.tier_count() {
                    return fail(format!(
                        "cluster-parent tier {} exceeds the config's {} tier(s)",
                        v.parent_tier,
                        self.fixed.tier_count()
                    ));
                }
                if let Some(h) = v.single_height_m {
                    if !(h >= 1.0 && h.is_finite()) {
                        return fail(format!("single-height override must be >= 1 m, got {h}"));
                    }
                }
                if v.alzer_terms == Some(0) {
                    return fail("expansion term count must be >= 1".into());
                }
            }
        }
        self.fixed
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(())
    }

    /// The fixed scenario with the swept parameter set to `value` and the
    /// requested model/orientation facets applied.
    pub fn config_for(
        &self,
        value: f64,
        model: LosModel<f64>,
        orientation: Orientation,
    ) -> ScenarioConfig {
        let mut cfg = self.fixed.clone();
        match self.swept_parameter {
            SweptParameter::SigmaC => cfg.cluster_sigma = value,
            SweptParameter::Height => {
                let m = cfg.heights.len();
                cfg.heights = vec![value; m];
            }
            SweptParameter::UavDensity => {
                let old = cfg.uav_density;
                for d in &mut cfg.tier_densities {
                    *d *= value / old;
                }
                cfg.uav_density = value;
            }
            SweptParameter::TxPowerDbm => {
                let m = cfg.tx_power_dbm.len();
                cfg.tx_power_dbm = vec![value; m];
            }
            SweptParameter::ThresholdDbm => cfg.energy_threshold_dbm = value,
        }
        cfg.los_model = model;
        cfg.orientation = orientation;
        cfg
    }
}

/// Parse a grid argument: either `a:b:step` (inclusive of `b` up to a
/// relative rounding slack) or a comma-separated value list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Validation(msg);
    let num = |t: &str| -> Result<f64, CliError> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("bad grid number \"{t}\" in \"{s}\"")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid range must be a:b:step, got \"{s}\"")));
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) {
            return Err(bad(format!("grid step must be > 0, got {step}")));
        }
        if b < a {
            return Err(bad(format!("grid range end {b} is below start {a}")));
        }
        let mut grid = Vec::new();
        let slack = step * 1e-9;
        for k in 0.. {
            let v = a + step * k as f64;
            if v > b + slack {
                break;
            }
            grid.push(v);
        }
        Ok(grid)
    } else {
        s.split(',').map(num).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> SweepSpec {
        SweepSpec {
            swept_parameter: SweptParameter::SigmaC,
            grid: vec![10.0, 20.0],
            fixed: ScenarioConfig::default(),
            quantities: vec![Quantity::Association],
            engines: vec![Engine::Analytic, Engine::MonteCarlo],
            models: vec![LosModel::high_altitude_default()],
            orientations: vec![Orientation::Hh],
            preset_name: None,
        }
    }

    #[test]
    fn grid_range_is_inclusive_of_endpoint() {
        let g = parse_grid("10:90:10").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 10.0);
        assert_eq!(g[8], 90.0);
    }

    #[test]
    fn grid_list_parses_in_order() {
        assert_eq!(parse_grid("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(parse_grid("5:1:1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn quantity_labels_round_trip() {
        let cases = [
            "association",
            "avg_power",
            "energy_coverage",
            "energy_coverage_mu1",
            "energy_coverage_mu2",
            "energy_coverage_h50",
            "energy_coverage_n3",
            "energy_coverage_mu2_n8",
        ];
        for s in cases {
            let q = Quantity::parse(s).unwrap();
            assert_eq!(q.label(), s, "round-trip failed for {s}");
        }
        assert!(Quantity::parse("coverage").is_err());
        assert!(Quantity::parse("energy_coverage_x5").is_err());
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let mut spec = base_spec();
        spec.grid = vec![20.0, 10.0];
        assert!(spec.validate().is_err());
        spec.grid = vec![10.0, 10.0];
        assert!(spec.validate().is_err());
        spec.grid.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn analytic_only_rejects_cross_orientations() {
        let mut spec = base_spec();
        spec.engines = vec![Engine::Analytic];
        spec.orientations = vec![Orientation::Hh, Orientation::Vv];
        let err = spec.validate().unwrap_err().to_string();
        assert!(
            err.contains("monte_carlo"),
            "message should point to the MC engine: {err}"
        );
        spec.engines = vec![Engine::Analytic, Engine::MonteCarlo];
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn parent_tier_must_exist() {
        let mut spec = base_spec();
        spec.quantities = vec![Quantity::EnergyCoverage(EcVariant {
            parent_tier: 2,
            ..Default::default()
        })];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn substitution_touches_only_the_swept_parameter() {
        let spec = base_spec();
        let cfg = spec.config_for(40.0, LosModel::LowAltitude, Orientation::Vv);
        assert_eq!(cfg.cluster_sigma, 40.0);
        assert_eq!(cfg.heights, spec.fixed.heights);
        assert_eq!(cfg.los_model, LosModel::LowAltitude);
        assert_eq!(cfg.orientation, Orientation::Vv);
    }

    #[test]
    fn density_substitution_rescales_tiers() {
        let mut spec = base_spec();
        spec.swept_parameter = SweptParameter::UavDensity;
        spec.fixed = ScenarioConfig::multi_height_demo();
        spec.grid = vec![1e-5, 2e-4];
        let cfg = spec.config_for(2e-4, spec.fixed.los_model, Orientation::Hh);
        assert_eq!(cfg.uav_density, 2e-4);
        assert_eq!(cfg.tier_densities, vec![1e-4, 1e-4]);
        cfg.validate().unwrap();
    }

    #[test]
    fn single_height_override_collapses_the_network() {
        let q = Quantity::parse("energy_coverage_h80").unwrap();
        let (cfg, mu) = q.instantiate(ScenarioConfig::multi_height_demo());
        assert_eq!(mu, 1);
        assert_eq!(cfg.heights, vec![80.0]);
        assert_eq!(cfg.tier_densities, vec![1e-4]);
        assert_eq!(cfg.tx_power_dbm.len(), 2);
        cfg.validate().unwrap();
    }
}
