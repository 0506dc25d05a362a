//! Named experiment presets, one per numbered result figure plus an
//! expansion-order diagnostic.
//!
//! A preset pins the swept parameter, the grid and the quantity/engine/
//! model/orientation facets; everything else (densities, tolerances, trial
//! counts, seeds, ...) flows through from the base config, so presets can be
//! re-run against modified scenarios.

use skyharvest::{Engine, LosModel, Orientation, ScenarioConfig};

use crate::sweep::{EcVariant, Quantity, SweepSpec, SweptParameter};

/// A catalog entry: a stable name, a one-line summary, and a builder that
/// turns a base config into the full sweep.
pub struct PresetDef {
    /// Stable preset name (`fig4`, ..., `alzer_diag`).
    pub name: &'static str,
    /// One-line description shown by the `presets` subcommand.
    pub summary: &'static str,
    /// Builder applied to the base configuration.
    pub build: fn(ScenarioConfig) -> SweepSpec,
}

/// Both engines, in canonical order.
const BOTH_ENGINES: [Engine; 2] = [Engine::Analytic, Engine::MonteCarlo];

fn both_models(base: &ScenarioConfig) -> Vec<LosModel<f64>> {
    // Preserve custom high-altitude parameters from the base config.
    let high = match base.los_model {
        m @ LosModel::HighAltitude { .. } => m,
        _ => LosModel::high_altitude_default(),
    };
    vec![high, LosModel::LowAltitude]
}

fn high_model(base: &ScenarioConfig) -> Vec<LosModel<f64>> {
    match base.los_model {
        m @ LosModel::HighAltitude { .. } => vec![m],
        _ => vec![LosModel::high_altitude_default()],
    }
}

fn sigma_grid() -> Vec<f64> {
    (1..=9).map(|i| 10.0 * i as f64).collect()
}

fn height_grid() -> Vec<f64> {
    (3..=15).map(|i| 10.0 * i as f64).collect()
}

fn density_grid() -> Vec<f64> {
    vec![1e-5, 2e-5, 5e-5, 1e-4]
}

fn power_grid() -> Vec<f64> {
    vec![30.0, 33.0, 37.0, 40.0, 43.0]
}

fn threshold_grid() -> Vec<f64> {
    (-4..=6).map(|i| 5.0 * i as f64).collect()
}

fn spec(
    name: &str,
    base: ScenarioConfig,
    param: SweptParameter,
    grid: Vec<f64>,
    quantities: Vec<Quantity>,
    models: Vec<LosModel<f64>>,
    orientations: Vec<Orientation>,
) -> SweepSpec {
    SweepSpec {
        swept_parameter: param,
        grid,
        fixed: base,
        quantities,
        engines: BOTH_ENGINES.to_vec(),
        models,
        orientations,
        preset_name: Some(name.to_string()),
    }
}

fn fig4(base: ScenarioConfig) -> SweepSpec {
    let models = both_models(&base);
    spec(
        "fig4",
        base,
        SweptParameter::SigmaC,
        sigma_grid(),
        vec![
            Quantity::Association,
            Quantity::AvgPower,
            Quantity::energy_coverage(),
        ],
        models,
        vec![Orientation::Hh],
    )
}

fn fig5(base: ScenarioConfig) -> SweepSpec {
    let models = both_models(&base);
    spec(
        "fig5",
        base,
        SweptParameter::Height,
        height_grid(),
        vec![Quantity::AvgPower],
        models,
        vec![Orientation::Hh],
    )
}

fn fig6a(base: ScenarioConfig) -> SweepSpec {
    let models = both_models(&base);
    spec(
        "fig6a",
        base,
        SweptParameter::Height,
        height_grid(),
        vec![Quantity::Association],
        models,
        vec![Orientation::Hh],
    )
}

fn fig6b(base: ScenarioConfig) -> SweepSpec {
    let models = both_models(&base);
    spec(
        "fig6b",
        base,
        SweptParameter::Height,
        height_grid(),
        vec![Quantity::energy_coverage()],
        models,
        vec![Orientation::Hh],
    )
}

fn fig7(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    spec(
        "fig7",
        base,
        SweptParameter::Height,
        height_grid(),
        vec![Quantity::Association],
        models,
        Orientation::ALL.to_vec(),
    )
}

fn fig8(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    spec(
        "fig8",
        base,
        SweptParameter::Height,
        height_grid(),
        vec![Quantity::energy_coverage()],
        models,
        Orientation::ALL.to_vec(),
    )
}

fn fig9(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    spec(
        "fig9",
        base,
        SweptParameter::UavDensity,
        density_grid(),
        vec![Quantity::AvgPower, Quantity::energy_coverage()],
        models,
        Orientation::ALL.to_vec(),
    )
}

fn fig10(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    spec(
        "fig10",
        base,
        SweptParameter::TxPowerDbm,
        power_grid(),
        vec![Quantity::energy_coverage()],
        models,
        Orientation::ALL.to_vec(),
    )
}

fn fig11(base: ScenarioConfig) -> SweepSpec {
    let models = both_models(&base);
    spec(
        "fig11",
        base,
        SweptParameter::ThresholdDbm,
        threshold_grid(),
        vec![Quantity::energy_coverage()],
        models,
        vec![Orientation::Hh],
    )
}

fn fig12(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    let mut fixed = base;
    let half = fixed.uav_density / 2.0;
    fixed.heights = vec![50.0, 80.0];
    fixed.tier_densities = vec![half, half];
    fixed.tx_power_dbm = vec![fixed.tx_power_dbm[0]; 3];
    let parent = |k: usize| {
        Quantity::EnergyCoverage(EcVariant {
            parent_tier: k,
            tag_parent: true,
            ..Default::default()
        })
    };
    let reference = |h: f64| {
        Quantity::EnergyCoverage(EcVariant {
            single_height_m: Some(h),
            ..Default::default()
        })
    };
    spec(
        "fig12",
        fixed,
        SweptParameter::ThresholdDbm,
        threshold_grid(),
        vec![parent(1), parent(2), reference(50.0), reference(80.0)],
        models,
        vec![Orientation::Hh],
    )
}

fn alzer_diag(base: ScenarioConfig) -> SweepSpec {
    let models = high_model(&base);
    let with_terms = |n: usize| {
        Quantity::EnergyCoverage(EcVariant {
            alzer_terms: Some(n),
            ..Default::default()
        })
    };
    spec(
        "alzer_diag",
        base,
        SweptParameter::ThresholdDbm,
        threshold_grid(),
        vec![
            Quantity::energy_coverage(),
            with_terms(1),
            with_terms(2),
            with_terms(3),
            with_terms(5),
            with_terms(8),
        ],
        models,
        vec![Orientation::Hh],
    )
}

/// The full preset catalog, in listing order.
pub fn preset_catalog() -> &'static [PresetDef] {
    &[
        PresetDef {
            name: "fig4",
            summary: "association, mean harvested power and energy coverage vs cluster spread \
                      sigma_c (10..90 m); high- and low-altitude LOS models, hh",
            build: fig4,
        },
        PresetDef {
            name: "fig5",
            summary: "mean harvested power vs platform height (30..150 m); high- and \
                      low-altitude LOS models, hh",
            build: fig5,
        },
        PresetDef {
            name: "fig6a",
            summary: "association probabilities vs platform height (30..150 m); high- and \
                      low-altitude LOS models, hh",
            build: fig6a,
        },
        PresetDef {
            name: "fig6b",
            summary: "energy coverage vs platform height (30..150 m); high- and low-altitude \
                      LOS models, hh",
            build: fig6b,
        },
        PresetDef {
            name: "fig7",
            summary: "association probabilities vs platform height for hh/hv/vv orientations \
                      (analytic rows flagged unsupported for hv/vv); high-altitude model",
            build: fig7,
        },
        PresetDef {
            name: "fig8",
            summary: "energy coverage vs platform height for hh/hv/vv orientations; \
                      high-altitude model",
            build: fig8,
        },
        PresetDef {
            name: "fig9",
            summary: "mean harvested power and energy coverage vs platform density \
                      (1e-5..1e-4 per m^2) for hh/hv/vv orientations; high-altitude model",
            build: fig9,
        },
        PresetDef {
            name: "fig10",
            summary: "energy coverage vs transmit power (30..43 dBm) for hh/hv/vv \
                      orientations; high-altitude model",
            build: fig10,
        },
        PresetDef {
            name: "fig11",
            summary: "energy coverage (total and per tier) vs outage threshold (-20..30 dBm); \
                      high- and low-altitude LOS models, hh",
            build: fig11,
        },
        PresetDef {
            name: "fig12",
            summary: "energy coverage vs outage threshold when half the platforms fly at 50 m \
                      and half at 80 m, for cluster parents at either height, with \
                      single-height 50 m / 80 m references; high-altitude model, hh",
            build: fig12,
        },
        PresetDef {
            name: "alzer_diag",
            summary: "expansion-order diagnostic: analytic energy coverage with 1/2/3/5/8 \
                      expansion terms vs outage threshold, against the simulation reference; \
                      high-altitude model, hh",
            build: alzer_diag,
        },
    ]
}

/// Build the named preset on top of `base`, or `None` for an unknown name.
pub fn preset(name: &str, base: ScenarioConfig) -> Option<SweepSpec> {
    preset_catalog()
        .iter()
        .find(|p| p.name == name)
        .map(|p| (p.build)(base))
}
