//! Sweep execution: every (grid point, LOS model, orientation, engine,
//! quantity) combination is an independent work unit, evaluated in parallel;
//! rows are written in a fixed deterministic order regardless of completion
//! order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use skyharvest::analysis::{self, AnalysisError, AvgPowerReport};
use skyharvest::montecarlo;
use skyharvest::{
    watts_to_dbm, AssociationReport, CoverageResult, Engine, LinkState, LosModel, Orientation,
    ScenarioConfig,
};

use crate::sweep::{Quantity, SweepSpec};
use crate::CliError;

/// CSV header, fixed by the output schema.
pub const CSV_HEADER: [&str; 11] = [
    "model",
    "orientation",
    "param_name",
    "param_value",
    "quantity",
    "tier",
    "state",
    "engine",
    "value",
    "ci_halfwidth",
    "flags",
];

/// Row carries a value.
pub const FLAG_OK: &str = "";
/// The engine cannot produce this quantity/orientation combination.
pub const FLAG_UNSUPPORTED: &str = "unsupported";
/// The quadrature gave up before reaching its tolerance.
pub const FLAG_NONCONVERGED: &str = "nonconverged";

/// Two-sided 95% normal score, matching the simulation engine's intervals.
const Z95: f64 = 1.96;

/// Summary of a finished sweep.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Data rows written (excluding the header).
    pub rows: usize,
    /// Rows flagged `nonconverged`.
    pub nonconverged: usize,
    /// Rows flagged `unsupported`.
    pub unsupported: usize,
    /// Where the CSV went.
    pub out_path: PathBuf,
}

/// One CSV cell group: a (tier, state) slot with its value and interval.
#[derive(Clone, Copy, Debug)]
struct Cell {
    tier: Option<usize>,
    state: Option<LinkState>,
    value: Option<f64>,
    ci: Option<f64>,
}

/// Evaluated work unit: the cells plus a shared flag.
struct UnitOutput {
    cells: Vec<Cell>,
    flag: &'static str,
}

/// The (tier, state) slots a quantity occupies, aggregates first: the
/// cross-tier total (empty tier/state), then per-tier rows, with per-state
/// rows after each tier for association.
fn layout(q: &Quantity, tiers: usize) -> Vec<(Option<usize>, Option<LinkState>)> {
    let mut slots = vec![(None, None)];
    for k in 0..=tiers {
        slots.push((Some(k), None));
        if matches!(q, Quantity::Association) {
            for s in LinkState::ALL {
                slots.push((Some(k), Some(s)));
            }
        }
    }
    slots
}

fn filled(
    q: &Quantity,
    tiers: usize,
    fill: impl Fn(Option<usize>, Option<LinkState>) -> (Option<f64>, Option<f64>),
) -> Vec<Cell> {
    layout(q, tiers)
        .into_iter()
        .map(|(tier, state)| {
            let (value, ci) = fill(tier, state);
            Cell {
                tier,
                state,
                value,
                ci,
            }
        })
        .collect()
}

fn blank(q: &Quantity, tiers: usize, flag: &'static str) -> UnitOutput {
    UnitOutput {
        cells: filled(q, tiers, |_, _| (None, None)),
        flag,
    }
}

/// 95% half-width of a proportion estimated from `n` trials.
fn proportion_ci(p: f64, n: Option<f64>) -> Option<f64> {
    n.map(|n| Z95 * (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n).sqrt())
}

fn association_cells(
    q: &Quantity,
    rep: &AssociationReport,
    tiers: usize,
    n: Option<f64>,
) -> Vec<Cell> {
    filled(q, tiers, |tier, state| {
        let p = match (tier, state) {
            (None, _) => rep.total(),
            (Some(k), None) => rep.tier_total(k),
            (Some(k), Some(s)) => rep.get(k, s),
        };
        (Some(p), proportion_ci(p, n))
    })
}

fn avg_power_cells(q: &Quantity, rep: &AvgPowerReport<f64>, tiers: usize) -> Vec<Cell> {
    let total_ci_db = rep.total_ci_w.and_then(|ci| {
        if rep.total_w - ci > 0.0 {
            Some(5.0 * ((rep.total_w + ci) / (rep.total_w - ci)).log10())
        } else {
            None
        }
    });
    filled(q, tiers, |tier, _| match tier {
        None => (Some(watts_to_dbm(rep.total_w)), total_ci_db),
        Some(k) => (Some(watts_to_dbm(rep.per_tier_w[k])), None),
    })
}

fn coverage_cells(q: &Quantity, res: &CoverageResult, tiers: usize, n: Option<f64>) -> Vec<Cell> {
    let total_ci = res.total_ec_ci.as_ref().map(|v| v[0]);
    filled(q, tiers, |tier, _| match tier {
        None => (Some(res.total_ec[0]), total_ci),
        Some(k) => {
            // Unconditional contribution of tier k: association weight times
            // conditional coverage, summed over link states.
            let p: f64 = res
                .per_tier_state
                .iter()
                .filter(|t| t.tier == k)
                .map(|t| t.weight * t.conditional_ec[0])
                .sum();
            (Some(p), proportion_ci(p, n))
        }
    })
}

fn evaluate(
    spec: &SweepSpec,
    value: f64,
    model: LosModel<f64>,
    orientation: Orientation,
    engine: Engine,
    q: &Quantity,
) -> Result<UnitOutput, CliError> {
    let (cfg, mu) = q.instantiate(spec.config_for(value, model, orientation));
    let tiers = cfg.tier_count();
    match engine {
        Engine::Analytic => {
            if orientation != Orientation::Hh {
                return Ok(blank(q, tiers, FLAG_UNSUPPORTED));
            }
            match analytic_cells(&cfg, mu, q, tiers) {
                Ok(cells) => Ok(UnitOutput {
                    cells,
                    flag: FLAG_OK,
                }),
                Err(AnalysisError::Quadrature(_)) => Ok(blank(q, tiers, FLAG_NONCONVERGED)),
                Err(AnalysisError::UnsupportedOrientation(_)) => {
                    Ok(blank(q, tiers, FLAG_UNSUPPORTED))
                }
                Err(e) => Err(CliError::Runtime(e.to_string())),
            }
        }
        Engine::MonteCarlo => {
            if let Quantity::EnergyCoverage(v) = q {
                // Term count is an analytic-expansion knob; the simulation
                // has no counterpart, so the gap is made explicit.
                if v.alzer_terms.is_some() {
                    return Ok(blank(q, tiers, FLAG_UNSUPPORTED));
                }
            }
            let thresholds = match q {
                Quantity::EnergyCoverage(_) => vec![cfg.threshold_w()],
                _ => Vec::new(),
            };
            let res = montecarlo::estimate_multiheight(&cfg, mu, &thresholds)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let n = Some(cfg.mc_trials as f64);
            let cells = match q {
                Quantity::Association => {
                    let rep = res
                        .association
                        .expect("simulation always counts associations");
                    association_cells(q, &rep, tiers, n)
                }
                Quantity::AvgPower => {
                    let rep = res.avg_power.expect("simulation always accumulates power");
                    avg_power_cells(q, &rep, tiers)
                }
                Quantity::EnergyCoverage(_) => coverage_cells(q, &res, tiers, n),
            };
            Ok(UnitOutput {
                cells,
                flag: FLAG_OK,
            })
        }
    }
}

fn analytic_cells(
    cfg: &ScenarioConfig,
    mu: usize,
    q: &Quantity,
    tiers: usize,
) -> Result<Vec<Cell>, AnalysisError<f64>> {
    match q {
        Quantity::Association => {
            let rep = analysis::association_probabilities(cfg)?;
            Ok(association_cells(q, &rep, tiers, None))
        }
        Quantity::AvgPower => {
            let res = analysis::avg_harvested_power(cfg)?;
            let rep = res
                .avg_power
                .expect("analytic mean power is always populated");
            Ok(avg_power_cells(q, &rep, tiers))
        }
        Quantity::EnergyCoverage(_) => {
            let res = analysis::energy_coverage_multiheight(cfg, mu, &[cfg.threshold_w()])?;
            Ok(coverage_cells(q, &res, tiers, None))
        }
    }
}

/// Nine significant digits for every numeric cell.
fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Run the sweep and write one CSV to `out_path`.
///
/// The unit grid is evaluated in parallel; rows land in deterministic
/// (grid value, model, orientation, engine, quantity, tier, state) order, so
/// identical specs and seeds produce byte-identical files. Quadrature
/// failures flag their rows `nonconverged` and the run continues.
pub fn run_sweep(spec: &SweepSpec, out_path: &Path) -> Result<RunReport, CliError> {
    spec.validate()?;
    let mut writer = csv::Writer::from_path(out_path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out_path.display())))?;

    let mut units: Vec<(f64, LosModel<f64>, Orientation, Engine, Quantity)> = Vec::new();
    for &value in &spec.grid {
        for &model in &spec.models {
            for &orientation in &spec.orientations {
                for &engine in &spec.engines {
                    for &quantity in &spec.quantities {
                        units.push((value, model, orientation, engine, quantity));
                    }
                }
            }
        }
    }

    let outputs: Vec<UnitOutput> = units
        .par_iter()
        .map(|&(value, model, orientation, engine, ref q)| {
            evaluate(spec, value, model, orientation, engine, q)
        })
        .collect::<Result<_, _>>()?;

    let io_err = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", out_path.display()));
    writer.write_record(CSV_HEADER).map_err(io_err)?;
    let mut report = RunReport {
        rows: 0,
        nonconverged: 0,
        unsupported: 0,
        out_path: out_path.to_path_buf(),
    };
    let param_name = spec.swept_parameter.as_str();
    for ((value, model, orientation, engine, quantity), out) in units.iter().zip(&outputs) {
        for cell in &out.cells {
            writer
                .write_record([
                    model.as_str(),
                    orientation.as_str(),
                    param_name,
                    &fmt_num(*value),
                    &quantity.label(),
                    &cell.tier.map(|k| k.to_string()).unwrap_or_default(),
                    cell.state.map(|s| s.as_str()).unwrap_or(""),
                    engine.as_str(),
                    &cell.value.map(fmt_num).unwrap_or_default(),
                    &cell.ci.map(fmt_num).unwrap_or_default(),
                    out.flag,
                ])
                .map_err(io_err)?;
            report.rows += 1;
            match out.flag {
                FLAG_NONCONVERGED => report.nonconverged += 1,
                FLAG_UNSUPPORTED => report.unsupported += 1,
                _ => {}
            }
        }
    }
    writer
        .flush()
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out_path.display())))?;
    Ok(report)
}
