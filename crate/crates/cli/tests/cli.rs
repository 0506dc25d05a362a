//! End-to-end checks of the sweep runner and the `skyharvest` binary:
//! schema stability, byte-level determinism, single-point equivalence with
//! direct engine calls, smoke runs of every preset, and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

use approx::assert_abs_diff_eq;
use skyharvest::{analysis, Engine, LinkState, LosModel, Orientation, ScenarioConfig};
use skyharvest_cli::presets::{preset, preset_catalog};
use skyharvest_cli::runner::{run_sweep, CSV_HEADER};
use skyharvest_cli::sweep::{Quantity, SweepSpec, SweptParameter};

/// Coarse-but-valid settings for smoke runs: reduced trials and a loose
/// quadrature tolerance.
fn smoke_config() -> ScenarioConfig {
    ScenarioConfig {
        mc_trials: 1000,
        quadrature_rel_tol: 5e-3,
        ..Default::default()
    }
}

/// Parsed CSV row, keyed by header name.
#[derive(Clone, Debug)]
struct Row {
    fields: Vec<String>,
}

impl Row {
    fn get(&self, name: &str) -> &str {
        let idx = CSV_HEADER.iter().position(|&h| h == name).unwrap();
        &self.fields[idx]
    }

    fn value(&self) -> f64 {
        self.get("value").parse().unwrap()
    }
}

fn read_rows(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        CSV_HEADER.join(","),
        "header mismatch"
    );
    lines
        .map(|l| Row {
            fields: l.split(',').map(str::to_string).collect(),
        })
        .collect()
}

#[test]
fn every_preset_runs_at_smoke_settings() {
    let dir = tempfile::tempdir().unwrap();
    for p in preset_catalog() {
        let spec = preset(p.name, smoke_config()).unwrap();
        let out = dir.path().join(format!("{}.csv", p.name));
        let report =
            run_sweep(&spec, &out).unwrap_or_else(|e| panic!("preset {} failed: {e}", p.name));
        assert!(report.rows > 0, "preset {} wrote no rows", p.name);
        assert_eq!(
            report.nonconverged, 0,
            "preset {} left nonconverged rows",
            p.name
        );
        let rows = read_rows(&out);
        assert_eq!(
            rows.len(),
            report.rows,
            "preset {} row count mismatch",
            p.name
        );
        for row in &rows {
            assert_eq!(row.fields.len(), CSV_HEADER.len());
            match row.get("flags") {
                "" => {
                    let v = row.value();
                    assert!(
                        v.is_finite() || v == f64::NEG_INFINITY,
                        "bad value in {}",
                        p.name
                    );
                }
                "unsupported" => assert!(row.get("value").is_empty()),
                other => panic!("unexpected flag {other:?} in preset {}", p.name),
            }
        }
    }
}

#[test]
fn fig4_association_decreases_with_cluster_spread() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = preset("fig4", smoke_config()).unwrap();
    spec.engines = vec![Engine::Analytic];
    spec.quantities = vec![Quantity::Association];
    let out = dir.path().join("fig4.csv");
    run_sweep(&spec, &out).unwrap();

    for model in ["high", "low"] {
        let a0: Vec<f64> = read_rows(&out)
            .iter()
            .filter(|r| {
                r.get("model") == model
                    && r.get("quantity") == "association"
                    && r.get("tier") == "0"
                    && r.get("state").is_empty()
            })
            .map(|r| r.value())
            .collect();
        assert_eq!(a0.len(), 9, "expected one tier-0 total per grid point");
        for w in a0.windows(2) {
            assert!(
                w[1] < w[0],
                "tier-0 association should fall as the cluster spreads ({model}): {a0:?}"
            );
        }
    }
}

#[test]
fn single_point_sweep_matches_direct_engine_calls() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::default();
    let spec = SweepSpec {
        swept_parameter: SweptParameter::Height,
        grid: vec![50.0],
        fixed: cfg.clone(),
        quantities: vec![Quantity::Association, Quantity::energy_coverage()],
        engines: vec![Engine::Analytic],
        models: vec![cfg.los_model],
        orientations: vec![Orientation::Hh],
        preset_name: None,
    };
    let out = dir.path().join("point.csv");
    run_sweep(&spec, &out).unwrap();
    let rows = read_rows(&out);

    let direct_assoc = analysis::association_probabilities(&cfg).unwrap();
    let direct_ec = analysis::energy_coverage(&cfg, &[cfg.threshold_w()]).unwrap();

    let lookup = |quantity: &str, tier: &str, state: &str| -> f64 {
        rows.iter()
            .find(|r| {
                r.get("quantity") == quantity && r.get("tier") == tier && r.get("state") == state
            })
            .unwrap_or_else(|| panic!("missing row {quantity}/{tier}/{state}"))
            .value()
    };

    // Nine significant digits survive the CSV round trip.
    assert_abs_diff_eq!(
        lookup("association", "0", "los"),
        direct_assoc.get(0, LinkState::Los),
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        lookup("association", "1", "nlos"),
        direct_assoc.get(1, LinkState::Nlos),
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        lookup("association", "", ""),
        direct_assoc.total(),
        epsilon = 1e-8
    );
    assert_abs_diff_eq!(
        lookup("energy_coverage", "", ""),
        direct_ec.total_ec[0],
        epsilon = 1e-8
    );
    let tier0: f64 = direct_ec
        .per_tier_state
        .iter()
        .filter(|t| t.tier == 0)
        .map(|t| t.weight * t.conditional_ec[0])
        .sum();
    assert_abs_diff_eq!(lookup("energy_coverage", "0", ""), tier0, epsilon = 1e-8);
}

#[test]
fn identical_specs_produce_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        mc_trials: 500,
        quadrature_rel_tol: 5e-3,
        ..Default::default()
    };
    let spec = SweepSpec {
        swept_parameter: SweptParameter::SigmaC,
        grid: vec![10.0, 20.0],
        fixed: cfg,
        quantities: vec![
            Quantity::Association,
            Quantity::AvgPower,
            Quantity::energy_coverage(),
        ],
        engines: vec![Engine::Analytic, Engine::MonteCarlo],
        models: vec![LosModel::high_altitude_default(), LosModel::LowAltitude],
        orientations: vec![Orientation::Hh],
        preset_name: None,
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_sweep(&spec, &a).unwrap();
    run_sweep(&spec, &b).unwrap();
    let (bytes_a, bytes_b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!bytes_a.is_empty());
    assert_eq!(
        bytes_a, bytes_b,
        "same spec and seed must reproduce the file exactly"
    );
}

#[test]
fn csv_numbers_carry_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        mc_trials: 500,
        quadrature_rel_tol: 5e-3,
        ..Default::default()
    };
    let spec = SweepSpec {
        swept_parameter: SweptParameter::ThresholdDbm,
        grid: vec![0.0],
        fixed: cfg,
        quantities: vec![Quantity::energy_coverage()],
        engines: vec![Engine::MonteCarlo],
        models: vec![LosModel::high_altitude_default()],
        orientations: vec![Orientation::Hh],
        preset_name: None,
    };
    let out = dir.path().join("digits.csv");
    run_sweep(&spec, &out).unwrap();
    for row in read_rows(&out) {
        for name in ["param_value", "value"] {
            let cell = row.get(name);
            if cell.is_empty() || cell == "-inf" {
                continue;
            }
            let (mantissa, _exp) = cell
                .split_once('e')
                .unwrap_or_else(|| panic!("{name} cell {cell:?} is not in scientific notation"));
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(
                digits, 9,
                "{name} cell {cell:?} should carry 9 significant digits"
            );
        }
    }
}

#[test]
fn unsupported_orientation_rows_are_flagged_not_absent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = smoke_config();
    cfg.mc_trials = 300;
    let spec = SweepSpec {
        swept_parameter: SweptParameter::Height,
        grid: vec![50.0],
        fixed: cfg,
        quantities: vec![Quantity::energy_coverage()],
        engines: vec![Engine::Analytic, Engine::MonteCarlo],
        models: vec![LosModel::high_altitude_default()],
        orientations: vec![Orientation::Vv],
        preset_name: None,
    };
    let out = dir.path().join("vv.csv");
    let report = run_sweep(&spec, &out).unwrap();
    assert!(report.unsupported > 0);
    let rows = read_rows(&out);
    let analytic: Vec<&Row> = rows
        .iter()
        .filter(|r| r.get("engine") == "analytic")
        .collect();
    let mc: Vec<&Row> = rows
        .iter()
        .filter(|r| r.get("engine") == "monte_carlo")
        .collect();
    assert_eq!(
        analytic.len(),
        mc.len(),
        "flagged rows keep the row count symmetric"
    );
    for r in analytic {
        assert_eq!(r.get("flags"), "unsupported");
        assert!(r.get("value").is_empty());
    }
    for r in mc {
        assert_eq!(r.get("flags"), "");
        assert!(!r.get("value").is_empty());
    }
}

// ---------------------------------------------------------------------------
// Binary-level checks.
// ---------------------------------------------------------------------------

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skyharvest"))
}

#[test]
fn bin_presets_lists_the_catalog() {
    let output = bin().arg("presets").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    for p in preset_catalog() {
        assert!(text.contains(p.name), "presets output misses {}", p.name);
    }
    assert!(preset_catalog().len() >= 11);
}

#[test]
fn bin_validate_distinguishes_good_bad_and_missing_configs() {
    let dir = tempfile::tempdir().unwrap();

    let good = dir.path().join("good.toml");
    fs::write(&good, ScenarioConfig::default().to_toml_string()).unwrap();
    let status = bin()
        .args(["validate", "--config"])
        .arg(&good)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "uav_density = -1.0\n").unwrap();
    let status = bin()
        .args(["validate", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let status = bin()
        .args(["validate", "--config"])
        .arg(dir.path().join("missing.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn bin_run_preset_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("smoke.toml");
    fs::write(&cfg_path, smoke_config().to_toml_string()).unwrap();
    let out = dir.path().join("fig6a.csv");
    let output = bin()
        .args([
            "run",
            "--preset",
            "fig6a",
            "--trials",
            "300",
            "--engines",
            "monte_carlo",
        ])
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(read_rows(&out).len() > 10);
}

#[test]
fn bin_rejects_bad_invocations_with_exit_one() {
    let unknown_preset = bin().args(["run", "--preset", "fig99"]).output().unwrap();
    assert_eq!(unknown_preset.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown_preset.stderr).contains("unknown preset"));

    let missing_grid = bin().args(["run", "--sweep", "sigma_c"]).output().unwrap();
    assert_eq!(missing_grid.status.code(), Some(1));

    let bad_param = bin()
        .args(["run", "--sweep", "wingspan", "--grid", "1:2:1"])
        .output()
        .unwrap();
    assert_eq!(bad_param.status.code(), Some(1));

    let bad_grid = bin()
        .args(["run", "--sweep", "sigma_c", "--grid", "9:1:1"])
        .output()
        .unwrap();
    assert_eq!(bad_grid.status.code(), Some(1));
}

#[test]
fn bin_runtime_failures_exit_two() {
    // Fewer trials than the simulation engine accepts: caught at run time.
    let output = bin()
        .args([
            "run",
            "--sweep",
            "threshold_dbm",
            "--grid",
            "0",
            "--engines",
            "monte_carlo",
        ])
        .args(["--trials", "50", "--out"])
        .arg(std::env::temp_dir().join("skyharvest_too_few.csv"))
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn bin_io_failures_exit_three() {
    let output = bin()
        .args(["run", "--preset", "fig4", "--out", "/nonexistent_dir/x.csv"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}
