//! `skyharvest` — command-line experiment runner producing plot-ready CSVs
//! from the analytic and Monte Carlo engines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skyharvest::config::ConfigError;
use skyharvest::{Engine, LosModel, Orientation, ScenarioConfig};
use skyharvest_cli::presets::{preset, preset_catalog};
use skyharvest_cli::runner::run_sweep;
use skyharvest_cli::sweep::{parse_grid, Quantity, SweepSpec, SweptParameter};
use skyharvest_cli::CliError;

/// Aerial wireless-power-transfer experiment runner.
#[derive(Parser, Debug)]
#[command(name = "skyharvest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named preset or an ad-hoc parameter sweep, writing one CSV.
    Run(RunArgs),
    /// List the available presets.
    Presets,
    /// Check a config file and exit.
    Validate {
        /// Config file to check.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Preset name (see `skyharvest presets`).
    #[arg(long, conflicts_with = "sweep")]
    preset: Option<String>,

    /// Swept parameter for an ad-hoc sweep: sigma_c, height, uav_density,
    /// tx_power_dbm or threshold_dbm.
    #[arg(long)]
    sweep: Option<String>,

    /// Grid: `a:b:step` (inclusive) or comma-separated values. Overrides
    /// the preset grid when given with --preset.
    #[arg(long)]
    grid: Option<String>,

    /// Base config file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output CSV path (default: `<preset>.csv` or `sweep_<param>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the simulation trial count.
    #[arg(long)]
    trials: Option<u64>,

    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Engines to run (`analytic`, `monte_carlo`), comma separated.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,

    /// LOS models to run (`high`, `low`, `always`), comma separated.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,

    /// Antenna orientations to run (`hh`, `hv`, `vv`), comma separated.
    #[arg(long, value_delimiter = ',')]
    orientations: Option<Vec<String>>,

    /// Quantities to emit (`association`, `avg_power`, `energy_coverage`
    /// with optional `_mu<k>`/`_h<height>`/`_n<terms>` suffixes), comma
    /// separated.
    #[arg(long, value_delimiter = ',')]
    quantities: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Presets => {
            println!("available presets (run with `skyharvest run --preset <name>`):");
            for p in preset_catalog() {
                println!("  {:<11} {}", p.name, p.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "{} is valid: {} tier(s), heights {:?} m, model {}, orientation {}, \
                 threshold {} dBm",
                config.display(),
                cfg.tier_count(),
                cfg.heights,
                cfg.los_model.as_str(),
                cfg.orientation,
                cfg.energy_threshold_dbm,
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run(args),
    }
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::load_config(path).map_err(|e| match e {
        ConfigError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })
}

fn run(args: RunArgs) -> Result<ExitCode, CliError> {
    let mut base = match &args.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(trials) = args.trials {
        base.mc_trials = trials;
    }
    if let Some(seed) = args.seed {
        base.rng_seed = seed;
    }

    let mut spec = match (&args.preset, &args.sweep) {
        (Some(name), _) => preset(name, base).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown preset \"{name}\"; run `skyharvest presets` for the catalog"
            ))
        })?,
        (None, Some(param)) => {
            let grid_arg = args.grid.as_deref().ok_or_else(|| {
                CliError::Validation("--sweep requires --grid (a:b:step or v1,v2,...)".into())
            })?;
            let model = base.los_model;
            let orientation = base.orientation;
            SweepSpec {
                swept_parameter: SweptParameter::parse(param)?,
                grid: parse_grid(grid_arg)?,
                fixed: base,
                quantities: vec![
                    Quantity::Association,
                    Quantity::AvgPower,
                    Quantity::energy_coverage(),
                ],
                engines: vec![Engine::Analytic, Engine::MonteCarlo],
                models: vec![model],
                orientations: vec![orientation],
                preset_name: None,
            }
        }
        (None, None) => {
            return Err(CliError::Validation(
                "run needs either --preset <name> or --sweep <param> --grid <grid>".into(),
            ))
        }
    };

    if args.preset.is_some() {
        if let Some(grid_arg) = &args.grid {
            spec.grid = parse_grid(grid_arg)?;
        }
    }
    if let Some(engines) = &args.engines {
        spec.engines = engines
            .iter()
            .map(|s| parse_engine(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(models) = &args.models {
        spec.models = models
            .iter()
            .map(|s| parse_model(s, &spec.fixed.los_model))
            .collect::<Result<_, _>>()?;
    }
    if let Some(orientations) = &args.orientations {
        spec.orientations = orientations
            .iter()
            .map(|s| parse_orientation(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(quantities) = &args.quantities {
        spec.quantities = quantities
            .iter()
            .map(|s| Quantity::parse(s))
            .collect::<Result<_, _>>()?;
    }

    let out = args.out.unwrap_or_else(|| {
        PathBuf::from(match &spec.preset_name {
            Some(name) => format!("{name}.csv"),
            None => format!("sweep_{}.csv", spec.swept_parameter),
        })
    });
    let report = run_sweep(&spec, &out)?;
    println!(
        "wrote {} row(s) to {} ({} unsupported, {} nonconverged)",
        report.rows,
        report.out_path.display(),
        report.unsupported,
        report.nonconverged,
    );
    if report.nonconverged > 0 {
        eprintln!(
            "error: {} row(s) did not converge; values left blank and flagged",
            report.nonconverged
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_engine(s: &str) -> Result<Engine, CliError> {
    match s {
        "analytic" => Ok(Engine::Analytic),
        "monte_carlo" => Ok(Engine::MonteCarlo),
        other => Err(CliError::Validation(format!(
            "unknown engine \"{other}\"; expected analytic or monte_carlo"
        ))),
    }
}

fn parse_model(s: &str, base: &LosModel<f64>) -> Result<LosModel<f64>, CliError> {
    match s {
        // Keep custom high-altitude parameters from the base config.
        "high" => Ok(match base {
            m @ LosModel::HighAltitude { .. } => *m,
            _ => LosModel::high_altitude_default(),
        }),
        "low" => Ok(LosModel::LowAltitude),
        "always" => Ok(LosModel::AlwaysLos),
        other => Err(CliError::Validation(format!(
            "unknown LOS model \"{other}\"; expected high, low or always"
        ))),
    }
}

fn parse_orientation(s: &str) -> Result<Orientation, CliError> {
    Orientation::ALL
        .into_iter()
        .find(|o| o.as_str() == s)
        .ok_or_else(|| {
            CliError::Validation(format!(
                "unknown orientation \"{s}\"; expected hh, hv or vv"
            ))
        })
}
