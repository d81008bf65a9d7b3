//! The five subcommands: train, estimate, validate, rank, hardware.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use serde::Serialize;

use inferwatt_core::dataset::fixtures::{
    ENCODING_SAMPLES_FILE, LEADERBOARD_SAMPLE_FILE, MIN_DEVICE_SAMPLES_FILE,
    PER_TOKEN_SAMPLES_FILE,
};
use inferwatt_core::dataset::{
    filter_unoptimized, load_encoding_samples, load_leaderboard, load_min_device_samples,
    load_per_token_samples, HardwareDb, RciDb,
};
use inferwatt_core::estimator::{
    estimate, rank_models, train_bundle, DeviceRounding, EstimateRequest, EstimateResult,
    ModelBundle, RankCandidate, PER_TOKEN_POLY_DEGREE,
};
use inferwatt_core::regression::{
    compare_algorithms, leave_one_out_r_squared, metrics, CompareConfig, FittedModel,
};
use inferwatt_core::validation::{run_validation, ValidationConfig, ValidationReport};

use crate::config::{pick, pick_opt, FileConfig};
use crate::output::{emit, emit_raw, sig, OutputFormat, Table};
use crate::Failure;

const DEFAULT_DATA_DIR: &str = "data";
const DEFAULT_MODELS_DIR: &str = "models";
const DEFAULT_SEED: u64 = 42;

/// Assumption overrides shared by estimate, validate, and rank.
#[derive(Debug, Clone, Args)]
pub struct AssumptionFlags {
    /// Accelerator to assume (must exist in the hardware database).
    #[arg(long)]
    pub hardware: Option<String>,
    /// Average accelerator utilization, in (0, 1].
    #[arg(long)]
    pub utilization: Option<f64>,
    /// Datacenter power usage effectiveness, at least 1.
    #[arg(long)]
    pub pue: Option<f64>,
    /// Grid carbon intensity in g CO2e per kWh; overrides --region.
    #[arg(long)]
    pub rci: Option<f64>,
    /// Region code, resolved through the carbon-intensity database.
    #[arg(long)]
    pub region: Option<String>,
    /// Fix the device count instead of predicting it.
    #[arg(long)]
    pub devices: Option<u32>,
    /// How a fractional device prediction becomes a count.
    #[arg(long, value_enum)]
    pub device_rounding: Option<DeviceRoundingArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DeviceRoundingArg {
    Ceil,
    Continuous,
}

impl From<DeviceRoundingArg> for DeviceRounding {
    fn from(arg: DeviceRoundingArg) -> Self {
        match arg {
            DeviceRoundingArg::Ceil => DeviceRounding::Ceil,
            DeviceRoundingArg::Continuous => DeviceRounding::Continuous,
        }
    }
}

/// Databases and directories resolved from flags and the config file.
pub struct Resolved {
    pub hardware_db: HardwareDb,
    pub rci_db: RciDb,
    pub models_dir: PathBuf,
    pub data_dir: PathBuf,
}

pub fn resolve_environment(
    file: &FileConfig,
    models_dir_flag: Option<&Path>,
    data_dir_flag: Option<&Path>,
) -> Result<Resolved, Failure> {
    let hardware_db = match &file.hardware_db {
        Some(path) => HardwareDb::load(path)?,
        None => HardwareDb::builtin(),
    };
    let rci_db = match &file.rci_db {
        Some(path) => RciDb::load(path)?,
        None => RciDb::builtin(),
    };
    Ok(Resolved {
        hardware_db,
        rci_db,
        models_dir: pick(
            models_dir_flag.map(Path::to_path_buf),
            file.models_dir.clone(),
            PathBuf::from(DEFAULT_MODELS_DIR),
        ),
        data_dir: pick(
            data_dir_flag.map(Path::to_path_buf),
            file.data_dir.clone(),
            PathBuf::from(DEFAULT_DATA_DIR),
        ),
    })
}

/// Builds an estimate request from the layered flag/file assumption
/// values. The carbon intensity resolves flag value, then flag region,
/// then file value, then file region; when all are absent the estimator
/// falls back to the database's default row.
fn build_request(
    model_params: f64,
    prompt_tokens: u32,
    output_tokens: u32,
    flags: &AssumptionFlags,
    file: &FileConfig,
    rci_db: &RciDb,
) -> Result<EstimateRequest, Failure> {
    let rci_g_per_kwh = match (
        flags.rci,
        &flags.region,
        file.rci_g_per_kwh,
        &file.region,
    ) {
        (Some(value), _, _, _) => Some(value),
        (None, Some(region), _, _) => Some(rci_db.get(region)?.rci_g_per_kwh),
        (None, None, Some(value), _) => Some(value),
        (None, None, None, Some(region)) => Some(rci_db.get(region)?.rci_g_per_kwh),
        (None, None, None, None) => None,
    };
    Ok(EstimateRequest {
        model_params,
        prompt_tokens,
        output_tokens,
        hardware_name: pick_opt(flags.hardware.clone(), file.hardware.clone()),
        utilization: pick_opt(flags.utilization, file.utilization),
        pue: pick_opt(flags.pue, file.pue),
        rci_g_per_kwh,
        device_override: flags.devices,
        device_rounding: flags
            .device_rounding
            .map(DeviceRounding::from)
            .unwrap_or_default(),
    })
}

// ---------------------------------------------------------------------
// train

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory with the three sample CSVs.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Directory the model files are written into.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    /// Seed for the forest's bootstrap resampling.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct TrainReport {
    models_dir: String,
    seed: u64,
    min_devices: MinDevicesReport,
    per_token: PerTokenReport,
    encoding_comparison: Vec<ComparisonRow>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct MinDevicesReport {
    rows: usize,
    slope: f64,
    intercept: f64,
    training_r_squared: f64,
}

#[derive(Serialize)]
struct PerTokenReport {
    rows: usize,
    degree: usize,
    coefficients: Vec<f64>,
    leave_one_out_r_squared: f64,
}

#[derive(Serialize)]
struct ComparisonRow {
    algorithm: String,
    r_squared: f64,
    mse: f64,
    mape: f64,
}

pub fn cmd_train(args: &TrainArgs, file: &FileConfig, format: OutputFormat) -> Result<ExitCode, Failure> {
    let resolved = resolve_environment(file, args.models_dir.as_deref(), args.data_dir.as_deref())?;
    let seed = pick(args.seed, file.seed, DEFAULT_SEED);
    let data_dir = &resolved.data_dir;

    let encoding = load_encoding_samples(&data_dir.join(ENCODING_SAMPLES_FILE))?;
    let per_token = load_per_token_samples(&data_dir.join(PER_TOKEN_SAMPLES_FILE))?;
    let min_devices = load_min_device_samples(&data_dir.join(MIN_DEVICE_SAMPLES_FILE))?;
    let mut warnings = Vec::new();
    warnings.extend(encoding.warnings.iter().cloned());
    warnings.extend(per_token.warnings.iter().cloned());
    warnings.extend(min_devices.warnings.iter().cloned());

    let bundle = train_bundle(&encoding.rows, &per_token.rows, &min_devices.rows, seed)?;
    std::fs::create_dir_all(&resolved.models_dir).map_err(|e| {
        Failure::usage(format!(
            "cannot create {}: {e}",
            resolved.models_dir.display()
        ))
    })?;
    bundle.save_dir(&resolved.models_dir)?;

    // Report: line fit quality on its own training points, leave-one-out
    // for the polynomial, and the held-out algorithm comparison that
    // justifies the forest for encoding latency.
    let (slope, intercept) = match &bundle.min_devices().fitted {
        FittedModel::Linear(m) => (m.slope, m.intercept),
        _ => unreachable!("train_bundle fits a line for min_devices"),
    };
    let device_truth: Vec<f64> = min_devices
        .rows
        .iter()
        .map(|s| s.device_count as f64)
        .collect();
    let device_pred: Vec<f64> = min_devices
        .rows
        .iter()
        .map(|s| slope * s.model_params_b + intercept)
        .collect();
    let device_metrics = metrics(&device_truth, &device_pred)?;

    let coefficients = match &bundle.per_token().fitted {
        FittedModel::Polynomial(m) => m.coefficients.clone(),
        _ => unreachable!("train_bundle fits a polynomial for per_token"),
    };
    let beta_points: Vec<(f64, f64)> = per_token
        .rows
        .iter()
        .map(|s| (s.model_params_b, s.per_token_latency_s))
        .collect();
    let loo = leave_one_out_r_squared(&beta_points, PER_TOKEN_POLY_DEGREE)?;

    let comparison = compare_algorithms(&encoding.rows, &CompareConfig::default(), seed)?;

    let report = TrainReport {
        models_dir: resolved.models_dir.display().to_string(),
        seed,
        min_devices: MinDevicesReport {
            rows: min_devices.rows.len(),
            slope,
            intercept,
            training_r_squared: device_metrics.r_squared,
        },
        per_token: PerTokenReport {
            rows: per_token.rows.len(),
            degree: PER_TOKEN_POLY_DEGREE,
            coefficients,
            leave_one_out_r_squared: loo,
        },
        encoding_comparison: comparison
            .iter()
            .map(|score| ComparisonRow {
                algorithm: score.name.to_string(),
                r_squared: score.report.r_squared,
                mse: score.report.mse,
                mape: score.report.mape,
            })
            .collect(),
        warnings,
    };

    match format {
        OutputFormat::Json => emit(&serde_json::to_string_pretty(&report).unwrap()),
        OutputFormat::Table => {
            outln!(
                "trained 3 models into {} (seed {})",
                report.models_dir, report.seed
            );
            outln!(
                "\nmin_devices: linear, {} rows, slope {} intercept {} (training r2 {})",
                report.min_devices.rows,
                sig(report.min_devices.slope),
                sig(report.min_devices.intercept),
                sig(report.min_devices.training_r_squared),
            );
            outln!(
                "per_token_latency: degree-{} polynomial, {} rows, leave-one-out r2 {}",
                report.per_token.degree,
                report.per_token.rows,
                sig(report.per_token.leave_one_out_r_squared),
            );
            outln!(
                "encoding_latency: random forest, {} rows; held-out comparison:\n",
                encoding.rows.len()
            );
            let mut table = Table::new(
                &["algorithm", "r2", "mse", "mape"],
                &[false, true, true, true],
            );
            for row in &report.encoding_comparison {
                table.row(vec![
                    row.algorithm.clone(),
                    sig(row.r_squared),
                    sig(row.mse),
                    sig(row.mape),
                ]);
            }
            emit_raw(&table.render());
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------
// estimate

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Model size in billions of parameters.
    #[arg(long)]
    pub params: f64,
    /// Prompt length in tokens.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub prompt_tokens: u32,
    /// Output length in tokens.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub output_tokens: u32,
    /// Directory with the trained model files.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    #[command(flatten)]
    pub assumptions: AssumptionFlags,
}

pub fn cmd_estimate(
    args: &EstimateArgs,
    file: &FileConfig,
    format: OutputFormat,
) -> Result<ExitCode, Failure> {
    let resolved = resolve_environment(file, args.models_dir.as_deref(), None)?;
    let request = build_request(
        args.params,
        args.prompt_tokens,
        args.output_tokens,
        &args.assumptions,
        file,
        &resolved.rci_db,
    )?;
    let bundle = ModelBundle::load_dir(&resolved.models_dir)?;
    let result = estimate(&request, &bundle, &resolved.hardware_db, &resolved.rci_db)?;
    print_estimate(&result, format);
    Ok(ExitCode::SUCCESS)
}

fn print_estimate(result: &EstimateResult, format: OutputFormat) {
    match format {
        OutputFormat::Json => emit(&serde_json::to_string_pretty(result).unwrap()),
        OutputFormat::Table => {
            outln!("encoding latency   {} s", sig(result.encoding_latency_s));
            outln!("per-token latency  {} s", sig(result.per_token_latency_s));
            outln!("e2e latency        {} s", sig(result.e2e_latency_s));
            outln!("devices            {}", sig(result.device_count));
            outln!("power draw         {} W", sig(result.power_draw_w));
            outln!(
                "energy             {} J ({} kWh)",
                sig(result.energy_j),
                sig(result.energy_kwh)
            );
            outln!("co2                {} g", sig(result.co2_g));
            outln!("\nassumptions:");
            let mut table = Table::new(&["name", "value", "source"], &[false, true, false]);
            for a in &result.assumptions {
                let value = match &a.value {
                    inferwatt_core::estimator::AssumptionValue::Number(x) => sig(*x),
                    inferwatt_core::estimator::AssumptionValue::Text(s) => s.clone(),
                };
                let source = match a.source {
                    inferwatt_core::estimator::AssumptionSource::Default => "default",
                    inferwatt_core::estimator::AssumptionSource::User => "user",
                    inferwatt_core::estimator::AssumptionSource::Database => "database",
                };
                table.row(vec![a.name.clone(), value, source.to_string()]);
            }
            emit_raw(&table.render());
            for warning in &result.warnings {
                eprintln!("warning: {warning}");
            }
        }
    }
}

// ---------------------------------------------------------------------
// validate

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Leaderboard CSV to validate against.
    #[arg(long)]
    pub leaderboard: Option<PathBuf>,
    /// Directory with the trained model files.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    /// Prompt length of the validation workload.
    #[arg(long, default_value_t = 192, value_parser = clap::value_parser!(u32).range(1..))]
    pub prompt_tokens: u32,
    /// Output length of the validation workload.
    #[arg(long, default_value_t = 250, value_parser = clap::value_parser!(u32).range(1..))]
    pub output_tokens: u32,
    /// Decode window the leaderboard latencies were measured over.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(1..))]
    pub decode_tokens: u32,
    #[command(flatten)]
    pub assumptions: AssumptionFlags,
}

#[derive(Serialize)]
struct ValidateOutput {
    leaderboard: String,
    entries: usize,
    filtered_optimized: usize,
    load_skipped: Vec<String>,
    reports: Vec<ModeReport>,
}

#[derive(Serialize)]
struct ModeReport {
    device_rounding: String,
    report: ValidationReport,
}

pub fn cmd_validate(
    args: &ValidateArgs,
    file: &FileConfig,
    format: OutputFormat,
) -> Result<ExitCode, Failure> {
    let resolved = resolve_environment(file, args.models_dir.as_deref(), None)?;
    let leaderboard_path = pick(
        args.leaderboard.clone(),
        file.leaderboard.clone(),
        resolved.data_dir.join(LEADERBOARD_SAMPLE_FILE),
    );
    let load = load_leaderboard(&leaderboard_path)?;
    let total_loaded = load.entries.len();
    let entries = filter_unoptimized(&load.entries);
    let filtered_optimized = total_loaded - entries.len();
    let bundle = ModelBundle::load_dir(&resolved.models_dir)?;

    // The sample request carries the flag-resolved assumptions; devices
    // flags are honored too, though rarely useful here.
    let template = build_request(
        1.0,
        args.prompt_tokens,
        args.output_tokens,
        &args.assumptions,
        file,
        &resolved.rci_db,
    )?;
    let modes: Vec<DeviceRounding> = match args.assumptions.device_rounding {
        Some(mode) => vec![mode.into()],
        None => vec![DeviceRounding::Ceil, DeviceRounding::Continuous],
    };

    let mut reports = Vec::new();
    for mode in modes {
        let config = ValidationConfig {
            prompt_tokens: args.prompt_tokens,
            output_tokens: args.output_tokens,
            leaderboard_decode_tokens: args.decode_tokens,
            hardware_name: template.hardware_name.clone(),
            utilization: template.utilization,
            pue: template.pue,
            rci_g_per_kwh: template.rci_g_per_kwh,
            device_rounding: mode,
        };
        let report = run_validation(
            &entries,
            &config,
            &bundle,
            &resolved.hardware_db,
            &resolved.rci_db,
        )?;
        reports.push(ModeReport {
            device_rounding: match mode {
                DeviceRounding::Ceil => "ceil".to_string(),
                DeviceRounding::Continuous => "continuous".to_string(),
            },
            report,
        });
    }

    let row_errors = !load.skipped.is_empty()
        || reports.iter().any(|m| m.report.has_errors());

    let output = ValidateOutput {
        leaderboard: leaderboard_path.display().to_string(),
        entries: entries.len(),
        filtered_optimized,
        load_skipped: load
            .skipped
            .iter()
            .map(|issue| format!("row {}: {}", issue.row, issue.message))
            .collect(),
        reports,
    };

    match format {
        OutputFormat::Json => emit(&serde_json::to_string_pretty(&output).unwrap()),
        OutputFormat::Table => {
            outln!(
                "validating {} entries from {}",
                output.entries, output.leaderboard
            );
            if output.filtered_optimized > 0 {
                outln!(
                    "(dropped {} optimized or duplicate submissions)",
                    output.filtered_optimized
                );
            }
            for line in &output.load_skipped {
                eprintln!("warning: skipped {line}");
            }
            for mode in &output.reports {
                outln!("\ndevice rounding: {}", mode.device_rounding);
                let mut table = Table::new(
                    &[
                        "model", "params_b", "true_lat_s", "pred_lat_s", "lat_ape",
                        "true_kwh", "pred_kwh", "kwh_ape",
                    ],
                    &[false, true, true, true, true, true, true, true],
                );
                for row in &mode.report.rows {
                    table.row(vec![
                        row.model_name.clone(),
                        sig(row.model_params_b),
                        sig(row.true_latency_s),
                        sig(row.pred_latency_s),
                        sig(row.latency_ape),
                        sig(row.true_energy_kwh),
                        sig(row.pred_energy_kwh),
                        sig(row.energy_ape),
                    ]);
                }
                emit_raw(&table.render());
                for skip in &mode.report.skipped {
                    eprintln!(
                        "warning: entry {} ({}) skipped: {}",
                        skip.index, skip.model_name, skip.message
                    );
                }
                match (mode.report.latency_mape, mode.report.energy_mape) {
                    (Some(lat), Some(energy)) => outln!(
                        "aggregate over {} rows: latency mape {}  energy mape {}",
                        mode.report.n(),
                        sig(lat),
                        sig(energy)
                    ),
                    _ => outln!("no rows scored; aggregates unavailable"),
                }
            }
        }
    }

    Ok(if row_errors {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

// ---------------------------------------------------------------------
// rank

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Candidate as `name=params_in_billions`; repeat per candidate.
    #[arg(long = "candidate", value_name = "NAME=PARAMS", required = true)]
    pub candidates: Vec<String>,
    /// Prompt length in tokens.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub prompt_tokens: u32,
    /// Output length in tokens.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub output_tokens: u32,
    /// Directory with the trained model files.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    #[command(flatten)]
    pub assumptions: AssumptionFlags,
}

#[derive(Serialize)]
struct RankOutput {
    ranking: Vec<RankedEntry>,
}

#[derive(Serialize)]
struct RankedEntry {
    name: String,
    estimate: EstimateResult,
}

fn parse_candidate(text: &str) -> Result<RankCandidate, Failure> {
    let (name, params) = text.split_once('=').ok_or_else(|| {
        Failure::usage(format!(
            "invalid candidate `{text}`: expected NAME=PARAMS"
        ))
    })?;
    let name = name.trim();
    let params: f64 = params.trim().parse().map_err(|_| {
        Failure::usage(format!(
            "invalid candidate `{text}`: `{params}` is not a number"
        ))
    })?;
    if name.is_empty() || !(params.is_finite() && params > 0.0) {
        return Err(Failure::usage(format!(
            "invalid candidate `{text}`: name must be non-empty and params positive"
        )));
    }
    Ok(RankCandidate {
        name: name.to_string(),
        model_params: params,
    })
}

pub fn cmd_rank(args: &RankArgs, file: &FileConfig, format: OutputFormat) -> Result<ExitCode, Failure> {
    let resolved = resolve_environment(file, args.models_dir.as_deref(), None)?;
    let candidates: Vec<RankCandidate> = args
        .candidates
        .iter()
        .map(|text| parse_candidate(text))
        .collect::<Result<_, _>>()?;
    let template = build_request(
        1.0,
        args.prompt_tokens,
        args.output_tokens,
        &args.assumptions,
        file,
        &resolved.rci_db,
    )?;
    let bundle = ModelBundle::load_dir(&resolved.models_dir)?;
    let ranked = rank_models(
        &candidates,
        &template,
        &bundle,
        &resolved.hardware_db,
        &resolved.rci_db,
    )?;
    let output = RankOutput {
        ranking: ranked
            .into_iter()
            .map(|(name, estimate)| RankedEntry { name, estimate })
            .collect(),
    };
    match format {
        OutputFormat::Json => emit(&serde_json::to_string_pretty(&output).unwrap()),
        OutputFormat::Table => {
            let mut table = Table::new(
                &["#", "name", "co2_g", "e2e_s", "energy_kwh", "devices"],
                &[true, false, true, true, true, true],
            );
            for (i, entry) in output.ranking.iter().enumerate() {
                table.row(vec![
                    (i + 1).to_string(),
                    entry.name.clone(),
                    sig(entry.estimate.co2_g),
                    sig(entry.estimate.e2e_latency_s),
                    sig(entry.estimate.energy_kwh),
                    sig(entry.estimate.device_count),
                ]);
            }
            emit_raw(&table.render());
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------
// hardware

#[derive(Debug, Args)]
pub struct HardwareArgs {
    /// Hardware database JSON; the built-in table when omitted.
    #[arg(long)]
    pub db: Option<PathBuf>,
}

#[derive(Serialize)]
struct HardwareOutput {
    hardware: Vec<inferwatt_core::dataset::HardwareSpec>,
}

pub fn cmd_hardware(
    args: &HardwareArgs,
    file: &FileConfig,
    format: OutputFormat,
) -> Result<ExitCode, Failure> {
    let db = match args.db.as_ref().or(file.hardware_db.as_ref()) {
        Some(path) => HardwareDb::load(path)?,
        None => HardwareDb::builtin(),
    };
    let output = HardwareOutput {
        hardware: db.entries().to_vec(),
    };
    match format {
        OutputFormat::Json => emit(&serde_json::to_string_pretty(&output).unwrap()),
        OutputFormat::Table => {
            let mut table = Table::new(
                &["name", "tdp_watts", "memory_gb"],
                &[false, true, true],
            );
            for spec in &output.hardware {
                table.row(vec![
                    spec.name.clone(),
                    sig(spec.tdp_watts),
                    sig(spec.memory_gb),
                ]);
            }
            emit_raw(&table.render());
        }
    }
    Ok(ExitCode::SUCCESS)
}
