//! Regenerates the bundled `data/` fixtures and the `models/` bundle.
//!
//! Usage: `cargo run -p inferwatt-core --example gen_fixtures [data_dir] [models_dir]`
//!
//! Everything is seeded and idempotent: rerunning writes byte-identical
//! files. The leaderboard fixture is derived from the freshly trained
//! bundle's own predictions (see `dataset::fixtures`), so it must be
//! regenerated whenever the sample surfaces or the training code change.

use std::error::Error;
use std::path::Path;

use inferwatt_core::dataset::fixtures::{
    self, FIXTURE_SEED, LEADERBOARD_SAMPLE_FILE, VALIDATION_OUTPUT_TOKENS,
};
use inferwatt_core::dataset::{load_leaderboard, HardwareDb, RciDb};
use inferwatt_core::estimator::{estimate, train_bundle, EstimateRequest};
use inferwatt_core::regression::{compare_algorithms, leave_one_out_r_squared, CompareConfig};
use inferwatt_core::validation::{run_validation, ValidationConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().collect();
    let data_dir = Path::new(args.get(1).map(String::as_str).unwrap_or("data"));
    let models_dir = Path::new(args.get(2).map(String::as_str).unwrap_or("models"));
    std::fs::create_dir_all(data_dir)?;
    std::fs::create_dir_all(models_dir)?;

    fixtures::write_sample_fixtures(data_dir)?;
    println!("wrote sample fixtures to {}", data_dir.display());

    let encoding = fixtures::synthetic_encoding_samples(
        fixtures::ENCODING_FIXTURE_POINTS,
        FIXTURE_SEED,
    );
    let per_token = fixtures::synthetic_per_token_samples(FIXTURE_SEED);
    let min_devices = fixtures::curated_min_device_samples();
    let bundle = train_bundle(&encoding, &per_token, &min_devices, FIXTURE_SEED)?;
    bundle.save_dir(models_dir)?;
    println!("wrote model bundle to {}", models_dir.display());

    let hardware_db = HardwareDb::builtin();
    let rci_db = RciDb::builtin();
    let config = ValidationConfig::default();
    let mut predictions = Vec::new();
    for row in &fixtures::REFERENCE_ROWS {
        let request = EstimateRequest::new(
            row.model_params_b,
            config.prompt_tokens,
            VALIDATION_OUTPUT_TOKENS,
        );
        let result = estimate(&request, &bundle, &hardware_db, &rci_db)?;
        predictions.push((result.e2e_latency_s, result.energy_kwh));
    }
    fixtures::write_leaderboard_fixture(data_dir, &predictions)?;
    println!("wrote {}", data_dir.join(LEADERBOARD_SAMPLE_FILE).display());

    // --- diagnostics ---------------------------------------------------
    println!("\nencoding-latency algorithm comparison (held-out 20%):");
    let scores = compare_algorithms(&encoding, &CompareConfig::default(), FIXTURE_SEED)?;
    for score in &scores {
        println!(
            "  {:<14} r2 {:>7.4}  mse {:>10.6}  mape {:>7.4}",
            score.name, score.report.r_squared, score.report.mse, score.report.mape
        );
    }

    let beta_points: Vec<(f64, f64)> = per_token
        .iter()
        .map(|s| (s.model_params_b, s.per_token_latency_s))
        .collect();
    let loo = leave_one_out_r_squared(&beta_points, 2)?;
    println!("\nper-token leave-one-out r2: {loo:.4}");

    let loaded = load_leaderboard(&data_dir.join(LEADERBOARD_SAMPLE_FILE))?;
    let report = run_validation(&loaded.entries, &config, &bundle, &hardware_db, &rci_db)?;
    println!(
        "\nvalidation on the bundled leaderboard fixture ({} rows):",
        report.n()
    );
    println!(
        "  latency mape {:.6}  energy mape {:.6}",
        report.latency_mape.unwrap_or(f64::NAN),
        report.energy_mape.unwrap_or(f64::NAN)
    );
    Ok(())
}
