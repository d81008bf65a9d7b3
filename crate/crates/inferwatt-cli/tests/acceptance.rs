//! Acceptance suite: one test per release criterion, each printing a
//! single `C<n> <name>: PASS|FAIL` line (visible with `--nocapture`;
//! failures always show theirs).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::Value;

use inferwatt_core::dataset::fixtures::{
    ENCODING_SAMPLES_FILE, LEADERBOARD_SAMPLE_FILE, MIN_DEVICE_SAMPLES_FILE,
    PER_TOKEN_SAMPLES_FILE,
};
use inferwatt_core::dataset::{
    load_encoding_samples, load_leaderboard, load_min_device_samples, load_per_token_samples,
    write_encoding_samples, write_leaderboard, write_min_device_samples, write_per_token_samples,
    HardwareDb, HardwareSpec, RciDb,
};
use inferwatt_core::estimator::{
    estimate_carbon, estimate_e2e_latency, estimate_energy, estimate_min_devices, rank_models,
    train_bundle, DeviceRounding, EstimateRequest, ModelBundle, RankCandidate,
};
use inferwatt_core::regression::{
    compare_algorithms, fit_linear, fit_polynomial, fit_random_forest, leave_one_out_r_squared,
    load_model, metrics, save_model, CompareConfig, ForestHyperparams, PolynomialModel,
};
use inferwatt_core::validation::{run_validation, ValidationConfig};

fn repo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

/// Runs one criterion body and prints its verdict line; a panic inside
/// the body still fails the test after the line is printed.
fn criterion<F: FnOnce()>(name: &str, body: F) {
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    match result {
        Ok(()) => println!("{name}: PASS"),
        Err(payload) => {
            println!("{name}: FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

fn committed_bundle() -> ModelBundle {
    ModelBundle::load_dir(&repo_dir().join("models")).expect("committed models load")
}

// -------------------------------------------------------------------

#[test]
fn c1_latency_composition() {
    criterion("C1 latency composition", || {
        let start = Instant::now();
        // Stub models that output exactly the chosen encoding latency and
        // per-token step: a forest trained on a constant target and a
        // constant polynomial.
        let features = vec![
            vec![5.0, 100.0],
            vec![15.0, 400.0],
            vec![30.0, 900.0],
            vec![45.0, 1500.0],
        ];
        let targets = vec![1.2; 4];
        let forest =
            fit_random_forest(&features, &targets, &ForestHyperparams::default(), 11).expect("fit");
        let beta_stub = PolynomialModel {
            coefficients: vec![0.02],
        };
        let request = EstimateRequest::new(13.0, 64, 250);
        let (encoding, beta, e2e) =
            estimate_e2e_latency(&request, &forest, &beta_stub).expect("latency");
        assert!((encoding - 1.2).abs() < 1e-12, "encoding {encoding}");
        assert_eq!(beta, 0.02);
        assert!(
            (e2e - 6.18).abs() < 1e-12,
            "e2e {e2e} should be 1.2 + 249 * 0.02"
        );
        assert!(start.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn c2_energy_carbon_chain() {
    criterion("C2 energy and carbon chain", || {
        let start = Instant::now();
        // Defaults: utilization 0.26, PUE 1.1.
        let request = EstimateRequest::new(1.0, 1, 1);
        let hardware = HardwareSpec {
            name: "test-accelerator".to_string(),
            tdp_watts: 400.0,
            memory_gb: 80.0,
        };
        let (power_draw_w, energy_j, energy_kwh) =
            estimate_energy(&request, 1.0, 6.18, &hardware).expect("energy");
        // Independent arithmetic: devices x TDP x utilization x T x PUE.
        let oracle_j = 1.0 * 400.0 * 0.26 * 6.18 * 1.1;
        assert!((energy_j - oracle_j).abs() < 1e-12);
        assert!((energy_j - 706.99).abs() < 0.01, "energy {energy_j} J");
        assert!((power_draw_w - 1.0 * 400.0 * 0.26 * 1.1).abs() < 1e-12);
        assert!((energy_kwh - energy_j / 3.6e6).abs() < 1e-18);

        let co2_g = estimate_carbon(energy_kwh, 475.0);
        let oracle_g = oracle_j / 3.6e6 * 475.0;
        assert!((co2_g - oracle_g).abs() < 1e-12);
        assert!((co2_g - 0.0933).abs() < 1e-4, "carbon {co2_g} g");
        assert!(start.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn c3_min_device_fit() {
    criterion("C3 min-device fit", || {
        // The three bundled device samples.
        let points = [(6.0, 1.0), (17.0, 1.0), (52.0, 4.0)];
        let line = fit_linear(&points).expect("fit");
        // Closed-form least squares for these points: mean x = 25,
        // mean y = 2, Sxy = 81, Sxx = 1154.
        let slope = 81.0 / 1154.0;
        let intercept = 2.0 - 25.0 * slope;
        assert!((line.slope - slope).abs() < 1e-9, "slope {}", line.slope);
        assert!(
            (line.intercept - intercept).abs() < 1e-9,
            "intercept {}",
            line.intercept
        );

        // Ceil-mode predictions against the observed counts. The 17 B row
        // is a known miss: the least-squares line predicts 1.44 devices
        // there, which rounds up to 2, not the observed 1. Asserted as
        // required; documented as a limitation.
        for (params, observed) in [(6.0, 1.0), (17.0, 1.0), (52.0, 4.0)] {
            let predicted = estimate_min_devices(params, &line, DeviceRounding::Ceil)
                .expect("device prediction");
            assert_eq!(
                predicted, observed,
                "ceil-mode device count at {params} B: predicted {predicted}, observed {observed}"
            );
        }
    });
}

#[test]
fn c4_mape_harness_oracle() {
    criterion("C4 accuracy-harness oracle", || {
        let start = Instant::now();
        // The five bundled reference rows: (measured, predicted) pairs.
        let latency_pairs = [
            (3.75, 3.41),
            (5.76, 4.42),
            (5.08, 5.51),
            (7.21, 7.46),
            (10.30, 9.05),
        ];
        let energy_pairs = [
            (3.99, 3.99),
            (6.12, 5.17),
            (7.81, 6.77),
            (10.12, 11.51),
            (15.77, 15.24),
        ];
        // Hand-rolled mean absolute percentage error as the oracle.
        let hand_mape = |pairs: &[(f64, f64)]| {
            pairs
                .iter()
                .map(|(t, p)| (t - p).abs() / t)
                .sum::<f64>()
                / pairs.len() as f64
        };
        let latency_oracle = hand_mape(&latency_pairs);
        let energy_oracle = hand_mape(&energy_pairs);
        assert!(
            (latency_oracle - 0.1128).abs() < 0.0005,
            "latency mape {latency_oracle}"
        );
        assert!(
            (energy_oracle - 0.0919).abs() < 0.0005,
            "energy mape {energy_oracle}"
        );

        // The metrics implementation must agree with the oracle.
        let (t, p): (Vec<f64>, Vec<f64>) = latency_pairs.iter().copied().unzip();
        let report = metrics(&t, &p).expect("metrics");
        assert!((report.mape - latency_oracle).abs() < 1e-15);
        let (t, p): (Vec<f64>, Vec<f64>) = energy_pairs.iter().copied().unzip();
        let report = metrics(&t, &p).expect("metrics");
        assert!((report.mape - energy_oracle).abs() < 1e-15);

        // And the full validation pipeline over the bundled leaderboard
        // fixture must land on the same aggregates.
        let repo = repo_dir();
        let load = load_leaderboard(&repo.join("data").join(LEADERBOARD_SAMPLE_FILE))
            .expect("leaderboard fixture");
        assert!(load.skipped.is_empty());
        let report = run_validation(
            &load.entries,
            &ValidationConfig::default(),
            &committed_bundle(),
            &HardwareDb::builtin(),
            &RciDb::builtin(),
        )
        .expect("validation");
        let latency_mape = report.latency_mape.expect("latency aggregate");
        let energy_mape = report.energy_mape.expect("energy aggregate");
        assert!(
            (latency_mape - 0.1128).abs() < 0.0005,
            "pipeline latency mape {latency_mape}"
        );
        assert!(
            (energy_mape - 0.0919).abs() < 0.0005,
            "pipeline energy mape {energy_mape}"
        );
        assert!(start.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn c5_encoding_regression_regime() {
    criterion("C5 encoding-model quality", || {
        let start = Instant::now();
        let repo = repo_dir();
        let samples = load_encoding_samples(&repo.join("data").join(ENCODING_SAMPLES_FILE))
            .expect("encoding fixture");
        assert_eq!(samples.rows.len(), 400);
        let scores =
            compare_algorithms(&samples.rows, &CompareConfig::default(), 42).expect("comparison");
        let find = |name: &str| {
            scores
                .iter()
                .find(|s| s.name == name)
                .unwrap_or_else(|| panic!("no `{name}` score"))
        };
        let forest = find("random_forest");
        let linear = find("linear");
        assert!(
            forest.report.r_squared >= 0.95,
            "forest r2 {}",
            forest.report.r_squared
        );
        assert!(
            forest.report.mape <= 0.10,
            "forest mape {}",
            forest.report.mape
        );
        assert!(
            linear.report.mape > forest.report.mape,
            "linear mape {} should exceed forest mape {}",
            linear.report.mape,
            forest.report.mape
        );
        assert!(start.elapsed() < Duration::from_secs(30));
    });
}

#[test]
fn c6_per_token_polynomial() {
    criterion("C6 per-token polynomial", || {
        // Exact recovery on noiseless quadratic data.
        let truth = [0.008, 0.0012, 5.0e-6];
        let points: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let m = 5.0 * i as f64;
                (m, truth[0] + truth[1] * m + truth[2] * m * m)
            })
            .collect();
        let fit = fit_polynomial(&points, 2).expect("fit");
        assert_eq!(fit.coefficients.len(), 3);
        for (got, want) in fit.coefficients.iter().zip(truth) {
            assert!(
                ((got - want) / want).abs() < 1e-6,
                "coefficient {got} vs {want}"
            );
        }

        // Leave-one-out quality on the bundled per-token fixture.
        let repo = repo_dir();
        let samples = load_per_token_samples(&repo.join("data").join(PER_TOKEN_SAMPLES_FILE))
            .expect("per-token fixture");
        let pairs: Vec<(f64, f64)> = samples
            .rows
            .iter()
            .map(|s| (s.model_params_b, s.per_token_latency_s))
            .collect();
        let loo = leave_one_out_r_squared(&pairs, 2).expect("leave-one-out");
        assert!(loo >= 0.9, "leave-one-out r2 {loo}");
    });
}

// -------------------------------------------------------------------
// C7: property suites, 1000 cases each.

const PROPERTY_CASES: usize = 1000;

#[test]
fn c7_property_suites() {
    criterion("C7 property suites", || {
        ols_grid_optimality();
        forest_properties();
        metrics_identities();
        energy_carbon_linearity();
        rank_invariance_under_rci_scaling();
    });
}

/// The fitted line's squared error never beats a perturbed line.
fn ols_grid_optimality() {
    let mut rng = ChaCha12Rng::seed_from_u64(701);
    for case in 0..PROPERTY_CASES {
        let n = rng.random_range(2..=30);
        let points: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                (
                    i as f64 + rng.random_range(0.0..0.5),
                    rng.random_range(-10.0..10.0),
                )
            })
            .collect();
        let line = fit_linear(&points).expect("fit");
        let sse = |slope: f64, intercept: f64| {
            points
                .iter()
                .map(|(x, y)| {
                    let r = y - (slope * x + intercept);
                    r * r
                })
                .sum::<f64>()
        };
        let best = sse(line.slope, line.intercept);
        for radius in [1e-6, 1e-3, 1e-1] {
            for ds in [-1.0, 0.0, 1.0] {
                for di in [-1.0, 0.0, 1.0] {
                    if ds == 0.0 && di == 0.0 {
                        continue;
                    }
                    let perturbed = sse(line.slope + ds * radius, line.intercept + di * radius);
                    assert!(
                        best <= perturbed * (1.0 + 1e-9) + 1e-9,
                        "case {case}: sse {best} beaten at radius {radius} ({ds}, {di}): {perturbed}"
                    );
                }
            }
        }
    }
}

/// Forest predictions stay within the target range, equal the mean of
/// the member trees, and are bit-identical across refits with one seed.
fn forest_properties() {
    let mut rng = ChaCha12Rng::seed_from_u64(702);
    let hyperparams = ForestHyperparams {
        n_trees: 5,
        ..ForestHyperparams::default()
    };
    for case in 0..PROPERTY_CASES {
        let n = rng.random_range(2..=40);
        let dims = rng.random_range(1..=3);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dims).map(|_| rng.random_range(-100.0..100.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let seed = rng.random::<u64>();
        let forest = fit_random_forest(&features, &targets, &hyperparams, seed).expect("fit");
        let probe: Vec<f64> = (0..dims).map(|_| rng.random_range(-120.0..120.0)).collect();
        let prediction = forest.predict(&probe).expect("predict");

        let lo = targets.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
        assert!(
            prediction >= lo - slack && prediction <= hi + slack,
            "case {case}: prediction {prediction} outside [{lo}, {hi}]"
        );

        let tree_mean = forest
            .trees()
            .iter()
            .map(|tree| tree.predict(&probe).expect("tree predict"))
            .sum::<f64>()
            / forest.trees().len() as f64;
        assert!(
            (prediction - tree_mean).abs() <= 1e-12,
            "case {case}: forest {prediction} vs tree mean {tree_mean}"
        );

        let refit = fit_random_forest(&features, &targets, &hyperparams, seed).expect("refit");
        let again = refit.predict(&probe).expect("predict");
        assert_eq!(prediction, again, "case {case}: refit changed the prediction");
    }
}

/// Perfect predictions score R² = 1, MSE = 0, MAPE = 0; predicting the
/// mean scores R² = 0.
fn metrics_identities() {
    let mut rng = ChaCha12Rng::seed_from_u64(703);
    for case in 0..PROPERTY_CASES {
        let n = rng.random_range(2..=50);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let magnitude = rng.random_range(0.1..10.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                // The spread term keeps the sample non-constant so R² is
                // well defined.
                sign * magnitude + i as f64
            })
            .collect();

        let perfect = metrics(&y, &y).expect("metrics");
        assert!((perfect.r_squared - 1.0).abs() < 1e-12, "case {case}");
        assert_eq!(perfect.mse, 0.0, "case {case}");
        assert_eq!(perfect.mape, 0.0, "case {case}");

        let mean = y.iter().sum::<f64>() / n as f64;
        let constant = vec![mean; n];
        let baseline = metrics(&y, &constant).expect("metrics");
        assert!(
            baseline.r_squared.abs() < 1e-9,
            "case {case}: mean predictor r2 {}",
            baseline.r_squared
        );
    }
}

/// Energy is linear in device count, TDP, utilization, latency, and PUE;
/// carbon is linear in energy and intensity.
fn energy_carbon_linearity() {
    let mut rng = ChaCha12Rng::seed_from_u64(704);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
    for case in 0..PROPERTY_CASES {
        let mut request = EstimateRequest::new(rng.random_range(1.0..60.0), 8, 8);
        request.utilization = Some(rng.random_range(0.05..1.0));
        request.pue = Some(rng.random_range(1.0..2.5));
        let hardware = HardwareSpec {
            name: "probe".to_string(),
            tdp_watts: rng.random_range(50.0..800.0),
            memory_gb: 80.0,
        };
        let devices = rng.random_range(1.0..32.0);
        let latency = rng.random_range(0.01..500.0);
        let scale = rng.random_range(0.1..10.0);

        let (_, base_j, base_kwh) =
            estimate_energy(&request, devices, latency, &hardware).expect("energy");

        // Device count.
        let (_, scaled, _) =
            estimate_energy(&request, devices * scale, latency, &hardware).expect("energy");
        assert!(close(scaled, base_j * scale), "case {case}: devices");
        // Latency.
        let (_, scaled, _) =
            estimate_energy(&request, devices, latency * scale, &hardware).expect("energy");
        assert!(close(scaled, base_j * scale), "case {case}: latency");
        // TDP.
        let doubled = HardwareSpec {
            tdp_watts: hardware.tdp_watts * scale,
            ..hardware.clone()
        };
        let (_, scaled, _) =
            estimate_energy(&request, devices, latency, &doubled).expect("energy");
        assert!(close(scaled, base_j * scale), "case {case}: tdp");
        // Utilization: compare energy per unit of utilization at two values.
        let mut other = request.clone();
        other.utilization = Some(rng.random_range(0.05..1.0));
        let (_, other_j, _) = estimate_energy(&other, devices, latency, &hardware).expect("energy");
        assert!(
            close(
                base_j / request.utilization.expect("set"),
                other_j / other.utilization.expect("set")
            ),
            "case {case}: utilization"
        );
        // PUE: same ratio check.
        let mut other = request.clone();
        other.pue = Some(rng.random_range(1.0..2.5));
        let (_, other_j, _) = estimate_energy(&other, devices, latency, &hardware).expect("energy");
        assert!(
            close(base_j / request.pue.expect("set"), other_j / other.pue.expect("set")),
            "case {case}: pue"
        );

        // Carbon linearity in both factors.
        let rci = rng.random_range(1.0..1000.0);
        let base_g = estimate_carbon(base_kwh, rci);
        assert!(
            close(estimate_carbon(base_kwh * scale, rci), base_g * scale),
            "case {case}: carbon vs energy"
        );
        assert!(
            close(estimate_carbon(base_kwh, rci * scale), base_g * scale),
            "case {case}: carbon vs intensity"
        );
    }
}

/// Scaling the carbon intensity by any positive factor never changes the
/// ranking order.
fn rank_invariance_under_rci_scaling() {
    let mut rng = ChaCha12Rng::seed_from_u64(705);
    let bundle = committed_bundle();
    let hardware_db = HardwareDb::builtin();
    let rci_db = RciDb::builtin();
    for case in 0..PROPERTY_CASES {
        let count = rng.random_range(3..=8);
        let candidates: Vec<RankCandidate> = (0..count)
            .map(|i| RankCandidate {
                name: format!("candidate-{i}"),
                model_params: rng.random_range(1.0..60.0),
            })
            .collect();
        let mut template = EstimateRequest::new(
            1.0,
            rng.random_range(1..=1920),
            rng.random_range(1..=400),
        );
        let rci = rng.random_range(5.0..800.0);
        template.rci_g_per_kwh = Some(rci);
        let baseline = rank_models(&candidates, &template, &bundle, &hardware_db, &rci_db)
            .expect("rank");
        template.rci_g_per_kwh = Some(rci * rng.random_range(0.01..100.0));
        let scaled = rank_models(&candidates, &template, &bundle, &hardware_db, &rci_db)
            .expect("rank");
        let names = |ranking: &[(String, inferwatt_core::estimator::EstimateResult)]| {
            ranking.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()
        };
        assert_eq!(names(&baseline), names(&scaled), "case {case}");
    }
}

// -------------------------------------------------------------------

#[test]
fn c8_cross_interface_consistency() {
    criterion("C8 cross-interface consistency", || {
        let repo = repo_dir();
        let state = Arc::new(inferwatt_service::ServiceState::load(
            &repo.join("models"),
            HardwareDb::builtin(),
            RciDb::builtin(),
        ));
        assert!(state.is_ready(), "committed models must load");
        let runtime = tokio::runtime::Runtime::new().expect("runtime");
        let mut rng = ChaCha12Rng::seed_from_u64(800);

        for case in 0..20 {
            let mut request = EstimateRequest::new(
                rng.random_range(1.0..60.0),
                rng.random_range(1..=2000),
                rng.random_range(1..=400),
            );
            if rng.random_bool(0.5) {
                request.utilization = Some(rng.random_range(0.05..1.0));
            }
            if rng.random_bool(0.5) {
                request.pue = Some(rng.random_range(1.0..2.0));
            }
            if rng.random_bool(0.4) {
                request.rci_g_per_kwh = Some(rng.random_range(10.0..900.0));
            }
            if rng.random_bool(0.3) {
                request.device_override = Some(rng.random_range(1..=8));
            }
            if rng.random_bool(0.5) {
                request.device_rounding = DeviceRounding::Continuous;
            }
            if rng.random_bool(0.3) {
                request.hardware_name = Some("NVIDIA T4".to_string());
            }

            let from_cli = cli_estimate(&repo, &request);
            let from_service = service_estimate(&runtime, &state, &request);
            assert_eq!(
                from_cli, from_service,
                "case {case}: interfaces disagree for {request:?}"
            );
        }
    });
}

fn cli_estimate(repo: &Path, request: &EstimateRequest) -> Value {
    let mut args: Vec<String> = vec![
        "--format".into(),
        "json".into(),
        "estimate".into(),
        "--params".into(),
        request.model_params.to_string(),
        "--prompt-tokens".into(),
        request.prompt_tokens.to_string(),
        "--output-tokens".into(),
        request.output_tokens.to_string(),
    ];
    if let Some(name) = &request.hardware_name {
        args.push("--hardware".into());
        args.push(name.clone());
    }
    if let Some(value) = request.utilization {
        args.push("--utilization".into());
        args.push(value.to_string());
    }
    if let Some(value) = request.pue {
        args.push("--pue".into());
        args.push(value.to_string());
    }
    if let Some(value) = request.rci_g_per_kwh {
        args.push("--rci".into());
        args.push(value.to_string());
    }
    if let Some(value) = request.device_override {
        args.push("--devices".into());
        args.push(value.to_string());
    }
    if request.device_rounding == DeviceRounding::Continuous {
        args.push("--device-rounding".into());
        args.push("continuous".into());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_inferwatt"))
        .args(&args)
        .current_dir(repo)
        .env_remove("INFERWATT_CONFIG")
        .output()
        .expect("spawn inferwatt");
    assert!(
        out.status.success(),
        "cli failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("cli json")
}

fn service_estimate(
    runtime: &tokio::runtime::Runtime,
    state: &Arc<inferwatt_service::ServiceState>,
    request: &EstimateRequest,
) -> Value {
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let body = serde_json::to_string(request).expect("request json");
    let http_request = axum::http::Request::builder()
        .method("POST")
        .uri("/estimate")
        .header("content-type", "application/json")
        .body(axum::body::Body::from(body))
        .expect("request");
    runtime.block_on(async {
        let response = inferwatt_service::router(state.clone())
            .oneshot(http_request)
            .await
            .expect("response");
        assert_eq!(response.status(), axum::http::StatusCode::OK);
        let bytes = response.into_body().collect().await.expect("body").to_bytes();
        serde_json::from_slice(&bytes).expect("service json")
    })
}

// -------------------------------------------------------------------

#[test]
fn c9_round_trips() {
    criterion("C9 round trips", || {
        let repo = repo_dir();
        let data = repo.join("data");
        let tmp = tempfile::tempdir().expect("tempdir");

        // Model save/load: predictions bit-identical on 100 probes.
        let encoding = load_encoding_samples(&data.join(ENCODING_SAMPLES_FILE)).expect("load");
        let per_token = load_per_token_samples(&data.join(PER_TOKEN_SAMPLES_FILE)).expect("load");
        let min_devices =
            load_min_device_samples(&data.join(MIN_DEVICE_SAMPLES_FILE)).expect("load");
        let bundle =
            train_bundle(&encoding.rows, &per_token.rows, &min_devices.rows, 42).expect("train");
        for (role, model) in [
            ("min_devices", bundle.min_devices()),
            ("encoding_latency", bundle.encoding()),
            ("per_token_latency", bundle.per_token()),
        ] {
            let path = tmp.path().join(format!("{role}.json"));
            save_model(model, &path).expect("save");
            let loaded = load_model(&path).expect("load");
            let mut rng = ChaCha12Rng::seed_from_u64(900);
            for probe in 0..100 {
                let features: Vec<f64> = match role {
                    "encoding_latency" => vec![
                        rng.random_range(1.0..60.0),
                        rng.random_range(1.0..1920.0),
                    ],
                    _ => vec![rng.random_range(1.0..60.0)],
                };
                let before = model.predict(&features).expect("predict");
                let after = loaded.predict(&features).expect("predict");
                assert_eq!(before, after, "{role} probe {probe} drifted across save/load");
            }
        }

        // CSV write/read identity on every bundled dataset.
        let path = tmp.path().join("encoding.csv");
        write_encoding_samples(&path, &encoding.rows).expect("write");
        assert_eq!(load_encoding_samples(&path).expect("reload").rows, encoding.rows);

        let path = tmp.path().join("per_token.csv");
        write_per_token_samples(&path, &per_token.rows).expect("write");
        assert_eq!(load_per_token_samples(&path).expect("reload").rows, per_token.rows);

        let path = tmp.path().join("min_devices.csv");
        write_min_device_samples(&path, &min_devices.rows).expect("write");
        assert_eq!(
            load_min_device_samples(&path).expect("reload").rows,
            min_devices.rows
        );

        let leaderboard =
            load_leaderboard(&data.join(LEADERBOARD_SAMPLE_FILE)).expect("leaderboard");
        let path = tmp.path().join("leaderboard.csv");
        write_leaderboard(&path, &leaderboard.entries).expect("write");
        let reloaded = load_leaderboard(&path).expect("reload");
        assert!(reloaded.skipped.is_empty());
        assert_eq!(reloaded.entries, leaderboard.entries);
    });
}
