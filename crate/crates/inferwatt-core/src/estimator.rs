//! The estimation chain: minimum devices → end-to-end latency → energy →
//! CO₂-equivalent grams.
//!
//! Latency is the sum of a one-off prompt-encoding cost and a steady
//! per-output-token cost: `T = encoding(params, p) + (o − 1)·β(params)`.
//! Energy multiplies device power draw by utilization, runtime, and the
//! datacenter's PUE overhead; carbon multiplies energy by the grid's
//! carbon intensity. Every default or database value the chain consumes is
//! itemized in the result's assumption ledger, so downstream consumers can
//! audit exactly what a number means.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    EncodingSample, HardwareDb, HardwareSpec, MinDeviceSample, PerTokenSample, RciDb,
    DEFAULT_REGION,
};
use crate::error::{Error, Result};
use crate::regression::{
    fingerprint_rows, fit_linear, fit_polynomial, fit_random_forest, load_model, FittedModel,
    ForestHyperparams, ForestModel, LinearModel, PolynomialModel, TrainedModel,
};

/// Hardware assumed when the request names none.
pub const DEFAULT_HARDWARE: &str = "NVIDIA A100-80GB";
/// Average accelerator utilization during inference.
pub const DEFAULT_UTILIZATION: f64 = 0.26;
/// Datacenter power usage effectiveness (total / IT power).
pub const DEFAULT_PUE: f64 = 1.1;
/// Combined prompt + output lengths at or above this draw a warning: the
/// latency models were calibrated on shorter contexts.
pub const CONTEXT_WARN_TOKENS: u64 = 10_000;
/// Lower clamp for the per-token latency; a polynomial extrapolated below
/// its training range must not turn time negative.
pub const BETA_FLOOR_S: f64 = 1e-9;
/// Lower clamp for continuous-mode device counts.
pub const CONTINUOUS_DEVICE_FLOOR: f64 = 1e-6;
/// Joules per kilowatt-hour.
pub const JOULES_PER_KWH: f64 = 3.6e6;

/// How a fractional minimum-device prediction becomes a deployable count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceRounding {
    /// Round up to a whole accelerator (capacity semantics).
    #[default]
    Ceil,
    /// Keep the raw regression output (useful for comparing against
    /// published figures that were computed fractionally).
    Continuous,
}

/// One inference request to estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRequest {
    /// Model size in billions of parameters.
    pub model_params: f64,
    pub prompt_tokens: u32,
    pub output_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rci_g_per_kwh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_override: Option<u32>,
    #[serde(default)]
    pub device_rounding: DeviceRounding,
}

impl EstimateRequest {
    /// Minimal request: everything else at defaults.
    pub fn new(model_params: f64, prompt_tokens: u32, output_tokens: u32) -> Self {
        EstimateRequest {
            model_params,
            prompt_tokens,
            output_tokens,
            hardware_name: None,
            utilization: None,
            pue: None,
            rci_g_per_kwh: None,
            device_override: None,
            device_rounding: DeviceRounding::default(),
        }
    }

    pub fn resolved_utilization(&self) -> f64 {
        self.utilization.unwrap_or(DEFAULT_UTILIZATION)
    }

    pub fn resolved_pue(&self) -> f64 {
        self.pue.unwrap_or(DEFAULT_PUE)
    }

    /// Checks every request invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, message: String| Error::InvalidRequest { field, message };
        if !(self.model_params.is_finite() && self.model_params > 0.0) {
            return Err(bad(
                "model_params",
                format!("`{}` must be a positive number of billions", self.model_params),
            ));
        }
        if self.prompt_tokens == 0 {
            return Err(bad("prompt_tokens", "must be at least 1".to_string()));
        }
        if self.output_tokens == 0 {
            return Err(bad("output_tokens", "must be at least 1".to_string()));
        }
        let utilization = self.resolved_utilization();
        if !(utilization.is_finite() && 0.0 < utilization && utilization <= 1.0) {
            return Err(bad(
                "utilization",
                format!("`{}` must lie in (0, 1]", utilization),
            ));
        }
        let pue = self.resolved_pue();
        if !(pue.is_finite() && pue >= 1.0) {
            return Err(bad("pue", format!("`{}` must be at least 1", pue)));
        }
        if let Some(rci) = self.rci_g_per_kwh {
            if !(rci.is_finite() && rci >= 0.0) {
                return Err(bad(
                    "rci_g_per_kwh",
                    format!("`{}` must be non-negative", rci),
                ));
            }
        }
        if let Some(devices) = self.device_override {
            if devices == 0 {
                return Err(bad("device_override", "must be at least 1".to_string()));
            }
        }
        Ok(())
    }
}

/// Where a ledger value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionSource {
    /// Built-in default the caller did not override.
    Default,
    /// Supplied explicitly in the request.
    User,
    /// Looked up in a bundled database (hardware specs, grid intensities).
    Database,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssumptionValue {
    Number(f64),
    Text(String),
}

/// One line of the assumption ledger: an input the chain consumed, its
/// value, and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption {
    pub name: String,
    pub value: AssumptionValue,
    pub source: AssumptionSource,
}

impl Assumption {
    fn number(name: &str, value: f64, source: AssumptionSource) -> Self {
        Assumption {
            name: name.to_string(),
            value: AssumptionValue::Number(value),
            source,
        }
    }

    fn text(name: &str, value: &str, source: AssumptionSource) -> Self {
        Assumption {
            name: name.to_string(),
            value: AssumptionValue::Text(value.to_string()),
            source,
        }
    }
}

/// Full output of the estimation chain for one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub encoding_latency_s: f64,
    pub per_token_latency_s: f64,
    pub e2e_latency_s: f64,
    /// Whole number in ceil mode, possibly fractional in continuous mode.
    pub device_count: f64,
    pub power_draw_w: f64,
    pub energy_j: f64,
    pub energy_kwh: f64,
    pub co2_g: f64,
    pub assumptions: Vec<Assumption>,
    pub warnings: Vec<String>,
}

/// The three trained models the chain composes, in their expected kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    min_devices: TrainedModel,
    encoding: TrainedModel,
    per_token: TrainedModel,
}

/// File names a bundle directory must contain.
pub const MIN_DEVICES_FILE: &str = "min_devices.json";
pub const ENCODING_FILE: &str = "encoding_latency.json";
pub const PER_TOKEN_FILE: &str = "per_token_latency.json";

impl ModelBundle {
    /// Assembles a bundle, rejecting models of the wrong kind for a role.
    pub fn new(
        min_devices: TrainedModel,
        encoding: TrainedModel,
        per_token: TrainedModel,
    ) -> Result<Self> {
        let expect = |role: &'static str, model: &TrainedModel, kind: &str| {
            if model.fitted.kind() == kind {
                Ok(())
            } else {
                Err(Error::ModelFile {
                    path: None,
                    message: format!(
                        "{}: expected kind `{}`, got `{}`",
                        role,
                        kind,
                        model.fitted.kind()
                    ),
                })
            }
        };
        expect("min_devices", &min_devices, "linear")?;
        expect("encoding_latency", &encoding, "random_forest")?;
        expect("per_token_latency", &per_token, "polynomial")?;
        Ok(ModelBundle {
            min_devices,
            encoding,
            per_token,
        })
    }

    /// Loads the three model files from a directory, naming the missing
    /// role when one is absent.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let load = |role: &'static str, file: &str| -> Result<TrainedModel> {
            let path = dir.join(file);
            if !path.exists() {
                return Err(Error::MissingModel { role, path });
            }
            load_model(&path)
        };
        ModelBundle::new(
            load("min_devices", MIN_DEVICES_FILE)?,
            load("encoding_latency", ENCODING_FILE)?,
            load("per_token_latency", PER_TOKEN_FILE)?,
        )
    }

    /// Writes the three model files into a directory.
    pub fn save_dir(&self, dir: &Path) -> Result<[PathBuf; 3]> {
        let paths = [
            dir.join(MIN_DEVICES_FILE),
            dir.join(ENCODING_FILE),
            dir.join(PER_TOKEN_FILE),
        ];
        crate::regression::save_model(&self.min_devices, &paths[0])?;
        crate::regression::save_model(&self.encoding, &paths[1])?;
        crate::regression::save_model(&self.per_token, &paths[2])?;
        Ok(paths)
    }

    pub fn min_devices(&self) -> &TrainedModel {
        &self.min_devices
    }

    pub fn encoding(&self) -> &TrainedModel {
        &self.encoding
    }

    pub fn per_token(&self) -> &TrainedModel {
        &self.per_token
    }

    fn linear(&self) -> &LinearModel {
        match &self.min_devices.fitted {
            FittedModel::Linear(m) => m,
            _ => unreachable!("bundle construction enforces the kind"),
        }
    }

    fn forest(&self) -> &ForestModel {
        match &self.encoding.fitted {
            FittedModel::RandomForest(m) => m,
            _ => unreachable!("bundle construction enforces the kind"),
        }
    }

    fn polynomial(&self) -> &PolynomialModel {
        match &self.per_token.fitted {
            FittedModel::Polynomial(m) => m,
            _ => unreachable!("bundle construction enforces the kind"),
        }
    }
}

/// Polynomial degree the per-token latency model is trained at.
pub const PER_TOKEN_POLY_DEGREE: usize = 2;

/// Fits the three production models from their datasets: an ordinary
/// least-squares line for device counts, a random forest over
/// (model size, prompt length) for encoding latency, and a degree-2
/// polynomial for the per-token step. Same data and seed → same bundle.
pub fn train_bundle(
    encoding: &[EncodingSample],
    per_token: &[PerTokenSample],
    min_devices: &[MinDeviceSample],
    seed: u64,
) -> Result<ModelBundle> {
    fn span(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
        let lo = values.clone().fold(f64::INFINITY, f64::min);
        let hi = values.fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    let device_points: Vec<(f64, f64)> = min_devices
        .iter()
        .map(|s| (s.model_params_b, s.device_count as f64))
        .collect();
    let min_devices_model = TrainedModel::new(
        FittedModel::Linear(fit_linear(&device_points)?),
        None,
        fingerprint_rows(&device_points.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()),
        vec![span(device_points.iter().map(|p| p.0))],
    );

    let features: Vec<Vec<f64>> = encoding
        .iter()
        .map(|s| vec![s.model_params_b, s.prompt_tokens as f64])
        .collect();
    let targets: Vec<f64> = encoding.iter().map(|s| s.encoding_latency_s).collect();
    let forest = fit_random_forest(&features, &targets, &ForestHyperparams::default(), seed)?;
    let fingerprint_input: Vec<Vec<f64>> = encoding
        .iter()
        .map(|s| vec![s.model_params_b, s.prompt_tokens as f64, s.encoding_latency_s])
        .collect();
    let encoding_model = TrainedModel::new(
        FittedModel::RandomForest(forest),
        Some(seed),
        fingerprint_rows(&fingerprint_input),
        vec![
            span(features.iter().map(|f| f[0])),
            span(features.iter().map(|f| f[1])),
        ],
    );

    let beta_points: Vec<(f64, f64)> = per_token
        .iter()
        .map(|s| (s.model_params_b, s.per_token_latency_s))
        .collect();
    let per_token_model = TrainedModel::new(
        FittedModel::Polynomial(fit_polynomial(&beta_points, PER_TOKEN_POLY_DEGREE)?),
        None,
        fingerprint_rows(&beta_points.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()),
        vec![span(beta_points.iter().map(|p| p.0))],
    );

    ModelBundle::new(min_devices_model, encoding_model, per_token_model)
}

/// Predicts the minimum accelerator count for a model size. Ceil mode
/// rounds up and clamps to at least one whole device; continuous mode
/// keeps the raw regression value, floored at a small positive epsilon.
pub fn estimate_min_devices(
    model_params: f64,
    linear_model: &LinearModel,
    rounding: DeviceRounding,
) -> Result<f64> {
    if !(model_params.is_finite() && model_params > 0.0) {
        return Err(Error::InvalidRequest {
            field: "model_params",
            message: format!("`{}` must be a positive number of billions", model_params),
        });
    }
    let raw = linear_model.predict(model_params);
    if !raw.is_finite() {
        return Err(Error::NonFiniteOutput {
            model: "min_devices",
        });
    }
    Ok(match rounding {
        DeviceRounding::Ceil => raw.ceil().max(1.0),
        DeviceRounding::Continuous => raw.max(CONTINUOUS_DEVICE_FLOOR),
    })
}

/// Latency decomposition: predicts the prompt-encoding time from
/// (params, prompt_tokens) and the per-output-token step β from params,
/// then composes `T = encoding + (o − 1)·β`. Returns
/// (encoding, β, T) in seconds.
pub fn estimate_e2e_latency(
    request: &EstimateRequest,
    encoding_model: &ForestModel,
    per_token_model: &PolynomialModel,
) -> Result<(f64, f64, f64)> {
    request.validate()?;
    let encoding = encoding_model.predict(&[request.model_params, request.prompt_tokens as f64])?;
    if !encoding.is_finite() {
        return Err(Error::NonFiniteOutput {
            model: "encoding_latency",
        });
    }
    let beta = per_token_model.predict(request.model_params);
    if !beta.is_finite() {
        return Err(Error::NonFiniteOutput {
            model: "per_token_latency",
        });
    }
    let beta = beta.max(BETA_FLOOR_S);
    let e2e = encoding + (request.output_tokens - 1) as f64 * beta;
    Ok((encoding, beta, e2e))
}

/// Energy for the run: `devices × TDP × utilization × T × PUE` joules,
/// also expressed in kWh, plus the effective wall power draw.
pub fn estimate_energy(
    request: &EstimateRequest,
    device_count: f64,
    e2e_latency_s: f64,
    hardware: &HardwareSpec,
) -> Result<(f64, f64, f64)> {
    request.validate()?;
    if !(device_count.is_finite() && device_count > 0.0) {
        return Err(Error::InvalidRequest {
            field: "device_count",
            message: format!("`{}` must be positive", device_count),
        });
    }
    if !(e2e_latency_s.is_finite() && e2e_latency_s >= 0.0) {
        return Err(Error::InvalidRequest {
            field: "e2e_latency_s",
            message: format!("`{}` must be non-negative", e2e_latency_s),
        });
    }
    let utilization = request.resolved_utilization();
    let pue = request.resolved_pue();
    let power_draw_w = device_count * hardware.tdp_watts * utilization * pue;
    let energy_j = device_count * hardware.tdp_watts * utilization * e2e_latency_s * pue;
    let energy_kwh = energy_j / JOULES_PER_KWH;
    Ok((power_draw_w, energy_j, energy_kwh))
}

/// Operational carbon: grid intensity × energy.
pub fn estimate_carbon(energy_kwh: f64, rci_g_per_kwh: f64) -> f64 {
    energy_kwh * rci_g_per_kwh
}

/// Runs the full chain for one request and itemizes every assumption.
pub fn estimate(
    request: &EstimateRequest,
    bundle: &ModelBundle,
    hardware_db: &HardwareDb,
    rci_db: &RciDb,
) -> Result<EstimateResult> {
    request.validate()?;
    let mut warnings = Vec::new();

    let context_tokens = request.prompt_tokens as u64 + request.output_tokens as u64;
    if context_tokens >= CONTEXT_WARN_TOKENS {
        warnings.push(format!(
            "context of {} tokens is at or beyond the {}-token regime the latency models were calibrated for",
            context_tokens, CONTEXT_WARN_TOKENS
        ));
    }

    let (hardware_name, hardware_source) = match &request.hardware_name {
        Some(name) => (name.as_str(), AssumptionSource::User),
        None => (DEFAULT_HARDWARE, AssumptionSource::Default),
    };
    let hardware = hardware_db.get(hardware_name)?;

    let (rci, rci_source) = match request.rci_g_per_kwh {
        Some(value) => (value, AssumptionSource::User),
        None => (
            rci_db.get(DEFAULT_REGION)?.rci_g_per_kwh,
            AssumptionSource::Default,
        ),
    };

    let (device_count, device_source) = match request.device_override {
        Some(count) => (count as f64, Some(AssumptionSource::User)),
        None => (
            estimate_min_devices(request.model_params, bundle.linear(), request.device_rounding)?,
            None,
        ),
    };

    let (encoding_latency_s, per_token_latency_s, e2e_latency_s) =
        estimate_e2e_latency(request, bundle.forest(), bundle.polynomial())?;
    let (power_draw_w, energy_j, energy_kwh) =
        estimate_energy(request, device_count, e2e_latency_s, hardware)?;
    let co2_g = estimate_carbon(energy_kwh, rci);

    extrapolation_warnings(request, bundle, &mut warnings);

    let mut assumptions = vec![
        Assumption::number("model_params", request.model_params, AssumptionSource::User),
        Assumption::number(
            "prompt_tokens",
            request.prompt_tokens as f64,
            AssumptionSource::User,
        ),
        Assumption::number(
            "output_tokens",
            request.output_tokens as f64,
            AssumptionSource::User,
        ),
        Assumption::text("hardware_name", &hardware.name, hardware_source),
        Assumption::number("tdp_watts", hardware.tdp_watts, AssumptionSource::Database),
        Assumption::number(
            "utilization",
            request.resolved_utilization(),
            match request.utilization {
                Some(_) => AssumptionSource::User,
                None => AssumptionSource::Default,
            },
        ),
        Assumption::number(
            "pue",
            request.resolved_pue(),
            match request.pue {
                Some(_) => AssumptionSource::User,
                None => AssumptionSource::Default,
            },
        ),
        Assumption::number("rci_g_per_kwh", rci, rci_source),
    ];
    if let Some(source) = device_source {
        assumptions.push(Assumption::number("device_count", device_count, source));
    }

    Ok(EstimateResult {
        encoding_latency_s,
        per_token_latency_s,
        e2e_latency_s,
        device_count,
        power_draw_w,
        energy_j,
        energy_kwh,
        co2_g,
        assumptions,
        warnings,
    })
}

/// Flags request coordinates outside the envelope the models were trained
/// on; extrapolated predictions still run but deserve scrutiny.
fn extrapolation_warnings(request: &EstimateRequest, bundle: &ModelBundle, out: &mut Vec<String>) {
    let mut check = |model: &str, feature: &str, value: f64, range: Option<&(f64, f64)>| {
        if let Some(&(lo, hi)) = range {
            if value < lo || value > hi {
                out.push(format!(
                    "{}: {} {} is outside the training range [{}, {}]",
                    model, feature, value, lo, hi
                ));
            }
        }
    };
    let params = request.model_params;
    let tokens = request.prompt_tokens as f64;
    check(
        "min_devices",
        "model_params",
        params,
        bundle.min_devices.feature_ranges.first(),
    );
    check(
        "encoding_latency",
        "model_params",
        params,
        bundle.encoding.feature_ranges.first(),
    );
    check(
        "encoding_latency",
        "prompt_tokens",
        tokens,
        bundle.encoding.feature_ranges.get(1),
    );
    check(
        "per_token_latency",
        "model_params",
        params,
        bundle.per_token.feature_ranges.first(),
    );
}

/// A model under consideration for ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCandidate {
    pub name: String,
    pub model_params: f64,
}

/// Estimates every candidate under the shared request template (its
/// `model_params` is replaced per candidate) and orders them greenest
/// first: ascending CO₂, ties broken by latency, then name.
pub fn rank_models(
    candidates: &[RankCandidate],
    template: &EstimateRequest,
    bundle: &ModelBundle,
    hardware_db: &HardwareDb,
    rci_db: &RciDb,
) -> Result<Vec<(String, EstimateResult)>> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput {
            context: "rank_models",
        });
    }
    let mut ranked = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let mut request = template.clone();
        request.model_params = candidate.model_params;
        let result = estimate(&request, bundle, hardware_db, rci_db)?;
        ranked.push((candidate.name.clone(), result));
    }
    ranked.sort_by(|a, b| {
        a.1.co2_g
            .total_cmp(&b.1.co2_g)
            .then(a.1.e2e_latency_s.total_cmp(&b.1.e2e_latency_s))
            .then(a.0.cmp(&b.0))
    });
    Ok(ranked)
}

/// A tiny but well-behaved bundle for chain tests: devices fit on the
/// three curated rows, encoding on a coarse grid, β on a gentle curve.
#[cfg(test)]
pub(crate) fn test_bundle() -> ModelBundle {
    use crate::regression::{
        fingerprint_rows, fit_linear, fit_polynomial, fit_random_forest, ForestHyperparams,
    };

    let device_points = [(6.0, 1.0), (17.0, 1.0), (52.0, 4.0)];
    let min_devices = TrainedModel::new(
        FittedModel::Linear(fit_linear(&device_points).unwrap()),
        None,
        fingerprint_rows(
            &device_points
                .iter()
                .map(|&(x, y)| vec![x, y])
                .collect::<Vec<_>>(),
        ),
        vec![(6.0, 52.0)],
    );

    let mut features = Vec::new();
    let mut targets = Vec::new();
    for p in 1..=6 {
        for t in [1u32, 256, 512, 1024, 1536, 1920] {
            let params = p as f64 * 10.0;
            features.push(vec![params, t as f64]);
            targets.push(0.05 + 0.002 * params + 0.0003 * t as f64);
        }
    }
    let forest = fit_random_forest(
        &features,
        &targets,
        &ForestHyperparams {
            n_trees: 10,
            ..ForestHyperparams::default()
        },
        7,
    )
    .unwrap();
    let encoding = TrainedModel::new(
        FittedModel::RandomForest(forest),
        Some(7),
        fingerprint_rows(&features),
        vec![(10.0, 60.0), (1.0, 1920.0)],
    );

    let beta_points: Vec<(f64, f64)> = (1..=10)
        .map(|i| {
            let m = i as f64 * 5.0;
            (m, 0.008 + 0.0012 * m + 5e-6 * m * m)
        })
        .collect();
    let per_token = TrainedModel::new(
        FittedModel::Polynomial(fit_polynomial(&beta_points, 2).unwrap()),
        None,
        fingerprint_rows(
            &beta_points
                .iter()
                .map(|&(x, y)| vec![x, y])
                .collect::<Vec<_>>(),
        ),
        vec![(5.0, 50.0)],
    );

    ModelBundle::new(min_devices, encoding, per_token).unwrap()
}
