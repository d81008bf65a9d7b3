//! Training and validation data: curated benchmark samples, the hardware
//! power database, and regional carbon-intensity lookups.
//!
//! Loaders are pure given the file contents. Databases are built once and
//! read-only afterwards, so concurrent reads are safe.

mod db;
pub mod fixtures;
mod io;
mod leaderboard;

pub use db::{HardwareDb, HardwareSpec, RciDb, RegionEntry, DEFAULT_REGION};
pub use io::{
    load_encoding_samples, load_min_device_samples, load_per_token_samples,
    write_encoding_samples, write_min_device_samples, write_per_token_samples, CsvLoad,
};
pub use leaderboard::{
    filter_unoptimized, load_leaderboard, write_leaderboard, LeaderboardEntry, LeaderboardLoad,
    RowIssue,
};

use serde::{Deserialize, Serialize};

/// Prompt-token range the curated encoding dataset was measured over.
/// Rows outside it still load, but with a warning.
pub const CURATED_PROMPT_TOKENS_MAX: u32 = 1920;

/// One prompt-encoding measurement: how long the prefill phase took for a
/// prompt of `prompt_tokens` tokens on a model of `model_params_b` billion
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSample {
    pub model_params_b: f64,
    pub prompt_tokens: u32,
    pub encoding_latency_s: f64,
}

/// Average incremental latency per generated output token for one model size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerTokenSample {
    pub model_params_b: f64,
    pub per_token_latency_s: f64,
}

/// Minimum number of accelerator units observed to deploy a model size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDeviceSample {
    pub model_params_b: f64,
    pub device_count: u32,
    pub hardware_name: String,
}

/// Which sample CSV schema a file is expected to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Encoding,
    PerToken,
    MinDevice,
}

impl SampleKind {
    pub fn header(&self) -> &'static [&'static str] {
        match self {
            SampleKind::Encoding => &["model_params_b", "prompt_tokens", "encoding_latency_s"],
            SampleKind::PerToken => &["model_params_b", "per_token_latency_s"],
            SampleKind::MinDevice => &["model_params_b", "device_count", "hardware_name"],
        }
    }
}
