//! Regression-based estimation of per-prompt LLM inference cost.
//!
//! Given a model's parameter count, a prompt length, and an output length,
//! the estimator predicts end-to-end latency, energy, and CO2-equivalent
//! emissions for a single inference request. The predictions come from
//! three small regression models fitted on curated benchmark measurements:
//!
//! * a random forest for prompt encoding latency (parameter count and
//!   prompt length interact non-linearly),
//! * a polynomial for steady-state per-output-token latency,
//! * a linear fit for the minimum accelerator count that holds the model.
//!
//! End-to-end latency is encoding time plus one per-token step for every
//! output token after the first; energy multiplies device power by runtime
//! and datacenter overhead; carbon multiplies energy by the grid's carbon
//! intensity. [`estimator::estimate`] runs the whole chain and itemizes
//! every assumption it made. [`validation`] replays published benchmark
//! rows through the estimator and reports the relative error.

pub mod dataset;
pub mod error;
pub mod estimator;
pub mod regression;
pub mod validation;

pub use error::{Error, Result};
