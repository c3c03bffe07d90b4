//! Result envelope written for every run.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::cache::ConstantRecord;
use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA: &str = "cnls-envelope/1";

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub category: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl From<&CliError> for ErrorBody {
    fn from(e: &CliError) -> Self {
        ErrorBody {
            category: e.category(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a> {
    pub schema: &'static str,
    pub status: Status,
    pub version: &'static str,
    pub command: Option<&'static str>,
    /// Absent when the arguments could not be resolved into a config.
    pub config: Option<&'a ExperimentConfig>,
    pub started_unix: f64,
    pub finished_unix: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
    /// GN constants the run used, with their soliton residuals.
    pub constants: &'a [ConstantRecord],
}

impl<'a> Envelope<'a> {
    pub fn new(config: Option<&'a ExperimentConfig>, started_unix: f64, constants: &'a [ConstantRecord]) -> Self {
        Envelope {
            schema: SCHEMA,
            status: Status::Ok,
            version: env!("CARGO_PKG_VERSION"),
            command: config.map(|c| c.command.name()),
            config,
            started_unix,
            finished_unix: unix_now(),
            payload: None,
            error: None,
            constants,
        }
    }

    pub fn ok(mut self, payload: Value) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn failed(mut self, e: &CliError) -> Self {
        self.status = Status::Error;
        self.error = Some(e.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }
}
