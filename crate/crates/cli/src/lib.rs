//! Command-line experiment driver: resolves a configuration, runs one
//! experiment, and writes its tables plus a JSON report.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use serde::Serialize;

pub use config::{Experiment, ExperimentConfig, Format, Overrides};
pub use error::{CliError, Result};
use output::{FileEntry, Outputs};

/// Summary of a completed run, written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub metrics: experiments::Metrics,
    pub files: Vec<FileEntry>,
    pub version: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

/// Runs the experiment; on failure every file it wrote is removed.
pub fn run(config: &ExperimentConfig) -> Result<(Report, PathBuf)> {
    config.validate()?;
    let mut out = Outputs::create(&config.output_dir, config.format)?;
    let result = experiments::dispatch(config, &mut out).and_then(|metrics| {
        let report = Report {
            experiment: config.experiment,
            config: config.clone(),
            metrics,
            files: out.entries().to_vec(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = out.finish(&report.to_json())?;
        Ok((report, path))
    });
    if result.is_err() {
        out.discard();
    }
    result
}
