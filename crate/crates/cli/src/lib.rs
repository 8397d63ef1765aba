//! Config-driven scenario runner for shearlab.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod equidistribution;
mod error;
pub mod registry;
pub mod scenarios;

use std::path::{Path, PathBuf};

pub use config::Config;
pub use error::{CliError, EXIT_CONVERGENCE, EXIT_FAILURE, EXIT_OK, EXIT_VALIDATION};
pub use scenarios::{run_scenario, Artifacts};

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Written files and summary lines of a finished job.
#[derive(Clone, Debug)]
pub struct JobOutput {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Output directory when neither `--out` nor `[job] output` is given.
pub const DEFAULT_OUTPUT: &str = "shearlab-out";

/// Run the scenario of `config` and write its CSV files.
pub fn run_job(config: &Config, opts: &RunOptions) -> Result<JobOutput, CliError> {
    let artifacts = run_scenario(config, opts.seed)?;
    let dir = match &opts.out {
        Some(d) => d.clone(),
        None => PathBuf::from(config.require("job")?.raw("output").unwrap_or(DEFAULT_OUTPUT)),
    };
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let mut files = Vec::with_capacity(artifacts.files.len());
    for (name, contents) in &artifacts.files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        files.push(path);
    }
    Ok(JobOutput { files, summary: artifacts.summary })
}

/// [`run_job`] on a config file.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<JobOutput, CliError> {
    run_job(&Config::from_path(path)?, opts)
}
