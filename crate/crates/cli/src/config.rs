//! Run configuration: a JSON file overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use manyminds::scenarios::{ScenarioParams, Tolerances};
use serde::Deserialize;

use crate::Failure;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed for every sampled quantity.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled trajectories (Monte Carlo trials for the
    /// caricature).
    #[arg(long, global = true)]
    pub trajectories: Option<u64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    trajectories: Option<u64>,
    max_steps: Option<usize>,
    #[serde(default)]
    tol: BTreeMap<String, f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    #[serde(default)]
    params: ScenarioParams,
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub trajectories: Option<u64>,
    pub max_steps: Option<usize>,
    pub tol: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub params: ScenarioParams,
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(flags: &Common) -> Result<Self, Failure> {
        let file: ConfigFile = match &flags.config {
            Some(p) => serde_json::from_str(&read_input(p)?)
                .map_err(|e| Failure::input(format!("config {}: {e}", p.display())))?,
            None => ConfigFile::default(),
        };
        let mut tol = Tolerances::default();
        for (k, v) in &file.tol {
            tol.set(k, *v).map_err(Failure::from)?;
        }
        for a in &flags.tol {
            tol.parse_assignment(a).map_err(Failure::from)?;
        }
        Ok(RunConfig {
            seed: flags.seed.or(file.seed),
            trajectories: flags.trajectories.or(file.trajectories),
            max_steps: flags.max_steps.or(file.max_steps),
            tol,
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            params: file.params,
        })
    }
}
