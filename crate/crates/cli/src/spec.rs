//! Serializable experiment descriptions. Every run is driven by an
//! [`ExperimentSpec`], whether assembled from command-line flags or loaded
//! from a JSON file, and every artifact embeds the spec that produced it,
//! so a run can be reproduced from its output header alone.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Threshold,
    Stationary,
    DensityResponse,
    ActivityResponse,
    Analytic,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_seed() -> u64 {
    1
}

fn is_false(b: &bool) -> bool {
    !b
}

/// Flat description of one run. Fields that do not apply to the chosen
/// command stay `None` and are omitted from the serialized form; the
/// seed defaults to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// Branching parameter for random-regular graphs and wired trees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// Wired-tree depth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    /// Vertex whose stationary height law is sampled instead of the
    /// graph-wide density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    /// Parallel-step budget per orbit search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    /// Verification suite name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Print the full reference-constant table instead of one family.
    #[serde(default, skip_serializing_if = "is_false")]
    pub table: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ExperimentSpec {
    pub fn new(command: CommandKind) -> ExperimentSpec {
        ExperimentSpec {
            command,
            family: None,
            size: None,
            q: None,
            depth: None,
            n_trials: None,
            seed: default_seed(),
            lambda_grid: None,
            site: None,
            max_steps: None,
            suite: None,
            table: false,
            output: None,
            format: None,
        }
    }

    /// Canonical single-line JSON form, embedded in artifact headers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<ExperimentSpec, serde_json::Error> {
        serde_json::from_str(text)
    }
}
