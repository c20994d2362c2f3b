//! TOML run recipes. Each file has flat sections; CLI flags override fields.
//!
//! ```toml
//! [scheme]
//! kind = "two-axis-raman"
//! rabi = 0.5
//!
//! [system]
//! n_atoms = 1000
//! initial = "all_up"
//!
//! [grid]
//! t_max = 0.5
//! n_points = 10001
//!
//! [output]
//! dir = "out/fig2b"
//! outputs = ["edge_populations", "ghz_fidelity"]
//! seed = 7
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use dicke::experiment::{InitialSpec, Output};
use dicke::ramancalc::RamanParams;
use dicke::SchemeKind;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub scaling: ScalingSection,
    pub raman: Option<RamanParams>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Option<String>,
    pub rabi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_atoms: Option<usize>,
    pub initial: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub outputs: Option<Vec<String>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub n_list: Option<Vec<usize>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

pub fn parse_scheme(s: &str) -> Result<SchemeKind, CliError> {
    s.parse().map_err(|e: dicke::Error| CliError::Config(e.to_string()))
}

pub fn parse_initial(s: &str) -> Result<InitialSpec, CliError> {
    s.parse().map_err(|e: dicke::Error| CliError::Config(e.to_string()))
}

pub fn parse_outputs(list: &[String]) -> Result<BTreeSet<Output>, CliError> {
    list.iter().map(|s| s.parse().map_err(|e: dicke::Error| CliError::Config(e.to_string()))).collect()
}

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Config(format!("bad atom number '{x}'"))))
        .collect()
}
