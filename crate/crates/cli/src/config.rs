//! Scenario configuration: JSON with expression strings in the core
//! grammar.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Bateman,
    Ufe,
    MongeAmpere,
    Wave,
    MongeFlow,
    Legendre,
    SuperposedWave,
}

impl Equation {
    pub const ALL: [Equation; 7] = [
        Equation::Bateman,
        Equation::Ufe,
        Equation::MongeAmpere,
        Equation::Wave,
        Equation::MongeFlow,
        Equation::Legendre,
        Equation::SuperposedWave,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Equation::Bateman => "bateman",
            Equation::Ufe => "ufe",
            Equation::MongeAmpere => "monge_ampere",
            Equation::Wave => "wave",
            Equation::MongeFlow => "monge_flow",
            Equation::Legendre => "legendre",
            Equation::SuperposedWave => "superposed_wave",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub newton: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { newton: 1e-12, residual: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConventionConfig {
    #[default]
    Material,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: ReportFormat,
    #[serde(default)]
    pub path: Option<String>,
}

fn default_quadrature_nodes() -> usize {
    8
}

/// One batch scenario: equation, function family, grid, tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub equation: Equation,
    /// Expression strings keyed by slot name (f1, f2, … / g1…g4 / profile).
    pub functions: BTreeMap<String, String>,
    /// Per-axis {min, max, count}; the axis meaning is fixed per equation.
    pub grid: Vec<AxisConfig>,
    /// Initial guesses for the unknowns at the first grid point.
    #[serde(default)]
    pub seed_values: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// monge_flow only.
    #[serde(default)]
    pub sign_convention: SignConventionConfig,
    #[serde(default)]
    pub rng_seed: u64,
    /// superposed_wave only.
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
