//! Scenario-file JSON schema (version 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::charts::Role;
use crate::gerbe::{CoverKind, Region};
use crate::potentials::Case;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default)]
    pub charts: Vec<ChartSpec>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default)]
    pub covers: Vec<CoverSpec>,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    pub coords: Vec<CoordSpec>,
}

/// A complex coordinate; `re` / `im` name its real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordSpec {
    pub name: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub chart: String,
    pub case: Case,
    pub potential: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationSpec>,
    /// Leaf pairs to Legendre-swap before building (symplectic only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub legendre: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    pub phi: String,
    pub t: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub name: String,
    pub kind: CoverKind,
    pub charts: Vec<CoverChartSpec>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub doubles: Vec<DoubleSpec>,
    #[serde(default)]
    pub triples: Vec<TripleSpec>,
    #[serde(default)]
    pub quads: Vec<QuadSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chern: Option<ChernSpecJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverChartSpec {
    pub name: String,
    pub chart: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
}

/// Coordinates of `to` as expressions over `from`, one per complex coordinate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from: String,
    pub to: String,
    pub map: Vec<String>,
}

/// Sample points in the first chart's real coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PointSpec {
    List(Vec<Vec<f64>>),
    /// First coordinate in `r_min < |w| < r_max`; the rest uniform in
    /// `[-half_width, half_width]`.
    Annulus {
        count: usize,
        r_min: f64,
        r_max: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    Box {
        count: usize,
        half_width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        seed: u64,
    },
}

fn default_half_width() -> f64 {
    0.5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSpec {
    pub charts: [String; 2],
    pub points: PointSpec,
    /// The same points in other charts' coordinates; computed from the
    /// transitions when absent.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points_in: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_plus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_minus: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub charts: [String; 3],
    pub points: PointSpec,
    #[serde(default, rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub charts: [String; 4],
    pub points: PointSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernSpecJson {
    pub pieces: Vec<ChernPieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernPieceSpec {
    pub chart: String,
    pub region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Per-check overrides, by exact name or dotted prefix.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaSpec>,
}

/// A number, or `"auto"` / `"calibrate"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaSpec {
    Value(f64),
    Word(String),
}
