//! Problem and measure files: the textual front door.
//!
//! Problems are declared in TOML with strict parsing: unknown keys are
//! rejected so typos fail loudly instead of silently falling back to
//! defaults. The same structures serialize back into reports, which makes
//! every report self-contained: the embedded document re-parses to the
//! instance that produced it.
//!
//! ```toml
//! version = 1
//! dimension = 1
//! radius = 1.0
//! objective = "x1"
//!
//! [metric]
//! kind = "euclidean"   # or "q-norm" (needs q) or "weighted-euclidean" (needs weights)
//! p = 1.0
//!
//! [reference]
//! atoms = [[0.0]]
//! weights = [1.0]
//!
//! [search_box]
//! lo = [-10.0]
//! hi = [10.0]
//!
//! [solver]             # optional; defaults shown
//! restarts = 64
//! seed = 0
//! grid = 65
//! gap_tol = 1e-4
//! ```
//!
//! Standalone measures use the same dialect with a `[measure]` table, and
//! the command line also accepts inline measures written as
//! `weight@c1,c2;weight@c1,c2`.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ObjectiveFn;
use crate::instance::{ProblemInstance, SearchBox};
use crate::measure::{DiscreteMeasure, ATOM_MERGE_TOL};
use crate::space::{MetricKind, MetricSpec, Point};

/// Version expected in `version = ...` headers.
pub const FILE_VERSION: u32 = 1;

/// Default restart count used when a file omits `[solver]`.
pub const DEFAULT_RESTARTS: usize = 64;
/// Default per-axis grid count for audit runs.
pub const DEFAULT_GRID: usize = 65;
/// Default relative duality-gap tolerance.
pub const DEFAULT_GAP_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub dimension: usize,
    pub radius: f64,
    pub objective: String,
    pub metric: MetricSection,
    pub reference: ReferenceSection,
    pub search_box: BoxSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    /// `euclidean`, `q-norm`, or `weighted-euclidean`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Transport cost exponent p >= 1.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Rescale weights to sum to one instead of requiring it.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub renormalize: bool,
    /// Merge coincident atoms before building the instance.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dedup: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            grid: DEFAULT_GRID,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_gap_tol() -> f64 {
    DEFAULT_GAP_TOL
}

impl MetricSection {
    pub fn to_spec(&self) -> Result<MetricSpec> {
        let kind = match self.kind.as_str() {
            "euclidean" => {
                if self.q.is_some() || self.weights.is_some() {
                    return Err(Error::FileFormat(
                        "the euclidean metric takes neither q nor weights".into(),
                    ));
                }
                MetricKind::Euclidean
            }
            "q-norm" => {
                if self.weights.is_some() {
                    return Err(Error::FileFormat("q-norm takes no weights".into()));
                }
                let q = self.q.ok_or_else(|| {
                    Error::FileFormat("q-norm needs q = ... in [metric]".into())
                })?;
                MetricKind::QNorm { q }
            }
            "weighted-euclidean" => {
                if self.q.is_some() {
                    return Err(Error::FileFormat("weighted-euclidean takes no q".into()));
                }
                let weights = self.weights.clone().ok_or_else(|| {
                    Error::FileFormat("weighted-euclidean needs weights = [...]".into())
                })?;
                MetricKind::WeightedEuclidean { weights }
            }
            other => {
                return Err(Error::FileFormat(format!(
                    "unknown metric kind {other:?}; expected euclidean, q-norm, or weighted-euclidean"
                )))
            }
        };
        MetricSpec::new(kind, self.p)
    }

    pub fn from_spec(spec: &MetricSpec) -> Self {
        match spec.kind() {
            MetricKind::Euclidean => MetricSection {
                kind: "euclidean".into(),
                q: None,
                weights: None,
                p: spec.power(),
            },
            MetricKind::QNorm { q } => MetricSection {
                kind: "q-norm".into(),
                q: Some(*q),
                weights: None,
                p: spec.power(),
            },
            MetricKind::WeightedEuclidean { weights } => MetricSection {
                kind: "weighted-euclidean".into(),
                q: None,
                weights: Some(weights.clone()),
                p: spec.power(),
            },
        }
    }
}

fn atoms_to_points(atoms: &[Vec<f64>], dimension: usize) -> Result<Vec<Point>> {
    atoms
        .iter()
        .map(|coords| {
            if coords.len() != dimension {
                return Err(Error::Dim {
                    expected: dimension,
                    got: coords.len(),
                });
            }
            Point::new(coords.clone())
        })
        .collect()
}

impl ReferenceSection {
    pub fn to_measure(&self, dimension: usize) -> Result<DiscreteMeasure> {
        let atoms = atoms_to_points(&self.atoms, dimension)?;
        let measure = if self.renormalize {
            DiscreteMeasure::new_renormalized(atoms, self.weights.clone())?
        } else {
            DiscreteMeasure::new(atoms, self.weights.clone())?
        };
        Ok(if self.dedup {
            measure.merge_duplicates(ATOM_MERGE_TOL)
        } else {
            measure
        })
    }
}

impl FromStr for ProblemFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let file: ProblemFile =
            toml::from_str(text).map_err(|e| Error::FileFormat(e.to_string()))?;
        if file.version != FILE_VERSION {
            return Err(Error::FileFormat(format!(
                "unsupported problem file version {}, expected {FILE_VERSION}",
                file.version
            )));
        }
        Ok(file)
    }
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        ProblemFile::from_str(&text)
    }

    /// Builds the validated instance this file describes.
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let reference = self.reference.to_measure(self.dimension)?;
        let metric = self.metric.to_spec()?;
        let objective = ObjectiveFn::parse(&self.objective, self.dimension)?;
        let search_box = SearchBox::new(self.search_box.lo.clone(), self.search_box.hi.clone())?;
        ProblemInstance::new(reference, self.radius, metric, objective, search_box)
    }

    /// Solver settings with defaults filled in.
    pub fn solver_settings(&self) -> SolverSection {
        self.solver.clone().unwrap_or_default()
    }

    /// Rebuilds a file document from an instance, for report echoes.
    pub fn from_instance(inst: &ProblemInstance, solver: Option<SolverSection>) -> Self {
        let nu = inst.reference();
        ProblemFile {
            version: FILE_VERSION,
            dimension: inst.dim(),
            radius: inst.radius(),
            objective: inst.objective().source().to_string(),
            metric: MetricSection::from_spec(inst.metric()),
            reference: ReferenceSection {
                atoms: nu.atoms().iter().map(|a| a.coords().to_vec()).collect(),
                weights: nu.weights().to_vec(),
                renormalize: false,
                dedup: false,
            },
            search_box: BoxSection {
                lo: inst.search_box().lo().to_vec(),
                hi: inst.search_box().hi().to_vec(),
            },
            solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub version: u32,
    pub dimension: usize,
    pub measure: MeasureSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl FromStr for MeasureFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let file: MeasureFile =
            toml::from_str(text).map_err(|e| Error::FileFormat(e.to_string()))?;
        if file.version != FILE_VERSION {
            return Err(Error::FileFormat(format!(
                "unsupported measure file version {}, expected {FILE_VERSION}",
                file.version
            )));
        }
        Ok(file)
    }
}

impl MeasureFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        MeasureFile::from_str(&text)
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let atoms = atoms_to_points(&self.measure.atoms, self.dimension)?;
        DiscreteMeasure::new(atoms, self.measure.weights.clone())
    }
}

/// Parses an inline measure of the form `w@c1,c2;w@c1,c2`.
///
/// Atom dimension is inferred from the first atom; weights must sum to one
/// exactly as in measure files.
pub fn parse_inline_measure(text: &str) -> Result<DiscreteMeasure> {
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (i, part) in text.split(';').enumerate() {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::FileFormat(format!("inline measure atom {i} is empty")));
        }
        let (w, coords) = part.split_once('@').ok_or_else(|| {
            Error::FileFormat(format!(
                "inline measure atom {i} needs the form weight@c1,c2,..."
            ))
        })?;
        let weight: f64 = w.trim().parse().map_err(|_| {
            Error::FileFormat(format!("inline measure atom {i}: bad weight {w:?}"))
        })?;
        let coords: Vec<f64> = coords
            .split(',')
            .map(|c| {
                c.trim().parse().map_err(|_| {
                    Error::FileFormat(format!("inline measure atom {i}: bad coordinate {c:?}"))
                })
            })
            .collect::<Result<_>>()?;
        atoms.push(Point::new(coords)?);
        weights.push(weight);
    }
    DiscreteMeasure::new(atoms, weights)
}
