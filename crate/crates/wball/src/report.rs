//! Structured run reports.
//!
//! Every command emits one `Report`: a versioned JSON document that echoes
//! the problem it ran on together with the command name, the seed, the
//! wall-clock time, and a tagged `outputs` payload. Reports are
//! self-contained; the embedded problem document re-parses to the instance
//! that produced the numbers, so a run can be reproduced from its report
//! alone. With equal seeds, reruns reproduce exact-LP fields bit for bit
//! and search fields to within reporting precision; only `wall_time_ms` is
//! expected to vary.

use serde::Serialize;

use crate::finiteness::{DivergenceWitness, GrowthCertificate};
use crate::oracle::GridLpSolution;
use crate::problem::ProblemFile;
use crate::solver::{Certification, SolveReport};
use crate::transport::TransportPlan;

/// Version stamped into every report.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: u32,
    /// Which subcommand produced this report.
    pub command: String,
    /// Seed the run used, when the command involves randomized search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    /// Echo of the problem document, when the command ran on one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<ProblemFile>,
    pub outputs: Outputs,
}

impl Report {
    pub fn new(command: &str, outputs: Outputs) -> Self {
        Report {
            version: REPORT_VERSION,
            command: command.to_string(),
            seed: None,
            wall_time_ms: 0,
            instance: None,
            outputs,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_instance(mut self, instance: ProblemFile) -> Self {
        self.instance = Some(instance);
        self
    }

    pub fn with_wall_time_ms(mut self, ms: u64) -> Self {
        self.wall_time_ms = ms;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Command-specific payload, tagged by output type.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Outputs {
    Distance {
        distance: f64,
        cost: f64,
        plan: TransportPlan,
    },
    Solve {
        solve: SolveReport,
        certification: Certification,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle: Option<OracleSummary>,
        #[serde(skip_serializing_if = "Option::is_none")]
        growth: Option<GrowthCertificate>,
        forced: bool,
    },
    /// A solve was refused because growth probing reported divergence
    /// evidence and the run was not forced.
    Refused {
        growth: GrowthCertificate,
    },
    Certify {
        at_exponent: GrowthCertificate,
        at_attainment_probe: GrowthCertificate,
    },
    Diverge {
        witnesses: Vec<WitnessRow>,
    },
}

/// Summary of an audit-LP run on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    /// Points per axis of the audit grid.
    pub grid: usize,
    pub value: f64,
    pub nonzeros: usize,
    /// Whether the plan is sparse enough to be a basic solution.
    pub sparsity_ok: bool,
    pub iterations: usize,
}

impl OracleSummary {
    pub fn from_solution(grid: usize, sol: &GridLpSolution) -> crate::Result<Self> {
        let (nonzeros, sparsity_ok) = crate::oracle::check_sparsity(&sol.plan)?;
        Ok(OracleSummary {
            grid,
            value: sol.value,
            nonzeros,
            sparsity_ok,
            iterations: sol.iterations,
        })
    }
}

/// One line of the escaping-mass witness table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRow {
    pub step: usize,
    pub shifted_mass: f64,
    pub objective_value: f64,
    /// Exact-LP distance of the witness from the reference.
    pub verified_distance: f64,
    pub escape_atom: Vec<f64>,
}

impl WitnessRow {
    pub fn from_witness(w: &DivergenceWitness) -> Self {
        WitnessRow {
            step: w.step,
            shifted_mass: w.shifted_mass,
            objective_value: w.objective_value,
            verified_distance: w.verified_distance,
            escape_atom: w.escape_atom.coords().to_vec(),
        }
    }
}
