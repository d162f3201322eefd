//! Structural primal solver and dual upper bound for the worst-case
//! expectation over a transport ball.
//!
//! Every optimal vertex of the underlying LP is supported on at most N + 1
//! atoms when the reference measure has N atoms, and can be parameterized by
//! letting exactly one reference atom split its mass across two destinations
//! while every other atom moves as a block. [`StructuralCandidate`] encodes
//! that parameterization; [`solve_primal`] searches over it with multi-start
//! cyclic coordinate ascent; [`dual_bound`] computes the standard
//! one-dimensional dual upper bound; [`certify`] cross-checks a report with
//! the exact transport LP and the duality gap.
//!
//! All searches are restricted to the instance's box. The reported values
//! are therefore bounds for the box-restricted problem; whether the box is
//! large enough to capture the unrestricted optimum is the caller's modeling
//! decision, and the growth certificates in the finiteness module are the
//! tool for judging it.

mod dual;
mod golden;
mod pattern;
mod primal;

pub use dual::dual_bound;
pub use primal::solve_primal;

use serde::Serialize;

use crate::ball;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::measure::DiscreteMeasure;
use crate::space::Point;

/// Coincident destination atoms are merged below this fraction of the
/// widest box axis.
pub const MERGE_REL_TOL: f64 = 1e-6;
/// Slack allowed when re-verifying ball membership with the exact LP.
pub const MEMBERSHIP_TOL: f64 = 1e-7;
/// Most negative duality gap tolerated before a bound counts as broken.
pub const WEAK_DUALITY_TOL: f64 = 1e-7;
/// Transport budget slack accepted when validating candidates built by hand.
pub const BUDGET_TOL: f64 = 1e-9;

/// One point of the structural search space: atom `split_index` of the
/// reference splits its mass between `locations[split_index]` and
/// `split_location`; every other reference atom moves to its entry in
/// `locations` as a block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralCandidate {
    /// Which reference atom donates the split mass.
    pub split_index: usize,
    /// Destination of each reference atom.
    pub locations: Vec<Point>,
    /// Second destination of the split atom.
    pub split_location: Point,
    /// Mass routed to `split_location`, in `[0, weight of the split atom]`.
    pub split_mass: f64,
}

impl StructuralCandidate {
    /// The do-nothing candidate: every atom stays put and nothing splits.
    pub fn identity(inst: &ProblemInstance) -> Self {
        let nu = inst.reference();
        let locations: Vec<Point> = nu.atoms().to_vec();
        StructuralCandidate {
            split_index: 0,
            locations: locations.clone(),
            split_location: locations[0].clone(),
            split_mass: 0.0,
        }
    }

    /// Checks shapes, the split-mass range, and the transport budget.
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        let nu = inst.reference();
        if self.locations.len() != nu.len() {
            return Err(Error::Input(format!(
                "candidate carries {} locations for {} reference atoms",
                self.locations.len(),
                nu.len()
            )));
        }
        if self.split_index >= nu.len() {
            return Err(Error::Input(format!(
                "split index {} out of range for {} atoms",
                self.split_index,
                nu.len()
            )));
        }
        for x in self.locations.iter().chain([&self.split_location]) {
            if x.dim() != inst.dim() {
                return Err(Error::Dim {
                    expected: inst.dim(),
                    got: x.dim(),
                });
            }
        }
        let alpha_j = nu.weights()[self.split_index];
        if !(0.0..=alpha_j + 1e-15).contains(&self.split_mass) {
            return Err(Error::Input(format!(
                "split mass {} outside [0, {alpha_j}]",
                self.split_mass
            )));
        }
        let budget = self.budget_used(inst)?;
        if budget > inst.budget() + BUDGET_TOL {
            return Err(Error::Input(format!(
                "candidate spends {budget} of a {} transport budget",
                inst.budget()
            )));
        }
        Ok(())
    }

    /// Exact transport cost of the structural plan this candidate encodes.
    pub fn budget_used(&self, inst: &ProblemInstance) -> Result<f64> {
        let nu = inst.reference();
        let metric = inst.metric();
        let mut total = 0.0;
        for i in 0..nu.len() {
            let (y, alpha) = nu.atom(i);
            let w = if i == self.split_index {
                alpha - self.split_mass
            } else {
                alpha
            };
            if w != 0.0 {
                total += w * metric.cost(&self.locations[i], y)?;
            }
        }
        if self.split_mass != 0.0 {
            let (y_j, _) = nu.atom(self.split_index);
            total += self.split_mass * metric.cost(&self.split_location, y_j)?;
        }
        Ok(total)
    }

    /// Expectation of the objective under the induced measure.
    pub fn objective(&self, inst: &ProblemInstance) -> Result<f64> {
        let nu = inst.reference();
        let f = inst.objective();
        let mut total = 0.0;
        for i in 0..nu.len() {
            let alpha = nu.weights()[i];
            let w = if i == self.split_index {
                alpha - self.split_mass
            } else {
                alpha
            };
            if w != 0.0 {
                total += w * f.eval(&self.locations[i])?;
            }
        }
        if self.split_mass != 0.0 {
            total += self.split_mass * f.eval(&self.split_location)?;
        }
        Ok(total)
    }

    /// The induced measure with coincident atoms merged to their weighted
    /// mean and atoms sorted by coordinates for deterministic reports.
    pub fn measure(&self, inst: &ProblemInstance) -> Result<DiscreteMeasure> {
        let (atoms, _) = merged_support(self, inst)?;
        let mut pairs = atoms;
        pairs.sort_by(|a, b| {
            lex_cmp(a.0.coords(), b.0.coords()).then(a.1.total_cmp(&b.1))
        });
        let (atoms, weights) = pairs.into_iter().unzip();
        DiscreteMeasure::new(atoms, weights)
    }
}

/// Free-function form of [`StructuralCandidate::objective`].
pub fn objective_of(cand: &StructuralCandidate, inst: &ProblemInstance) -> Result<f64> {
    cand.objective(inst)
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Collapses destination atoms closer than [`MERGE_REL_TOL`] of the widest
/// box axis onto their weighted mean. Transport costs can only decrease
/// under the merge because the cost is convex in the destination, so a
/// feasible candidate stays feasible. Returns the merged `(atom, weight)`
/// list and the exact transport cost of the merged plan.
pub(crate) fn merged_support(
    cand: &StructuralCandidate,
    inst: &ProblemInstance,
) -> Result<(Vec<(Point, f64)>, f64)> {
    // Each slot: a destination plus the (anchor index, mass) flows into it.
    type Slot = (Vec<f64>, Vec<(usize, f64)>);

    let nu = inst.reference();
    let metric = inst.metric();
    let tol = MERGE_REL_TOL * inst.search_box().max_width();

    let mut slots: Vec<Slot> = Vec::new();
    for i in 0..nu.len() {
        let alpha = nu.weights()[i];
        let w = if i == cand.split_index {
            alpha - cand.split_mass
        } else {
            alpha
        };
        if w > 0.0 {
            slots.push((cand.locations[i].coords().to_vec(), vec![(i, w)]));
        }
    }
    if cand.split_mass > 0.0 {
        slots.push((
            cand.split_location.coords().to_vec(),
            vec![(cand.split_index, cand.split_mass)],
        ));
    }

    loop {
        let mut merged_any = false;
        'outer: for a in 0..slots.len() {
            for b in a + 1..slots.len() {
                let d = metric.distance_coords(&slots[a].0, &slots[b].0)?;
                if d > tol {
                    continue;
                }
                let (pos_b, flows_b) = slots.remove(b);
                let wa: f64 = slots[a].1.iter().map(|f| f.1).sum();
                let wb: f64 = flows_b.iter().map(|f| f.1).sum();
                let total = wa + wb;
                for (c, cb) in slots[a].0.iter_mut().zip(&pos_b) {
                    *c = (*c * wa + *cb * wb) / total;
                }
                slots[a].1.extend(flows_b);
                merged_any = true;
                break 'outer;
            }
        }
        if !merged_any {
            break;
        }
    }

    let mut atoms = Vec::with_capacity(slots.len());
    let mut budget = 0.0;
    for (pos, flows) in slots {
        let point = Point::new(pos)?;
        let mut mass = 0.0;
        for (anchor, w) in flows {
            budget += w * metric.cost(&point, nu.atom(anchor).0)?;
            mass += w;
        }
        atoms.push((point, mass));
    }
    Ok((atoms, budget))
}

/// Outcome of the primal search, optionally annotated with a dual bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Expectation of the objective under `primal_measure`.
    pub primal_value: f64,
    /// Best measure found; at most N + 1 atoms.
    pub primal_measure: DiscreteMeasure,
    /// Exact transport cost of the structural plan behind the measure.
    pub budget_used: f64,
    /// Restart rounds that were requested.
    pub restarts: usize,
    /// Whether the best restart's ascent stalled rather than hitting the
    /// round cap.
    pub converged: bool,
    /// Upper bound from [`dual_bound`], when computed.
    pub dual_value: Option<f64>,
    /// `dual_value - primal_value`, when the dual is present.
    pub gap: Option<f64>,
}

impl SolveReport {
    /// Attaches a dual bound and the induced gap.
    pub fn with_dual(mut self, dual: f64) -> Self {
        self.dual_value = Some(dual);
        self.gap = Some(dual - self.primal_value);
        self
    }
}

/// The three checks behind a certificate: duality gap within tolerance,
/// exact-LP ball membership, and the N + 1 sparsity bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub gap: f64,
    pub gap_ok: bool,
    /// Exact transport distance from the reference to the primal measure.
    pub distance: f64,
    pub membership_ok: bool,
    pub atom_count: usize,
    pub sparsity_ok: bool,
    pub certified: bool,
}

/// Cross-checks a populated report against the instance.
///
/// `gap_tol` is absolute. A gap below the negative of
/// [`WEAK_DUALITY_TOL`] means the upper bound fell under the primal value,
/// which signals a broken bound rather than a good solution, and fails the
/// gap check. Membership is re-verified with the exact transport LP, not
/// the candidate's own bookkeeping.
pub fn certify(
    inst: &ProblemInstance,
    report: &SolveReport,
    gap_tol: f64,
) -> Result<Certification> {
    let Some(gap) = report.gap else {
        return Err(Error::Input(
            "certification needs a report with a dual bound attached".into(),
        ));
    };
    if gap_tol.is_nan() || gap_tol < 0.0 {
        return Err(Error::Input(format!(
            "gap tolerance must be non-negative, got {gap_tol}"
        )));
    }
    let membership = ball::contains(
        inst.reference(),
        inst.radius(),
        &report.primal_measure,
        inst.metric(),
        MEMBERSHIP_TOL,
    )?;
    let gap_ok = gap <= gap_tol && gap >= -WEAK_DUALITY_TOL;
    let atom_count = report.primal_measure.len();
    let sparsity_ok = atom_count <= inst.reference().len() + 1;
    Ok(Certification {
        gap,
        gap_ok,
        distance: membership.distance,
        membership_ok: membership.inside,
        atom_count,
        sparsity_ok,
        certified: gap_ok && membership.inside && sparsity_ok,
    })
}
