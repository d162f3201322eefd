//! Problem instances: a reference measure, a transport budget, an objective,
//! and the box the search is allowed to explore.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ObjectiveFn;
use crate::measure::DiscreteMeasure;
use crate::space::MetricSpec;

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]` with `lo < hi`
/// coordinate-wise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Input(format!(
                "box bounds must be non-empty and of equal length, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().chain(hi.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("box bound".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::Input(
                "box must satisfy lo < hi in every coordinate".into(),
            ));
        }
        Ok(SearchBox { lo, hi })
    }

    /// The symmetric box `[-half, half]^dim`.
    pub fn centered(dim: usize, half: f64) -> Result<Self> {
        SearchBox::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| *c >= *l && *c <= *h)
    }

    /// Clamps each coordinate into the box.
    pub fn clamp(&self, coords: &mut [f64]) {
        for (c, (l, h)) in coords.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *c = c.clamp(*l, *h);
        }
    }
}

/// A complete worst-case expectation problem: maximize the expectation of
/// `objective` over all measures within transport distance `radius` of
/// `reference`, with candidate support restricted to `search_box`.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemInstance {
    reference: DiscreteMeasure,
    radius: f64,
    metric: MetricSpec,
    objective: ObjectiveFn,
    search_box: SearchBox,
}

impl ProblemInstance {
    pub fn new(
        reference: DiscreteMeasure,
        radius: f64,
        metric: MetricSpec,
        objective: ObjectiveFn,
        search_box: SearchBox,
    ) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Input(format!(
                "radius must be finite and strictly positive, got {radius}"
            )));
        }
        let dim = reference.dim();
        if objective.dim() != dim {
            return Err(Error::Dim {
                expected: dim,
                got: objective.dim(),
            });
        }
        if search_box.dim() != dim {
            return Err(Error::Dim {
                expected: dim,
                got: search_box.dim(),
            });
        }
        if let crate::space::MetricKind::WeightedEuclidean { weights } = metric.kind() {
            if weights.len() != dim {
                return Err(Error::Dim {
                    expected: dim,
                    got: weights.len(),
                });
            }
        }
        for atom in reference.atoms() {
            if !search_box.contains(atom.coords()) {
                return Err(Error::Input(format!(
                    "search box must contain every reference atom; {:?} is outside",
                    atom.coords()
                )));
            }
        }
        Ok(ProblemInstance {
            reference,
            radius,
            metric,
            objective,
            search_box,
        })
    }

    pub fn reference(&self) -> &DiscreteMeasure {
        &self.reference
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn objective(&self) -> &ObjectiveFn {
        &self.objective
    }

    pub fn search_box(&self) -> &SearchBox {
        &self.search_box
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    /// The transport budget `radius^p`.
    pub fn budget(&self) -> f64 {
        self.metric.pow_p(self.radius)
    }

    /// Same instance with a different radius; everything else reused.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        ProblemInstance::new(
            self.reference.clone(),
            radius,
            self.metric.clone(),
            self.objective.clone(),
            self.search_box.clone(),
        )
    }
}
