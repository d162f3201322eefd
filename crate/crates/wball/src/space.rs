//! Ground space: points in `R^n` and the metric that measures transport
//! distances between them.
//!
//! A [`MetricSpec`] pairs a ground distance (Euclidean, a q-norm with
//! `q >= 1`, or a coordinate-weighted Euclidean norm) with the transport
//! exponent `p >= 1`. Transport costs are always `d(a, b)^p`; the exponent
//! travels with the metric so every consumer prices displacement the same
//! way.

use serde::Serialize;

use crate::error::{Error, Result};

/// A point of the ground space. Coordinates are finite by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinate".into()));
        }
        Ok(Point(coords))
    }

    /// Origin of `R^dim`.
    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// One-dimensional point, the common case in examples and tests.
    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Ground distance family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricKind {
    /// Standard Euclidean norm of the difference.
    Euclidean,
    /// `(sum_i |a_i - b_i|^q)^(1/q)` with `q >= 1`.
    QNorm { q: f64 },
    /// `sqrt(sum_i w_i (a_i - b_i)^2)` with strictly positive weights.
    WeightedEuclidean { weights: Vec<f64> },
}

/// Ground metric plus the transport exponent `p >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSpec {
    kind: MetricKind,
    power: f64,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, power: f64) -> Result<Self> {
        if !power.is_finite() || power < 1.0 {
            return Err(Error::Input(format!(
                "transport exponent must be a finite real >= 1, got {power}"
            )));
        }
        match &kind {
            MetricKind::Euclidean => {}
            MetricKind::QNorm { q } => {
                if !q.is_finite() || *q < 1.0 {
                    return Err(Error::Input(format!(
                        "q-norm exponent must be a finite real >= 1, got {q}"
                    )));
                }
            }
            MetricKind::WeightedEuclidean { weights } => {
                if weights.is_empty() {
                    return Err(Error::Input("metric weights must be non-empty".into()));
                }
                if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::Input(
                        "metric weights must be finite and strictly positive".into(),
                    ));
                }
            }
        }
        Ok(MetricSpec { kind, power })
    }

    /// Euclidean ground distance with transport exponent `p`.
    pub fn euclidean(power: f64) -> Result<Self> {
        MetricSpec::new(MetricKind::Euclidean, power)
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Transport exponent `p`.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Ground distance `d(a, b)`.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.distance_coords(a.coords(), b.coords())
    }

    /// Ground distance on raw coordinate slices (hot path for searches).
    pub fn distance_coords(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Dim {
                expected: a.len(),
                got: b.len(),
            });
        }
        if let MetricKind::WeightedEuclidean { weights } = &self.kind {
            if weights.len() != a.len() {
                return Err(Error::Dim {
                    expected: weights.len(),
                    got: a.len(),
                });
            }
        }
        let mut diff = [0.0; 8];
        let mut buf;
        let d: &mut [f64] = if a.len() <= 8 {
            &mut diff[..a.len()]
        } else {
            buf = vec![0.0; a.len()];
            &mut buf
        };
        for i in 0..a.len() {
            d[i] = a[i] - b[i];
        }
        Ok(self.vector_norm(d))
    }

    /// Norm of a displacement vector under the ground metric. All supported
    /// metrics are norms, so `d(x + v, x) = vector_norm(v)` for every `x`.
    pub fn vector_norm(&self, v: &[f64]) -> f64 {
        match &self.kind {
            MetricKind::Euclidean => v.iter().map(|d| d * d).sum::<f64>().sqrt(),
            MetricKind::QNorm { q } => {
                if *q == 1.0 {
                    v.iter().map(|d| d.abs()).sum::<f64>()
                } else if *q == 2.0 {
                    v.iter().map(|d| d * d).sum::<f64>().sqrt()
                } else {
                    // Scale by the largest component so |d|^q cannot overflow
                    // for moderate q.
                    let m = v.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                    if m == 0.0 {
                        return 0.0;
                    }
                    let s: f64 = v.iter().map(|d| (d.abs() / m).powf(*q)).sum();
                    m * s.powf(1.0 / *q)
                }
            }
            MetricKind::WeightedEuclidean { weights } => v
                .iter()
                .zip(weights)
                .map(|(d, w)| w * d * d)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Transport cost `d(a, b)^p`.
    pub fn cost(&self, a: &Point, b: &Point) -> Result<f64> {
        Ok(self.pow_p(self.distance(a, b)?))
    }

    /// Transport cost on raw coordinate slices.
    pub fn cost_coords(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(self.pow_p(self.distance_coords(a, b)?))
    }

    /// `d^p` for a distance already in hand. Exact for `p = 1` and `p = 2`.
    pub fn pow_p(&self, d: f64) -> f64 {
        if self.power == 1.0 {
            d
        } else if self.power == 2.0 {
            d * d
        } else {
            d.powf(self.power)
        }
    }

    /// `c^(1/p)` for a cost already in hand; inverse of [`Self::pow_p`].
    pub fn root_p(&self, c: f64) -> f64 {
        if self.power == 1.0 {
            c
        } else if self.power == 2.0 {
            c.sqrt()
        } else {
            c.powf(1.0 / self.power)
        }
    }
}
