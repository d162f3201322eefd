//! Discrete probability measures: finitely many weighted atoms.
//!
//! Weights are non-negative and sum to one within [`WEIGHT_SUM_TOL`];
//! construction fails otherwise unless the renormalizing constructor is
//! used. Atom order is preserved as given, so "the first atom" is a stable
//! notion for routines that single one out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{MetricSpec, Point};

/// Tolerance on `|sum(weights) - 1|` accepted by the strict constructor.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Two atoms closer than this are considered the same support point when
/// merging duplicates.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// A discrete probability measure `sum_i w_i * delta(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Strict constructor: weights must already sum to one within
    /// [`WEIGHT_SUM_TOL`]. Zero weights are allowed; negative ones are not.
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&atoms, &weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Input(format!(
                "weights must sum to 1 within {WEIGHT_SUM_TOL:e}, got {sum}"
            )));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Renormalizing constructor: scales the weights by their sum, which must
    /// be finite and strictly positive.
    pub fn new_renormalized(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&atoms, &weights)?;
        let sum: f64 = weights.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::Input(format!(
                "cannot renormalize weights with sum {sum}"
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Point mass at `atom`.
    pub fn dirac(atom: Point) -> Self {
        DiscreteMeasure {
            atoms: vec![atom],
            weights: vec![1.0],
        }
    }

    fn validate_shape(atoms: &[Point], weights: &[f64]) -> Result<()> {
        if atoms.is_empty() {
            return Err(Error::Input("a measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].dim();
        if atoms.iter().any(|a| a.dim() != dim) {
            return Err(Error::Input("atoms have mixed dimensions".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("measure weight".into()));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Input("weights must be non-negative".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom(&self, i: usize) -> (&Point, f64) {
        (&self.atoms[i], self.weights[i])
    }

    /// Merges atoms whose pairwise Euclidean distance is at most `tol`,
    /// summing their weights. The earliest occurrence keeps its position.
    pub fn merge_duplicates(&self, tol: f64) -> Self {
        let mut atoms: Vec<Point> = Vec::with_capacity(self.len());
        let mut weights: Vec<f64> = Vec::with_capacity(self.len());
        'outer: for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (j, kept) in atoms.iter().enumerate() {
                let d2: f64 = a
                    .coords()
                    .iter()
                    .zip(kept.coords())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if d2.sqrt() <= tol {
                    weights[j] += w;
                    continue 'outer;
                }
            }
            atoms.push(a.clone());
            weights.push(*w);
        }
        DiscreteMeasure { atoms, weights }
    }

    /// Drops atoms with exactly zero weight. Keeps at least one atom (the
    /// weights sum to one, so some atom always has positive weight).
    pub fn without_zero_atoms(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        DiscreteMeasure {
            atoms: keep.iter().map(|&i| self.atoms[i].clone()).collect(),
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// `sum_i w_i * d(x_i, x0)^p`: the p-th moment about `x0`.
    pub fn pth_moment(&self, x0: &Point, metric: &MetricSpec) -> Result<f64> {
        let mut acc = 0.0;
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            acc += w * metric.cost(a, x0)?;
        }
        Ok(acc)
    }

    /// Coordinate-wise weighted mean of the atoms.
    pub fn barycenter(&self) -> Point {
        let dim = self.dim();
        let mut c = vec![0.0; dim];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (k, x) in a.coords().iter().enumerate() {
                c[k] += w * x;
            }
        }
        Point::new(c).expect("finite convex combination of finite coordinates")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        let atoms = points.iter().map(|&x| Point::scalar(x).unwrap()).collect();
        DiscreteMeasure::new(atoms, weights.to_vec()).unwrap()
    }

    #[test]
    fn moment_of_two_atom_measure_hand_sum() {
        // 0.5 * |0-0|^2 + 0.5 * |2-0|^2 = 2.
        let mu = m(&[0.0, 2.0], &[0.5, 0.5]);
        let metric = MetricSpec::euclidean(2.0).unwrap();
        let mom = mu
            .pth_moment(&Point::scalar(0.0).unwrap(), &metric)
            .unwrap();
        assert_eq!(mom, 2.0);
    }

    #[test]
    fn moment_of_dirac_about_itself_is_zero() {
        let mu = DiscreteMeasure::dirac(Point::scalar(3.0).unwrap());
        let metric = MetricSpec::euclidean(1.5).unwrap();
        let mom = mu
            .pth_moment(&Point::scalar(3.0).unwrap(), &metric)
            .unwrap();
        assert_eq!(mom, 0.0);
    }

    #[test]
    fn moment_is_invariant_under_atom_permutation() {
        let a = m(&[-1.0, 0.5, 2.0], &[0.25, 0.5, 0.25]);
        let b = m(&[2.0, -1.0, 0.5], &[0.25, 0.25, 0.5]);
        let metric = MetricSpec::euclidean(2.0).unwrap();
        let x0 = Point::scalar(0.3).unwrap();
        let ma = a.pth_moment(&x0, &metric).unwrap();
        let mb = b.pth_moment(&x0, &metric).unwrap();
        assert!((ma - mb).abs() < 1e-14);
    }

    #[test]
    fn bad_weight_sums_are_rejected_and_renormalization_fixes_them() {
        let atoms = vec![Point::scalar(0.0).unwrap(), Point::scalar(1.0).unwrap()];
        assert!(DiscreteMeasure::new(atoms.clone(), vec![0.5, 0.6]).is_err());
        let mu = DiscreteMeasure::new_renormalized(atoms, vec![0.5, 0.6]).unwrap();
        let s: f64 = mu.weights().iter().sum();
        assert!((s - 1.0).abs() <= WEIGHT_SUM_TOL);
    }

    #[test]
    fn negative_weights_are_rejected() {
        let atoms = vec![Point::scalar(0.0).unwrap(), Point::scalar(1.0).unwrap()];
        assert!(DiscreteMeasure::new(atoms.clone(), vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new_renormalized(atoms, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn zero_weights_are_allowed_and_removable() {
        let mu = m(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]);
        assert_eq!(mu.len(), 3);
        let trimmed = mu.without_zero_atoms();
        assert_eq!(trimmed.len(), 1);
        assert_eq!(trimmed.atoms()[0].coords(), &[1.0]);
    }

    #[test]
    fn merge_duplicates_sums_weights_and_keeps_first_position() {
        let close = 0.5 + 1e-14;
        let mu = m(&[0.0, 0.5, close, 1.0], &[0.1, 0.2, 0.3, 0.4]);
        let merged = mu.merge_duplicates(ATOM_MERGE_TOL);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged.atoms()[1].coords(), &[0.5]);
        assert!((merged.weights()[1] - 0.5).abs() < 1e-15);
        let s: f64 = merged.weights().iter().sum();
        assert!((s - 1.0).abs() <= WEIGHT_SUM_TOL);
    }

    #[test]
    fn barycenter_is_the_weighted_mean() {
        let mu = m(&[0.0, 2.0], &[0.25, 0.75]);
        assert_eq!(mu.barycenter().coords(), &[1.5]);
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        let atoms = vec![
            Point::scalar(0.0).unwrap(),
            Point::new(vec![0.0, 1.0]).unwrap(),
        ];
        assert!(DiscreteMeasure::new(atoms, vec![0.5, 0.5]).is_err());
    }
}
