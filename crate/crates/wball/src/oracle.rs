//! Brute-force audit solver on a finite grid.
//!
//! Restricting candidate destinations to a finite set Z turns the worst-case
//! expectation into a plain linear program: maximize `sum f(z) g[z,i]`
//! subject to one column-sum constraint per reference atom
//! (`sum_z g[z,i] = alpha_i`) and a single transport budget row
//! (`sum g[z,i] d(z, y_i)^p <= r^p`). With N reference atoms that is N
//! equality rows plus one slacked inequality, so every basic solution has at
//! most N + 1 nonzero masses. The normalization constraint is implied by the
//! column sums and deliberately dropped; keeping it would only inflate the
//! basis and weaken the sparsity bound to N + 2.
//!
//! The reference atoms are always injected into Z, which makes the identity
//! coupling (each atom stays put) a feasible starting basis whose matrix is
//! the identity, so no phase-one search is needed. The simplex enters on the
//! largest reduced cost while steps make progress and falls back to Bland's
//! smallest-index rule during degenerate stalls; the fallback cannot cycle
//! and every exit from it strictly improves the objective, so the hybrid
//! terminates like pure Bland without its long index crawls on fine grids.
//!
//! Values from this module are exact optima of the discretized problem and
//! lower bounds for the continuous one; they converge from below as the grid
//! refines and never decrease when one grid is a superset of another.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, SearchBox};
use crate::measure::DiscreteMeasure;
use crate::space::Point;

/// Masses at or below this are treated as structural zeros of a plan.
pub const NONZERO_TOL: f64 = 1e-12;
/// A reduced cost must clear this to count as improving.
const RC_TOL: f64 = 1e-9;
/// Pivot directions at or below this cannot receive mass in the ratio test.
const RATIO_TOL: f64 = 1e-11;
/// Steps at or below this count as degenerate when watching for stalls.
const STALL_STEP: f64 = 1e-13;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 32;
/// Column-sum agreement required of a plan before taking marginals.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Basis inverse is rebuilt from scratch after this many pivots.
const REFRESH_EVERY: usize = 64;
/// Hard ceiling on candidate-set size times reference atoms.
pub const GRID_CELL_LIMIT: usize = 10_000_000;
/// Cost matrices up to this many entries are precomputed densely.
const DENSE_COST_LIMIT: usize = 2_000_000;

/// Per-dimension point counts of a rectangular candidate grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    counts: Vec<usize>,
}

impl GridSpec {
    /// Validates that every axis carries at least two points.
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Input("grid needs at least one dimension".into()));
        }
        if let Some(c) = counts.iter().find(|&&c| c < 2) {
            return Err(Error::Input(format!(
                "each grid dimension needs at least two points, got {c}"
            )));
        }
        let mut total = 1usize;
        for &c in &counts {
            total = total
                .checked_mul(c)
                .filter(|&t| t <= GRID_CELL_LIMIT)
                .ok_or_else(|| {
                    Error::Input(format!(
                        "grid would exceed the {GRID_CELL_LIMIT} candidate limit"
                    ))
                })?;
        }
        Ok(GridSpec { counts })
    }

    /// The same count along every axis.
    pub fn uniform(dim: usize, count: usize) -> Result<Self> {
        GridSpec::new(vec![count; dim])
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Cartesian grid over the box, endpoints included on every axis.
    pub fn points(&self, bx: &SearchBox) -> Result<Vec<Point>> {
        if self.counts.len() != bx.dim() {
            return Err(Error::Dim {
                expected: bx.dim(),
                got: self.counts.len(),
            });
        }
        let total: usize = self.counts.iter().product();
        let dim = self.counts.len();
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                let n = self.counts[k];
                let (lo, hi) = (bx.lo()[k], bx.hi()[k]);
                let step = (hi - lo) / (n - 1) as f64;
                (0..n)
                    .map(|j| if j + 1 == n { hi } else { lo + j as f64 * step })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        loop {
            let coords: Vec<f64> = (0..dim).map(|k| axes[k][idx[k]]).collect();
            out.push(Point::new(coords)?);
            // Odometer increment, last axis fastest.
            let mut k = dim;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// A sparse coupling between candidate grid points and reference atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPlan {
    /// Candidate set Z: the grid plus every reference atom.
    pub points: Vec<Point>,
    /// Reference weights, one per coupling column block.
    pub atom_weights: Vec<f64>,
    /// `(point index, atom index, mass)` triples with positive mass.
    pub entries: Vec<(usize, usize, f64)>,
    /// Transport budget actually spent by the plan.
    pub budget_used: f64,
    /// Whether the plan is a basic solution of the LP.
    pub vertex: bool,
}

/// Optimal value and plan of the discretized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLpSolution {
    pub value: f64,
    pub plan: GridPlan,
    pub iterations: usize,
}

/// Builds Z by injecting the reference atoms into the grid, deduplicating
/// bitwise-exact matches, and returns each atom's index into Z.
fn candidate_set(grid: &GridSpec, inst: &ProblemInstance) -> Result<(Vec<Point>, Vec<usize>)> {
    let mut points = grid.points(inst.search_box())?;
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let key: Vec<u64> = p.coords().iter().map(|c| c.to_bits()).collect();
        seen.entry(key).or_insert(i);
    }
    let nu = inst.reference();
    let mut atom_index = Vec::with_capacity(nu.len());
    for i in 0..nu.len() {
        let (a, _) = nu.atom(i);
        let key: Vec<u64> = a.coords().iter().map(|c| c.to_bits()).collect();
        let idx = *seen.entry(key).or_insert_with(|| {
            points.push(a.clone());
            points.len() - 1
        });
        atom_index.push(idx);
    }
    if points.len().saturating_mul(nu.len()) > GRID_CELL_LIMIT {
        return Err(Error::Input(format!(
            "candidate set of {} points times {} atoms exceeds the {GRID_CELL_LIMIT} limit",
            points.len(),
            nu.len()
        )));
    }
    Ok((points, atom_index))
}

/// Inverts the basis matrix by Gauss-Jordan elimination with partial
/// pivoting. Columns are the constraint columns of the current basis.
fn invert_basis(cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = cols.len();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| cols[c][r]).collect())
        .collect();
    let mut inv: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::Contract("grid LP basis became singular".into()));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col];
        for v in &mut a[col] {
            *v /= scale;
        }
        for v in &mut inv[col] {
            *v /= scale;
        }
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..m {
                a[row][k] -= factor * a[col][k];
                inv[row][k] -= factor * inv[col][k];
            }
        }
    }
    Ok(inv)
}

/// Solves the discretized problem exactly and returns an optimal vertex.
///
/// The candidate set is the grid over the search box with the reference
/// atoms injected, so the identity coupling is always feasible and the value
/// is at least the reference expectation. Objective evaluation errors on any
/// candidate point surface as errors rather than being skipped.
pub fn solve_grid_lp(inst: &ProblemInstance, grid: &GridSpec) -> Result<GridLpSolution> {
    let (points, atom_index) = candidate_set(grid, inst)?;
    let nu = inst.reference();
    let metric = inst.metric();
    let n = nu.len();
    let nz = points.len();
    let nvars = nz * n + 1;
    let slack = nvars - 1;
    let m = n + 1;

    let mut obj = Vec::with_capacity(nz);
    for p in &points {
        obj.push(inst.objective().eval(p)?);
    }
    // Column j < slack covers (z, i) = (j / n, j % n) and has a 1 in row i
    // plus the transport cost in the budget row.
    let dense_costs = if nz * n <= DENSE_COST_LIMIT {
        let mut c = Vec::with_capacity(nz * n);
        for p in &points {
            for i in 0..n {
                c.push(metric.cost(p, nu.atom(i).0)?);
            }
        }
        Some(c)
    } else {
        None
    };
    let cost_of = |j: usize| -> Result<f64> {
        match &dense_costs {
            Some(c) => Ok(c[j]),
            None => metric.cost(&points[j / n], nu.atom(j % n).0),
        }
    };

    let budget = inst.budget();
    let mut b: Vec<f64> = nu.weights().to_vec();
    b.push(budget);

    let mut basis: Vec<usize> = (0..n).map(|i| atom_index[i] * n + i).collect();
    basis.push(slack);
    let mut binv: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut xb = b.clone();

    let max_pivots = 20_000 + 4 * nvars;
    let mut iterations = 0usize;
    let mut bland = false;
    let mut stalled = 0usize;
    loop {
        // Price the basis: y = c_B * binv, with c_B read off the basis.
        let mut y = vec![0.0; m];
        for (k, &bj) in basis.iter().enumerate() {
            let cb = if bj == slack { 0.0 } else { obj[bj / n] };
            if cb == 0.0 {
                continue;
            }
            for (c, yc) in y.iter_mut().enumerate() {
                *yc += cb * binv[k][c];
            }
        }
        let rc_of = |j: usize| -> Result<f64> {
            Ok(if j == slack {
                -y[m - 1]
            } else {
                obj[j / n] - y[j % n] - y[m - 1] * cost_of(j)?
            })
        };
        // Entering rule: largest reduced cost normally, Bland's smallest
        // improving index while a degenerate stall is being escaped.
        let mut entering = None;
        if bland {
            for j in 0..nvars {
                if rc_of(j)? > RC_TOL {
                    entering = Some(j);
                    break;
                }
            }
        } else {
            let mut best = RC_TOL;
            for j in 0..nvars {
                let rc = rc_of(j)?;
                if rc > best {
                    best = rc;
                    entering = Some(j);
                }
            }
        }
        let Some(j) = entering else { break };
        if iterations >= max_pivots {
            return Err(Error::IterationLimit(format!(
                "grid LP stopped after {iterations} pivots over {nvars} columns"
            )));
        }
        iterations += 1;

        // Direction d = binv * A_j; A_j has at most two nonzeros.
        let d: Vec<f64> = if j == slack {
            (0..m).map(|r| binv[r][m - 1]).collect()
        } else {
            let cj = cost_of(j)?;
            (0..m).map(|r| binv[r][j % n] + cj * binv[r][m - 1]).collect()
        };
        let mut theta = f64::INFINITY;
        for (k, &dk) in d.iter().enumerate() {
            if dk > RATIO_TOL {
                theta = theta.min(xb[k] / dk);
            }
        }
        if !theta.is_finite() {
            return Err(Error::Contract(
                "grid LP direction is unbounded, which contradicts the mass bound".into(),
            ));
        }
        // Among minimal ratios, Bland again: evict the smallest column index.
        let mut leave = usize::MAX;
        let mut leave_col = usize::MAX;
        for (k, &dk) in d.iter().enumerate() {
            if dk > RATIO_TOL
                && xb[k] <= theta * dk * (1.0 + 1e-10) + 1e-300
                && basis[k] < leave_col
            {
                leave_col = basis[k];
                leave = k;
            }
        }
        if theta > STALL_STEP {
            stalled = 0;
            bland = false;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                bland = true;
            }
        }
        for (k, x) in xb.iter_mut().enumerate() {
            *x = (*x - theta * d[k]).max(0.0);
        }
        xb[leave] = theta;
        let pivot = d[leave];
        let row = std::mem::take(&mut binv[leave]);
        let scaled: Vec<f64> = row.iter().map(|v| v / pivot).collect();
        for (k, dk) in d.iter().enumerate() {
            if k == leave || *dk == 0.0 {
                continue;
            }
            for (c, s) in scaled.iter().enumerate() {
                binv[k][c] -= dk * s;
            }
        }
        binv[leave] = scaled;
        basis[leave] = j;

        if iterations.is_multiple_of(REFRESH_EVERY) {
            let cols: Vec<Vec<f64>> = basis
                .iter()
                .map(|&bj| {
                    let mut col = vec![0.0; m];
                    if bj == slack {
                        col[m - 1] = 1.0;
                    } else {
                        col[bj % n] = 1.0;
                        col[m - 1] = cost_of(bj)?;
                    }
                    Ok(col)
                })
                .collect::<Result<_>>()?;
            binv = invert_basis(&cols)?;
            for (k, x) in xb.iter_mut().enumerate() {
                *x = (0..m).map(|c| binv[k][c] * b[c]).sum::<f64>().max(0.0);
            }
        }
    }

    let mut value = 0.0;
    let mut budget_used = 0.0;
    let mut entries = Vec::new();
    for (k, &bj) in basis.iter().enumerate() {
        if bj == slack || xb[k] <= 0.0 {
            continue;
        }
        value += obj[bj / n] * xb[k];
        budget_used += cost_of(bj)? * xb[k];
        entries.push((bj / n, bj % n, xb[k]));
    }
    entries.sort_unstable_by_key(|&(z, i, _)| (z, i));
    Ok(GridLpSolution {
        value,
        plan: GridPlan {
            points,
            atom_weights: nu.weights().to_vec(),
            entries,
            budget_used,
            vertex: true,
        },
        iterations,
    })
}

/// Counts structural nonzeros of a vertex plan and checks them against the
/// N + 1 bound. Plans that are not vertices violate the precondition.
pub fn check_sparsity(plan: &GridPlan) -> Result<(usize, bool)> {
    if !plan.vertex {
        return Err(Error::Contract(
            "sparsity bound applies to vertex plans only; this plan is not basic".into(),
        ));
    }
    let nonzeros = plan
        .entries
        .iter()
        .filter(|&&(_, _, mass)| mass > NONZERO_TOL)
        .count();
    Ok((nonzeros, nonzeros <= plan.atom_weights.len() + 1))
}

/// First marginal of a plan: total mass landing on each candidate point,
/// with zero-mass points dropped.
///
/// The plan's column sums must reproduce the reference weights within
/// [`MARGINAL_TOL`]; anything else is a contract violation, not noise.
pub fn marginal_of(plan: &GridPlan) -> Result<DiscreteMeasure> {
    let n = plan.atom_weights.len();
    let mut row = vec![0.0; plan.points.len()];
    let mut col = vec![0.0; n];
    for &(z, i, mass) in &plan.entries {
        if z >= plan.points.len() || i >= n {
            return Err(Error::Contract("plan entry indexes outside Z or atoms".into()));
        }
        if mass < 0.0 {
            return Err(Error::Contract(format!("plan carries negative mass {mass}")));
        }
        row[z] += mass;
        col[i] += mass;
    }
    for (i, (&got, &want)) in col.iter().zip(&plan.atom_weights).enumerate() {
        if (got - want).abs() > MARGINAL_TOL {
            return Err(Error::Contract(format!(
                "plan column {i} sums to {got} but the reference weight is {want}"
            )));
        }
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (z, &mass) in row.iter().enumerate() {
        if mass > 0.0 {
            atoms.push(plan.points[z].clone());
            weights.push(mass);
        }
    }
    DiscreteMeasure::new_renormalized(atoms, weights)
}
