//! Exact optimal transport between discrete measures.
//!
//! The solver is a transportation simplex on the bipartite supply/demand
//! graph: north-west-corner start, then improving pivots along the unique
//! tree cycle of each entering cell. Bases are spanning trees, so returned
//! plans are vertices of the transportation polytope with at most
//! `rows + cols - 1` nonzero entries.
//!
//! Degeneracy is handled the classical way: row marginals receive a
//! lexicographic perturbation of magnitude `1e-13 * (index + 1)` (balanced on
//! the last column) which makes ties generically impossible; the final basis
//! is then re-solved against the unperturbed marginals, so reported flows
//! and cost are exact for the original problem. As a backstop, a long run of
//! degenerate pivots switches the entering rule to Bland's (first negative
//! reduced cost), which cannot cycle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::space::MetricSpec;

/// Magnitude of the anti-degeneracy perturbation on row marginals.
const PERTURBATION: f64 = 1e-13;

/// Reduced costs above `-RC_TOL` are treated as non-improving.
const RC_TOL: f64 = 1e-11;

/// Consecutive zero-gain pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 64;

/// Cost matrices up to this many entries are materialized densely.
const DENSE_COST_LIMIT: usize = 1_000_000;

/// An optimal coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    /// Number of atoms in the source measure.
    pub rows: usize,
    /// Number of atoms in the target measure.
    pub cols: usize,
    /// `(source atom, target atom, mass)` triples with strictly positive
    /// mass.
    pub entries: Vec<(usize, usize, f64)>,
    /// `sum mass * d^p`: the optimal transport cost (not yet re-rooted).
    pub cost: f64,
    /// True when the plan is a basic (vertex) solution, which this solver
    /// always produces.
    pub vertex: bool,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for (i, _, f) in &self.entries {
            s[*i] += f;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for (_, j, f) in &self.entries {
            s[*j] += f;
        }
        s
    }

    fn transposed(self) -> TransportPlan {
        TransportPlan {
            rows: self.cols,
            cols: self.rows,
            entries: self
                .entries
                .into_iter()
                .map(|(i, j, f)| (j, i, f))
                .collect(),
            cost: self.cost,
            vertex: self.vertex,
        }
    }
}

/// Minimum-cost coupling of `mu` to `nu` under `metric`'s `d^p` cost.
pub fn solve_transport(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &MetricSpec,
) -> Result<TransportPlan> {
    if mu.dim() != nu.dim() {
        return Err(Error::Dim {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    // Solve in a canonical orientation so cost is bit-identical under
    // argument swap, then transpose the plan back if needed.
    if swap_for_canonical(mu, nu) {
        Ok(solve_oriented(nu, mu, metric)?.transposed())
    } else {
        solve_oriented(mu, nu, metric)
    }
}

/// `W_p(mu, nu)`: the p-th root of the optimal transport cost.
pub fn wasserstein(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &MetricSpec,
) -> Result<f64> {
    Ok(metric.root_p(solve_transport(mu, nu, metric)?.cost))
}

/// Orders measure pairs so `(a, b)` and `(b, a)` solve the identical LP.
fn swap_for_canonical(a: &DiscreteMeasure, b: &DiscreteMeasure) -> bool {
    use std::cmp::Ordering;
    match a.len().cmp(&b.len()) {
        Ordering::Less => return false,
        Ordering::Greater => return true,
        Ordering::Equal => {}
    }
    for (pa, pb) in a.atoms().iter().zip(b.atoms()) {
        for (ca, cb) in pa.coords().iter().zip(pb.coords()) {
            match ca.partial_cmp(cb).expect("coordinates are finite") {
                Ordering::Less => return false,
                Ordering::Greater => return true,
                Ordering::Equal => {}
            }
        }
    }
    for (wa, wb) in a.weights().iter().zip(b.weights()) {
        match wa.partial_cmp(wb).expect("weights are finite") {
            Ordering::Less => return false,
            Ordering::Greater => return true,
            Ordering::Equal => {}
        }
    }
    false
}

fn solve_oriented(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: &MetricSpec,
) -> Result<TransportPlan> {
    // Zero-weight atoms take no part in the LP; remember original indices.
    let rows_map: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let cols_map: Vec<usize> = (0..nu.len()).filter(|&j| nu.weights()[j] > 0.0).collect();
    let m = rows_map.len();
    let n = cols_map.len();
    debug_assert!(m > 0 && n > 0, "weights sum to one");

    let a: Vec<f64> = rows_map.iter().map(|&i| mu.weights()[i]).collect();
    let b: Vec<f64> = cols_map.iter().map(|&j| nu.weights()[j]).collect();

    let dense: Option<Vec<f64>> = if m.saturating_mul(n) <= DENSE_COST_LIMIT {
        let mut c = Vec::with_capacity(m * n);
        for &i in &rows_map {
            for &j in &cols_map {
                c.push(metric.cost(&mu.atoms()[i], &nu.atoms()[j])?);
            }
        }
        Some(c)
    } else {
        None
    };
    let cost = |i: usize, j: usize| -> f64 {
        match &dense {
            Some(c) => c[i * n + j],
            None => metric
                .cost(&mu.atoms()[rows_map[i]], &nu.atoms()[cols_map[j]])
                .expect("dimensions validated"),
        }
    };

    // Perturbed, balanced marginals for the pivoting phase.
    let mut ap = a.clone();
    let mut bp = b.clone();
    let mut added = 0.0;
    for (i, v) in ap.iter_mut().enumerate() {
        let eps = PERTURBATION * (i + 1) as f64;
        *v += eps;
        added += eps;
    }
    bp[n - 1] += added;

    let (mut cells, mut flows) = northwest_corner(&ap, &bp);
    debug_assert_eq!(cells.len(), m + n - 1);

    let cap = 100 * (m + n).max(10) * (m + n).max(10);
    let mut stalled = 0usize;
    let mut converged = false;
    for _ in 0..cap {
        let (u, v) = potentials(&cells, m, n, &cost);
        let entering = if stalled >= STALL_LIMIT {
            first_negative(&u, &v, &cost)
        } else {
            most_negative(&u, &v, &cost)
        };
        let Some((ei, ej)) = entering else {
            converged = true;
            break;
        };
        let theta = pivot(&mut cells, &mut flows, m, n, ei, ej);
        if theta <= PERTURBATION * 0.5 {
            stalled += 1;
        } else {
            stalled = 0;
        }
    }
    if !converged {
        return Err(Error::IterationLimit(format!(
            "transport simplex did not converge within {cap} pivots on a {m}x{n} problem"
        )));
    }

    // Re-solve the final (optimal) basis against the unperturbed marginals.
    let exact = tree_flows(&cells, m, n, &a, &b);
    let mut total = 0.0;
    let mut entries = Vec::new();
    for (cell, flow) in cells.iter().zip(&exact) {
        if *flow < -1e-9 {
            return Err(Error::Contract(format!(
                "transport basis produced a negative flow {flow}; marginals are ill-conditioned"
            )));
        }
        if *flow > 0.0 {
            total += flow * cost(cell.0, cell.1);
            entries.push((rows_map[cell.0], cols_map[cell.1], *flow));
        }
    }

    Ok(TransportPlan {
        rows: mu.len(),
        cols: nu.len(),
        entries,
        cost: total,
        vertex: true,
    })
}

/// North-west-corner starting basis: exactly `m + n - 1` cells forming a
/// spanning tree, degenerate zeros included.
fn northwest_corner(a: &[f64], b: &[f64]) -> (Vec<(usize, usize)>, Vec<f64>) {
    let (m, n) = (a.len(), b.len());
    let mut cells = Vec::with_capacity(m + n - 1);
    let mut flows = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    let mut ra = a[0];
    let mut rb = b[0];
    loop {
        let f = ra.min(rb).max(0.0);
        cells.push((i, j));
        flows.push(f);
        ra -= f;
        rb -= f;
        if i + 1 == m && j + 1 == n {
            break;
        }
        if (ra <= rb || j + 1 == n) && i + 1 < m {
            i += 1;
            ra = a[i];
        } else {
            j += 1;
            rb = b[j];
        }
    }
    (cells, flows)
}

/// Node ids: rows are `0..m`, columns are `m..m+n`.
fn adjacency(cells: &[(usize, usize)], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    for (idx, (i, j)) in cells.iter().enumerate() {
        adj[*i].push((idx, m + j));
        adj[m + j].push((idx, *i));
    }
    adj
}

/// Dual potentials from the basis tree: `u[i] + v[j] = cost(i, j)` on basic
/// cells, anchored at `u[0] = 0`.
fn potentials(
    cells: &[(usize, usize)],
    m: usize,
    n: usize,
    cost: &impl Fn(usize, usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let adj = adjacency(cells, m, n);
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut queue = vec![0usize];
    while let Some(node) = queue.pop() {
        for &(cell, other) in &adj[node] {
            let (i, j) = cells[cell];
            if node < m && v[j].is_nan() {
                v[j] = cost(i, j) - u[i];
                queue.push(other);
            } else if node >= m && u[i].is_nan() {
                u[i] = cost(i, j) - v[j];
                queue.push(other);
            }
        }
    }
    (u, v)
}

fn most_negative(
    u: &[f64],
    v: &[f64],
    cost: &impl Fn(usize, usize) -> f64,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            let rc = cost(i, j) - ui - vj;
            if rc < -RC_TOL && best.is_none_or(|(_, _, b)| rc < b) {
                best = Some((i, j, rc));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

fn first_negative(
    u: &[f64],
    v: &[f64],
    cost: &impl Fn(usize, usize) -> f64,
) -> Option<(usize, usize)> {
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            if cost(i, j) - ui - vj < -RC_TOL {
                return Some((i, j));
            }
        }
    }
    None
}

/// Brings cell `(ei, ej)` into the basis along its unique tree cycle and
/// returns the amount of mass shifted.
fn pivot(
    cells: &mut [(usize, usize)],
    flows: &mut [f64],
    m: usize,
    n: usize,
    ei: usize,
    ej: usize,
) -> f64 {
    let adj = adjacency(cells, m, n);
    // Unique tree path from the entering column node to the entering row
    // node; together with the entering cell it closes the cycle.
    let path = tree_path(&adj, m + n, m + ej, ei);
    // Entering edge gains mass; path edges alternate starting with a loss at
    // the shared column node.
    let mut theta = f64::INFINITY;
    let mut leave: Option<usize> = None;
    for (t, &cell) in path.iter().enumerate() {
        if t % 2 == 0 {
            // losing edge
            if flows[cell] < theta {
                theta = flows[cell];
                leave = Some(cell);
            }
        }
    }
    let leave = leave.expect("cycle always has a losing edge");
    let theta = theta.max(0.0);
    for (t, &cell) in path.iter().enumerate() {
        if t % 2 == 0 {
            flows[cell] -= theta;
        } else {
            flows[cell] += theta;
        }
    }
    cells[leave] = (ei, ej);
    flows[leave] = theta;
    theta
}

/// Cells along the unique tree path from node `s` to node `t`.
fn tree_path(adj: &[Vec<(usize, usize)>], nodes: usize, s: usize, t: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes]; // (node, cell)
    let mut visited = vec![false; nodes];
    visited[s] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(s);
    while let Some(node) = queue.pop_front() {
        if node == t {
            break;
        }
        for &(cell, other) in &adj[node] {
            if !visited[other] {
                visited[other] = true;
                parent[other] = Some((node, cell));
                queue.push_back(other);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = t;
    while let Some((prev, cell)) = parent[node] {
        path.push(cell);
        node = prev;
    }
    path.reverse();
    path
}

/// Solves the basis tree for flows matching the given marginals exactly, by
/// repeated leaf elimination.
fn tree_flows(cells: &[(usize, usize)], m: usize, n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut residual: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let mut degree = vec![0usize; m + n];
    for (i, j) in cells {
        degree[*i] += 1;
        degree[m + *j] += 1;
    }
    let adj = adjacency(cells, m, n);
    let mut used = vec![false; cells.len()];
    let mut flows = vec![0.0; cells.len()];
    let mut leaves: Vec<usize> = (0..m + n).filter(|&x| degree[x] == 1).collect();
    while let Some(node) = leaves.pop() {
        let Some(&(cell, other)) = adj[node].iter().find(|&&(c, _)| !used[c]) else {
            continue; // isolated once its single edge was consumed
        };
        used[cell] = true;
        flows[cell] = residual[node];
        residual[other] -= residual[node];
        residual[node] = 0.0;
        degree[node] -= 1;
        degree[other] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    flows
}
