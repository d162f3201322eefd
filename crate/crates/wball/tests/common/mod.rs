//! Shared helpers for the integration suites: an independent reference
//! evaluator for the expression language, random generators for measures,
//! metrics, instances, and verified ball members, all driven by seeded RNGs
//! so every failure replays.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wball::error::EvalError;
use wball::expr::Expr;
use wball::{DiscreteMeasure, MetricKind, MetricSpec, Point, ProblemInstance, SearchBox};

/// Tree-walking evaluator kept deliberately separate from the library's
/// compiled tape. Same domain rules: `sqrt` of a negative, `log` of a
/// non-positive, division by exactly zero, fractional powers of negative
/// bases, and any non-finite intermediate are errors.
pub fn reference_eval(e: &Expr, coords: &[f64]) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Number(v) => *v,
        Expr::Coord(i) => coords[*i],
        Expr::Norm => coords.iter().map(|c| c * c).sum::<f64>().sqrt(),
        Expr::Neg(a) => -reference_eval(a, coords)?,
        Expr::Abs(a) => reference_eval(a, coords)?.abs(),
        Expr::Sqrt(a) => {
            let x = reference_eval(a, coords)?;
            if x < 0.0 {
                return Err(EvalError::SqrtNegative(x));
            }
            x.sqrt()
        }
        Expr::Exp(a) => reference_eval(a, coords)?.exp(),
        Expr::Log(a) => {
            let x = reference_eval(a, coords)?;
            if x <= 0.0 {
                return Err(EvalError::LogNonPositive(x));
            }
            x.ln()
        }
        Expr::Add(a, b) => reference_eval(a, coords)? + reference_eval(b, coords)?,
        Expr::Sub(a, b) => reference_eval(a, coords)? - reference_eval(b, coords)?,
        Expr::Mul(a, b) => reference_eval(a, coords)? * reference_eval(b, coords)?,
        Expr::Div(a, b) => {
            let x = reference_eval(a, coords)?;
            let y = reference_eval(b, coords)?;
            if y == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            x / y
        }
        Expr::Pow(a, b) => {
            let base = reference_eval(a, coords)?;
            let exponent = reference_eval(b, coords)?;
            if base < 0.0 && exponent.fract() != 0.0 {
                return Err(EvalError::PowDomain { base, exponent });
            }
            if base == 0.0 && exponent < 0.0 {
                return Err(EvalError::PowDomain { base, exponent });
            }
            base.powf(exponent)
        }
        Expr::Min(args) => {
            let mut acc = f64::INFINITY;
            for a in args {
                acc = acc.min(reference_eval(a, coords)?);
            }
            acc
        }
        Expr::Max(args) => {
            let mut acc = f64::NEG_INFINITY;
            for a in args {
                acc = acc.max(reference_eval(a, coords)?);
            }
            acc
        }
    };
    if !v.is_finite() {
        return Err(EvalError::NonFinite);
    }
    Ok(v)
}

fn random_literal(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4u8) {
        0 => rng.random_range(-3i32..=3) as f64,
        1 => rng.random_range(-30i32..=30) as f64 / 4.0,
        2 => rng.random_range(-3.0..3.0),
        _ => rng.random_range(0.0..1.0) * 10f64.powi(rng.random_range(-2..3)),
    }
}

/// Random expression tree over `dim` coordinates, depth-bounded. Any tree
/// this produces prints to source the parser accepts.
pub fn random_expr(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> Expr {
    let b = |e: Expr| Box::new(e);
    if depth == 0 {
        return match rng.random_range(0..4u8) {
            0 => Expr::Number(random_literal(rng)),
            1 | 2 => Expr::Coord(rng.random_range(0..dim)),
            _ => Expr::Norm,
        };
    }
    let child = |rng: &mut ChaCha8Rng| random_expr(rng, dim, depth - 1);
    match rng.random_range(0..12u8) {
        0 => Expr::Neg(b(child(rng))),
        1 => Expr::Add(b(child(rng)), b(child(rng))),
        2 => Expr::Sub(b(child(rng)), b(child(rng))),
        3 => Expr::Mul(b(child(rng)), b(child(rng))),
        4 => Expr::Div(b(child(rng)), b(child(rng))),
        5 => Expr::Pow(b(child(rng)), b(child(rng))),
        6 => Expr::Abs(b(child(rng))),
        7 => Expr::Sqrt(b(child(rng))),
        8 => Expr::Exp(b(child(rng))),
        9 => Expr::Log(b(child(rng))),
        10 => {
            let n = rng.random_range(2..=4);
            Expr::Min((0..n).map(|_| child(rng)).collect())
        }
        _ => {
            let n = rng.random_range(2..=4);
            Expr::Max((0..n).map(|_| child(rng)).collect())
        }
    }
}

/// Random point with coordinates in `[-half_width, half_width]`.
pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> Point {
    Point::new(
        (0..dim)
            .map(|_| rng.random_range(-half_width..=half_width))
            .collect(),
    )
    .unwrap()
}

/// Random measure with up to `max_atoms` atoms in a centered box.
pub fn random_measure(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_atoms: usize,
    half_width: f64,
) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let atoms = (0..n).map(|_| random_point(rng, dim, half_width)).collect();
    let weights = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::new_renormalized(atoms, weights).unwrap()
}

/// Random ground metric of any supported kind with exponent `p`.
pub fn random_metric(rng: &mut ChaCha8Rng, dim: usize, p: f64) -> MetricSpec {
    let kind = match rng.random_range(0..3u8) {
        0 => MetricKind::Euclidean,
        1 => MetricKind::QNorm {
            q: rng.random_range(1.0..=4.0),
        },
        _ => MetricKind::WeightedEuclidean {
            weights: (0..dim).map(|_| rng.random_range(0.5..=2.0)).collect(),
        },
    };
    MetricSpec::new(kind, p).unwrap()
}

/// Objective source built from total templates only, so evaluation succeeds
/// everywhere. Used where the solver must not hit domain errors.
pub fn random_total_objective(rng: &mut ChaCha8Rng, dim: usize) -> String {
    let coord = |rng: &mut ChaCha8Rng| format!("x{}", rng.random_range(1..=dim));
    let mut terms = Vec::new();
    let n = rng.random_range(1..=3u8);
    for _ in 0..n {
        let a = rng.random_range(-2.0..=2.0);
        let c = rng.random_range(-1.5..=1.5);
        let x = coord(rng);
        let term = match rng.random_range(0..5u8) {
            0 => format!("{a:?} * {x}"),
            1 => format!("{a:?} * abs({x} - {c:?})"),
            2 => format!("{a:?} * ({x} - {c:?})^2"),
            3 => format!("{a:?} * min({x}, {c:?})"),
            _ => format!("{a:?} * exp(-({x} - {c:?})^2)"),
        };
        terms.push(term);
    }
    terms.join(" + ")
}

/// Random instance whose objective is total, whose atoms sit inside the box
/// with margin, and whose radius keeps the search well inside.
pub fn random_total_instance(rng: &mut ChaCha8Rng, dim: usize) -> ProblemInstance {
    let half_width = rng.random_range(4.0..=8.0);
    let reference = random_measure(rng, dim, 4, half_width - 2.0);
    let p = if rng.random_range(0..2u8) == 0 { 1.0 } else { 2.0 };
    let metric = random_metric(rng, dim, p);
    let radius = rng.random_range(0.1..=1.5);
    let objective =
        wball::ObjectiveFn::parse(&random_total_objective(rng, dim), dim).unwrap();
    let search_box = SearchBox::new(vec![-half_width; dim], vec![half_width; dim]).unwrap();
    ProblemInstance::new(reference, radius, metric, objective, search_box).unwrap()
}

/// Builds a measure inside the ball by construction: displace atoms and
/// split off slivers while spending at most `scale` of the cost budget,
/// where `scale < 1`. The identity-style coupling that moves each piece
/// from its source atom certifies the distance from above, so membership
/// holds with strict margin; callers re-verify with the exact LP.
pub fn random_member(
    rng: &mut ChaCha8Rng,
    nu: &DiscreteMeasure,
    radius: f64,
    metric: &MetricSpec,
    scale: f64,
) -> DiscreteMeasure {
    let dim = nu.dim();
    let mut budget = metric.pow_p(radius) * scale;
    let mut atoms: Vec<Point> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for i in 0..nu.len() {
        let (y, alpha) = nu.atom(i);
        if alpha <= 0.0 {
            continue;
        }
        let mut remaining = alpha;
        // Optionally split off a sliver that travels on its own.
        if rng.random_range(0..2u8) == 0 && budget > 0.0 {
            let sliver = rng.random_range(0.0..=0.5) * alpha;
            if sliver > 0.0 {
                let spend = rng.random_range(0.0..=budget * 0.5);
                let dist = metric.root_p(spend / sliver).min(3.0);
                let dest = displace(rng, y.coords(), dist, metric, dim);
                let cost = sliver * metric.cost_coords(&dest, y.coords()).unwrap();
                if cost <= budget {
                    budget -= cost;
                    atoms.push(Point::new(dest).unwrap());
                    weights.push(sliver);
                    remaining -= sliver;
                }
            }
        }
        // Move the remaining block a smaller distance.
        let spend = rng.random_range(0.0..=budget * 0.5);
        let dist = metric.root_p(spend / remaining).min(3.0);
        let dest = displace(rng, y.coords(), dist, metric, dim);
        let cost = remaining * metric.cost_coords(&dest, y.coords()).unwrap();
        if cost <= budget {
            budget -= cost;
            atoms.push(Point::new(dest).unwrap());
            weights.push(remaining);
        } else {
            atoms.push(y.clone());
            weights.push(remaining);
        }
    }
    DiscreteMeasure::new_renormalized(atoms, weights).unwrap()
}

/// Moves `from` a metric distance of at most `dist` in a random direction.
fn displace(
    rng: &mut ChaCha8Rng,
    from: &[f64],
    dist: f64,
    metric: &MetricSpec,
    dim: usize,
) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let to: Vec<f64> = from.iter().zip(&dir).map(|(f, d)| f + d).collect();
    let norm = metric.distance_coords(from, &to).unwrap_or(0.0);
    if norm <= 0.0 || dist <= 0.0 {
        return from.to_vec();
    }
    let t = dist / norm * (1.0 - 1e-12);
    from.iter().zip(&dir).map(|(f, d)| f + t * d).collect()
}

/// Seeded RNG for a named test stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
