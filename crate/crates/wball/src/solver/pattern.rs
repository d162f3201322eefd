//! Derivative-free compass search with a feasibility repair hook.
//!
//! The objective language includes kinked primitives (abs, min, max), so the
//! local searches avoid derivatives entirely: axis-aligned steps with
//! geometrically shrinking step sizes. Every proposal first passes through a
//! `repair` projection (box clamping, budget pull-back); proposals the
//! repair cannot fix and proposals where evaluation hits a domain error are
//! simply skipped.

pub(crate) struct PatternParams {
    /// Initial step size as a fraction of each axis width.
    pub init_rel: f64,
    /// Search stops once every step falls below this fraction of its axis.
    pub min_rel: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
}

impl Default for PatternParams {
    fn default() -> Self {
        PatternParams {
            init_rel: 0.1,
            min_rel: 1e-7,
            max_evals: 4000,
        }
    }
}

/// Maximizes `eval` starting from a feasible `start` with known value
/// `start_value`. Returns the best point seen and its value. Strictly
/// greater values are required to move, so the result is deterministic.
pub(crate) fn pattern_maximize(
    start: Vec<f64>,
    start_value: f64,
    widths: &[f64],
    params: &PatternParams,
    repair: &mut dyn FnMut(Vec<f64>) -> Option<Vec<f64>>,
    eval: &mut dyn FnMut(&[f64]) -> Option<f64>,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut x = start;
    let mut value = start_value;
    let mut steps: Vec<f64> = widths.iter().map(|w| w * params.init_rel).collect();
    let floors: Vec<f64> = widths.iter().map(|w| w * params.min_rel).collect();
    let mut evals = 0usize;
    loop {
        let mut improved = false;
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                if evals >= params.max_evals {
                    return (x, value);
                }
                let mut cand = x.clone();
                cand[k] += sign * steps[k];
                let Some(cand) = repair(cand) else { continue };
                evals += 1;
                let Some(v) = eval(&cand) else { continue };
                if v > value {
                    x = cand;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            let mut all_below = true;
            for (s, floor) in steps.iter_mut().zip(&floors) {
                *s *= 0.5;
                all_below &= *s < *floor;
            }
            if all_below {
                return (x, value);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clamp_repair(lo: f64, hi: f64) -> impl FnMut(Vec<f64>) -> Option<Vec<f64>> {
        move |mut v: Vec<f64>| {
            for c in &mut v {
                *c = c.clamp(lo, hi);
            }
            Some(v)
        }
    }

    #[test]
    fn locates_an_interior_maximum() {
        let mut repair = clamp_repair(-1.0, 1.0);
        let mut eval = |c: &[f64]| Some(-(c[0] - 0.3) * (c[0] - 0.3));
        let (x, v) = pattern_maximize(
            vec![0.0],
            -0.09,
            &[2.0],
            &PatternParams::default(),
            &mut repair,
            &mut eval,
        );
        assert!((x[0] - 0.3).abs() < 1e-6, "{}", x[0]);
        assert!(v > -1e-12);
    }

    #[test]
    fn repair_projection_keeps_iterates_feasible() {
        // Ball of radius 0.5 around the origin; maximum of x sits on its rim.
        let mut repair = |mut v: Vec<f64>| {
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if n > 0.5 {
                for c in &mut v {
                    *c *= 0.5 / n;
                }
            }
            Some(v)
        };
        let mut eval = |c: &[f64]| Some(c[0]);
        let (x, v) = pattern_maximize(
            vec![0.0, 0.0],
            0.0,
            &[2.0, 2.0],
            &PatternParams::default(),
            &mut repair,
            &mut eval,
        );
        assert!((v - 0.5).abs() < 1e-6, "{v}");
        assert!((x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn domain_error_regions_are_stepped_around() {
        let mut repair = clamp_repair(-4.0, 4.0);
        // Undefined left of -1; maximum at the domain edge.
        let mut eval = |c: &[f64]| {
            if c[0] < -1.0 {
                None
            } else {
                Some(-c[0])
            }
        };
        let (x, v) = pattern_maximize(
            vec![2.0],
            -2.0,
            &[8.0],
            &PatternParams::default(),
            &mut repair,
            &mut eval,
        );
        assert!(x[0] >= -1.0);
        assert!((v - 1.0).abs() < 1e-5, "{v}");
    }
}
