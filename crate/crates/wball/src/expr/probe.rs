//! Growth probing: how fast does an objective grow relative to
//! `1 + d(x, x0)^p_probe` as `x` escapes to infinity?
//!
//! Each requested radius `R` gets a thin shell `{x : d(x, x0) in [R, 1.05 R]}`
//! sampled with metric-uniform random directions. The reported ratio is the
//! largest sampled `f(x) / (1 + d(x, x0)^p_probe)`; a sequence of shells with
//! growing ratios is evidence that no constant `c` satisfies
//! `f(x) <= c (1 + d^p_probe)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::ObjectiveFn;
use crate::error::{Error, Result};
use crate::space::{MetricSpec, Point};

/// One probed shell: the shell's inner radius and the best sampled ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellSample {
    pub radius: f64,
    pub ratio: f64,
}

/// Relative shell thickness: samples live in `[R, 1.05 R]`.
pub const SHELL_THICKNESS: f64 = 0.05;

/// Probes `f` on metric shells around `x0`.
///
/// `radii` must be strictly increasing and positive. Sampling is
/// deterministic given `seed`; each shell derives its own generator from
/// `(seed, shell index)`, so the output does not depend on evaluation order.
/// Points where `f` hits a domain error are discarded; a shell losing every
/// sample is an error.
pub fn growth_ratio(
    f: &ObjectiveFn,
    x0: &Point,
    p_probe: f64,
    radii: &[f64],
    metric: &MetricSpec,
    samples_per_shell: usize,
    seed: u64,
) -> Result<Vec<ShellSample>> {
    if !p_probe.is_finite() || p_probe <= 0.0 {
        return Err(Error::Input(format!(
            "probe exponent must be finite and positive, got {p_probe}"
        )));
    }
    if samples_per_shell == 0 {
        return Err(Error::Input("samples_per_shell must be at least 1".into()));
    }
    if radii.is_empty() {
        return Err(Error::Input("at least one probe radius is required".into()));
    }
    if radii[0] <= 0.0 || !radii.iter().all(|r| r.is_finite()) {
        return Err(Error::Input("probe radii must be finite and positive".into()));
    }
    for w in radii.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Input(
                "probe radii must be strictly increasing".into(),
            ));
        }
    }
    if f.dim() != x0.dim() {
        return Err(Error::Dim {
            expected: f.dim(),
            got: x0.dim(),
        });
    }

    let dim = x0.dim();
    let mut shells = Vec::with_capacity(radii.len());
    for (k, &radius) in radii.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(shell_seed(seed, k));
        let mut best: Option<f64> = None;
        let mut x = vec![0.0; dim];
        let mut dir = vec![0.0; dim];
        for _ in 0..samples_per_shell {
            // Direction of unit metric length; resample the rare degenerate
            // draw.
            let mut len = 0.0;
            for _ in 0..64 {
                for d in dir.iter_mut() {
                    *d = rng.sample(StandardNormal);
                }
                len = metric.vector_norm(&dir);
                if len > 1e-12 {
                    break;
                }
            }
            if len <= 1e-12 {
                continue;
            }
            let t = radius * (1.0 + SHELL_THICKNESS * rng.random::<f64>());
            let scale = t / len;
            for i in 0..dim {
                x[i] = x0.coords()[i] + scale * dir[i];
            }
            let Ok(val) = f.eval_coords(&x) else { continue };
            let d = metric
                .distance_coords(&x, x0.coords())
                .expect("dimensions checked above");
            let ratio = val / (1.0 + pow_probe(d, p_probe));
            best = Some(match best {
                Some(b) => b.max(ratio),
                None => ratio,
            });
        }
        let ratio = best.ok_or_else(|| {
            Error::NoSamples(format!(
                "every sample on the shell at radius {radius} hit a domain error"
            ))
        })?;
        shells.push(ShellSample { radius, ratio });
    }
    Ok(shells)
}

fn pow_probe(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

fn shell_seed(seed: u64, shell: usize) -> u64 {
    crate::mix_seed(seed, shell as u64 + 1)
}
