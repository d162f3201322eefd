//! The transport ball around a reference measure: membership tests and the
//! compactness-flavoured certificates that come with it.
//!
//! Every measure within radius `r` of the reference `nu` obeys a uniform
//! p-th moment bound: writing `M = sum_i w_i d(y_i, x0)^p` for the reference
//! moment about a base point `x0`, the triangle inequality through the point
//! mass at `x0` gives
//!
//! ```text
//! (p-th moment of mu about x0)^(1/p) <= M^(1/p) + r
//! ```
//!
//! so `moment_bound = (M^(1/p) + r)^p`. Chaining Markov's inequality with
//! the power-mean inequality turns that into a tail bound: for any
//! `eps > 0`, at most `eps` of the mass of any member can sit farther than
//! `moment_bound^(1/p) / eps` from `x0`. These bounds are what keeps
//! worst-case mass from escaping to infinity undetected.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::space::{MetricSpec, Point};
use crate::transport::wasserstein;

/// Result of an exact membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    /// True when `W_p(mu, nu) <= r + tol`.
    pub inside: bool,
    /// `r - W_p(mu, nu)`; negative when outside.
    pub margin: f64,
    /// The computed distance `W_p(mu, nu)`.
    pub distance: f64,
}

/// Uniform moment bound holding for every member of the ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCertificate {
    pub radius: f64,
    /// p-th moment of the reference about `base_point`.
    pub reference_moment: f64,
    /// `(reference_moment^(1/p) + radius)^p`; bounds the p-th moment of any
    /// member about `base_point`.
    pub moment_bound: f64,
    pub base_point: Point,
    /// Transport exponent the bound was computed for.
    pub power: f64,
}

/// Tail control derived from a [`BallCertificate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// Distance from the base point beyond which at most `eps` mass can live.
    pub threshold_radius: f64,
    /// Mass the tested measure actually carries beyond the threshold.
    pub tail_mass: f64,
    pub eps: f64,
}

/// Exact membership test via the transport LP.
pub fn contains(
    nu: &DiscreteMeasure,
    radius: f64,
    mu: &DiscreteMeasure,
    metric: &MetricSpec,
    tol: f64,
) -> Result<Membership> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::Input(format!(
            "ball radius must be finite and non-negative, got {radius}"
        )));
    }
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::Input(format!(
            "membership tolerance must be non-negative, got {tol}"
        )));
    }
    let distance = wasserstein(mu, nu, metric)?;
    Ok(Membership {
        inside: distance <= radius + tol,
        margin: radius - distance,
        distance,
    })
}

/// Moment bound for the ball of radius `radius` around `nu`. The base point
/// defaults to the reference barycenter when not supplied.
pub fn moment_certificate(
    nu: &DiscreteMeasure,
    radius: f64,
    metric: &MetricSpec,
    base_point: Option<Point>,
) -> Result<BallCertificate> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Input(format!(
            "ball radius must be finite and strictly positive, got {radius}"
        )));
    }
    let x0 = match base_point {
        Some(p) => {
            if p.dim() != nu.dim() {
                return Err(Error::Dim {
                    expected: nu.dim(),
                    got: p.dim(),
                });
            }
            p
        }
        None => nu.barycenter(),
    };
    let reference_moment = nu.pth_moment(&x0, metric)?;
    let moment_bound = metric.pow_p(metric.root_p(reference_moment) + radius);
    Ok(BallCertificate {
        radius,
        reference_moment,
        moment_bound,
        base_point: x0,
        power: metric.power(),
    })
}

/// Mass of `mu` beyond the certificate's `eps`-tail threshold. For any ball
/// member the result is guaranteed to be at most `eps`; callers typically
/// assert that.
pub fn tail_mass_bound(
    mu: &DiscreteMeasure,
    metric: &MetricSpec,
    cert: &BallCertificate,
    eps: f64,
) -> Result<TailBound> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Input(format!(
            "eps must be finite and strictly positive, got {eps}"
        )));
    }
    if metric.power() != cert.power {
        return Err(Error::Contract(format!(
            "certificate was issued for exponent {} but the metric carries {}",
            cert.power,
            metric.power()
        )));
    }
    let scale = metric.root_p(cert.moment_bound);
    let threshold_radius = scale / eps;
    let mut tail_mass = 0.0;
    for (atom, w) in mu.atoms().iter().zip(mu.weights()) {
        if metric.distance(atom, &cert.base_point)? > threshold_radius {
            tail_mass += w;
        }
    }
    Ok(TailBound {
        threshold_radius,
        tail_mass,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        let atoms = points.iter().map(|&x| Point::scalar(x).unwrap()).collect();
        DiscreteMeasure::new(atoms, weights.to_vec()).unwrap()
    }

    fn metric(p: f64) -> MetricSpec {
        MetricSpec::euclidean(p).unwrap()
    }

    #[test]
    fn membership_of_the_reference_itself() {
        let nu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let got = contains(&nu, 1.0, &nu, &metric(1.0), 0.0).unwrap();
        assert!(got.inside);
        assert_eq!(got.distance, 0.0);
        assert_eq!(got.margin, 1.0);
    }

    #[test]
    fn membership_boundary_cases() {
        let nu = DiscreteMeasure::dirac(Point::scalar(0.0).unwrap());
        let mu = DiscreteMeasure::dirac(Point::scalar(1.0).unwrap());
        // Distance exactly 1: inside a radius-1 ball, outside radius 0.5.
        let inside = contains(&nu, 1.0, &mu, &metric(1.0), 0.0).unwrap();
        assert!(inside.inside && inside.margin == 0.0);
        let outside = contains(&nu, 0.5, &mu, &metric(1.0), 0.0).unwrap();
        assert!(!outside.inside);
        assert_eq!(outside.margin, -0.5);
        // A tolerance admits the boundary overshoot.
        let tol = contains(&nu, 1.0 - 1e-9, &mu, &metric(1.0), 1e-8).unwrap();
        assert!(tol.inside);
    }

    #[test]
    fn dirac_reference_moment_bound_is_radius_power() {
        // Reference moment about its own atom is 0, so the bound is r^p.
        let nu = DiscreteMeasure::dirac(Point::scalar(3.0).unwrap());
        let cert = moment_certificate(
            &nu,
            2.0,
            &metric(2.0),
            Some(Point::scalar(3.0).unwrap()),
        )
        .unwrap();
        assert_eq!(cert.reference_moment, 0.0);
        assert_eq!(cert.moment_bound, 4.0);
    }

    #[test]
    fn two_atom_reference_moment_bound_hand_value() {
        // M = 0.5*0 + 0.5*2 = 1 for p = 1, so bound = (1 + 1)^1 = 2.
        let nu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let cert = moment_certificate(
            &nu,
            1.0,
            &metric(1.0),
            Some(Point::scalar(0.0).unwrap()),
        )
        .unwrap();
        assert_eq!(cert.reference_moment, 1.0);
        assert_eq!(cert.moment_bound, 2.0);
    }

    #[test]
    fn quadratic_exponent_bound_hand_value() {
        // M = 1 for p = 2 about 1.0 (atoms at 0 and 2), bound = (1 + 2)^2 = 9.
        let nu = m1(&[0.0, 2.0], &[0.5, 0.5]);
        let cert = moment_certificate(
            &nu,
            2.0,
            &metric(2.0),
            Some(Point::scalar(1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(cert.reference_moment, 1.0);
        assert_eq!(cert.moment_bound, 9.0);
    }

    #[test]
    fn default_base_point_is_the_barycenter() {
        let nu = m1(&[0.0, 2.0], &[0.25, 0.75]);
        let cert = moment_certificate(&nu, 1.0, &metric(2.0), None).unwrap();
        assert_eq!(cert.base_point.coords(), &[1.5]);
    }

    #[test]
    fn tail_threshold_and_mass_hand_values() {
        // moment_bound = 4 at p = 2 => scale 2; eps = 0.5 => threshold 4.
        let nu = DiscreteMeasure::dirac(Point::scalar(0.0).unwrap());
        let cert = moment_certificate(&nu, 2.0, &metric(2.0), None).unwrap();
        let mu = m1(&[0.0, 5.0], &[0.9, 0.1]);
        let tail = tail_mass_bound(&mu, &metric(2.0), &cert, 0.5).unwrap();
        assert_eq!(tail.threshold_radius, 4.0);
        assert!((tail.tail_mass - 0.1).abs() < 1e-15);
    }

    #[test]
    fn members_respect_the_moment_and_tail_bounds() {
        let nu = m1(&[-1.0, 0.0, 2.0], &[0.25, 0.5, 0.25]);
        let met = metric(2.0);
        let r = 0.75;
        let cert = moment_certificate(&nu, r, &met, None).unwrap();
        // A few hand-built members: shift some mass within budget.
        let members = vec![
            nu.clone(),
            m1(&[-1.0, 0.3, 2.0], &[0.25, 0.5, 0.25]),
            m1(&[-1.0, 0.0, 2.0, 2.7], &[0.25, 0.5, 0.15, 0.1]),
        ];
        for mu in members {
            let mem = contains(&nu, r, &mu, &met, 0.0).unwrap();
            assert!(mem.inside, "test member should be inside, {mem:?}");
            let mom = mu.pth_moment(&cert.base_point, &met).unwrap();
            assert!(
                mom <= cert.moment_bound + 1e-9,
                "moment {mom} exceeds bound {}",
                cert.moment_bound
            );
            for eps in [0.5, 0.1, 0.01] {
                let tail = tail_mass_bound(&mu, &met, &cert, eps).unwrap();
                assert!(tail.tail_mass <= eps + 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_certificate_power_is_a_contract_violation() {
        let nu = DiscreteMeasure::dirac(Point::scalar(0.0).unwrap());
        let cert = moment_certificate(&nu, 1.0, &metric(2.0), None).unwrap();
        let err = tail_mass_bound(&nu, &metric(1.0), &cert, 0.5).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let nu = DiscreteMeasure::dirac(Point::scalar(0.0).unwrap());
        assert!(contains(&nu, -1.0, &nu, &metric(1.0), 0.0).is_err());
        assert!(contains(&nu, 1.0, &nu, &metric(1.0), -0.1).is_err());
        assert!(moment_certificate(&nu, 0.0, &metric(1.0), None).is_err());
        let cert = moment_certificate(&nu, 1.0, &metric(1.0), None).unwrap();
        assert!(tail_mass_bound(&nu, &metric(1.0), &cert, 0.0).is_err());
    }
}
