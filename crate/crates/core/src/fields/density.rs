//! Finite-element empirical densities and exact integrals of piecewise-linear densities.

use crate::error::{Error, Result};
use crate::model::profile::periodic_breakpoints;
use crate::model::{Configuration, DensityProfile};

/// `pi(y) = sum_x eta(x) (1 - n |y - x|)^+` as a periodic piecewise-linear profile.
pub fn empirical_density(eta: &Configuration) -> DensityProfile {
    let values: Vec<f64> = eta.as_slice().iter().map(|&b| b as f64).collect();
    DensityProfile::from_grid(&values).expect("occupations lie in [0, 1]")
}

/// `(1/eps) * integral over (x, x + eps] of pi`.
pub fn block_average(pi: &DensityProfile, x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("block size must lie in (0, 1/2), got {eps}")));
    }
    Ok(pi.integral(x, x + eps) / eps)
}

// merged breakpoints of both profiles over [0, 1]
fn merged(a: &DensityProfile, b: &DensityProfile) -> Vec<f64> {
    let mut knots = a.knot_positions().to_vec();
    knots.extend_from_slice(b.knot_positions());
    periodic_breakpoints(&knots, 0.0, 1.0)
}

/// Exact `integral |a - b|` over the circle.
pub fn l1_distance(a: &DensityProfile, b: &DensityProfile) -> f64 {
    let pts = merged(a, b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let h = w[1] - w[0];
        let d0 = a.eval(w[0]) - b.eval(w[0]);
        let d1 = a.eval(w[1]) - b.eval(w[1]);
        total += if d0 * d1 >= 0.0 {
            0.5 * h * (d0.abs() + d1.abs())
        } else {
            0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
        };
    }
    total
}

/// `integral_0^1 |A(y) - B(y)| dy` with `A(y) = integral_0^y a`.
///
/// The raw L1 distance between an empirical density and a smooth profile is
/// of order one (tents oscillate between 0 and 1); the distance between the
/// cumulative masses is the one that shrinks as `n` grows.
pub fn cumulative_l1(a: &DensityProfile, b: &DensityProfile) -> f64 {
    let g = |y: f64| a.primitive(y) - b.primitive(y);
    let pts = merged(a, b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let h = x1 - x0;
        if h <= 0.0 {
            continue;
        }
        // g is quadratic on the piece: g(x0 + s h) = c0 + c1 s + c2 s^2
        let (g0, gm, g1) = (g(x0), g(x0 + 0.5 * h), g(x1));
        let c0 = g0;
        let c2 = 2.0 * (g1 - 2.0 * gm + g0);
        let c1 = g1 - g0 - c2;
        let q = |s: f64| c0 + s * (c1 + s * c2);
        let mut cuts = vec![0.0, 1.0];
        cuts.extend(quadratic_roots(c2, c1, c0).into_iter().filter(|s| *s > 0.0 && *s < 1.0));
        cuts.sort_by(|p, q| p.total_cmp(q));
        for c in cuts.windows(2) {
            let (s0, s1) = (c[0], c[1]);
            // Simpson is exact for quadratics
            let simpson = (s1 - s0) / 6.0 * (q(s0) + 4.0 * q(0.5 * (s0 + s1)) + q(s1));
            total += h * simpson.abs();
        }
    }
    total
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empirical_examples() {
        let ones = empirical_density(&Configuration::ones(8));
        assert_eq!(ones.eval(0.37), 1.0);
        let alt = empirical_density(&Configuration::from_bits("10101010").unwrap());
        assert_eq!(alt.eval(1.0 / 16.0), 0.5);
        assert_eq!(alt.eval(0.0), 1.0);
        assert_eq!(alt.eval(0.125), 0.0);
        assert!((alt.mass() - 0.5).abs() < 1e-15);
        let single = empirical_density(&Configuration::from_bits("1000").unwrap());
        assert_eq!(single.eval(0.0), 1.0);
        assert_eq!(single.eval(0.125), 0.5);
        assert_eq!(single.eval(-0.125), 0.5);
        assert_eq!(single.eval(0.25), 0.0);
        assert_eq!(single.eval(0.75), 0.0);
    }

    #[test]
    fn block_average_examples() {
        let c = DensityProfile::constant(0.3).unwrap();
        assert!((block_average(&c, 0.7, 0.2).unwrap() - 0.3).abs() < 1e-15);
        let cos = DensityProfile::cosine(0.5, 0.5, 1, 4096).unwrap();
        // over (0, 1/2] the cosine integrates to zero
        assert!((block_average(&cos, 0.0, 0.4999999).unwrap() - 0.5).abs() < 1e-5);
        assert!(block_average(&c, 0.0, 0.5).is_err());
    }

    #[test]
    fn l1_of_crossing_lines() {
        let a = DensityProfile::from_knots(vec![(0.0, 0.0), (0.5, 1.0)]).unwrap();
        let b = DensityProfile::constant(0.5).unwrap();
        // |a - b| is a triangle wave with peak 1/2: integral 1/4
        assert!((l1_distance(&a, &b) - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn distances_match_quadrature(va in proptest::collection::vec(0.0f64..1.0, 3..9),
                                      vb in proptest::collection::vec(0.0f64..1.0, 2..7)) {
            let a = DensityProfile::from_grid(&va).unwrap();
            let b = DensityProfile::from_grid(&vb).unwrap();
            let m = 20_000;
            let h = 1.0 / m as f64;
            let (mut l1, mut cl1) = (0.0, 0.0);
            for i in 0..m {
                let y = (i as f64 + 0.5) * h;
                l1 += (a.eval(y) - b.eval(y)).abs() * h;
                cl1 += (a.primitive(y) - b.primitive(y)).abs() * h;
            }
            prop_assert!((l1_distance(&a, &b) - l1).abs() < 1e-6);
            prop_assert!((cumulative_l1(&a, &b) - cl1).abs() < 1e-6);
            prop_assert!((l1_distance(&a, &b) - l1_distance(&b, &a)).abs() < 1e-14);
        }
    }
}
