//! Relative entropy of density profiles.

use crate::model::profile::periodic_breakpoints;
use crate::model::DensityProfile;
use crate::quad::gauss8_nodes;

fn xlogy_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// `integral u0 log(u0 / pi0) + (1 - u0) log((1 - u0) / (1 - pi0))`.
///
/// Returns `+inf` when `pi0` touches 0 or 1 on a set of positive measure
/// where `u0` does not.
pub fn entropy_h(pi0: &DensityProfile, u0: &DensityProfile) -> f64 {
    if pi0 == u0 {
        return 0.0;
    }
    let mut knots = pi0.knot_positions().to_vec();
    knots.extend_from_slice(u0.knot_positions());
    let pts = periodic_breakpoints(&knots, 0.0, 1.0);
    let mut total = 0.0;
    for w in pts.windows(2) {
        // split long pieces so the rule also resolves curvature of the log
        let pieces = ((w[1] - w[0]) * 64.0).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for i in 0..pieces {
            let a = w[0] + h * i as f64;
            for (x, wt) in gauss8_nodes(a, a + h) {
                let (p, u) = (pi0.eval(x), u0.eval(x));
                let v = xlogy_ratio(u, p) + xlogy_ratio(1.0 - u, 1.0 - p);
                if v.is_infinite() {
                    return f64::INFINITY;
                }
                total += wt * v;
            }
        }
    }
    total.max(0.0)
}

/// Cost of the initial profile `pi0` under the local equilibrium of `u0`:
/// `integral pi0 log(pi0 / u0) + (1 - pi0) log((1 - pi0) / (1 - u0))`.
pub fn initial_entropy(pi0: &DensityProfile, u0: &DensityProfile) -> f64 {
    entropy_h(u0, pi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let half = DensityProfile::constant(0.5).unwrap();
        let quarter = DensityProfile::constant(0.25).unwrap();
        assert_eq!(entropy_h(&half, &half), 0.0);
        let expected = 0.5 * (4.0f64 / 3.0).ln();
        assert!((entropy_h(&quarter, &half) - expected).abs() < 1e-14);
        let zero = DensityProfile::constant(0.0).unwrap();
        assert_eq!(entropy_h(&zero, &half), f64::INFINITY);
        // the other order is finite: 0 log 0 = 0
        assert!((initial_entropy(&zero, &half) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn varying_profile_matches_fine_quadrature() {
        let u0 = DensityProfile::cosine(0.5, 0.3, 1, 64).unwrap();
        let p = DensityProfile::cosine(0.4, 0.2, 2, 64).unwrap();
        let f = |x: f64| {
            let (a, b) = (u0.eval(x), p.eval(x));
            a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
        };
        let reference = crate::quad::composite_gauss8(f, 0.0, 1.0, 64 * 16);
        assert!((entropy_h(&p, &u0) - reference).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn nonnegative(a in 0.05f64..0.95, b in 0.05f64..0.95, amp in 0.0f64..0.04) {
            let p = DensityProfile::cosine(a, amp, 1, 16).unwrap();
            let u = DensityProfile::cosine(b, amp, 3, 16).unwrap();
            prop_assert!(entropy_h(&p, &u) >= 0.0);
        }
    }
}
