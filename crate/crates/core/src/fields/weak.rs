//! Weak-topology distance through a truncated Fourier family.

use std::f64::consts::PI;

use crate::model::profile::periodic_breakpoints;
use crate::model::DensityProfile;

/// Number of test functions beyond `f_0`: `f_{2k-1} = cos(2 pi k x)`, `f_{2k} = sin(2 pi k x)`.
pub const N_MAX: usize = 32;

/// Integrals of the Fourier test functions against a finite measure on the circle.
pub trait FourierMoments {
    /// `(integral cos(2 pi k y), integral sin(2 pi k y))` for `k = 0..=k_max`.
    fn moments(&self, k_max: usize) -> Vec<(f64, f64)>;
}

/// A weighted sum of point masses `sum w_i delta_{y_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atoms(pub Vec<(f64, f64)>);

impl FourierMoments for Atoms {
    fn moments(&self, k_max: usize) -> Vec<(f64, f64)> {
        (0..=k_max)
            .map(|k| {
                let w = 2.0 * PI * k as f64;
                self.0.iter().fold((0.0, 0.0), |(c, s), &(y, m)| {
                    (c + m * (w * y).cos(), s + m * (w * y).sin())
                })
            })
            .collect()
    }
}

impl FourierMoments for DensityProfile {
    fn moments(&self, k_max: usize) -> Vec<(f64, f64)> {
        let pts = periodic_breakpoints(self.knot_positions(), 0.0, 1.0);
        let pieces: Vec<(f64, f64, f64, f64)> = pts
            .windows(2)
            .map(|w| (w[0], w[1], self.eval(w[0]), self.eval(w[1])))
            .collect();
        (0..=k_max)
            .map(|k| {
                let w = 2.0 * PI * k as f64;
                pieces.iter().fold((0.0, 0.0), |(c, s), &(a, b, fa, fb)| {
                    let (pc, ps) = linear_fourier_piece(w, a, b, fa, fb);
                    (c + pc, s + ps)
                })
            })
            .collect()
    }
}

// integral over [a, b] of the linear interpolant of (fa, fb) times e^{i w y}
fn linear_fourier_piece(w: f64, a: f64, b: f64, fa: f64, fb: f64) -> (f64, f64) {
    let h = b - a;
    let theta = w * h;
    // I0 = int_0^h e^{i w s} ds, I1 = int_0^h s e^{i w s} ds
    let (i0, i1) = if theta.abs() < 0.5 {
        let mut i0 = (0.0, 0.0);
        let mut i1 = (0.0, 0.0);
        // (i theta)^j / j!
        let mut term = (1.0, 0.0);
        for j in 0..24 {
            let jf = j as f64;
            i0.0 += term.0 / (jf + 1.0);
            i0.1 += term.1 / (jf + 1.0);
            i1.0 += term.0 / (jf + 2.0);
            i1.1 += term.1 / (jf + 2.0);
            term = (-term.1 * theta / (jf + 1.0), term.0 * theta / (jf + 1.0));
        }
        ((h * i0.0, h * i0.1), (h * h * i1.0, h * h * i1.1))
    } else {
        let (c, s) = (theta.cos(), theta.sin());
        // (e^{i theta} - 1) / (i w) = (s - i (c - 1)) / w
        let i0 = (s / w, (1.0 - c) / w);
        // h e^{i theta} / (i w) + (e^{i theta} - 1) / w^2
        let i1 = (h * s / w + (c - 1.0) / (w * w), -h * c / w + s / (w * w));
        (i0, i1)
    };
    let slope = (fb - fa) / h;
    let inner = (fa * i0.0 + slope * i1.0, fa * i0.1 + slope * i1.1);
    let (ca, sa) = ((w * a).cos(), (w * a).sin());
    (ca * inner.0 - sa * inner.1, sa * inner.0 + ca * inner.1)
}

/// `d(mu, nu) = sum_{N <= N_MAX} 2^{-N} min(|integral f_N d(mu - nu)|, 1)`.
pub fn weak_distance<A, B>(mu: &A, nu: &B) -> f64
where
    A: FourierMoments + ?Sized,
    B: FourierMoments + ?Sized,
{
    let k_max = N_MAX / 2;
    let m = mu.moments(k_max);
    let v = nu.moments(k_max);
    let mut d = (m[0].0 - v[0].0).abs().min(1.0);
    for k in 1..=k_max {
        let wc = 0.5f64.powi(2 * k as i32 - 1);
        let ws = 0.5f64.powi(2 * k as i32);
        d += wc * (m[k].0 - v[k].0).abs().min(1.0);
        d += ws * (m[k].1 - v[k].1).abs().min(1.0);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lebesgue_against_zero() {
        let one = DensityProfile::constant(1.0).unwrap();
        let zero = DensityProfile::constant(0.0).unwrap();
        assert!((weak_distance(&one, &zero) - 1.0).abs() < 1e-14);
        assert_eq!(weak_distance(&one, &one), 0.0);
    }

    #[test]
    fn density_moments_match_quadrature() {
        let p = DensityProfile::from_knots(vec![(0.1, 0.2), (0.35, 0.9), (0.8, 0.4)]).unwrap();
        let mom = p.moments(16);
        for (k, &(c, s)) in mom.iter().enumerate() {
            let w = 2.0 * PI * k as f64;
            let qc = crate::quad::composite_gauss8(|y| p.eval(y) * (w * y).cos(), 0.0, 1.0, 4000);
            let qs = crate::quad::composite_gauss8(|y| p.eval(y) * (w * y).sin(), 0.0, 1.0, 4000);
            assert!((c - qc).abs() < 1e-9 && (s - qs).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn atoms_of_a_tent_sum() {
        // mass 1/n at every site
        let n = 16;
        let atoms = Atoms((0..n).map(|i| (i as f64 / n as f64, 1.0 / n as f64)).collect());
        let lebesgue = DensityProfile::constant(1.0).unwrap();
        // moments agree up to k = n - 1, where aliasing starts
        let d = weak_distance(&atoms, &lebesgue);
        assert!(d < 2.0 * 0.5f64.powi(2 * n as i32 - 1) + 1e-12, "{d}");
    }

    fn profile() -> impl Strategy<Value = DensityProfile> {
        proptest::collection::vec(0.0f64..1.0, 1..8).prop_map(|v| DensityProfile::from_grid(&v).unwrap())
    }

    proptest! {
        #[test]
        fn metric_axioms(a in profile(), b in profile(), c in profile()) {
            let ab = weak_distance(&a, &b);
            prop_assert!((ab - weak_distance(&b, &a)).abs() < 1e-14);
            prop_assert!(ab <= weak_distance(&a, &c) + weak_distance(&c, &b) + 1e-12);
            prop_assert!(weak_distance(&a, &a) == 0.0);
        }
    }
}
