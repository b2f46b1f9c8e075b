//! Luxemburg norms for the Young function `Phi(x) = x log(1 + x)` and its conjugate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Young {
    Phi,
    PhiStar,
}

pub fn phi(x: f64) -> f64 {
    x * x.ln_1p()
}

/// `Phi*(y) = sup_{x >= 0} { x y - x log(1 + x) }`.
pub fn phi_star(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    // the maximizer solves log(1 + x) + x / (1 + x) = y, increasing in x
    let g = |x: f64| x.ln_1p() + x / (1.0 + x) - y;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    x * y - phi(x)
}

/// `inf { lambda > 0 : integral Phi(|f| / lambda) dt <= 1 }` with the trapezoid rule.
pub fn luxemburg_norm(times: &[f64], f: &[f64], which: Young) -> Result<f64> {
    if times.len() != f.len() || times.len() < 2 {
        return Err(Error::InvalidArgument("time series needs matching columns of length >= 2".into()));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("time series must be finite".into()));
    }
    if f.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let young = match which {
        Young::Phi => phi,
        Young::PhiStar => phi_star,
    };
    let modular = |lam: f64| {
        let vals: Vec<f64> = f.iter().map(|v| young(v.abs() / lam)).collect();
        trapezoid(times, &vals)
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    while modular(hi) > 1.0 {
        hi *= 2.0;
    }
    while modular(lo) <= 1.0 && lo > 1e-300 {
        lo *= 0.5;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_function_norm() {
        let t = vec![0.0, 0.5, 1.0];
        let n = luxemburg_norm(&t, &[1.0, 1.0, 1.0], Young::Phi).unwrap();
        // plug back: (1/lambda) log(1 + 1/lambda) = 1
        assert!(((1.0 / n) * (1.0 / n).ln_1p() - 1.0).abs() < 1e-8);
        assert!((n - 0.806_466).abs() < 1e-6);
    }

    #[test]
    fn zero_and_homogeneity() {
        let t: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let f: Vec<f64> = t.iter().map(|x| (5.0 * x).sin() + 0.3).collect();
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        for w in [Young::Phi, Young::PhiStar] {
            assert_eq!(luxemburg_norm(&t, &vec![0.0; t.len()], w).unwrap(), 0.0);
            let a = luxemburg_norm(&t, &f, w).unwrap();
            let b = luxemburg_norm(&t, &f2, w).unwrap();
            assert!((b - 2.0 * a).abs() < 1e-6);
        }
    }

    #[test]
    fn conjugate_by_grid_search() {
        for y in [0.1, 0.7, 2.0, 5.0] {
            let mut best: f64 = 0.0;
            let mut x = 0.0;
            while x < 200.0 {
                best = best.max(x * y - phi(x));
                x += 1e-4;
            }
            assert!((phi_star(y) - best).abs() < 1e-6, "{y}");
        }
    }
}
