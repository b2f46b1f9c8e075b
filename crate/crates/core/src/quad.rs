//! Quadrature helpers shared by the simulator and the rate-function code.

use crate::error::{Error, Result};

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_85,
];

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Four-point Gauss–Legendre rule on `[a, b]`.
#[inline]
pub fn gauss4(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Nodes and weights of the eight-point rule on `[a, b]`.
pub fn gauss8_nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS.iter())
        .map(move |(x, w)| (mid + half * x, w * half))
}

/// Composite eight-point rule with `pieces` equal sub-intervals.
pub fn composite_gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            gauss8(&f, lo, lo + h)
        })
        .sum()
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Tabulated antiderivative of a smooth function on `[t0, t1]`.
///
/// Each cell keeps the Legendre coefficients of the degree-7 projection of
/// `f` (from the eight-point rule), so a query inside a cell integrates that
/// polynomial and never calls `f` again.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    t0: f64,
    h: f64,
    cum: Vec<f64>,
    /// `half * c_k` per cell, eight per cell.
    coeffs: Vec<f64>,
    error_per_unit_time: f64,
}

impl Antiderivative {
    pub fn new(f: impl Fn(f64) -> f64, t0: f64, t1: f64, cells: usize) -> Self {
        let cells = cells.max(1);
        let h = (t1 - t0) / cells as f64;
        let half = 0.5 * h;
        let mut cum = Vec::with_capacity(cells + 1);
        let mut coeffs = Vec::with_capacity(8 * cells);
        cum.push(0.0);
        let mut err = 0.0;
        let mut acc = 0.0;
        for j in 0..cells {
            let a = t0 + h * j as f64;
            let mut c = [0.0; 8];
            for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
                let fx = f(a + half * (x + 1.0));
                let p = legendre9(*x);
                for k in 0..8 {
                    c[k] += w * fx * p[k];
                }
            }
            for (k, ck) in c.iter_mut().enumerate() {
                *ck *= (2 * k + 1) as f64 * 0.5 * half;
            }
            // whole-cell integral of the projection is the eight-point rule
            let whole = 2.0 * c[0];
            let m = a + half;
            let split = gauss4(&f, a, m) + gauss4(&f, m, a + h);
            err += (whole - split).abs() + 2.0 * c[7].abs();
            acc += whole;
            cum.push(acc);
            coeffs.extend_from_slice(&c);
        }
        let span = (t1 - t0).abs().max(f64::MIN_POSITIVE);
        Antiderivative {
            t0,
            h,
            cum,
            coeffs,
            error_per_unit_time: err / span,
        }
    }

    /// Refines the table until the estimated error per unit time is below `tol`.
    pub fn with_tolerance(f: impl Fn(f64) -> f64, t0: f64, t1: f64, tol: f64) -> Result<Self> {
        let mut cells = 16;
        loop {
            let table = Antiderivative::new(&f, t0, t1, cells);
            if table.error_per_unit_time <= tol {
                return Ok(table);
            }
            if cells >= 1 << 16 {
                return Err(Error::Quadrature {
                    estimate: table.error_per_unit_time,
                    tolerance: tol,
                });
            }
            cells *= 2;
        }
    }

    pub fn error_per_unit_time(&self) -> f64 {
        self.error_per_unit_time
    }

    /// Integral of `f` from `t0` to `t`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let cells = self.cum.len() - 1;
        let j = (((t - self.t0) / self.h).floor().max(0.0) as usize).min(cells);
        let tj = self.t0 + self.h * j as f64;
        if t <= tj || j == cells {
            return self.cum[j];
        }
        let x = (2.0 * (t - tj) / self.h - 1.0).min(1.0);
        let p = legendre9(x);
        let c = &self.coeffs[8 * j..8 * j + 8];
        // int_{-1}^x P_0 = x + 1, int_{-1}^x P_k = (P_{k+1} - P_{k-1}) / (2k + 1)
        let mut s = c[0] * (x + 1.0);
        for k in 1..8 {
            s += c[k] * (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64;
        }
        self.cum[j] + s
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.eval(b) - self.eval(a)
    }
}

#[inline]
fn legendre9(x: f64) -> [f64; 9] {
    let mut p = [0.0; 9];
    p[0] = 1.0;
    p[1] = x;
    for k in 1..8 {
        p[k + 1] = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_are_exact_for_polynomials() {
        let p = |x: f64| 3.0 * x.powi(7) - x.powi(3) + 2.0;
        let exact = |x: f64| 3.0 / 8.0 * x.powi(8) - x.powi(4) / 4.0 + 2.0 * x;
        assert!((gauss4(p, -1.0, 2.0) - (exact(2.0) - exact(-1.0))).abs() < 1e-11);
        let q = |x: f64| x.powi(15);
        assert!((gauss8(q, 0.0, 1.0) - 1.0 / 16.0).abs() < 1e-13);
    }

    #[test]
    fn antiderivative_matches_closed_form() {
        let anti = Antiderivative::new(|t: f64| (0.3 * t.sin()).exp() - 1.0, 0.0, 2.0, 32);
        let reference = composite_gauss8(|t: f64| (0.3 * t.sin()).exp() - 1.0, 0.37, 1.91, 64);
        assert!((anti.integral(0.37, 1.91) - reference).abs() < 1e-12);
        assert!(anti.error_per_unit_time() < 1e-10);
    }

    #[test]
    fn tolerance_refinement_reports_failure() {
        let wild = |t: f64| (1e4 * t).sin();
        assert!(Antiderivative::with_tolerance(wild, 0.0, 1.0, 1e-30).is_err());
        let tame = Antiderivative::with_tolerance(|t: f64| t * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((tame.eval(1.0) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let t = [0.0, 0.1, 0.5, 1.0];
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &v) - 2.0).abs() < 1e-15);
    }
}
