use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::lattice::TorusLattice;
use crate::quad;

/// Periodic piecewise-linear density on the unit circle, given by knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct DensityProfile {
    xs: Vec<f64>,
    vs: Vec<f64>,
    // cumulative integral from 0 to xs[i]
    cum: Vec<f64>,
    total: f64,
    interior: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    knots: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interior: Option<f64>,
}

impl TryFrom<ProfileRepr> for DensityProfile {
    type Error = Error;
    fn try_from(r: ProfileRepr) -> Result<Self> {
        let p = DensityProfile::from_knots(r.knots)?;
        match r.interior {
            Some(eps) => p.with_interior(eps),
            None => Ok(p),
        }
    }
}

impl From<DensityProfile> for ProfileRepr {
    fn from(p: DensityProfile) -> Self {
        ProfileRepr {
            knots: p.knots(),
            interior: p.interior,
        }
    }
}

impl DensityProfile {
    /// Builds a profile from `(x, value)` knots; `x` is reduced mod 1.
    pub fn from_knots(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Profile("no knots".into()));
        }
        let mut k: Vec<(f64, f64)> = knots
            .into_iter()
            .map(|(x, v)| (x.rem_euclid(1.0), v))
            .collect();
        for &(x, v) in &k {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::Profile("non-finite knot".into()));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Profile(format!("value {v} outside [0,1]")));
            }
        }
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in k.windows(2) {
            if w[1].0 - w[0].0 <= 0.0 {
                return Err(Error::Profile(format!("duplicate knot at x = {}", w[0].0)));
            }
        }
        let (xs, vs): (Vec<f64>, Vec<f64>) = k.into_iter().unzip();
        let mut p = DensityProfile {
            xs,
            vs,
            cum: Vec::new(),
            total: 0.0,
            interior: None,
        };
        p.build_cumulative();
        Ok(p)
    }

    pub fn constant(rho: f64) -> Result<Self> {
        Self::from_knots(vec![(0.0, rho)])
    }

    /// Uniform knots `i / m` with the given values.
    pub fn from_grid(values: &[f64]) -> Result<Self> {
        let m = values.len() as f64;
        Self::from_knots(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as f64 / m, v))
                .collect(),
        )
    }

    /// Samples `f` at `m` uniform knots.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..m).map(|i| f(i as f64 / m as f64)).collect();
        Self::from_grid(&values)
    }

    /// `mean + amplitude * cos(2 pi k x)` sampled on `m` knots.
    pub fn cosine(mean: f64, amplitude: f64, k: u32, m: usize) -> Result<Self> {
        Self::from_fn(m, |x| mean + amplitude * (2.0 * std::f64::consts::PI * k as f64 * x).cos())
    }

    /// Marks the profile as bounded away from 0 and 1 by `eps`.
    pub fn with_interior(mut self, eps: f64) -> Result<Self> {
        let (lo, hi) = self.bounds();
        if !(eps > 0.0 && lo >= eps && hi <= 1.0 - eps) {
            return Err(Error::NonInterior { min: lo, max: hi });
        }
        self.interior = Some(eps);
        Ok(self)
    }

    pub fn interior_margin(&self) -> Option<f64> {
        self.interior
    }

    /// Checks `0 < value < 1` everywhere.
    pub fn require_interior(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if lo > 0.0 && hi < 1.0 {
            Ok(())
        } else {
            Err(Error::NonInterior { min: lo, max: hi })
        }
    }

    pub fn knots(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.vs.iter().copied()).collect()
    }

    pub fn knot_positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.vs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn is_constant(&self) -> bool {
        self.vs.iter().all(|&v| v == self.vs[0])
    }

    fn build_cumulative(&mut self) {
        let k = self.xs.len();
        let mut cum = Vec::with_capacity(k);
        // integral over [0, xs[0]] goes through the wrap-around segment
        let first = self.segment_integral_wrapped(0.0, self.xs[0]);
        let mut acc = first;
        cum.push(acc);
        for i in 0..k - 1 {
            acc += 0.5 * (self.xs[i + 1] - self.xs[i]) * (self.vs[i] + self.vs[i + 1]);
            cum.push(acc);
        }
        let total = acc + self.segment_integral_wrapped(self.xs[k - 1], 1.0);
        self.cum = cum;
        self.total = total;
    }

    // integral over [a, b] lying inside the wrap segment (last knot -> first knot + 1)
    fn segment_integral_wrapped(&self, a: f64, b: f64) -> f64 {
        0.5 * (b - a) * (self.eval(a) + self.eval(b))
    }

    /// Periodic piecewise-linear evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        let k = self.xs.len();
        if k == 1 {
            return self.vs[0];
        }
        let j = self.xs.partition_point(|&xi| xi <= x);
        let (x0, v0, x1, v1) = if j == 0 {
            (self.xs[k - 1] - 1.0, self.vs[k - 1], self.xs[0], self.vs[0])
        } else if j == k {
            (self.xs[k - 1], self.vs[k - 1], self.xs[0] + 1.0, self.vs[0])
        } else {
            (self.xs[j - 1], self.vs[j - 1], self.xs[j], self.vs[j])
        };
        let w = (x - x0) / (x1 - x0);
        v0 + w * (v1 - v0)
    }

    // integral from 0 to x for x in [0, 1]
    fn primitive_unit(&self, x: f64) -> f64 {
        let j = self.xs.partition_point(|&xi| xi <= x);
        if j == 0 {
            self.segment_integral_wrapped(0.0, x)
        } else {
            let x0 = self.xs[j - 1];
            self.cum[j - 1] + 0.5 * (x - x0) * (self.vs[j - 1] + self.eval(x))
        }
    }

    /// Integral from 0 to `x` of the periodic extension.
    pub fn primitive(&self, x: f64) -> f64 {
        let whole = x.floor();
        whole * self.total + self.primitive_unit(x - whole)
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.primitive(b) - self.primitive(a)
    }

    pub fn mass(&self) -> f64 {
        self.total
    }

    /// Cell average `n * integral over |y - x| <= 1/(2n)` at site `i`.
    pub fn cell_average(&self, n: usize, i: usize) -> f64 {
        let x = i as f64 / n as f64;
        let h = 0.5 / n as f64;
        (n as f64 * self.integral(x - h, x + h)).clamp(0.0, 1.0)
    }

    pub fn cell_averages(&self, lattice: &TorusLattice) -> Vec<f64> {
        (0..lattice.n()).map(|i| self.cell_average(lattice.n(), i)).collect()
    }

    /// Values on the uniform grid `i / m`.
    pub fn sample_grid(&self, m: usize) -> Vec<f64> {
        (0..m).map(|i| self.eval(i as f64 / m as f64)).collect()
    }
}

/// Ends of `[a, b]` plus every periodic copy of `knots` strictly inside.
pub(crate) fn periodic_breakpoints(knots: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    for shift in a.floor() as i64..=b.ceil() as i64 {
        for &x in knots {
            let y = x + shift as f64;
            if y > a && y < b {
                pts.push(y);
            }
        }
    }
    pts.sort_by(|p, q| p.total_cmp(q));
    pts.dedup();
    pts
}

/// `n * integral of delta_x^n(y) g(y) dy` at site `i`. The tent is split at
/// its peak and at the given kink positions of `g`.
pub fn tent_average(knots: &[f64], n: usize, i: usize, g: impl Fn(f64) -> f64) -> f64 {
    let nf = n as f64;
    let x = i as f64 / nf;
    let tent = |y: f64| (1.0 - nf * (y - x).abs()).max(0.0);
    let mut total = 0.0;
    for (a, b) in [(x - 1.0 / nf, x), (x, x + 1.0 / nf)] {
        for w in periodic_breakpoints(knots, a, b).windows(2) {
            total += quad::gauss8(|y| tent(y) * g(y), w[0], w[1]);
        }
    }
    nf * total
}
