//! Smooth space-time test functions `H(t, x)` and time controls `a(t)`.
//!
//! `H` lives on a tensor basis: Chebyshev polynomials in time times real
//! Fourier modes in space. Spatial mode `s = 0` is the constant, `2k - 1` is
//! `cos(2 pi k x)` and `2k` is `sin(2 pi k x)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// Frequency of spatial mode `s`.
#[inline]
pub fn mode_frequency(s: usize) -> usize {
    s.div_ceil(2)
}

/// Value and first two derivatives of spatial mode `s` at `x`.
#[inline]
pub fn mode_eval(s: usize, x: f64) -> (f64, f64, f64) {
    if s == 0 {
        return (1.0, 0.0, 0.0);
    }
    let w = TAU * mode_frequency(s) as f64;
    let (sn, cs) = (w * x).sin_cos();
    if s % 2 == 1 {
        (cs, -w * sn, -w * w * cs)
    } else {
        (sn, w * cs, -w * w * sn)
    }
}

/// Averaging factor of a tent of half-width `1/n` on frequency `k`:
/// `n * integral delta_0^n(y) e^{2 pi i k y} dy = sinc^2(pi k / n)`.
#[inline]
pub fn fejer_factor(k: usize, n: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let z = PI * k as f64 / n as f64;
    let s = z.sin() / z;
    s * s
}

/// Chebyshev values `T_0..T_p` and derivatives at `tau` in `[-1, 1]`.
pub fn chebyshev(p: usize, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; p + 1];
    let mut u = vec![0.0; p + 1]; // second kind, for derivatives
    t[0] = 1.0;
    u[0] = 1.0;
    if p >= 1 {
        t[1] = tau;
        u[1] = 2.0 * tau;
    }
    for j in 2..=p {
        t[j] = 2.0 * tau * t[j - 1] - t[j - 2];
        u[j] = 2.0 * tau * u[j - 1] - u[j - 2];
    }
    // T_j' = j U_{j-1}
    let dt = (0..=p)
        .map(|j| if j == 0 { 0.0 } else { j as f64 * u[j - 1] })
        .collect();
    (t, dt)
}

/// Control `a(t)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant { value: f64 },
    /// `sum_j c_j T_j(2t/T - 1)`.
    Chebyshev { coeffs: Vec<f64>, t_max: f64 },
    /// Piecewise linear through `(times[i], values[i])`, constant outside.
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl TimeFunction {
    pub fn zero() -> Self {
        TimeFunction::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn samples(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidArgument("sample times and values differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("sample times must increase".into()));
        }
        Ok(TimeFunction::Samples { times, values })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Chebyshev { coeffs, t_max } => {
                let (tj, _) = chebyshev(coeffs.len().saturating_sub(1), to_tau(t, *t_max));
                coeffs.iter().zip(&tj).map(|(c, v)| c * v).sum()
            }
            TimeFunction::Samples { times, values } => {
                let (i, w) = locate(times, t);
                if w <= 0.0 {
                    values[i]
                } else {
                    values[i] + w * (values[i + 1] - values[i])
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { .. } => 0.0,
            TimeFunction::Chebyshev { coeffs, t_max } => {
                let (_, dj) = chebyshev(coeffs.len().saturating_sub(1), to_tau(t, *t_max));
                2.0 / t_max * coeffs.iter().zip(&dj).map(|(c, v)| c * v).sum::<f64>()
            }
            TimeFunction::Samples { times, values } => {
                if times.len() < 2 || t < times[0] || t > times[times.len() - 1] {
                    return 0.0;
                }
                let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1) - 1;
                (values[i + 1] - values[i]) / (times[i + 1] - times[i])
            }
        }
    }

    /// Upper bound on `sup |a|` over `[0, T]`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            TimeFunction::Constant { value } => value.abs(),
            TimeFunction::Chebyshev { coeffs, .. } => coeffs.iter().map(|c| c.abs()).sum(),
            TimeFunction::Samples { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeFunction::Constant { value } => *value == 0.0,
            TimeFunction::Chebyshev { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
            TimeFunction::Samples { values, .. } => values.iter().all(|&c| c == 0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeFunction::Constant { .. } => true,
            TimeFunction::Chebyshev { coeffs, .. } => coeffs.iter().skip(1).all(|&c| c == 0.0),
            TimeFunction::Samples { values, .. } => values.iter().all(|&v| v == values[0]),
        }
    }
}

#[inline]
pub(crate) fn to_tau(t: f64, t_max: f64) -> f64 {
    (2.0 * t / t_max - 1.0).clamp(-1.0, 1.0)
}

// interval index and weight for piecewise-linear lookup
fn locate(times: &[f64], t: f64) -> (usize, f64) {
    let last = times.len() - 1;
    if t <= times[0] {
        return (0, 0.0);
    }
    if t >= times[last] {
        return (last, 0.0);
    }
    let i = times.partition_point(|&s| s <= t) - 1;
    (i, (t - times[i]) / (times[i + 1] - times[i]))
}

/// `H(t, x) = sum_{j, s} theta[j (2K+1) + s] T_j(2t/T - 1) phi_s(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionH {
    k_max: usize,
    degree: usize,
    t_max: f64,
    coeffs: Vec<f64>,
}

impl TestFunctionH {
    pub fn new(k_max: usize, degree: usize, t_max: f64, coeffs: Vec<f64>) -> Result<Self> {
        let len = (degree + 1) * (2 * k_max + 1);
        if coeffs.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} coefficients, got {}",
                coeffs.len()
            )));
        }
        if !(t_max > 0.0) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("test function needs T > 0 and finite coefficients".into()));
        }
        Ok(TestFunctionH {
            k_max,
            degree,
            t_max,
            coeffs,
        })
    }

    pub fn zero(t_max: f64) -> Self {
        TestFunctionH {
            k_max: 0,
            degree: 0,
            t_max,
            coeffs: vec![0.0],
        }
    }

    /// Time-independent `amplitude * cos(2 pi k x)`.
    pub fn cosine(k: usize, amplitude: f64, t_max: f64) -> Self {
        let mut h = TestFunctionH::zeros(k, 0, t_max);
        h.coeffs[2 * k - 1] = amplitude;
        h
    }

    /// Time-independent `amplitude * sin(2 pi k x)`.
    pub fn sine(k: usize, amplitude: f64, t_max: f64) -> Self {
        let mut h = TestFunctionH::zeros(k, 0, t_max);
        h.coeffs[2 * k] = amplitude;
        h
    }

    pub fn zeros(k_max: usize, degree: usize, t_max: f64) -> Self {
        TestFunctionH {
            k_max,
            degree,
            t_max,
            coeffs: vec![0.0; (degree + 1) * (2 * k_max + 1)],
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn spatial_len(&self) -> usize {
        2 * self.k_max + 1
    }

    #[inline]
    pub fn index(&self, j: usize, s: usize) -> usize {
        j * self.spatial_len() + s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Highest time degree with a non-zero coefficient.
    pub fn time_degree(&self) -> usize {
        let sl = self.spatial_len();
        (0..=self.degree)
            .rev()
            .find(|&j| self.coeffs[j * sl..(j + 1) * sl].iter().any(|&c| c != 0.0))
            .unwrap_or(0)
    }

    /// Spatial coefficients of `H(t, .)` and of `d/dt H(t, .)`.
    pub fn spatial_coeffs(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (tj, dj) = chebyshev(self.degree, to_tau(t, self.t_max));
        let sl = self.spatial_len();
        let mut c = vec![0.0; sl];
        let mut dc = vec![0.0; sl];
        let scale = 2.0 / self.t_max;
        for j in 0..=self.degree {
            for s in 0..sl {
                let th = self.coeffs[j * sl + s];
                c[s] += th * tj[j];
                dc[s] += th * dj[j] * scale;
            }
        }
        (c, dc)
    }

    /// `(H, d_t H, d_x H, d_xx H)` at `(t, x)`.
    pub fn eval_all(&self, t: f64, x: f64) -> [f64; 4] {
        let (c, dc) = self.spatial_coeffs(t);
        let mut out = [0.0; 4];
        for s in 0..self.spatial_len() {
            let (v, dx, dxx) = mode_eval(s, x);
            out[0] += c[s] * v;
            out[1] += dc[s] * v;
            out[2] += c[s] * dx;
            out[3] += c[s] * dxx;
        }
        out
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.eval_all(t, x)[0]
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.eval_all(t, x)[1]
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.eval_all(t, x)[2]
    }

    pub fn laplacian(&self, t: f64, x: f64) -> f64 {
        self.eval_all(t, x)[3]
    }

    /// Bound on `sup |c_s(t)|` per spatial mode, from `|T_j| <= 1`.
    pub fn mode_bounds(&self) -> Vec<f64> {
        let sl = self.spatial_len();
        (0..sl)
            .map(|s| (0..=self.degree).map(|j| self.coeffs[j * sl + s].abs()).sum())
            .collect()
    }

    /// Bound on `sup |d_x H|`.
    pub fn gradient_bound(&self) -> f64 {
        self.mode_bounds()
            .iter()
            .enumerate()
            .map(|(s, b)| b * TAU * mode_frequency(s) as f64)
            .sum()
    }

    /// Coefficients embedded into a larger basis.
    pub fn embed(&self, k_max: usize, degree: usize) -> Result<TestFunctionH> {
        if k_max < self.k_max || degree < self.degree {
            return Err(Error::InvalidArgument("target basis is smaller".into()));
        }
        let mut out = TestFunctionH::zeros(k_max, degree, self.t_max);
        for j in 0..=self.degree {
            for s in 0..self.spatial_len() {
                let i = out.index(j, s);
                out.coeffs[i] = self.coeffs[self.index(j, s)];
            }
        }
        Ok(out)
    }
}
