//! Walker cost: the Legendre transform of the tilted Poisson generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::PathField;
use crate::model::{LocalRate, MeanField};
use crate::quad::trapezoid;
use crate::testfn::TimeFunction;

/// `v+ v-` at or below this is treated as a degenerate (one-sided) walker.
pub const TOL_ZERO: f64 = 1e-12;

/// Maximizer of `a x' - v+ (e^a - 1) - v- (e^{-a} - 1)`.
pub fn a_star(xp: f64, vp: f64, vm: f64) -> f64 {
    if vp * vm > TOL_ZERO {
        let r = (xp * xp + 4.0 * vp * vm).sqrt();
        // pick the form without cancellation
        if xp >= 0.0 {
            ((xp + r) / (2.0 * vp)).ln()
        } else {
            -((-xp + r) / (2.0 * vm)).ln()
        }
    } else if xp > 0.0 {
        if vp > 0.0 {
            (xp / vp).ln()
        } else {
            f64::INFINITY
        }
    } else if xp < 0.0 {
        if vm > 0.0 {
            -(-xp / vm).ln()
        } else {
            f64::NEG_INFINITY
        }
    } else if vp > 0.0 && vm <= 0.0 {
        f64::NEG_INFINITY
    } else if vm > 0.0 && vp <= 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// The two closed forms `log((x' + R) / 2v+)` and `-log((-x' + R) / 2v-)`, `R = sqrt(x'^2 + 4 v+ v-)`.
pub fn a_star_forms(xp: f64, vp: f64, vm: f64) -> (f64, f64) {
    let r = (xp * xp + 4.0 * vp * vm).sqrt();
    (((xp + r) / (2.0 * vp)).ln(), -((-xp + r) / (2.0 * vm)).ln())
}

/// `sup_a { a x' - v+ (e^a - 1) - v- (e^{-a} - 1) }`, possibly `+inf`.
pub fn legendre_cost(xp: f64, vp: f64, vm: f64) -> f64 {
    if vp * vm > TOL_ZERO {
        let r = (xp * xp + 4.0 * vp * vm).sqrt();
        a_star(xp, vp, vm) * xp - r + vp + vm
    } else if xp > 0.0 {
        if vp > 0.0 {
            xp * (xp / vp).ln() - xp + vp + vm
        } else {
            f64::INFINITY
        }
    } else if xp < 0.0 {
        if vm > 0.0 {
            -xp * (-xp / vm).ln() + xp + vp + vm
        } else {
            f64::INFINITY
        }
    } else {
        vp + vm
    }
}

/// A macroscopic walker path on a time grid with derivative samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerPath {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    /// `max_k |x_{k+1} - x_k - integral of the trapezoid derivative|`.
    pub reconstruction_error: f64,
}

impl WalkerPath {
    fn build(times: Vec<f64>, x: Vec<f64>, dx: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || x.len() != times.len() || dx.len() != times.len() {
            return Err(Error::InvalidArgument("walker path needs matching columns of length >= 2".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("walker path times must increase".into()));
        }
        if x[0] != 0.0 {
            return Err(Error::InvalidArgument(format!("walker path must start at 0, got {}", x[0])));
        }
        let reconstruction_error = (1..times.len())
            .map(|k| (x[k] - x[k - 1] - 0.5 * (times[k] - times[k - 1]) * (dx[k] + dx[k - 1])).abs())
            .fold(0.0, f64::max);
        Ok(WalkerPath {
            times,
            x,
            dx,
            reconstruction_error,
        })
    }

    /// Samples a path and its derivative given in closed form.
    pub fn from_fn(times: Vec<f64>, x: impl Fn(f64) -> f64, dx: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = times.iter().map(|&t| x(t)).collect();
        let ds = times.iter().map(|&t| dx(t)).collect();
        Self::build(times, xs, ds)
    }

    /// Derivatives by central differences (one-sided at the ends).
    pub fn from_samples(times: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        let m = times.len();
        if m < 2 || x.len() != m {
            return Err(Error::InvalidArgument("walker path needs matching columns of length >= 2".into()));
        }
        let dx = (0..m)
            .map(|k| {
                let (i, j) = (k.saturating_sub(1), (k + 1).min(m - 1));
                (x[j] - x[i]) / (times[j] - times[i])
            })
            .collect();
        Self::build(times, x, dx)
    }

    /// The walker samples stored in a path field.
    pub fn from_field(field: &PathField) -> Result<Self> {
        Self::from_samples(field.times.clone(), field.walker.clone())
    }

    /// `x_t = w t`.
    pub fn linear(w: f64, t_max: f64, points: usize) -> Result<Self> {
        let times = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
        Self::from_fn(times, |t| w * t, |_| w)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn end(&self) -> f64 {
        *self.x.last().expect("non-empty")
    }

    pub fn at(&self, t: f64) -> f64 {
        crate::fields::path::interp(&self.times, &self.x, t)
    }
}

/// Finiteness tests for the walker cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitenessFlags {
    pub absolutely_continuous: bool,
    /// `integral |x'| log+ |x'| < inf` on the grid.
    pub speed_entropy: bool,
    /// No forward motion where `v+ = 0`.
    pub forward: bool,
    /// No backward motion where `v- = 0`.
    pub backward: bool,
}

impl FinitenessFlags {
    pub fn all(&self) -> bool {
        self.absolutely_continuous && self.speed_entropy && self.forward && self.backward
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwCost {
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub value: f64,
    pub flags: FinitenessFlags,
    /// `a_{x, pi}` on the path's time grid.
    #[serde(with = "crate::serde_ext::ext_vec")]
    pub a: Vec<f64>,
    /// Density seen by the walker on the time grid.
    pub density: Vec<f64>,
}

/// Default tolerance on [`WalkerPath::reconstruction_error`].
pub const AC_TOLERANCE: f64 = 1e-3;

/// `I_rw(x | pi)` with `pi_t(x_t)` read from the fixed-frame field.
pub fn i_rw(x: &WalkerPath, pi: &PathField, rates: &LocalRate) -> RwCost {
    i_rw_with(x, |t, pos| pi.eval(t, pos), rates, AC_TOLERANCE)
}

/// `I_rw` with an arbitrary density evaluator `(t, position) -> density`.
pub fn i_rw_with(x: &WalkerPath, density: impl Fn(f64, f64) -> f64, rates: &LocalRate, ac_tol: f64) -> RwCost {
    let field = MeanField::new(rates);
    let m = x.times.len();
    let mut rho = Vec::with_capacity(m);
    let mut a = Vec::with_capacity(m);
    let mut cost = Vec::with_capacity(m);
    let mut flags = FinitenessFlags {
        absolutely_continuous: x.reconstruction_error <= ac_tol,
        speed_entropy: true,
        forward: true,
        backward: true,
    };
    for k in 0..m {
        let r = density(x.times[k], x.x[k]).clamp(0.0, 1.0);
        let v = field.at(r);
        let xp = x.dx[k];
        if !xp.is_finite() {
            flags.speed_entropy = false;
        }
        if xp > 0.0 && v.plus <= 0.0 {
            flags.forward = false;
        }
        if xp < 0.0 && v.minus <= 0.0 {
            flags.backward = false;
        }
        rho.push(r);
        a.push(a_star(xp, v.plus, v.minus));
        cost.push(legendre_cost(xp, v.plus, v.minus));
    }
    let value = if flags.all() {
        trapezoid(&x.times, &cost)
    } else {
        f64::INFINITY
    };
    RwCost {
        value,
        flags,
        a,
        density: rho,
    }
}

/// `j(a; pi, x) = a(T) x_T - integral { a' x + sum_z v^z (e^{z a} - 1) } dt`.
pub fn j_walker(a: &TimeFunction, x: &WalkerPath, pi: &PathField, rates: &LocalRate) -> f64 {
    j_walker_with(a, x, |t, pos| pi.eval(t, pos), rates)
}

pub fn j_walker_with(a: &TimeFunction, x: &WalkerPath, density: impl Fn(f64, f64) -> f64, rates: &LocalRate) -> f64 {
    let field = MeanField::new(rates);
    let vals: Vec<f64> = x
        .times
        .iter()
        .zip(&x.x)
        .map(|(&t, &pos)| {
            let v = field.at(density(t, pos).clamp(0.0, 1.0));
            let at = a.value(t);
            a.derivative(t) * pos + v.plus * at.exp_m1() + v.minus * (-at).exp_m1()
        })
        .collect();
    a.value(x.horizon()) * x.end() - trapezoid(&x.times, &vals)
}
