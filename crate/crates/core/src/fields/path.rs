//! Space-time density fields with the walker path and its counting measures.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fields::density::empirical_density;
use crate::model::DensityProfile;

/// Density frames on a time grid, plus walker samples.
///
/// `walker` is the lifted position and `omega_plus`/`omega_minus` the
/// cumulative counting measures `omega_pm([0, t_m])`, all in macroscopic units
/// (lattice counts divided by `n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathField {
    pub times: Vec<f64>,
    pub frames: Vec<DensityProfile>,
    pub walker: Vec<f64>,
    pub omega_plus: Vec<f64>,
    pub omega_minus: Vec<f64>,
}

impl PathField {
    pub fn new(
        times: Vec<f64>,
        frames: Vec<DensityProfile>,
        walker: Vec<f64>,
        omega_plus: Vec<f64>,
        omega_minus: Vec<f64>,
    ) -> Result<Self> {
        let m = times.len();
        if m == 0 || frames.len() != m || walker.len() != m || omega_plus.len() != m || omega_minus.len() != m {
            return Err(Error::InvalidArgument("path field columns differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("path field times must increase".into()));
        }
        for om in [&omega_plus, &omega_minus] {
            if om.iter().any(|v| *v < 0.0) || om.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidArgument("counting measures must be non-negative and non-decreasing".into()));
            }
        }
        Ok(PathField {
            times,
            frames,
            walker,
            omega_plus,
            omega_minus,
        })
    }

    /// A field without walker information.
    pub fn density_only(times: Vec<f64>, frames: Vec<DensityProfile>) -> Result<Self> {
        let m = times.len();
        Self::new(times, frames, vec![0.0; m], vec![0.0; m], vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Index of the frame closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let j = self.times.partition_point(|&s| s < t);
        if j == 0 {
            0
        } else if j == self.times.len() {
            j - 1
        } else if t - self.times[j - 1] <= self.times[j] - t {
            j - 1
        } else {
            j
        }
    }

    /// Density at `(t, x)`, linear in time between frames.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let j = self.times.partition_point(|&s| s <= t);
        if j == 0 {
            return self.frames[0].eval(x);
        }
        if j == self.times.len() {
            return self.frames[j - 1].eval(x);
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.frames[j - 1].eval(x) + w * self.frames[j].eval(x)
    }

    /// Lifted walker position at `t`, linear between samples.
    pub fn walker_at(&self, t: f64) -> f64 {
        interp(&self.times, &self.walker, t)
    }

    /// Writes `t,x,value` rows on `m` uniform spatial points.
    pub fn write_csv<W: Write>(&self, w: &mut W, n: usize, m: usize) -> Result<()> {
        writeln!(w, "# n={n},T={},grid={}x{m}", self.horizon(), self.len())?;
        writeln!(w, "t,x,value")?;
        for (t, f) in self.times.iter().zip(&self.frames) {
            for i in 0..m {
                let x = i as f64 / m as f64;
                writeln!(w, "{t},{x},{}", f.eval(x))?;
            }
        }
        Ok(())
    }

    /// Writes `t,x_lifted,N+,N-` rows, the counts rescaled back by `n`.
    pub fn write_walker_csv<W: Write>(&self, w: &mut W, n: usize) -> Result<()> {
        let nf = n as f64;
        writeln!(w, "t,x_lifted,N+,N-")?;
        for m in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.times[m],
                self.walker[m],
                (self.omega_plus[m] * nf).round(),
                (self.omega_minus[m] * nf).round()
            )?;
        }
        Ok(())
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let j = xs.partition_point(|&s| s <= t);
    if j == 0 {
        return ys[0];
    }
    if j == xs.len() {
        return ys[j - 1];
    }
    let w = (t - xs[j - 1]) / (xs[j] - xs[j - 1]);
    (1.0 - w) * ys[j - 1] + w * ys[j]
}

/// Empirical fields in the fixed frame (`pi`) and the walker frame (`pi_hat`).
pub fn record_path_field(traj: &Trajectory, times: &[f64]) -> Result<(PathField, PathField)> {
    let n = traj.n();
    let nf = n as f64;
    let mut frames = Vec::with_capacity(times.len());
    let mut moving = Vec::with_capacity(times.len());
    let mut walker = Vec::with_capacity(times.len());
    let mut op = Vec::with_capacity(times.len());
    let mut om = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=traj.t_max()).contains(&t) {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, T]")));
        }
        let eta = match traj.snapshots().iter().find(|s| s.t == t) {
            Some(s) => s.config.clone(),
            None if t == 0.0 => traj.initial().clone(),
            None if t == traj.t_max() => traj.final_config().clone(),
            None => traj.config_at(t)?,
        };
        let lifted = traj.lifted_at(t);
        let (np, nm) = traj.counts_at(t);
        frames.push(empirical_density(&eta));
        moving.push(empirical_density(&eta.shifted(lifted)));
        walker.push(lifted as f64 / nf);
        op.push(np as f64 / nf);
        om.push(nm as f64 / nf);
    }
    let pi = PathField::new(times.to_vec(), frames, walker.clone(), op.clone(), om.clone())?;
    let pi_hat = PathField::new(times.to_vec(), moving, walker, op, om)?;
    Ok((pi, pi_hat))
}

/// `(integral_0^T integral (d_x pi)^2 dx dt)^{1/2}` with central differences
/// on `m` spatial points and the trapezoid rule over the frames.
pub fn energy_norm(field: &PathField, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let per_frame: Vec<f64> = field
        .frames
        .iter()
        .map(|f| {
            let u = f.sample_grid(m);
            (0..m)
                .map(|i| {
                    let d = (u[(i + 1) % m] - u[(i + m - 1) % m]) / (2.0 * h);
                    d * d * h
                })
                .sum()
        })
        .collect();
    let mut total = 0.0;
    for j in 1..field.len() {
        total += 0.5 * (field.times[j] - field.times[j - 1]) * (per_frame[j] + per_frame[j - 1]);
    }
    total.sqrt()
}
