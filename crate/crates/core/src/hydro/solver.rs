//! Finite-difference solvers for the heat equation, the tilted drift-diffusion
//! equation and the walker's characteristic ODE.

use serde::{Deserialize, Serialize};

use crate::dynamics::TiltParams;
use crate::error::{Error, Result};
use crate::fields::PathField;
use crate::hydro::tridiag::CyclicTridiagonal;
use crate::model::{DensityProfile, Diffusion, LocalRate, MeanField};
use crate::testfn::{mode_eval, TestFunctionH, TimeFunction};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Backward Euler diffusion, explicit drift.
    #[default]
    SemiImplicit,
    /// Forward Euler for both terms; needs `D dt / h^2 <= 1/2`.
    Explicit,
}

/// Periodic space grid of `m` points, time step and recording frames on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub m: usize,
    pub t_max: f64,
    /// Requested time step; `None` means `h^2 / (2 D)`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Number of recorded intervals (frames are `frames + 1` times).
    pub frames: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    dt: f64,
    steps_per_frame: usize,
}

impl SpaceTimeGrid {
    pub fn new(m: usize, t_max: f64, frames: usize) -> Result<Self> {
        let g = SpaceTimeGrid {
            m,
            t_max,
            dt: None,
            frames,
            scheme: Scheme::default(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(Error::InvalidArgument(format!("grid needs at least 4 points, got {}", self.m)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) || self.frames == 0 {
            return Err(Error::InvalidArgument("grid needs T > 0 and at least one frame".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    fn plan(&self, d: Diffusion) -> Result<Plan> {
        self.validate()?;
        let h = self.h();
        let requested = self.dt.unwrap_or(h * h / (2.0 * d.value()));
        let frame_len = self.t_max / self.frames as f64;
        let steps_per_frame = (frame_len / requested - 1e-9).ceil().max(1.0) as usize;
        let dt = frame_len / steps_per_frame as f64;
        if self.scheme == Scheme::Explicit && d.value() * dt / (h * h) > 0.5 + 1e-12 {
            return Err(Error::Stability(format!(
                "explicit scheme needs D dt / h^2 <= 1/2, got {}",
                d.value() * dt / (h * h)
            )));
        }
        Ok(Plan { dt, steps_per_frame })
    }

    /// The recording times.
    pub fn frame_times(&self) -> Vec<f64> {
        (0..=self.frames)
            .map(|j| self.t_max * j as f64 / self.frames as f64)
            .collect()
    }
}

/// Density, walker path and moving-frame density of the hydrodynamic system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroSolution {
    /// Fixed-frame density with the walker path and `omega_pm` on the frame times.
    pub u: PathField,
    /// `u_hat(t, x) = u(t, x + f(t))` on the frame times.
    pub u_hat: PathField,
    /// Walker path at every time step.
    pub f_times: Vec<f64>,
    pub f: Vec<f64>,
    pub diffusion: Diffusion,
    /// Density values clamped into `[0, 1]` by the walker interpolation.
    pub clamped: u64,
}

impl HydroSolution {
    /// Lifted walker position at `t`.
    pub fn f_at(&self, t: f64) -> f64 {
        crate::fields::path::interp(&self.f_times, &self.f, t)
    }
}

/// `u_hat(t, x) = u(t, f(t) + x)`, bilinear in `(t, x)`.
pub fn evaluate_frame(sol: &HydroSolution, t: f64, x: f64) -> f64 {
    sol.u.eval(t, sol.f_at(t) + x)
}

/// `d_t u = D Lap u` from `u0`.
pub fn solve_heat(u0: &DensityProfile, diffusion: Diffusion, grid: &SpaceTimeGrid) -> Result<PathField> {
    let run = Stepper::new(u0, None, diffusion, grid)?.run(grid, None)?;
    PathField::density_only(grid.frame_times(), run.frames)
}

/// Tilted equation `d_t u = D Lap u - 2 D d_x(u (1 - u) d_x H)` from `v0`, with
/// the walker ODE `f' = e^{a} v+(u(t, f)) - e^{-a} v-(u(t, f))`.
pub fn solve_perturbed(
    tilt: &TiltParams,
    rates: &LocalRate,
    diffusion: Diffusion,
    grid: &SpaceTimeGrid,
) -> Result<HydroSolution> {
    let h = (!tilt.h.is_zero()).then_some(&tilt.h);
    let walker = Walker {
        field: MeanField::new(rates),
        a: &tilt.a,
    };
    let run = Stepper::new(&tilt.v0, h, diffusion, grid)?.run(grid, Some(&walker))?;
    let times = grid.frame_times();
    let mut hat = Vec::with_capacity(run.frames.len());
    for (frame, &t) in run.frames.iter().zip(&times) {
        let shift = crate::fields::path::interp(&run.f_times, &run.f, t);
        let vals: Vec<f64> = (0..grid.m)
            .map(|i| frame.eval(i as f64 / grid.m as f64 + shift))
            .collect();
        hat.push(DensityProfile::from_grid(&vals)?);
    }
    let walker_at: Vec<f64> = times
        .iter()
        .map(|&t| crate::fields::path::interp(&run.f_times, &run.f, t))
        .collect();
    let u = PathField::new(
        times.clone(),
        run.frames,
        walker_at.clone(),
        run.omega_plus.clone(),
        run.omega_minus.clone(),
    )?;
    let u_hat = PathField::new(times, hat, walker_at, run.omega_plus, run.omega_minus)?;
    Ok(HydroSolution {
        u,
        u_hat,
        f_times: run.f_times,
        f: run.f,
        diffusion,
        clamped: run.clamped,
    })
}

struct Walker<'a> {
    field: MeanField,
    a: &'a TimeFunction,
}

struct Run {
    frames: Vec<DensityProfile>,
    f_times: Vec<f64>,
    f: Vec<f64>,
    omega_plus: Vec<f64>,
    omega_minus: Vec<f64>,
    clamped: u64,
}

struct Stepper<'a> {
    u: Vec<f64>,
    h_fn: Option<&'a TestFunctionH>,
    // d_x of every spatial mode at the faces x_{j + 1/2}
    face_modes: Vec<Vec<f64>>,
    d: f64,
    plan: Plan,
    implicit: Option<CyclicTridiagonal>,
}

impl<'a> Stepper<'a> {
    fn new(
        u0: &DensityProfile,
        h_fn: Option<&'a TestFunctionH>,
        diffusion: Diffusion,
        grid: &SpaceTimeGrid,
    ) -> Result<Self> {
        let plan = grid.plan(diffusion)?;
        let m = grid.m;
        let hx = grid.h();
        let d = diffusion.value();
        let face_modes = match h_fn {
            Some(hf) => (0..hf.spatial_len())
                .map(|s| (0..m).map(|j| mode_eval(s, (j as f64 + 0.5) * hx).1).collect())
                .collect(),
            None => Vec::new(),
        };
        let implicit = match grid.scheme {
            Scheme::SemiImplicit => {
                let r = d * plan.dt / (hx * hx);
                Some(CyclicTridiagonal::new(m, 1.0 + 2.0 * r, -r)?)
            }
            Scheme::Explicit => None,
        };
        Ok(Stepper {
            u: u0.sample_grid(m),
            h_fn,
            face_modes,
            d,
            plan,
            implicit,
        })
    }

    // -dt/h (F_j - F_{j-1}) with the monotone flux F_j at face j + 1/2
    fn drift(&self, t: f64, out: &mut [f64], hx: f64) -> Result<()> {
        let Some(hf) = self.h_fn else { return Ok(()) };
        let m = self.u.len();
        let (c, _) = hf.spatial_coeffs(t);
        let mut g = vec![0.0; m];
        for (cs, modes) in c.iter().zip(&self.face_modes) {
            if *cs != 0.0 {
                for (gj, dm) in g.iter_mut().zip(modes) {
                    *gj += cs * dm;
                }
            }
        }
        let lam = self.plan.dt / hx;
        let mut flux = vec![0.0; m];
        for j in 0..m {
            let gj = 2.0 * self.d * g[j];
            if gj.abs() * lam > 0.5 {
                return Err(Error::Stability(format!(
                    "drift CFL number {} exceeds 1/2 at t = {t}",
                    gj.abs() * lam
                )));
            }
            let (ul, ur) = (self.u[j], self.u[(j + 1) % m]);
            flux[j] = gj.max(0.0) * ul * (1.0 - ur) - (-gj).max(0.0) * ur * (1.0 - ul);
        }
        for j in 0..m {
            out[j] -= lam * (flux[j] - flux[(j + m - 1) % m]);
        }
        Ok(())
    }

    fn run(mut self, grid: &SpaceTimeGrid, walker: Option<&Walker<'_>>) -> Result<Run> {
        let m = grid.m;
        let hx = grid.h();
        let dt = self.plan.dt;
        let steps = grid.frames * self.plan.steps_per_frame;
        let mut frames = vec![to_profile(&self.u)?];
        let mut f_times = vec![0.0];
        let mut f = vec![0.0];
        let mut omega_plus = vec![0.0];
        let mut omega_minus = vec![0.0];
        let (mut y, mut op, mut om) = (0.0, 0.0, 0.0);
        let mut clamped = 0u64;
        let mut next = vec![0.0; m];
        for k in 0..steps {
            let t = k as f64 * dt;
            next.copy_from_slice(&self.u);
            self.drift(t, &mut next, hx)?;
            match &self.implicit {
                Some(solver) => solver.solve(&mut next),
                None => {
                    let r = self.d * dt / (hx * hx);
                    for j in 0..m {
                        next[j] += r * (self.u[(j + 1) % m] - 2.0 * self.u[j] + self.u[(j + m - 1) % m]);
                    }
                }
            }
            if let Some(w) = walker {
                let old = &self.u;
                let new = &next;
                let mut rhs = |s: f64, pos: f64| -> [f64; 3] {
                    let theta = (s - t) / dt;
                    let mut rho = (1.0 - theta) * interp_periodic(old, pos) + theta * interp_periodic(new, pos);
                    if !(0.0..=1.0).contains(&rho) {
                        clamped += 1;
                        rho = rho.clamp(0.0, 1.0);
                    }
                    let a = w.a.value(s);
                    let vp = a.exp() * w.field.plus().eval(rho);
                    let vm = (-a).exp() * w.field.minus().eval(rho);
                    [vp - vm, vp, vm]
                };
                let k1 = rhs(t, y);
                let k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1[0]);
                let k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2[0]);
                let k4 = rhs(t + dt, y + dt * k3[0]);
                let step = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                y += step(0);
                op += step(1);
                om += step(2);
            }
            std::mem::swap(&mut self.u, &mut next);
            f_times.push((k + 1) as f64 * dt);
            f.push(y);
            if (k + 1) % self.plan.steps_per_frame == 0 {
                frames.push(to_profile(&self.u)?);
                omega_plus.push(op);
                omega_minus.push(om);
            }
        }
        Ok(Run {
            frames,
            f_times,
            f,
            omega_plus,
            omega_minus,
            clamped,
        })
    }
}

// round-off may leave values a few ulps outside [0, 1]
fn to_profile(u: &[f64]) -> Result<DensityProfile> {
    if let Some(v) = u.iter().find(|v| !(-1e-9..=1.0 + 1e-9).contains(*v)) {
        return Err(Error::Stability(format!("density left [0, 1]: {v}")));
    }
    let v: Vec<f64> = u.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    DensityProfile::from_grid(&v)
}

fn interp_periodic(u: &[f64], x: f64) -> f64 {
    let m = u.len();
    let s = x.rem_euclid(1.0) * m as f64;
    let i = (s.floor() as usize).min(m - 1);
    let w = s - i as f64;
    (1.0 - w) * u[i] + w * u[(i + 1) % m]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(m: usize) -> DensityProfile {
        DensityProfile::from_fn(m, |x| 0.5 + 0.5 * (2.0 * PI * x).cos()).unwrap()
    }

    fn heat_error(m: usize, scheme: Scheme) -> f64 {
        let grid = SpaceTimeGrid::new(m, 0.05, 5).unwrap().with_scheme(scheme);
        let sol = solve_heat(&cosine(m), Diffusion::ONE, &grid).unwrap();
        let mut err: f64 = 0.0;
        for (t, fr) in sol.times.iter().zip(&sol.frames) {
            for i in 0..m {
                let x = i as f64 / m as f64;
                let exact = 0.5 + 0.5 * (-4.0 * PI * PI * t).exp() * (2.0 * PI * x).cos();
                err = err.max((fr.eval(x) - exact).abs());
            }
        }
        err
    }

    #[test]
    fn heat_matches_spectral_solution() {
        let e64 = heat_error(64, Scheme::SemiImplicit);
        let e128 = heat_error(128, Scheme::SemiImplicit);
        assert!(heat_error(256, Scheme::SemiImplicit) < 1e-3);
        assert!(e64 / e128 > 3.5 && e64 / e128 < 4.5, "{e64} {e128}");
        assert!(heat_error(64, Scheme::Explicit) < 1e-3);
    }

    #[test]
    fn explicit_scheme_rejects_large_steps() {
        let grid = SpaceTimeGrid::new(64, 0.1, 1)
            .unwrap()
            .with_dt(1e-3)
            .with_scheme(Scheme::Explicit);
        assert!(matches!(
            solve_heat(&cosine(64), Diffusion::ONE, &grid),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn constant_and_mass() {
        let grid = SpaceTimeGrid::new(32, 0.3, 3).unwrap();
        let c = DensityProfile::constant(0.3).unwrap();
        let sol = solve_heat(&c, Diffusion::TWO, &grid).unwrap();
        for fr in &sol.frames {
            assert!(fr.sample_grid(32).iter().all(|v| (v - 0.3).abs() < 1e-12));
        }
        let sol = solve_heat(&cosine(32), Diffusion::ONE, &grid).unwrap();
        let m0 = sol.frames[0].mass();
        for fr in &sol.frames {
            assert!((fr.mass() - m0).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_frame_spectral_value() {
        let grid = SpaceTimeGrid::new(256, 0.2, 20).unwrap();
        let u0 = DensityProfile::cosine(0.5, 0.5, 1, 256).unwrap();
        let tilt = TiltParams::null(&u0, 0.2);
        // a walker without jump rates stays at 0, so the moving frame is the fixed one
        let sol = solve_perturbed(&tilt, &LocalRate::zero(), Diffusion::ONE, &grid).unwrap();
        assert!(sol.f.iter().all(|v| *v == 0.0));
        assert!((evaluate_frame(&sol, 0.1, 0.25) - 0.5).abs() < 1e-6);
        let peak = 0.5 + 0.5 * (-0.4 * PI * PI).exp();
        assert!((evaluate_frame(&sol, 0.1, 0.0) - peak).abs() < 1e-4);
    }

    #[test]
    fn symmetric_equilibrium_walker_stays_put() {
        let grid = SpaceTimeGrid::new(32, 1.0, 4).unwrap();
        let u0 = DensityProfile::constant(0.5).unwrap();
        let sol = solve_perturbed(&TiltParams::null(&u0, 1.0), &LocalRate::intro(), Diffusion::ONE, &grid).unwrap();
        assert!(sol.f.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn constant_density_gives_linear_walker() {
        let grid = SpaceTimeGrid::new(16, 1.0, 4).unwrap();
        let rho = 0.3;
        let a = 0.3;
        let tilt = TiltParams::new(
            DensityProfile::constant(rho).unwrap(),
            TestFunctionH::zero(1.0),
            TimeFunction::constant(a),
        );
        let rates = LocalRate::intro();
        let sol = solve_perturbed(&tilt, &rates, Diffusion::ONE, &grid).unwrap();
        let v = crate::model::mean_field_velocity(&rates, rho);
        let speed = a.exp() * v.plus - (-a).exp() * v.minus;
        assert!((sol.f_at(1.0) - speed).abs() < 1e-12);
        assert!((sol.f_at(0.5) - 0.5 * speed).abs() < 1e-12);
        assert!((sol.u.omega_plus[4] - a.exp() * v.plus).abs() < 1e-12);
    }

    #[test]
    fn null_tilt_reduces_to_heat() {
        let grid = SpaceTimeGrid::new(64, 0.1, 4).unwrap();
        let u0 = DensityProfile::cosine(0.5, 0.3, 2, 64).unwrap();
        let heat = solve_heat(&u0, Diffusion::ONE, &grid).unwrap();
        let sol = solve_perturbed(&TiltParams::null(&u0, 0.1), &LocalRate::intro(), Diffusion::ONE, &grid).unwrap();
        for (a, b) in heat.frames.iter().zip(&sol.u.frames) {
            for (x, y) in a.sample_grid(64).iter().zip(b.sample_grid(64)) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tilted_solution_conserves_mass_and_bounds() {
        let grid = SpaceTimeGrid::new(128, 0.5, 10).unwrap();
        let tilt = TiltParams::new(
            DensityProfile::cosine(0.5, 0.45, 1, 128).unwrap(),
            TestFunctionH::cosine(1, 2.0, 0.5),
            TimeFunction::constant(0.3),
        );
        let sol = solve_perturbed(&tilt, &LocalRate::intro(), Diffusion::ONE, &grid).unwrap();
        let m0 = sol.u.frames[0].mass();
        for fr in &sol.u.frames {
            assert!((fr.mass() - m0).abs() < 1e-12);
            let (lo, hi) = fr.bounds();
            assert!(lo >= 0.0 && hi <= 1.0);
        }
        for (j, &t) in sol.u.times.iter().enumerate() {
            let direct = sol.u.frames[j].eval(sol.f_at(t));
            assert!((sol.u_hat.frames[j].eval(0.0) - direct).abs() < 1e-6);
        }
        assert_eq!(sol.clamped, 0);
    }
}
