use log::info;

use crate::dynamics::{simulate, PreparedTilt, SimulationSpec, TiltMode, TiltParams, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{cumulative_l1, record_path_field};
use crate::harness::config::EventCenter;
use crate::harness::report::{Metric, Row};
use crate::harness::{run_replicas, walker_sup_distance, ExperimentConfig, ExperimentReport};
use crate::hydro::{solve_perturbed, HydroSolution};
use crate::ldp::{controlled_cost, i_ex, i_rw, WalkerPath};
use crate::model::{sample_product_profile, InitialState, TiltedInitial, TorusLattice};
use crate::stats::Estimate;

const QUAD_TOL: f64 = 1e-10;

struct Tube<'a> {
    center: &'a HydroSolution,
    density_radius: f64,
    walker_radius: f64,
    times: &'a [f64],
}

impl Tube<'_> {
    /// Membership on the recording grid.
    fn contains(&self, traj: &Trajectory) -> Result<bool> {
        if self.density_radius.is_infinite() && self.walker_radius.is_infinite() {
            return Ok(true);
        }
        let (pi, _) = record_path_field(traj, self.times)?;
        if walker_sup_distance(&pi, self.center) > self.walker_radius {
            return Ok(false);
        }
        if self.density_radius.is_infinite() {
            return Ok(true);
        }
        Ok(pi
            .frames
            .iter()
            .zip(&self.center.u.frames)
            .all(|(a, b)| cumulative_l1(a, b) <= self.density_radius))
    }
}

/// Probability of a tube around a target path, by plain Monte Carlo under the
/// original law and by importance sampling under the driven law with weight
/// `1/M`, compared with the rate `I_rw + I_ex` of the tilt's hydrodynamic limit.
pub fn run_importance_sampling(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let tilt = cfg
        .tilt_params()?
        .ok_or_else(|| Error::Config("importance sampling needs a [tilt] section".into()))?;
    let event = cfg
        .event
        .clone()
        .ok_or_else(|| Error::Config("importance sampling needs an [event] section".into()))?;
    let u0 = cfg.u0()?;
    let rates = cfg.rates()?;
    let d = cfg.diffusion();
    let t_max = cfg.model.t_max;
    let grid = cfg.grid()?;
    let times = grid.frame_times();

    let null = TiltParams::null(&u0, t_max);
    let target = match event.center {
        EventCenter::Tilt => &tilt,
        EventCenter::Null => &null,
    };
    let center = solve_perturbed(target, &rates, d, &grid)?;
    let tube = Tube {
        center: &center,
        density_radius: event.density_radius,
        walker_radius: event.walker_radius,
        times: &times,
    };
    let fine = solve_perturbed(&tilt, &rates, d, &cfg.rate_grid()?)?;
    let rw = i_rw(&WalkerPath::from_field(&fine.u)?, &fine.u, &rates);
    let ex = i_ex(&fine.u, &u0, cfg.basis(), d)?;
    let rate = rw.value + ex.value;
    let closed = controlled_cost(&fine, &tilt, &u0) + rw.value;

    let mut report = ExperimentReport::new(cfg);
    report.notes.push(format!(
        "event membership is evaluated on the {} recording times",
        times.len()
    ));
    let z = cfg.tolerances.z;
    let atol = cfg.tolerances.atol;
    for &n in &cfg.model.n {
        let nf = n as f64;
        let lattice = TorusLattice::new(n)?;
        let prep = PreparedTilt::new(&tilt, &lattice, t_max, QUAD_TOL)?;
        let init_law = TiltedInitial::new(&lattice, &u0, &tilt.v0)?;
        let base = SimulationSpec::new(lattice, &rates, t_max)
            .with_diffusion(d)
            .with_recording(times.clone());
        let driven = base.clone().with_tilt(TiltMode::Drive(&prep));

        let weights = run_replicas(cfg, 1, n, cfg.run.replicas, |rng| {
            let out = simulate(&driven, init_law.sample(rng), rng)?;
            Ok(if tube.contains(&out.trajectory)? {
                (-out.tilt.log_martingale(n)).exp()
            } else {
                0.0
            })
        })?;
        let accepted = weights.iter().filter(|&&w| w > 0.0).count();
        let is = Estimate::from_samples(&weights);
        let mut row = Row::new(n);
        row.push_metric(Metric::new("p_is", is));
        row.push_value("accepted_is", accepted as f64);
        row.push_value("rate_is", -is.mean.ln() / nf);
        row.push_value("rate", rate);
        row.push_value("i_rw", rw.value);
        row.push_value("i_ex", ex.value);
        row.push_value("rate_closed_form", closed);
        row.push_value("rel_var_is", (is.stderr / is.mean).powi(2) * is.count as f64);
        if accepted == 0 {
            report
                .notes
                .push(format!("n = {n}: no importance sample fell in the tube; the radius is too small"));
        }

        if n <= event.naive_max_n {
            let count = event.naive_replicas.unwrap_or(cfg.run.replicas);
            let hits = run_replicas(cfg, 2, n, count, |rng| {
                let init = InitialState::untilted(sample_product_profile(&lattice, &u0, rng));
                let out = simulate(&base, init, rng)?;
                Ok(if tube.contains(&out.trajectory)? { 1.0 } else { 0.0 })
            })?;
            let naive = Estimate::from_samples(&hits);
            row.push_metric(Metric::new("p_naive", naive));
            row.push_value("rate_naive", -naive.mean.ln() / nf);
            let rel_var_naive = if naive.mean > 0.0 {
                (1.0 - naive.mean) / naive.mean
            } else {
                f64::INFINITY
            };
            row.push_value("rel_var_naive", rel_var_naive);

            let combined = (is.stderr.powi(2) + naive.stderr.powi(2)).sqrt();
            let diff = (is.mean - naive.mean).abs();
            report.push_check(
                &format!("is_matches_naive_n{n}"),
                diff <= atol.max(z * combined),
                format!("|{:.5} - {:.5}| = {diff:.5} vs {z} * {combined:.5}", is.mean, naive.mean),
            );
            if naive.mean < event.rare_below {
                let rel_var_is = (is.stderr / is.mean).powi(2) * is.count as f64;
                report.push_check(
                    &format!("is_variance_smaller_n{n}"),
                    rel_var_is < rel_var_naive,
                    format!("relative variance {rel_var_is:.4} vs {rel_var_naive:.4}"),
                );
            }
        }
        info!("is n={n}: p_is {} accepted {accepted}", is.mean);
        report.rows.push(row);
    }

    let last = report.rows.last().expect("rows");
    let rate_is = last.value("rate_is").expect("value");
    let tol = cfg.tolerances.is_rate_tol;
    report.push_check(
        "rate_at_largest_n",
        (rate_is - rate).abs() <= tol,
        format!("-(1/n) log P = {rate_is:.5}, I_rw + I_ex = {rate:.5}, tol {tol}"),
    );
    Ok(report)
}
