use log::info;

use crate::dynamics::{simulate, PreparedTilt, SimulationSpec, TiltMode, TiltParams};
use crate::error::{Error, Result};
use crate::fields::{cumulative_l1, empirical_density, record_path_field};
use crate::harness::report::{fmt_series, strictly_decreasing, Metric, Row};
use crate::harness::{run_replicas, walker_sup_distance, ExperimentConfig, ExperimentReport};
use crate::hydro::{solve_heat, solve_perturbed};
use crate::model::{sample_product_profile, DensityProfile, InitialState, TiltedInitial, TorusLattice};

const QUAD_TOL: f64 = 1e-10;

/// Law of large numbers under the original dynamics.
///
/// Per `n`: the L1 distance (of primitives) between `pi_T` and the heat
/// solution, the sup distance between the walker and the ODE path, and the
/// same L1 distance for the field seen from the walker at `T`.
pub fn run_lln_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let u0 = cfg.u0()?;
    if let Some(t) = cfg.tilt_params()? {
        if !t.is_null_for(&u0) {
            return Err(Error::Config("lln experiment requires the null tilt".into()));
        }
    }
    let heat = solve_heat(&u0, cfg.diffusion(), &cfg.grid()?)?;
    let reference = heat.frames.last().expect("frames").clone();
    lln_sweep(cfg, &TiltParams::null(&u0, cfg.model.t_max), false, &reference)
}

/// The same sweep for the driven dynamics of the configured tilt, against
/// the perturbed hydrodynamic limit `(u_i, f_i)` and its walker-frame field.
pub fn run_perturbed_lln_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let tilt = cfg
        .tilt_params()?
        .ok_or_else(|| Error::Config("perturbed lln experiment needs a [tilt] section".into()))?;
    let sol = solve_perturbed(&tilt, &cfg.rates()?, cfg.diffusion(), &cfg.grid()?)?;
    let reference = sol.u.frames.last().expect("frames").clone();
    lln_sweep(cfg, &tilt, true, &reference)
}

fn lln_sweep(
    cfg: &ExperimentConfig,
    tilt: &TiltParams,
    driven: bool,
    reference: &DensityProfile,
) -> Result<ExperimentReport> {
    let u0 = cfg.u0()?;
    let rates = cfg.rates()?;
    let d = cfg.diffusion();
    let t_max = cfg.model.t_max;
    let grid = cfg.grid()?;
    let times = grid.frame_times();
    let sol = solve_perturbed(tilt, &rates, d, &grid)?;
    let hat_t = sol.u_hat.frames.last().expect("frames");

    let mut report = ExperimentReport::new(cfg);
    report.notes.push(format!(
        "walker distance is a maximum over the {} recording times; L1 distances compare primitives",
        times.len()
    ));
    for &n in &cfg.model.n {
        let lattice = TorusLattice::new(n)?;
        let mut spec = SimulationSpec::new(lattice, &rates, t_max)
            .with_diffusion(d)
            .with_recording(times.clone());
        // untilted runs also accept profiles touching 0 or 1
        let prep;
        let mut init_law = None;
        if driven {
            prep = PreparedTilt::new(tilt, &lattice, t_max, QUAD_TOL)?;
            spec = spec.with_tilt(TiltMode::Drive(&prep));
            init_law = Some(TiltedInitial::new(&lattice, &u0, &tilt.v0)?);
        }
        let samples = run_replicas(cfg, 0, n, cfg.run.replicas, |rng| {
            let init = match &init_law {
                Some(law) => law.sample(rng),
                None => InitialState::untilted(sample_product_profile(&lattice, &u0, rng)),
            };
            let out = simulate(&spec, init, rng)?;
            let (pi, pi_hat) = record_path_field(&out.trajectory, &times)?;
            let l1 = cumulative_l1(&empirical_density(out.trajectory.final_config()), reference);
            let walker = walker_sup_distance(&pi, &sol);
            let hat = cumulative_l1(pi_hat.frames.last().expect("frames"), hat_t);
            Ok([l1, walker, hat])
        })?;
        let col = |k: usize| samples.iter().map(|s| s[k]).collect::<Vec<f64>>();
        let mut row = Row::new(n);
        row.push_metric(Metric::from_samples("l1_density", &col(0)));
        row.push_metric(Metric::from_samples("walker_sup", &col(1)));
        row.push_metric(Metric::from_samples("l1_walker_frame", &col(2)));
        row.push_value("f_T", sol.f_at(t_max));
        info!("lln n={n}: {:?}", row.metrics.iter().map(|m| m.mean).collect::<Vec<_>>());
        report.rows.push(row);
    }

    let tol = cfg.tolerances.lln_l1_max;
    for (name, check) in [
        ("l1_density", "l1_density_decreasing"),
        ("walker_sup", "walker_sup_decreasing"),
        ("l1_walker_frame", "l1_walker_frame_decreasing"),
    ] {
        let s = report.series(name);
        report.push_check(check, strictly_decreasing(&s), fmt_series(&s));
    }
    let last = *report.series("l1_density").last().expect("rows");
    report.push_check(
        "l1_density_at_largest_n",
        last <= tol,
        format!("{last:.5} <= {tol}"),
    );
    Ok(report)
}
