use log::info;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::dynamics::{replacement_error, simulate, PreparedTilt, SimulationSpec, TiltMode};
use crate::error::Result;
use crate::fields::{block_average, energy_norm, record_path_field, PathField};
use crate::harness::report::{fmt_series, Metric, Row, Table};
use crate::harness::{run_replicas, ExperimentConfig, ExperimentReport};
use crate::model::{
    canonical_average, ensembles_gap, sample_product_profile, DensityProfile, InitialState, LocalFunction,
    TiltedInitial, TorusLattice,
};
use crate::stats::Estimate;

const QUAD_TOL: f64 = 1e-10;
/// Spatial points used for energy norms.
const ENERGY_POINTS: usize = 200;

/// Replacement errors, equivalence of ensembles, energy norms and the
/// martingale unit-mean test.
pub fn run_diagnostics(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    ensembles(cfg, &mut report)?;
    replacement_and_energy(cfg, &mut report)?;
    martingale(cfg, &mut report)?;
    Ok(report)
}

fn ensembles(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let f = LocalFunction::product(&[1, 2]);
    let mut rows = Vec::new();
    let mut bound_ok = true;
    let mut moments_ok = true;
    let mut fit: f64 = 0.0;
    for &ell in &cfg.diagnostics.ells {
        if ell < 2 {
            continue;
        }
        let (gap, _) = ensembles_gap(&f, ell)?;
        let bound = BigRational::one() / BigRational::from_integer((ell as i64 - 1).into());
        bound_ok &= gap <= bound;
        for k in 0..=ell {
            let expect = BigRational::new(
                ((k * k.saturating_sub(1)) as i64).into(),
                ((ell * (ell - 1)) as i64).into(),
            );
            moments_ok &= canonical_average(&f, k, ell)? == expect;
        }
        let g = gap.to_f64().unwrap_or(f64::NAN);
        fit = fit.max(g * ell as f64);
        rows.push(vec![ell as f64, g, bound.to_f64().unwrap_or(f64::NAN)]);
    }
    report.tables.push(Table {
        name: "ensembles".into(),
        columns: vec!["ell".into(), "sup_gap".into(), "bound".into()],
        rows,
    });
    report.notes.push(format!("ensembles gap fit: sup_ell ell * gap = {fit:.5}"));
    report.push_check("ensembles_bound", bound_ok, "sup_k gap <= 1/(ell - 1)".into());
    report.push_check(
        "ensembles_second_moment_exact",
        moments_ok,
        "canonical average of eta(1)eta(2) equals k(k-1)/(ell(ell-1))".into(),
    );
    Ok(())
}

/// Block averages of `pi` on a uniform grid.
fn smoothed(pi: &DensityProfile, eps: f64) -> Result<DensityProfile> {
    let vals = (0..ENERGY_POINTS)
        .map(|i| block_average(pi, i as f64 / ENERGY_POINTS as f64, eps).map(|v| v.clamp(0.0, 1.0)))
        .collect::<Result<Vec<f64>>>()?;
    DensityProfile::from_grid(&vals)
}

fn replacement_and_energy(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let u0 = cfg.u0()?;
    let rates = cfg.rates()?;
    let d = cfg.diffusion();
    let t_max = cfg.model.t_max;
    let times = cfg.grid()?.frame_times();
    let eps_list: Vec<f64> = cfg.diagnostics.eps.clone();
    let energy_eps = cfg.diagnostics.energy_eps;
    let count = cfg.diagnostics.replicas.unwrap_or(cfg.run.replicas);
    let mut rep_rows = Vec::new();
    let mut energy_rows = Vec::new();
    let mut smooth_series = Vec::new();
    for &n in &cfg.model.n {
        let lattice = TorusLattice::new(n)?;
        let spec = SimulationSpec::new(lattice, &rates, t_max)
            .with_diffusion(d)
            .with_recording(times.clone())
            .with_event_log(true);
        let samples = run_replicas(cfg, 0, n, count, |rng| {
            let init = InitialState::untilted(sample_product_profile(&lattice, &u0, rng));
            let out = simulate(&spec, init, rng)?;
            let traj = &out.trajectory;
            let mut errs = Vec::with_capacity(2 * eps_list.len());
            for &eps in &eps_list {
                errs.push(replacement_error(traj, rates.plus(), eps, t_max)?.abs());
                errs.push(replacement_error(traj, rates.minus(), eps, t_max)?.abs());
            }
            let (pi, _) = record_path_field(traj, &times)?;
            let frames = pi.frames.iter().map(|f| smoothed(f, energy_eps)).collect::<Result<Vec<_>>>()?;
            let smooth = PathField::density_only(pi.times.clone(), frames)?;
            Ok((errs, energy_norm(&pi, ENERGY_POINTS.max(4 * n)), energy_norm(&smooth, ENERGY_POINTS)))
        })?;
        let mut row = Row::new(n);
        for (j, &eps) in eps_list.iter().enumerate() {
            let plus: Vec<f64> = samples.iter().map(|s| s.0[2 * j]).collect();
            let minus: Vec<f64> = samples.iter().map(|s| s.0[2 * j + 1]).collect();
            let (p, m) = (Estimate::from_samples(&plus), Estimate::from_samples(&minus));
            rep_rows.push(vec![n as f64, eps, p.mean, p.stderr, m.mean, m.stderr]);
            row.push_metric(Metric::new(&format!("replacement_plus_eps{eps}"), p));
            row.push_metric(Metric::new(&format!("replacement_minus_eps{eps}"), m));
        }
        let raw: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let smooth: Vec<f64> = samples.iter().map(|s| s.2).collect();
        let (raw, smooth) = (Estimate::from_samples(&raw), Estimate::from_samples(&smooth));
        energy_rows.push(vec![n as f64, raw.mean, raw.stderr, smooth.mean, smooth.stderr]);
        smooth_series.push(smooth.mean);
        row.push_metric(Metric::new("energy_raw", raw));
        row.push_metric(Metric::new("energy_smoothed", smooth));
        info!("diagnostics n={n}: energy raw {} smoothed {}", raw.mean, smooth.mean);
        report.rows.push(row);
    }
    report.tables.push(Table {
        name: "replacement".into(),
        columns: ["n", "eps", "plus_mean", "plus_se", "minus_mean", "minus_se"]
            .map(String::from)
            .to_vec(),
        rows: rep_rows,
    });
    report.tables.push(Table {
        name: "energy".into(),
        columns: ["n", "raw_mean", "raw_se", "smoothed_mean", "smoothed_se"]
            .map(String::from)
            .to_vec(),
        rows: energy_rows,
    });
    // the raw norm grows like n; the smoothed one must level off
    let last = *smooth_series.last().expect("rows");
    let before = smooth_series[..smooth_series.len() - 1]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let growth = cfg.tolerances.energy_growth;
    report.push_check(
        "energy_bounded",
        smooth_series.len() < 2 || last <= before * (1.0 + growth),
        format!("smoothed energy {}", fmt_series(&smooth_series)),
    );
    Ok(())
}

fn martingale(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let tilt = cfg.tilt_or_null()?;
    let u0 = cfg.u0()?;
    let rates = cfg.rates()?;
    let d = cfg.diffusion();
    let t_max = cfg.model.t_max;
    let z = cfg.tolerances.z;
    let atol = cfg.tolerances.atol;
    let mut rows = Vec::new();
    let mut ok = true;
    for &n in &cfg.model.n {
        let lattice = TorusLattice::new(n)?;
        let prep = PreparedTilt::new(&tilt, &lattice, t_max, QUAD_TOL)?;
        let spec = SimulationSpec::new(lattice, &rates, t_max)
            .with_diffusion(d)
            .with_tilt(TiltMode::Observe(&prep));
        let init_law = TiltedInitial::new(&lattice, &u0, &u0)?;
        let w = run_replicas(cfg, 1, n, cfg.run.replicas, |rng| {
            let out = simulate(&spec, init_law.sample(rng), rng)?;
            Ok((n as f64 * (out.tilt.log_ma + out.tilt.log_mh)).exp())
        })?;
        let est = Estimate::from_samples(&w);
        ok &= est.agrees_with(1.0, z, atol);
        rows.push(vec![n as f64, est.mean, est.stderr]);
        if let Some(r) = report.rows.iter_mut().find(|r| r.n == n) {
            r.push_metric(Metric::new("martingale_mean", est));
        }
    }
    let detail = rows
        .iter()
        .map(|r| format!("n={}: {:.4} +- {:.4}", r[0], r[1], r[2]))
        .collect::<Vec<_>>()
        .join("; ");
    report.tables.push(Table {
        name: "martingale".into(),
        columns: ["n", "mean", "se"].map(String::from).to_vec(),
        rows,
    });
    report.push_check("martingale_unit_mean", ok, detail);
    Ok(())
}
