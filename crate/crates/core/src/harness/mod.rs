//! Experiment driver: replica farms and the four experiment kinds.
//!
//! Replica `i` at lattice size `n` always draws from the stream
//! `stream_index([kind, role, n, i])` of the master seed, and results are
//! collected in replica order, so reports do not depend on the thread count.

pub mod config;
mod diagnostics;
mod entropy;
mod importance;
mod lln;
pub mod report;

use rayon::prelude::*;

use crate::dynamics::{EventKind, Trajectory};
use crate::error::{Error, Result};
use crate::fields::PathField;
use crate::hydro::HydroSolution;
use crate::model::LocalRate;
use crate::quad::Antiderivative;
use crate::rng::{stream, stream_index, StreamRng};
use crate::testfn::TimeFunction;

pub use config::{
    ASpec, DiagnosticsSection, EventCenter, EventSection, ExperimentConfig, ExperimentKind, HSpec, HydroSection,
    ModelSection, ProfileSpec, RatesSpec, RunSection, TiltSection, Tolerances,
};
pub use diagnostics::run_diagnostics;
pub use entropy::run_entropy_experiment;
pub use importance::run_importance_sampling;
pub use lln::{run_lln_experiment, run_perturbed_lln_experiment};
pub use report::{Check, ExperimentReport, Fingerprint, Metric, Row, Table, Value};

/// Dispatches on `cfg.kind`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Lln => run_lln_experiment(cfg),
        ExperimentKind::PerturbedLln => run_perturbed_lln_experiment(cfg),
        ExperimentKind::Entropy => run_entropy_experiment(cfg),
        ExperimentKind::ImportanceSampling => run_importance_sampling(cfg),
        ExperimentKind::Diagnostics => run_diagnostics(cfg),
    }
}

/// Runs `count` replicas of `job` on disjoint streams and returns them in order.
pub(crate) fn run_replicas<T, F>(cfg: &ExperimentConfig, role: u64, n: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    let seed = cfg.run.seed;
    let tag = cfg.kind.tag();
    let work = || {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, stream_index(&[tag, role, n as u64, i as u64]));
                job(&mut rng)
            })
            .collect::<Result<Vec<T>>>()
    };
    match cfg.run.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// `max_j |x(t_j) - f(t_j)|` over the recording grid.
pub(crate) fn walker_sup_distance(pi: &PathField, sol: &HydroSolution) -> f64 {
    pi.times
        .iter()
        .zip(&pi.walker)
        .map(|(&t, &x)| (x - sol.f_at(t)).abs())
        .fold(0.0, f64::max)
}

/// `(1/n)` times the compensator of the walker part of the log-likelihood
/// ratio under the driven law:
/// `int c+ psi(a) + c- psi(-a) dt` with `psi(a) = a e^a - e^a + 1`, evaluated
/// exactly along the replayed path. Its mean equals the mean of `log_ma` but
/// it carries no jump noise.
pub(crate) fn walker_entropy_production(traj: &Trajectory, rates: &LocalRate, a: &TimeFunction) -> Result<f64> {
    let events = traj.events().ok_or(Error::MissingEventLog)?;
    let t_max = traj.t_max();
    let psi = |a: f64| a * a.exp() - a.exp() + 1.0;
    type Span<'a> = Box<dyn Fn(f64, f64) -> f64 + 'a>;
    let (psi_p, psi_m): (Span<'_>, Span<'_>) = if a.is_constant() {
        let v = a.value(0.0);
        let (p, m) = (psi(v), psi(-v));
        (Box::new(move |s, t| p * (t - s)), Box::new(move |s, t| m * (t - s)))
    } else {
        let cells = 256;
        let ap = Antiderivative::new(|t| psi(a.value(t)), 0.0, t_max, cells);
        let am = Antiderivative::new(|t| psi(-a.value(t)), 0.0, t_max, cells);
        (Box::new(move |s, t| ap.integral(s, t)), Box::new(move |s, t| am.integral(s, t)))
    };
    let lattice = traj.lattice();
    let n = traj.n() as i64;
    let mut eta = traj.initial().as_slice().to_vec();
    let mut lifted: i64 = 0;
    let mut t_prev = 0.0;
    let mut idx = rates.window_index(&eta, 0);
    let mut total = 0.0;
    for e in events {
        let (cp, cm) = rates.rates_at_index(idx);
        total += cp * psi_p(t_prev, e.t) + cm * psi_m(t_prev, e.t);
        t_prev = e.t;
        match e.kind {
            EventKind::Exchange(p) => {
                let (x, y) = lattice.pair(p as usize);
                eta.swap(x, y);
            }
            EventKind::Walk(s) => lifted += s as i64,
        }
        idx = rates.window_index(&eta, lifted.rem_euclid(n) as usize);
    }
    let (cp, cm) = rates.rates_at_index(idx);
    total += cp * psi_p(t_prev, t_max) + cm * psi_m(t_prev, t_max);
    Ok(total)
}
