//! The environment seen from the walker, and walker counts recovered from it.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::dynamics::trajectory::{EventKind, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Configuration, Diffusion, LocalRate};

/// `xi_t = tau_{x_t} eta_t`.
pub fn environment_view(traj: &Trajectory, t: f64) -> Result<Configuration> {
    let eta = if t <= 0.0 {
        traj.initial().clone()
    } else {
        traj.config_at(t)?
    };
    Ok(eta.shifted(traj.lifted_at(t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiEventKind {
    /// Exchange across pair `p` of the walker frame.
    Swap(u32),
    /// `xi -> tau_z xi`, i.e. the walker stepped by `z`.
    Shift(i8),
    /// A change whose origin was not recorded.
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEvent {
    pub t: f64,
    pub kind: XiEventKind,
}

/// A path of the environment process with labeled jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct XiPath {
    pub n: usize,
    pub t_max: f64,
    pub initial: Configuration,
    pub events: Vec<XiEvent>,
}

impl XiPath {
    /// Extracts the walker-frame path from a trajectory with a full event log.
    pub fn from_trajectory(traj: &Trajectory) -> Result<XiPath> {
        let log = traj.events().ok_or(Error::MissingEventLog)?;
        let n = traj.n();
        let pairs = traj.lattice().pair_count();
        let mut x: i64 = 0;
        let mut events = Vec::with_capacity(log.len());
        for e in log {
            let kind = match e.kind {
                EventKind::Exchange(p) => {
                    let rel = (p as i64 - x).rem_euclid(n as i64) as usize;
                    XiEventKind::Swap((rel % pairs) as u32)
                }
                EventKind::Walk(z) => {
                    x += z as i64;
                    XiEventKind::Shift(z)
                }
            };
            events.push(XiEvent { t: e.t, kind });
        }
        Ok(XiPath {
            n,
            t_max: traj.t_max(),
            initial: traj.initial().clone(),
            events,
        })
    }
}

/// Recovered counting processes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WalkerCounts {
    pub plus_times: Vec<f64>,
    pub minus_times: Vec<f64>,
}

impl WalkerCounts {
    pub fn n_plus(&self) -> u64 {
        self.plus_times.len() as u64
    }

    pub fn n_minus(&self) -> u64 {
        self.minus_times.len() as u64
    }
}

/// Reconstructs `(N+, N-)` from the walker-frame path.
///
/// With at least two particles and two holes every shift is a walker step.
/// With a single particle (or hole) a shift may be that particle moving;
/// it is discarded with probability `D n / (D n + c^z(xi; 0))`. Without
/// particles (or holes) the counts are Poisson with rates `n c±`.
pub fn recover_walker_counts<R: Rng + ?Sized>(
    path: &XiPath,
    rates: &LocalRate,
    diffusion: Diffusion,
    rng: &mut R,
) -> Result<WalkerCounts> {
    if let Some(e) = path.events.iter().find(|e| e.kind == XiEventKind::Unlabeled) {
        return Err(Error::UnlabeledEvent(e.t));
    }
    let n = path.n;
    let nf = n as f64;
    let k = path.initial.particle_count();
    let mut out = WalkerCounts::default();

    if k >= 2 && k + 2 <= n {
        for e in &path.events {
            match e.kind {
                XiEventKind::Shift(z) if z > 0 => out.plus_times.push(e.t),
                XiEventKind::Shift(_) => out.minus_times.push(e.t),
                _ => {}
            }
        }
        return Ok(out);
    }

    if k == 0 || k == n {
        let (cp, cm) = rates.evaluate(&path.initial, 0);
        out.plus_times = poisson_times(nf * cp, path.t_max, rng);
        out.minus_times = poisson_times(nf * cm, path.t_max, rng);
        return Ok(out);
    }

    // single particle or single hole
    let lattice = crate::model::TorusLattice::new(n)?;
    let dn = diffusion.value() * nf;
    let mut xi = path.initial.clone();
    for e in &path.events {
        let next = match e.kind {
            XiEventKind::Swap(p) => {
                let (a, b) = lattice.pair(p as usize);
                let mut c = xi.clone();
                c.swap(a, b);
                c
            }
            XiEventKind::Shift(z) => xi.shifted(z as i64),
            XiEventKind::Unlabeled => unreachable!(),
        };
        let direction = if next == xi.shifted(1) {
            Some(1i8)
        } else if next == xi.shifted(-1) {
            Some(-1)
        } else {
            None
        };
        if let Some(z) = direction {
            let (cp, cm) = rates.evaluate(&xi, 0);
            let cz = if z > 0 { cp } else { cm };
            let discard = dn / (dn + cz);
            if rng.random::<f64>() >= discard {
                if z > 0 {
                    out.plus_times.push(e.t);
                } else {
                    out.minus_times.push(e.t);
                }
            }
        }
        xi = next;
    }
    Ok(out)
}

fn poisson_times<R: Rng + ?Sized>(rate: f64, t_max: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e / rate;
        if t > t_max {
            return out;
        }
        out.push(t);
    }
}
