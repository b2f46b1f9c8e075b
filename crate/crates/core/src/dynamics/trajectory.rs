use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, TorusLattice};

/// What happened at an event time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// Occupancies of pair `p` (sites `p`, `p + 1`) were exchanged.
    Exchange(u32),
    /// Walker step by `+1` or `-1`.
    Walk(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// State recorded on the recording grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub config: Configuration,
    /// Lifted walker position in lattice units, `N+ - N-`.
    pub lifted: i64,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl Snapshot {
    /// Torus site of the walker.
    pub fn site(&self) -> usize {
        self.lifted.rem_euclid(self.config.len() as i64) as usize
    }

    /// Environment seen from the walker.
    pub fn environment(&self) -> Configuration {
        self.config.shifted(self.lifted)
    }
}

/// One realization of the joint process on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) n: usize,
    pub(crate) t_max: f64,
    pub(crate) initial: Configuration,
    pub(crate) final_config: Configuration,
    pub(crate) n_plus: u64,
    pub(crate) n_minus: u64,
    pub(crate) walk_events: Vec<(f64, i8)>,
    pub(crate) events: Option<Vec<Event>>,
    pub(crate) snapshots: Vec<Snapshot>,
    pub(crate) exchange_count: u64,
    pub(crate) rejected: u64,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lattice(&self) -> TorusLattice {
        TorusLattice::new(self.n).expect("trajectory lattice is valid")
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn final_config(&self) -> &Configuration {
        &self.final_config
    }

    /// `(N+_T, N-_T)`.
    pub fn counts(&self) -> (u64, u64) {
        (self.n_plus, self.n_minus)
    }

    /// Final lifted position in lattice units.
    pub fn final_lifted(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    /// Final walker site on the torus.
    pub fn final_site(&self) -> usize {
        self.final_lifted().rem_euclid(self.n as i64) as usize
    }

    /// Final lifted position in macroscopic units.
    pub fn final_position(&self) -> f64 {
        self.final_lifted() as f64 / self.n as f64
    }

    pub fn walk_events(&self) -> &[(f64, i8)] {
        &self.walk_events
    }

    /// Full merged event log, if it was recorded.
    pub fn events(&self) -> Option<&[Event]> {
        self.events.as_deref()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn exchange_count(&self) -> u64 {
        self.exchange_count
    }

    /// Candidate events rejected by thinning.
    pub fn rejected_count(&self) -> u64 {
        self.rejected
    }

    /// `(N+_t, N-_t)` from the walk log.
    pub fn counts_at(&self, t: f64) -> (u64, u64) {
        let k = self.walk_events.partition_point(|&(s, _)| s <= t);
        let plus = self.walk_events[..k].iter().filter(|e| e.1 > 0).count() as u64;
        (plus, k as u64 - plus)
    }

    /// Lifted walker position at `t` in lattice units.
    pub fn lifted_at(&self, t: f64) -> i64 {
        let k = self.walk_events.partition_point(|&(s, _)| s <= t);
        self.walk_events[..k].iter().map(|e| e.1 as i64).sum()
    }

    /// Lifted position at `t` in macroscopic units.
    pub fn position_at(&self, t: f64) -> f64 {
        self.lifted_at(t) as f64 / self.n as f64
    }

    /// Environment `eta_t`, replayed from the event log.
    pub fn config_at(&self, t: f64) -> Result<Configuration> {
        if let Some(s) = self.snapshots.iter().find(|s| s.t == t) {
            return Ok(s.config.clone());
        }
        if t >= self.t_max {
            return Ok(self.final_config.clone());
        }
        let events = self.events.as_ref().ok_or(Error::MissingEventLog)?;
        let lattice = self.lattice();
        let mut eta = self.initial.clone();
        for e in events.iter().take_while(|e| e.t <= t) {
            if let EventKind::Exchange(p) = e.kind {
                let (x, y) = lattice.pair(p as usize);
                eta.swap(x, y);
            }
        }
        Ok(eta)
    }
}

/// Pathwise log-densities of the exponential martingales, scaled by `1/n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltAccumulators {
    /// `(1/n) log (d nu_tilted / d nu_u0)(eta_0)`.
    pub log_init: f64,
    /// `(1/n) log M^a_T`.
    pub log_ma: f64,
    /// `(1/n) log M^H_T`.
    pub log_mh: f64,
    /// The `psi` part of the exchange compensator (the quadratic-variation term).
    pub q_term: f64,
    /// Estimated quadrature error per unit time of the between-event integrals.
    pub quad_error: f64,
}

impl TiltAccumulators {
    /// `(1/n) log M^{i,n}_T`.
    pub fn total(&self) -> f64 {
        self.log_init + self.log_ma + self.log_mh
    }

    /// `log M^{i,n}_T`.
    pub fn log_martingale(&self, n: usize) -> f64 {
        n as f64 * self.total()
    }
}
