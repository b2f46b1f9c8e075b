//! Event-driven simulation of the joint environment/walker process.
//!
//! Untilted runs are plain Gillespie: every active pair (differing
//! occupancies) fires at `D n^2`, the walker at `n c±`. Driven runs draw
//! candidates from a state-dependent bound and accept with the exact
//! time-dependent ratio, so time inhomogeneity costs no discretization.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::dynamics::tilt::{ExchangeTilt, PreparedTilt, WalkerTilt};
use crate::dynamics::trajectory::{Event, EventKind, Snapshot, TiltAccumulators, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Configuration, Diffusion, InitialState, LocalRate, TorusLattice};

/// How a tilt enters a run.
#[derive(Debug, Clone, Copy, Default)]
pub enum TiltMode<'a> {
    #[default]
    None,
    /// Original dynamics; the martingale functionals of the tilt are accumulated.
    Observe(&'a PreparedTilt),
    /// Perturbed dynamics, with the same accumulators.
    Drive(&'a PreparedTilt),
}

/// Everything a run needs besides the initial state and the random stream.
#[derive(Debug, Clone)]
pub struct SimulationSpec<'a> {
    pub lattice: TorusLattice,
    pub rates: &'a LocalRate,
    pub diffusion: Diffusion,
    pub t_max: f64,
    /// Sorted times in `[0, T]` at which snapshots are stored.
    pub recording: Vec<f64>,
    pub tilt: TiltMode<'a>,
    /// Keep the full merged event log (needed for replay and the walker view).
    pub log_events: bool,
}

impl<'a> SimulationSpec<'a> {
    pub fn new(lattice: TorusLattice, rates: &'a LocalRate, t_max: f64) -> Self {
        SimulationSpec {
            lattice,
            rates,
            diffusion: Diffusion::ONE,
            t_max,
            recording: vec![0.0, t_max],
            tilt: TiltMode::None,
            log_events: false,
        }
    }

    pub fn with_recording(mut self, times: Vec<f64>) -> Self {
        self.recording = times;
        self
    }

    /// `frames + 1` equally spaced recording times.
    pub fn with_uniform_recording(mut self, frames: usize) -> Self {
        let frames = frames.max(1);
        self.recording = (0..=frames)
            .map(|i| self.t_max * i as f64 / frames as f64)
            .collect();
        self
    }

    pub fn with_tilt(mut self, tilt: TiltMode<'a>) -> Self {
        self.tilt = tilt;
        self
    }

    pub fn with_diffusion(mut self, d: Diffusion) -> Self {
        self.diffusion = d;
        self
    }

    pub fn with_event_log(mut self, on: bool) -> Self {
        self.log_events = on;
        self
    }

    fn validate(&self, init: &Configuration) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", self.t_max)));
        }
        if init.len() != self.lattice.n() {
            return Err(Error::InvalidArgument(format!(
                "initial configuration has {} sites, lattice has {}",
                init.len(),
                self.lattice.n()
            )));
        }
        if self.recording.windows(2).any(|w| w[1] < w[0])
            || self.recording.iter().any(|&t| !(0.0..=self.t_max).contains(&t))
        {
            return Err(Error::InvalidArgument("recording grid must be sorted inside [0, T]".into()));
        }
        if let TiltMode::Observe(p) | TiltMode::Drive(p) = self.tilt {
            if p.n != self.lattice.n() {
                return Err(Error::InvalidArgument(format!(
                    "tilt prepared for n = {}, run has n = {}",
                    p.n,
                    self.lattice.n()
                )));
            }
            if p.t_max < self.t_max {
                return Err(Error::InvalidArgument("tilt prepared on a shorter horizon".into()));
            }
        }
        Ok(())
    }
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub trajectory: Trajectory,
    pub tilt: TiltAccumulators,
}

const NONE: u32 = u32::MAX;

// a pair's state: 0 inactive, +1 particle on the left, -1 particle on the right
type PairState = i8;

struct Lattice {
    n: usize,
    pairs: usize,
    occ: Vec<u8>,
    active: Vec<u32>,
    pos: Vec<u32>,
}

impl Lattice {
    fn new(lattice: &TorusLattice, occ: Vec<u8>) -> Self {
        let n = lattice.n();
        let pairs = lattice.pair_count();
        let mut l = Lattice {
            n,
            pairs,
            occ,
            active: Vec::with_capacity(pairs),
            pos: vec![NONE; pairs],
        };
        for p in 0..pairs {
            if l.state(p) != 0 {
                l.insert(p);
            }
        }
        l
    }

    #[inline]
    fn right(&self, p: usize) -> usize {
        if p + 1 == self.n {
            0
        } else {
            p + 1
        }
    }

    #[inline]
    fn state(&self, p: usize) -> PairState {
        let a = self.occ[p];
        let b = self.occ[self.right(p)];
        (a as i8) - (b as i8)
    }

    #[inline]
    fn insert(&mut self, p: usize) {
        self.pos[p] = self.active.len() as u32;
        self.active.push(p as u32);
    }

    #[inline]
    fn remove(&mut self, p: usize) {
        let i = self.pos[p] as usize;
        let last = *self.active.last().expect("pair is active");
        self.active[i] = last;
        self.pos[last as usize] = i as u32;
        self.active.pop();
        self.pos[p] = NONE;
    }

    /// Swaps pair `p`; returns `(pair, old, new)` for every pair whose state changed.
    #[inline]
    fn exchange(&mut self, p: usize) -> ([(usize, PairState, PairState); 3], usize) {
        let mut out = [(0, 0, 0); 3];
        let mut k = 0;
        let q = self.right(p);
        let neighbours = if self.pairs >= 3 {
            [Some(if p == 0 { self.pairs - 1 } else { p - 1 }), Some(self.right(p) % self.pairs)]
        } else {
            [None, None]
        };
        let old_p = self.state(p);
        let old_n = neighbours.map(|r| r.map(|r| self.state(r)));
        self.occ.swap(p, q);
        out[k] = (p, old_p, -old_p);
        k += 1;
        for (r, old) in neighbours.into_iter().zip(old_n) {
            let (Some(r), Some(old)) = (r, old) else { continue };
            let new = self.state(r);
            if new != old {
                if old == 0 {
                    self.insert(r);
                } else if new == 0 {
                    self.remove(r);
                }
                out[k] = (r, old, new);
                k += 1;
            }
        }
        (out, k)
    }
}

struct WalkerAcc<'a> {
    tilt: &'a WalkerTilt,
    nf: f64,
    mark: f64,
    jump: f64,
    comp: f64,
}

impl WalkerAcc<'_> {
    #[inline]
    fn advance(&mut self, t: f64, cp: f64, cm: f64) {
        if t > self.mark {
            let (gp, gm) = self.tilt.compensator(self.mark, t);
            self.comp += self.nf * (cp * gp + cm * gm);
            self.mark = t;
        }
    }
}

enum ExchangeAcc<'a> {
    Zero,
    Static {
        d: &'a [f64],
        psi_plus: Vec<f64>,
        psi_minus: Vec<f64>,
        s_lin: f64,
        s_psi: f64,
        c_lin: f64,
        c_psi: f64,
        mark: f64,
        updates: u32,
    },
    Varying {
        tilt: &'a ExchangeTilt,
        marks: Vec<f64>,
        c_lin: f64,
        c_exp: f64,
    },
}

impl<'a> ExchangeAcc<'a> {
    fn new(tilt: &'a ExchangeTilt, lat: &Lattice) -> Self {
        match tilt {
            ExchangeTilt::Zero => ExchangeAcc::Zero,
            ExchangeTilt::Static { d } => {
                let psi = |u: f64| u.exp_m1() - u;
                let mut acc = ExchangeAcc::Static {
                    d,
                    psi_plus: d.iter().map(|&v| psi(v)).collect(),
                    psi_minus: d.iter().map(|&v| psi(-v)).collect(),
                    s_lin: 0.0,
                    s_psi: 0.0,
                    c_lin: 0.0,
                    c_psi: 0.0,
                    mark: 0.0,
                    updates: 0,
                };
                acc.resync(lat);
                acc
            }
            ExchangeTilt::Varying { .. } => ExchangeAcc::Varying {
                tilt,
                marks: vec![0.0; lat.pairs],
                c_lin: 0.0,
                c_exp: 0.0,
            },
        }
    }

    fn resync(&mut self, lat: &Lattice) {
        if let ExchangeAcc::Static {
            d,
            psi_plus,
            psi_minus,
            s_lin,
            s_psi,
            updates,
            ..
        } = self
        {
            let (mut lin, mut ps) = (0.0, 0.0);
            for &p in &lat.active {
                let p = p as usize;
                let s = lat.state(p);
                lin += s as f64 * d[p];
                ps += if s > 0 { psi_plus[p] } else { psi_minus[p] };
            }
            *s_lin = lin;
            *s_psi = ps;
            *updates = 0;
        }
    }

    /// Integrates the compensator up to `t` and applies the pair changes.
    #[inline]
    fn apply(&mut self, t: f64, changes: &[(usize, PairState, PairState)], lat: &Lattice) {
        match self {
            ExchangeAcc::Zero => {}
            ExchangeAcc::Static {
                d,
                psi_plus,
                psi_minus,
                s_lin,
                s_psi,
                c_lin,
                c_psi,
                mark,
                updates,
            } => {
                let dt = t - *mark;
                *c_lin += *s_lin * dt;
                *c_psi += *s_psi * dt;
                *mark = t;
                let term = |r: usize, s: PairState| -> (f64, f64) {
                    match s {
                        0 => (0.0, 0.0),
                        1 => (d[r], psi_plus[r]),
                        _ => (-d[r], psi_minus[r]),
                    }
                };
                for &(r, old, new) in changes {
                    let (l0, p0) = term(r, old);
                    let (l1, p1) = term(r, new);
                    *s_lin += l1 - l0;
                    *s_psi += p1 - p0;
                }
                *updates += 1;
                if *updates >= 1 << 20 {
                    self.resync(lat);
                }
            }
            ExchangeAcc::Varying {
                tilt,
                marks,
                c_lin,
                c_exp,
            } => {
                for &(r, old, new) in changes {
                    if old != 0 {
                        let (lin, ex) = varying_integral(tilt, r, old, marks[r], t);
                        *c_lin += lin;
                        *c_exp += ex;
                    }
                    if new != 0 {
                        marks[r] = t;
                    }
                }
            }
        }
    }

    fn finish(&mut self, t: f64, lat: &Lattice) -> (f64, f64) {
        match self {
            ExchangeAcc::Zero => (0.0, 0.0),
            ExchangeAcc::Static { .. } => {
                self.apply(t, &[], lat);
                if let ExchangeAcc::Static { c_lin, c_psi, .. } = self {
                    (*c_lin, *c_psi)
                } else {
                    unreachable!()
                }
            }
            ExchangeAcc::Varying {
                tilt,
                marks,
                c_lin,
                c_exp,
            } => {
                for &p in &lat.active {
                    let p = p as usize;
                    let (lin, ex) = varying_integral(tilt, p, lat.state(p), marks[p], t);
                    *c_lin += lin;
                    *c_exp += ex;
                }
                (*c_lin, *c_exp - *c_lin)
            }
        }
    }
}

// (integral of sigma d_p, integral of e^{sigma d_p} - 1) over [t0, t1]
fn varying_integral(tilt: &ExchangeTilt, p: usize, sigma: PairState, t0: f64, t1: f64) -> (f64, f64) {
    let ExchangeTilt::Varying { pairs, .. } = tilt else {
        return (0.0, 0.0);
    };
    let idx = if sigma > 0 { 0 } else { 1 };
    (sigma as f64 * pairs[p].lin.integral(t0, t1), pairs[p].exp[idx].integral(t0, t1))
}

/// Simulates `(eta_t, x_t)` on `[0, T]` from `init`, with the walker at 0.
pub fn simulate<R: Rng + ?Sized>(spec: &SimulationSpec<'_>, init: InitialState, rng: &mut R) -> Result<Outcome> {
    spec.validate(&init.config)?;
    let n = spec.lattice.n();
    let nf = n as f64;
    let lam = spec.diffusion.value() * nf * nf;
    let (prep, driving) = match spec.tilt {
        TiltMode::None => (None, false),
        TiltMode::Observe(p) => (Some(p), false),
        TiltMode::Drive(p) => (Some(p), true),
    };
    let rates = spec.rates;
    let support = rates.support();
    let mut window_mask = vec![false; n];
    for &off in support {
        window_mask[off.rem_euclid(n as i64) as usize] = true;
    }

    let initial = init.config.clone();
    let mut lat = Lattice::new(&spec.lattice, init.config.as_slice().to_vec());
    let mut x = 0usize;
    let mut n_plus = 0u64;
    let mut n_minus = 0u64;
    let (mut cp, mut cm) = rates.rates_at_index(rates.window_index(&lat.occ, x));

    let drive_h = driving && !matches!(prep.map(|p| &p.exchange), Some(ExchangeTilt::Zero));
    let drive_a = driving && prep.is_some_and(|p| p.a_bound > 0.0);
    let eb = if drive_h { prep.map_or(1.0, |p| p.d_bound.exp()) } else { 1.0 };
    let ea = if drive_a { prep.map_or(1.0, |p| p.a_bound.exp()) } else { 1.0 };
    let pair_bound = lam * eb;
    let static_accept: Option<(Vec<f64>, Vec<f64>)> = match prep.map(|p| &p.exchange) {
        Some(ExchangeTilt::Static { d }) if drive_h => {
            let b = prep.map_or(0.0, |p| p.d_bound);
            Some((
                d.iter().map(|v| (v - b).exp()).collect(),
                d.iter().map(|v| (-v - b).exp()).collect(),
            ))
        }
        _ => None,
    };

    let mut wacc = prep.map(|p| WalkerAcc {
        tilt: &p.walker,
        nf,
        mark: 0.0,
        jump: 0.0,
        comp: 0.0,
    });
    let mut xacc = prep.map(|p| ExchangeAcc::new(&p.exchange, &lat));
    let mut x_jump = 0.0;

    let mut events: Option<Vec<Event>> = spec.log_events.then(Vec::new);
    let mut walk_events = Vec::new();
    let mut snapshots = Vec::with_capacity(spec.recording.len());
    let mut rec = 0usize;
    let mut exchange_count = 0u64;
    let mut rejected = 0u64;
    let mut t = 0.0;

    loop {
        let pair_total = pair_bound * lat.active.len() as f64;
        let plus_total = nf * ea * cp;
        let minus_total = nf * ea * cm;
        let total = pair_total + plus_total + minus_total;
        let t_next = if total > 0.0 {
            let e: f64 = Exp1.sample(rng);
            t + e / total
        } else {
            f64::INFINITY
        };
        while rec < spec.recording.len() && spec.recording[rec] < t_next {
            let lifted = n_plus as i64 - n_minus as i64;
            snapshots.push(Snapshot {
                t: spec.recording[rec],
                config: Configuration::from_raw(lat.occ.clone()),
                lifted,
                n_plus,
                n_minus,
            });
            rec += 1;
        }
        if t_next > spec.t_max {
            break;
        }
        t = t_next;
        let u = rng.random::<f64>() * total;
        if u < pair_total {
            let r = u / pair_bound;
            let idx = (r as usize).min(lat.active.len() - 1);
            let frac = r - idx as f64;
            let p = lat.active[idx] as usize;
            let sigma = lat.state(p);
            let d_now = match prep {
                Some(pt) if drive_h || !matches!(pt.exchange, ExchangeTilt::Zero) => pt.exchange.d(p, t),
                _ => 0.0,
            };
            if drive_h {
                let ratio = match &static_accept {
                    Some((ap, am)) => {
                        if sigma > 0 {
                            ap[p]
                        } else {
                            am[p]
                        }
                    }
                    None => (sigma as f64 * d_now - prep.map_or(0.0, |pt| pt.d_bound)).exp(),
                };
                if !(ratio <= 1.0 + 1e-9) {
                    return Err(Error::RateBound(format!("exchange acceptance ratio {ratio} at t = {t}")));
                }
                if frac >= ratio {
                    rejected += 1;
                    continue;
                }
            }
            let (changes, k) = lat.exchange(p);
            if let Some(acc) = xacc.as_mut() {
                x_jump += sigma as f64 * d_now;
                acc.apply(t, &changes[..k], &lat);
            }
            exchange_count += 1;
            if let Some(ev) = events.as_mut() {
                ev.push(Event {
                    t,
                    kind: EventKind::Exchange(p as u32),
                });
            }
            let q = lat.right(p);
            if window_mask[(p + n - x) % n] || window_mask[(q + n - x) % n] {
                if let Some(w) = wacc.as_mut() {
                    w.advance(t, cp, cm);
                }
                (cp, cm) = rates.rates_at_index(rates.window_index(&lat.occ, x));
            }
        } else {
            let w = u - pair_total;
            let (z, frac): (i8, f64) = if w >= plus_total && minus_total > 0.0 {
                (-1, (w - plus_total) / minus_total)
            } else {
                (1, (w / plus_total).min(1.0))
            };
            if drive_a {
                let a_now = prep.map_or(0.0, |pt| pt.walker.a(t));
                let ratio = (z as f64 * a_now - prep.map_or(0.0, |pt| pt.a_bound)).exp();
                if !(ratio <= 1.0 + 1e-9) {
                    return Err(Error::RateBound(format!("walker acceptance ratio {ratio} at t = {t}")));
                }
                if frac >= ratio {
                    rejected += 1;
                    continue;
                }
            }
            if let (Some(wa), Some(pt)) = (wacc.as_mut(), prep) {
                wa.advance(t, cp, cm);
                wa.jump += z as f64 * pt.walker.a(t);
            }
            if z > 0 {
                n_plus += 1;
                x = if x + 1 == n { 0 } else { x + 1 };
            } else {
                n_minus += 1;
                x = if x == 0 { n - 1 } else { x - 1 };
            }
            walk_events.push((t, z));
            if let Some(ev) = events.as_mut() {
                ev.push(Event {
                    t,
                    kind: EventKind::Walk(z),
                });
            }
            (cp, cm) = rates.rates_at_index(rates.window_index(&lat.occ, x));
        }
    }

    let mut acc = TiltAccumulators::default();
    if let Some(pt) = prep {
        let t_end = spec.t_max;
        let w = wacc.as_mut().expect("walker accumulator");
        w.advance(t_end, cp, cm);
        let (c_lin, c_psi) = xacc.as_mut().expect("exchange accumulator").finish(t_end, &lat);
        acc.log_init = init.log_rn / nf;
        acc.log_ma = (w.jump - w.comp) / nf;
        acc.log_mh = (x_jump - lam * (c_lin + c_psi)) / nf;
        acc.q_term = lam * c_psi / nf;
        acc.quad_error = pt.quad_error;
    }

    let trajectory = Trajectory {
        n,
        t_max: spec.t_max,
        initial,
        final_config: Configuration::from_raw(lat.occ),
        n_plus,
        n_minus,
        walk_events,
        events,
        snapshots,
        exchange_count,
        rejected,
    };
    Ok(Outcome {
        trajectory,
        tilt: acc,
    })
}
