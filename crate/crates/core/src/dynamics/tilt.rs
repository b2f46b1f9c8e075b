//! Perturbation triple `(v0, H, a)` and its lattice-level precomputation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{DensityProfile, Diffusion, TorusLattice};
use crate::quad::Antiderivative;
use crate::testfn::{fejer_factor, mode_eval, mode_frequency, to_tau, TestFunctionH, TimeFunction};

/// The triple `(v0, H, a)` defining the perturbed dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltParams {
    pub v0: DensityProfile,
    pub h: TestFunctionH,
    pub a: TimeFunction,
}

impl TiltParams {
    pub fn new(v0: DensityProfile, h: TestFunctionH, a: TimeFunction) -> Self {
        TiltParams { v0, h, a }
    }

    /// `H = 0`, `a = 0`, `v0 = u0`.
    pub fn null(u0: &DensityProfile, t_max: f64) -> Self {
        TiltParams {
            v0: u0.clone(),
            h: TestFunctionH::zero(t_max),
            a: TimeFunction::zero(),
        }
    }

    pub fn is_null_for(&self, u0: &DensityProfile) -> bool {
        self.h.is_zero() && self.a.is_zero() && &self.v0 == u0
    }

    /// Stable 64-bit hash of the serialized triple.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_vec(self).expect("tilt serializes");
        let digest = Sha256::digest(&json);
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }
}


pub(crate) enum WalkerTilt {
    Constant { a: f64, gp: f64, gm: f64 },
    Varying {
        a: TimeFunction,
        // antiderivatives of e^{a} - 1 and e^{-a} - 1
        gp: Antiderivative,
        gm: Antiderivative,
    },
}

impl WalkerTilt {
    #[inline]
    pub(crate) fn a(&self, t: f64) -> f64 {
        match self {
            WalkerTilt::Constant { a, .. } => *a,
            WalkerTilt::Varying { a, .. } => a.value(t),
        }
    }

    /// `(integral of e^{a} - 1, integral of e^{-a} - 1)` over `[t0, t1]`.
    #[inline]
    pub(crate) fn compensator(&self, t0: f64, t1: f64) -> (f64, f64) {
        match self {
            WalkerTilt::Constant { gp, gm, .. } => (gp * (t1 - t0), gm * (t1 - t0)),
            WalkerTilt::Varying { gp, gm, .. } => (gp.integral(t0, t1), gm.integral(t0, t1)),
        }
    }
}

pub(crate) struct PairIntegrals {
    // antiderivative of d_p(t)
    pub(crate) lin: Antiderivative,
    // [sigma = +1, sigma = -1] antiderivatives of e^{sigma d_p(t)} - 1
    pub(crate) exp: [Antiderivative; 2],
}

pub(crate) enum ExchangeTilt {
    Zero,
    Static {
        // d_p = tilde H(p + 1) - tilde H(p)
        d: Vec<f64>,
    },
    Varying {
        // d_p(t) = sum_j cheb[p * (degree + 1) + j] T_j(tau(t))
        cheb: Vec<f64>,
        degree: usize,
        t_max: f64,
        pairs: Vec<PairIntegrals>,
    },
}

impl ExchangeTilt {
    /// `d_p(t)`.
    #[inline]
    pub(crate) fn d(&self, p: usize, t: f64) -> f64 {
        match self {
            ExchangeTilt::Zero => 0.0,
            ExchangeTilt::Static { d } => d[p],
            ExchangeTilt::Varying {
                cheb, degree, t_max, ..
            } => {
                let row = &cheb[p * (degree + 1)..(p + 1) * (degree + 1)];
                clenshaw(row, to_tau(t, *t_max))
            }
        }
    }
}

/// Lattice-level data for one tilt, shared by all replicas at that size.
pub struct PreparedTilt {
    pub(crate) n: usize,
    pub(crate) t_max: f64,
    pub(crate) walker: WalkerTilt,
    pub(crate) exchange: ExchangeTilt,
    /// `sup_{t,p} |d_p(t)|` bound used for thinning.
    pub(crate) d_bound: f64,
    pub(crate) a_bound: f64,
    pub(crate) quad_error: f64,
    params: TiltParams,
}

impl std::fmt::Debug for PreparedTilt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreparedTilt")
            .field("n", &self.n)
            .field("t_max", &self.t_max)
            .field("d_bound", &self.d_bound)
            .field("a_bound", &self.a_bound)
            .finish()
    }
}

/// `n * integral delta_x^n(y) phi_s(y) dy` for every site.
pub fn smoothed_mode(s: usize, n: usize) -> Vec<f64> {
    let f = fejer_factor(mode_frequency(s), n);
    (0..n).map(|x| f * mode_eval(s, x as f64 / n as f64).0).collect()
}

/// `tilde H(t, x) = n * integral delta_x^n H(t, .)` at every site.
pub fn smoothed_h(h: &TestFunctionH, n: usize, t: f64) -> Vec<f64> {
    let (c, _) = h.spatial_coeffs(t);
    let mut out = vec![0.0; n];
    for (s, cs) in c.iter().enumerate() {
        if *cs == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(smoothed_mode(s, n)) {
            *o += cs * v;
        }
    }
    out
}

impl PreparedTilt {
    pub fn new(params: &TiltParams, lattice: &TorusLattice, t_max: f64, quad_tolerance: f64) -> Result<Self> {
        let n = lattice.n();
        let pairs = lattice.pair_count();
        let mut quad_error: f64 = 0.0;

        let a_bound = params.a.sup_abs();
        if !a_bound.is_finite() {
            return Err(Error::RateBound("walker tilt is not bounded".into()));
        }
        let walker = if params.a.is_constant() {
            let a = params.a.value(0.0);
            WalkerTilt::Constant {
                a,
                gp: a.exp_m1(),
                gm: (-a).exp_m1(),
            }
        } else {
            let gp = Antiderivative::with_tolerance(
                |t: f64| params.a.value(t).exp_m1(),
                0.0,
                t_max,
                quad_tolerance,
            )?;
            let gm = Antiderivative::with_tolerance(
                |t: f64| (-params.a.value(t)).exp_m1(),
                0.0,
                t_max,
                quad_tolerance,
            )?;
            quad_error = quad_error.max(gp.error_per_unit_time()).max(gm.error_per_unit_time());
            WalkerTilt::Varying {
                a: params.a.clone(),
                gp,
                gm,
            }
        };

        let h = &params.h;
        let spatial = h.spatial_len();
        let mut dphi = vec![0.0; pairs * spatial];
        let mut d_bound = 0.0;
        let bounds = h.mode_bounds();
        for (s, bound) in bounds.iter().enumerate() {
            if *bound == 0.0 {
                continue;
            }
            let phi = smoothed_mode(s, n);
            let mut max_diff: f64 = 0.0;
            for p in 0..pairs {
                let (x, y) = lattice.pair(p);
                let diff = phi[y] - phi[x];
                dphi[p * spatial + s] = diff;
                max_diff = max_diff.max(diff.abs());
            }
            d_bound += bound * max_diff;
        }
        if !d_bound.is_finite() {
            return Err(Error::RateBound("exchange tilt is not bounded".into()));
        }

        let exchange = if h.is_zero() {
            ExchangeTilt::Zero
        } else if h.time_degree() == 0 {
            let (c, _) = h.spatial_coeffs(0.0);
            let d = (0..pairs)
                .map(|p| (0..spatial).map(|s| c[s] * dphi[p * spatial + s]).sum())
                .collect();
            ExchangeTilt::Static { d }
        } else {
            let degree = h.degree();
            let theta = h.coeffs();
            let mut cheb = vec![0.0; pairs * (degree + 1)];
            for p in 0..pairs {
                let row = &dphi[p * spatial..(p + 1) * spatial];
                for j in 0..=degree {
                    cheb[p * (degree + 1) + j] =
                        row.iter().zip(&theta[j * spatial..(j + 1) * spatial]).map(|(a, b)| a * b).sum();
                }
            }
            let d = |p: usize, t: f64| clenshaw(&cheb[p * (degree + 1)..(p + 1) * (degree + 1)], to_tau(t, t_max));
            let mut pair_ints = Vec::with_capacity(pairs);
            for p in 0..pairs {
                let lin = Antiderivative::with_tolerance(|t| d(p, t), 0.0, t_max, quad_tolerance)?;
                let plus = Antiderivative::with_tolerance(|t| d(p, t).exp_m1(), 0.0, t_max, quad_tolerance)?;
                let minus = Antiderivative::with_tolerance(|t| (-d(p, t)).exp_m1(), 0.0, t_max, quad_tolerance)?;
                quad_error = quad_error
                    .max(lin.error_per_unit_time())
                    .max(plus.error_per_unit_time())
                    .max(minus.error_per_unit_time());
                pair_ints.push(PairIntegrals {
                    lin,
                    exp: [plus, minus],
                });
            }
            ExchangeTilt::Varying {
                cheb,
                degree,
                t_max,
                pairs: pair_ints,
            }
        };

        Ok(PreparedTilt {
            n,
            t_max,
            walker,
            exchange,
            d_bound,
            a_bound,
            quad_error,
            params: params.clone(),
        })
    }

    pub fn params(&self) -> &TiltParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Candidate rate bound per exchange pair, relative to `D n^2`.
    pub fn pair_bound_factor(&self) -> f64 {
        self.d_bound.exp()
    }

    /// Quadrature error per unit time of the precomputed integrals.
    pub fn quad_error(&self) -> f64 {
        self.quad_error
    }

    /// Total bound rate `D n^2 #pairs e^b + n e^{sup|a|} c_max` from the
    /// scheduling notes, for reporting.
    pub fn documented_bound(&self, lattice: &TorusLattice, diffusion: Diffusion, c_max: f64) -> f64 {
        let n = lattice.n() as f64;
        diffusion.value() * n * n * lattice.pair_count() as f64 * self.d_bound.exp()
            + n * self.a_bound.exp() * c_max
    }
}


/// `sum_j c_j T_j(tau)` by Clenshaw's recurrence.
#[inline]
fn clenshaw(c: &[f64], tau: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &cj in c[1..].iter().rev() {
        let b = 2.0 * tau * b1 - b2 + cj;
        b2 = b1;
        b1 = b;
    }
    tau * b1 - b2 + c[0]
}
