//! Upper bound for the contracted walker rate `I(x) = inf_pi { I_rw(x | pi) + I_ex(pi) }`.

use serde::{Deserialize, Serialize};

use crate::dynamics::TiltParams;
use crate::error::{Error, Result};
use crate::hydro::{solve_perturbed, HydroSolution, SpaceTimeGrid};
use crate::ldp::entropy::initial_entropy;
use crate::ldp::walker::{i_rw, WalkerPath};
use crate::model::{DensityProfile, Diffusion, LocalRate};
use crate::quad::trapezoid;
use crate::testfn::{TestFunctionH, TimeFunction};

/// The candidate environments: initial profiles times a family of static tilts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractConfig {
    /// Constant initial densities to try besides `u0` itself.
    pub densities: Vec<f64>,
    /// Static tilts `amp * cos(2 pi k x)` and `amp * sin(2 pi k x)` as `(k, amp)`.
    pub tilts: Vec<(usize, f64)>,
    pub grid: SpaceTimeGrid,
}

impl ContractConfig {
    pub fn densities_only(densities: Vec<f64>, grid: SpaceTimeGrid) -> Self {
        ContractConfig {
            densities,
            tilts: Vec::new(),
            grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractCandidate {
    pub v0: DensityProfile,
    pub h: TestFunctionH,
    pub i_rw: f64,
    pub i_ex: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractResult {
    /// Minimum of `I_rw + I_ex` over the sweep; an upper bound on `I(x)`.
    pub value: f64,
    pub best: ContractCandidate,
    pub evaluated: usize,
}

/// `I_ex` of a controlled path: `h(v0 | u0) + D integral integral chi (d_x H)^2`.
pub fn controlled_cost(sol: &HydroSolution, tilt: &TiltParams, u0: &DensityProfile) -> f64 {
    let d = sol.diffusion.value();
    let m = 4 * tilt.h.k_max().max(1) * 16;
    let per_frame: Vec<f64> = sol
        .u
        .times
        .iter()
        .zip(&sol.u.frames)
        .map(|(&t, f)| {
            (0..m)
                .map(|i| {
                    let x = (i as f64 + 0.5) / m as f64;
                    let v = f.eval(x);
                    let g = tilt.h.dx(t, x);
                    v * (1.0 - v) * g * g / m as f64
                })
                .sum()
        })
        .collect();
    initial_entropy(&tilt.v0, u0) + d * trapezoid(&sol.u.times, &per_frame)
}

/// Sweeps the configured controls and returns the cheapest environment for `x`.
pub fn contract_rate(
    x: &WalkerPath,
    u0: &DensityProfile,
    rates: &LocalRate,
    diffusion: Diffusion,
    cfg: &ContractConfig,
) -> Result<ContractResult> {
    let t_max = cfg.grid.t_max;
    let mut starts = vec![u0.clone()];
    for &rho in &cfg.densities {
        starts.push(DensityProfile::constant(rho)?);
    }
    let mut tilts = vec![TestFunctionH::zero(t_max)];
    for &(k, amp) in &cfg.tilts {
        tilts.push(TestFunctionH::cosine(k, amp, t_max));
        tilts.push(TestFunctionH::sine(k, amp, t_max));
    }
    let mut best: Option<ContractCandidate> = None;
    let mut evaluated = 0;
    for v0 in &starts {
        if v0 != u0 && v0.require_interior().is_err() {
            continue;
        }
        for h in &tilts {
            let tilt = TiltParams::new(v0.clone(), h.clone(), TimeFunction::zero());
            let sol = match solve_perturbed(&tilt, rates, diffusion, &cfg.grid) {
                Ok(s) => s,
                Err(Error::Stability(_)) => continue,
                Err(e) => return Err(e),
            };
            evaluated += 1;
            let rw = i_rw(x, &sol.u, rates).value;
            if !rw.is_finite() {
                continue;
            }
            let ex = controlled_cost(&sol, &tilt, u0);
            let cand = ContractCandidate {
                v0: v0.clone(),
                h: h.clone(),
                i_rw: rw,
                i_ex: ex,
            };
            if best.as_ref().is_none_or(|b| rw + ex < b.i_rw + b.i_ex) {
                best = Some(cand);
            }
        }
    }
    let best = best.ok_or(Error::NoFeasibleTilt)?;
    Ok(ContractResult {
        value: best.i_rw + best.i_ex,
        best,
        evaluated,
    })
}
