//! All rate-function components for one path, with optimizer artifacts.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::PathField;
use crate::ldp::entropy::initial_entropy;
use crate::ldp::exclusion::{i_ex, BasisSpec};
use crate::ldp::walker::{i_rw, j_walker, FinitenessFlags, WalkerPath, AC_TOLERANCE, TOL_ZERO};
use crate::model::{DensityProfile, Diffusion, LocalRate};
use crate::testfn::{TestFunctionH, TimeFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub h: f64,
    /// `sup_H J(H; pi)` over the basis.
    pub j_exclusion: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub i_ex: f64,
    /// `j(a; pi, x)` for the supplied tilt, or `I_rw` when none is given.
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub j_walker: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub i_rw: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub total: f64,
    pub theta: TestFunctionH,
    #[serde(with = "crate::serde_ext::ext_vec")]
    pub a_samples: Vec<f64>,
    pub flags: FinitenessFlags,
    pub basis: BasisSpec,
    pub null_residual: f64,
    pub tol_zero: f64,
    pub ac_tolerance: f64,
}

/// Evaluates `h`, `J`, `I_ex`, `j` and `I_rw` for the path `(pi, x)`.
pub fn rate_breakdown(
    pi: &PathField,
    x: &WalkerPath,
    u0: &DensityProfile,
    rates: &LocalRate,
    tilt: Option<&TimeFunction>,
    basis: BasisSpec,
    diffusion: Diffusion,
) -> Result<RateBreakdown> {
    let ex = i_ex(pi, u0, basis, diffusion)?;
    let rw = i_rw(x, pi, rates);
    let jw = match tilt {
        Some(a) => j_walker(a, x, pi, rates),
        None => rw.value,
    };
    Ok(RateBreakdown {
        h: initial_entropy(&pi.frames[0], u0),
        j_exclusion: ex.sup_j,
        i_ex: ex.value,
        j_walker: jw,
        i_rw: rw.value,
        total: ex.value + rw.value,
        theta: ex.theta,
        a_samples: rw.a,
        flags: rw.flags,
        basis,
        null_residual: ex.null_residual,
        tol_zero: TOL_ZERO,
        ac_tolerance: AC_TOLERANCE,
    })
}
