//! The exclusion functional `J(H; pi)` and `I_ex(pi) = h + sup_H J`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FourierMoments, PathField};
use crate::ldp::entropy::initial_entropy;
use crate::model::profile::periodic_breakpoints;
use crate::model::{DensityProfile, Diffusion};
use crate::quad::gauss8_nodes;
use crate::testfn::{chebyshev, mode_eval, mode_frequency, TestFunctionH};

/// Size of the tensor basis: spatial modes up to `k_max`, Chebyshev degree up to `degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub k_max: usize,
    pub degree: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec { k_max: 8, degree: 6 }
    }
}

// per-frame data: Fourier moments of pi and quadrature nodes carrying chi = pi (1 - pi)
struct Frame {
    // m[s] = integral pi * phi_s, s = 0..=2K
    m: Vec<f64>,
    nodes: Vec<(f64, f64)>,
}

fn frame_data(p: &DensityProfile, k_max: usize) -> Frame {
    let mom = p.moments(k_max);
    let mut m = vec![mom[0].0];
    for &(c, s) in &mom[1..] {
        m.push(c);
        m.push(s);
    }
    let pts = periodic_breakpoints(p.knot_positions(), 0.0, 1.0);
    let max_width = 1.0 / (4.0 * (k_max.max(1)) as f64);
    let mut nodes = Vec::new();
    for w in pts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for i in 0..pieces {
            let a = w[0] + h * i as f64;
            for (x, wt) in gauss8_nodes(a, a + h) {
                let v = p.eval(x);
                let chi = v * (1.0 - v);
                if chi > 0.0 {
                    nodes.push((x, wt * chi));
                }
            }
        }
    }
    Frame { m, nodes }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; times.len()];
    for j in 1..times.len() {
        let dt = times[j] - times[j - 1];
        w[j - 1] += 0.5 * dt;
        w[j] += 0.5 * dt;
    }
    w
}

fn tau(t: f64, t_max: f64) -> f64 {
    (2.0 * t / t_max - 1.0).clamp(-1.0, 1.0)
}

/// `pi_T(H_T) - pi_0(H_0) - integral pi_t(d_t H + D Lap H) dt - D integral integral (d_x H)^2 pi (1 - pi)`.
///
/// Spatial integrals against `pi` are exact on the piecewise-linear frames;
/// time integrals use the trapezoid rule over the frame times.
pub fn j_exclusion(h: &TestFunctionH, pi: &PathField, diffusion: Diffusion) -> f64 {
    let d = diffusion.value();
    let k_max = h.k_max();
    let times = &pi.times;
    let tw = trapezoid_weights(times);
    let last = times.len() - 1;
    let mut total = 0.0;
    for (j, (&t, frame)) in times.iter().zip(&pi.frames).enumerate() {
        let fd = frame_data(frame, k_max);
        let (c, dc) = h.spatial_coeffs(t);
        let mut pairing_t = 0.0;
        let mut pairing = 0.0;
        for s in 0..c.len() {
            let w = std::f64::consts::TAU * mode_frequency(s) as f64;
            pairing_t += dc[s] * fd.m[s];
            pairing += c[s] * fd.m[s];
            pairing_t += d * c[s] * (-w * w) * fd.m[s];
        }
        let mut quad = 0.0;
        for &(x, wchi) in &fd.nodes {
            let grad: f64 = c.iter().enumerate().map(|(s, cs)| cs * mode_eval(s, x).1).sum();
            quad += wchi * grad * grad;
        }
        total -= tw[j] * (pairing_t + d * quad);
        if j == 0 {
            total -= pairing;
        }
        if j == last {
            total += pairing;
        }
    }
    total
}

/// Result of the quadratic maximization behind `I_ex`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IexResult {
    /// `h(pi_0 | u0) + sup_H J(H; pi)`.
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub h: f64,
    pub sup_j: f64,
    /// The maximizer `theta* = A^+ b / 2`.
    pub theta: TestFunctionH,
    /// Norm of the part of `b` in the numerical null space of `A` (ignored by the pseudo-inverse).
    pub null_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Linear part `b` and quadratic form `A` with `J(theta) = b.theta - theta' A theta`.
pub fn assemble(pi: &PathField, spec: BasisSpec, diffusion: Diffusion) -> (DVector<f64>, DMatrix<f64>) {
    let d = diffusion.value();
    let k = spec.k_max;
    let sl = 2 * k + 1;
    let nspat = 2 * k;
    let dim = (spec.degree + 1) * nspat;
    let t_max = pi.horizon();
    let times = &pi.times;
    let tw = trapezoid_weights(times);
    let last = times.len() - 1;
    let mut b = DVector::zeros(dim);
    let mut a = DMatrix::zeros(dim, dim);
    let idx = |j: usize, s: usize| j * nspat + (s - 1);
    let mut grads = vec![0.0; nspat];
    let mut spatial = DMatrix::<f64>::zeros(nspat, nspat);
    for (jf, (&t, frame)) in times.iter().zip(&pi.frames).enumerate() {
        let fd = frame_data(frame, k);
        let (tj, dj) = chebyshev(spec.degree, tau(t, t_max));
        let scale = 2.0 / t_max;
        for jt in 0..=spec.degree {
            for s in 1..sl {
                let w = std::f64::consts::TAU * mode_frequency(s) as f64;
                let ms = fd.m[s];
                let mut v = -tw[jf] * (dj[jt] * scale * ms - d * w * w * tj[jt] * ms);
                if jf == 0 {
                    v -= tj[jt] * ms;
                }
                if jf == last {
                    v += tj[jt] * ms;
                }
                b[idx(jt, s)] += v;
            }
        }
        spatial.fill(0.0);
        for &(x, wchi) in &fd.nodes {
            for s in 1..sl {
                grads[s - 1] = mode_eval(s, x).1;
            }
            for p in 0..nspat {
                let gp = wchi * grads[p];
                for q in p..nspat {
                    spatial[(p, q)] += gp * grads[q];
                }
            }
        }
        for p in 0..nspat {
            for q in 0..p {
                spatial[(p, q)] = spatial[(q, p)];
            }
        }
        for j1 in 0..=spec.degree {
            for j2 in 0..=spec.degree {
                let tt = d * tw[jf] * tj[j1] * tj[j2];
                if tt == 0.0 {
                    continue;
                }
                for p in 0..nspat {
                    for q in 0..nspat {
                        a[(j1 * nspat + p, j2 * nspat + q)] += tt * spatial[(p, q)];
                    }
                }
            }
        }
    }
    (b, a)
}

/// Maps a basis vector back to a test function.
pub fn theta_to_h(theta: &DVector<f64>, spec: BasisSpec, t_max: f64) -> TestFunctionH {
    let nspat = 2 * spec.k_max;
    let sl = nspat + 1;
    let mut coeffs = vec![0.0; (spec.degree + 1) * sl];
    for j in 0..=spec.degree {
        for s in 1..sl {
            coeffs[j * sl + s] = theta[j * nspat + s - 1];
        }
    }
    TestFunctionH::new(spec.k_max, spec.degree, t_max, coeffs).expect("consistent basis size")
}

/// `I_ex(pi) = h(pi_0 | u0) + sup_theta J(H_theta; pi)` over the tensor basis.
///
/// `h` here is the cost of the initial frame under the local equilibrium of
/// `u0` (see [`initial_entropy`]).
pub fn i_ex(pi: &PathField, u0: &DensityProfile, spec: BasisSpec, diffusion: Diffusion) -> Result<IexResult> {
    let h = initial_entropy(&pi.frames[0], u0);
    let (b, a) = assemble(pi, spec, diffusion);
    let eig = SymmetricEigen::new(a);
    let max_eigenvalue = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -1e-10 * max_eigenvalue.max(1.0) {
        return Err(Error::Indefinite { min_eigenvalue });
    }
    let cutoff = 1e-12 * max_eigenvalue.max(1e-300);
    let mut theta = DVector::zeros(b.len());
    let mut sup = 0.0;
    let mut null2 = 0.0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let proj = v.dot(&b);
        if lam > cutoff {
            sup += 0.25 * proj * proj / lam;
            theta += v * (0.5 * proj / lam);
        } else {
            null2 += proj * proj;
        }
    }
    Ok(IexResult {
        value: h + sup,
        h,
        sup_j: sup,
        theta: theta_to_h(&theta, spec, pi.horizon()),
        null_residual: null2.sqrt(),
        min_eigenvalue,
        max_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::{solve_heat, SpaceTimeGrid};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn constant_field(rho: f64, t_max: f64, frames: usize) -> PathField {
        let times: Vec<f64> = (0..=frames).map(|j| t_max * j as f64 / frames as f64).collect();
        let f = DensityProfile::constant(rho).unwrap();
        PathField::density_only(times.clone(), vec![f; times.len()]).unwrap()
    }

    #[test]
    fn constant_h_and_constant_field() {
        let mut h = TestFunctionH::zeros(2, 1, 1.0);
        let pi = constant_field(0.3, 1.0, 10);
        assert_eq!(j_exclusion(&h, &pi, Diffusion::ONE), 0.0);
        // a space-constant H changing in time against a mass-conserving field
        let mut c = h.coeffs().to_vec();
        c[0] = 1.0;
        c[5] = 0.7;
        h = TestFunctionH::new(2, 1, 1.0, c).unwrap();
        assert!(j_exclusion(&h, &pi, Diffusion::ONE).abs() < 1e-14);
    }

    #[test]
    fn cosine_tilt_on_half_field() {
        let theta = 0.4;
        let t_max = 2.0;
        let pi = constant_field(0.5, t_max, 8);
        let h = TestFunctionH::cosine(1, theta, t_max);
        for d in [Diffusion::ONE, Diffusion::TWO] {
            let expected = -d.value() * theta * theta * PI * PI * t_max / 2.0;
            assert!((j_exclusion(&h, &pi, d) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_form_matches_direct_evaluation() {
        let grid = SpaceTimeGrid::new(32, 0.1, 10).unwrap();
        let u0 = DensityProfile::cosine(0.5, 0.3, 1, 32).unwrap();
        let pi = solve_heat(&u0, Diffusion::ONE, &grid).unwrap();
        let spec = BasisSpec { k_max: 2, degree: 2 };
        let (b, a) = assemble(&pi, spec, Diffusion::ONE);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let theta = DVector::from_fn(b.len(), |_, _| rng.random_range(-1.0..1.0));
            let quad = theta.dot(&(&a * &theta));
            assert!(quad >= -1e-12);
            let via_form = b.dot(&theta) - quad;
            let direct = j_exclusion(&theta_to_h(&theta, spec, 0.1), &pi, Diffusion::ONE);
            assert!((via_form - direct).abs() < 1e-10, "{via_form} {direct}");
        }
        assert!((&a - a.transpose()).abs().max() < 1e-14);
    }

    #[test]
    fn heat_solution_costs_nothing() {
        let grid = SpaceTimeGrid::new(128, 0.2, 100).unwrap();
        let u0 = DensityProfile::cosine(0.5, 0.25, 1, 128).unwrap();
        let pi = solve_heat(&u0, Diffusion::ONE, &grid).unwrap();
        let r = i_ex(&pi, &u0, BasisSpec { k_max: 4, degree: 4 }, Diffusion::ONE).unwrap();
        assert!(r.value.abs() < 1e-3, "{r:?}");
        assert_eq!(r.h, 0.0);
        let c = constant_field(0.3, 1.0, 10);
        let rc = i_ex(&c, &DensityProfile::constant(0.3).unwrap(), BasisSpec::default(), Diffusion::ONE).unwrap();
        assert!(rc.value.abs() < 1e-12);
    }

    #[test]
    fn larger_basis_never_decreases() {
        let grid = SpaceTimeGrid::new(64, 0.2, 40).unwrap();
        // a field that is not a heat solution: heat flow run at double speed
        let u0 = DensityProfile::cosine(0.5, 0.25, 1, 64).unwrap();
        let fast = solve_heat(&u0, Diffusion::TWO, &grid).unwrap();
        let mut prev = 0.0;
        for (k, p) in [(1, 0), (1, 2), (2, 2), (3, 4)] {
            let r = i_ex(&fast, &u0, BasisSpec { k_max: k, degree: p }, Diffusion::ONE).unwrap();
            assert!(r.value >= prev - 1e-9, "{k} {p}: {} < {prev}", r.value);
            prev = r.value;
        }
        assert!(prev > 1e-3);
    }
}
