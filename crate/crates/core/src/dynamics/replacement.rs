//! Replacement of a local function by its mean-field value along a path.

use crate::dynamics::trajectory::{EventKind, Trajectory};
use crate::error::{Error, Result};
use crate::model::velocity::{grand_canonical_polynomial, Polynomial};
use crate::model::LocalFunction;

/// Weights `w_z` with `block average = sum_z xi(z) w_z` for the window `(0, eps]`.
pub fn block_weights(n: usize, eps: f64) -> Vec<f64> {
    let nf = n as f64;
    let mut w = Vec::new();
    let mut z = 0usize;
    loop {
        let c = z as f64 / nf;
        let lo = (c - 1.0 / nf).max(0.0);
        let hi = (c + 1.0 / nf).min(eps);
        if lo >= eps {
            break;
        }
        // integral of the tent over [lo, hi], split at its peak
        let tent_int = |a: f64, b: f64| -> f64 {
            let f = |y: f64| (1.0 - nf * (y - c).abs()).max(0.0);
            let mut s = 0.0;
            for (p, q) in [(a, b.min(c)), (a.max(c), b)] {
                if q > p {
                    s += 0.5 * (q - p) * (f(p) + f(q));
                }
            }
            s
        };
        w.push(tent_int(lo, hi) / eps);
        z += 1;
        if z >= n {
            break;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

struct View<'a> {
    f: &'a LocalFunction,
    fbar: Polynomial,
    weights: Vec<f64>,
    n: usize,
}

impl View<'_> {
    fn integrand(&self, occ: &[u8], x: usize) -> f64 {
        let block: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(z, w)| occ[(x + z) % self.n] as f64 * w)
            .sum();
        self.f.eval(occ, x) - self.fbar.eval(block)
    }
}

/// `integral_0^t { f(xi_s) - f_bar(block average of xi_s over (0, eps]) } ds`.
pub fn replacement_error(traj: &Trajectory, f: &LocalFunction, eps: f64, t: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("block size must lie in (0, 1/2), got {eps}")));
    }
    let log = traj.events().ok_or(Error::MissingEventLog)?;
    let n = traj.n();
    let view = View {
        f,
        fbar: grand_canonical_polynomial(f),
        weights: block_weights(n, eps),
        n,
    };
    let lattice = traj.lattice();
    let mut mask = vec![false; n];
    for z in 0..view.weights.len() {
        mask[z % n] = true;
    }
    for &off in f.support() {
        mask[off.rem_euclid(n as i64) as usize] = true;
    }

    let t_end = t.min(traj.t_max());
    let mut occ = traj.initial().as_slice().to_vec();
    let mut x = 0usize;
    let mut value = view.integrand(&occ, x);
    let mut last = 0.0;
    let mut total = 0.0;
    for e in log.iter().take_while(|e| e.t <= t_end) {
        match e.kind {
            EventKind::Exchange(p) => {
                let (a, b) = lattice.pair(p as usize);
                occ.swap(a, b);
                if !(mask[(a + n - x) % n] || mask[(b + n - x) % n]) {
                    continue;
                }
            }
            EventKind::Walk(z) => {
                x = (x as i64 + z as i64).rem_euclid(n as i64) as usize;
            }
        }
        total += value * (e.t - last);
        last = e.t;
        value = view.integrand(&occ, x);
    }
    total += value * (t_end - last);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_match_integral() {
        let w = block_weights(10, 0.25);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // constant density: block average equals the density
        let pi = |z: usize| if z % 2 == 0 { 1.0 } else { 0.0 };
        let direct: f64 = w.iter().enumerate().map(|(z, v)| pi(z) * v).sum();
        // exact (1/eps) integral over (0, 0.25] of the tent interpolant of 1,0,1,0,...
        let interp = |y: f64| {
            let s = y * 10.0;
            let k = s.floor();
            let fr = s - k;
            let a = pi(k as usize);
            let b = pi(k as usize + 1);
            a + fr * (b - a)
        };
        let reference = crate::quad::composite_gauss8(interp, 0.0, 0.2, 2)
            + crate::quad::gauss8(interp, 0.2, 0.25);
        assert!((direct - reference / 0.25).abs() < 1e-12);
    }
}
