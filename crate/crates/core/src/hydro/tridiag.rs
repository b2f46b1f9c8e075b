//! Cyclic tridiagonal solves for constant-coefficient periodic systems.

use crate::error::{Error, Result};

/// Factorization of the circulant system `diag * u_i + off * (u_{i-1} + u_{i+1}) = b_i`
/// (Thomas algorithm plus a Sherman-Morrison correction for the corners).
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    off: f64,
    gamma: f64,
    // modified upper coefficients and inverse pivots of the non-cyclic part
    cp: Vec<f64>,
    inv: Vec<f64>,
    z: Vec<f64>,
    z_factor: f64,
}

impl CyclicTridiagonal {
    pub fn new(m: usize, diag: f64, off: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidArgument(format!("cyclic system needs at least 3 unknowns, got {m}")));
        }
        if !(diag.abs() > 2.0 * off.abs()) {
            return Err(Error::InvalidArgument("cyclic system must be strictly diagonally dominant".into()));
        }
        let gamma = -diag;
        let mut d = vec![diag; m];
        d[0] -= gamma;
        d[m - 1] -= off * off / gamma;
        let mut cp = vec![0.0; m];
        let mut inv = vec![0.0; m];
        inv[0] = 1.0 / d[0];
        cp[0] = off * inv[0];
        for i in 1..m {
            inv[i] = 1.0 / (d[i] - off * cp[i - 1]);
            cp[i] = off * inv[i];
        }
        let mut s = CyclicTridiagonal {
            off,
            gamma,
            cp,
            inv,
            z: Vec::new(),
            z_factor: 0.0,
        };
        let mut u = vec![0.0; m];
        u[0] = gamma;
        u[m - 1] = off;
        s.thomas(&mut u);
        s.z_factor = 1.0 + u[0] + off * u[m - 1] / gamma;
        s.z = u;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.inv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv.is_empty()
    }

    fn thomas(&self, x: &mut [f64]) {
        let m = x.len();
        x[0] *= self.inv[0];
        for i in 1..m {
            x[i] = (x[i] - self.off * x[i - 1]) * self.inv[i];
        }
        for i in (0..m - 1).rev() {
            x[i] -= self.cp[i] * x[i + 1];
        }
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.len(), "right-hand side length");
        self.thomas(b);
        let m = b.len();
        let fact = (b[0] + self.off * b[m - 1] / self.gamma) / self.z_factor;
        for (x, z) in b.iter_mut().zip(&self.z) {
            *x -= fact * z;
        }
    }
}
