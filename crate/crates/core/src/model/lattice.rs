use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The discrete circle with `n` sites at coordinates `i / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusLattice {
    n: usize,
}

impl TorusLattice {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Lattice(format!("need at least 2 sites, got {n}")));
        }
        Ok(TorusLattice { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Continuous coordinate of site `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Canonical covering of the circle by the integers.
    #[inline]
    pub fn cover(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Number of unordered nearest-neighbour pairs (`n`, except `1` when `n = 2`).
    #[inline]
    pub fn pair_count(&self) -> usize {
        if self.n == 2 {
            1
        } else {
            self.n
        }
    }

    /// Sites of pair `p`: `(p, p + 1 mod n)`.
    #[inline]
    pub fn pair(&self, p: usize) -> (usize, usize) {
        (p, if p + 1 == self.n { 0 } else { p + 1 })
    }

    pub fn are_neighbors(&self, x: usize, y: usize) -> bool {
        let d = (x as i64 - y as i64).rem_euclid(self.n as i64) as usize;
        x != y && (d == 1 || d == self.n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_lattice() {
        assert!(TorusLattice::new(1).is_err());
        assert!(TorusLattice::new(2).is_ok());
    }

    #[test]
    fn covering_and_neighbours() {
        let l = TorusLattice::new(5).unwrap();
        assert_eq!(l.cover(0), 0);
        assert_eq!(l.cover(-1), 4);
        assert_eq!(l.cover(12), 2);
        assert!(l.are_neighbors(0, 4));
        assert!(l.are_neighbors(2, 3));
        assert!(!l.are_neighbors(1, 3));
        assert_eq!(l.pair(4), (4, 0));
        assert_eq!(TorusLattice::new(2).unwrap().pair_count(), 1);
    }
}
