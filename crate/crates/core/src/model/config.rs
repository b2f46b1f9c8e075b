use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupancy state of the exclusion environment: one 0/1 entry per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    occ: Vec<u8>,
}

impl Configuration {
    pub fn new(occ: Vec<u8>) -> Result<Self> {
        if let Some(bad) = occ.iter().find(|&&v| v > 1) {
            return Err(Error::Configuration(format!("entry {bad} is not 0 or 1")));
        }
        Ok(Configuration { occ })
    }

    pub(crate) fn from_raw(occ: Vec<u8>) -> Self {
        Configuration { occ }
    }

    pub fn zeros(n: usize) -> Self {
        Configuration { occ: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Configuration { occ: vec![1; n] }
    }

    /// Parses a string such as `"0110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let occ = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Configuration(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Configuration { occ })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.occ.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.occ.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.occ[i]
    }

    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.occ
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().map(|&v| v as usize).sum()
    }

    /// Exchanges the occupancies of sites `x` and `y`.
    pub fn swap(&mut self, x: usize, y: usize) {
        self.occ.swap(x, y);
    }

    /// The shifted configuration `z -> eta(z + k)`.
    pub fn shifted(&self, k: i64) -> Configuration {
        let n = self.occ.len() as i64;
        let k = k.rem_euclid(n) as usize;
        let mut occ = Vec::with_capacity(self.occ.len());
        occ.extend_from_slice(&self.occ[k..]);
        occ.extend_from_slice(&self.occ[..k]);
        Configuration { occ }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.occ {
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
