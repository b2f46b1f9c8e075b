//! Small statistics helpers used by tests and the experiment harness.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let count = xs.len();
        if count == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            count,
        }
    }

    /// `|mean - reference| <= max(atol, z * stderr)`.
    pub fn agrees_with(&self, reference: f64, z: f64, atol: f64) -> bool {
        (self.mean - reference).abs() <= atol.max(z * self.stderr)
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
