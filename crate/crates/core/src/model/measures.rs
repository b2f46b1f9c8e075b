//! Product Bernoulli, canonical and tilted initial measures.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::config::Configuration;
use crate::model::lattice::TorusLattice;
use crate::model::profile::{tent_average, DensityProfile};

/// Independent occupancies with the given per-site probabilities.
pub fn sample_bernoulli<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Configuration {
    let occ = probs
        .iter()
        .map(|&p| {
            let u: f64 = rng.random();
            (u < p) as u8
        })
        .collect();
    Configuration::from_raw(occ)
}

/// Local-equilibrium product measure with cell-averaged densities.
pub fn sample_product_profile<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    profile: &DensityProfile,
    rng: &mut R,
) -> Configuration {
    sample_bernoulli(&profile.cell_averages(lattice), rng)
}

/// Uniform configuration with exactly `k` particles.
pub fn sample_canonical<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    k: usize,
    rng: &mut R,
) -> Result<Configuration> {
    let n = lattice.n();
    if k > n {
        return Err(Error::ParticleCount { k, n });
    }
    let mut occ = vec![0u8; n];
    for i in index::sample(rng, n, k) {
        occ[i] = 1;
    }
    Ok(Configuration::from_raw(occ))
}

/// A sampled configuration with its log Radon–Nikodym weight.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub config: Configuration,
    /// `log (d nu_tilted / d nu_reference)(config)`; zero when untilted.
    pub log_rn: f64,
}

impl InitialState {
    pub fn untilted(config: Configuration) -> Self {
        InitialState { config, log_rn: 0.0 }
    }
}

/// Product measure that tilts the local equilibrium of `u0` towards `v0`.
#[derive(Debug, Clone)]
pub struct TiltedInitial {
    rho: Vec<f64>,
    v: Vec<f64>,
    log_one: Vec<f64>,
    log_zero: Vec<f64>,
}

impl TiltedInitial {
    pub fn new(lattice: &TorusLattice, u0: &DensityProfile, v0: &DensityProfile) -> Result<Self> {
        u0.require_interior()?;
        v0.require_interior()?;
        let n = lattice.n();
        let rho = u0.cell_averages(lattice);
        let logit_gap = |y: f64| {
            let (u, v) = (u0.eval(y), v0.eval(y));
            (v * (1.0 - u) / (u * (1.0 - v))).ln()
        };
        let same = u0 == v0;
        let mut v = Vec::with_capacity(n);
        for (i, &r) in rho.iter().enumerate() {
            if same {
                v.push(r);
                continue;
            }
            let f = tent_average_pair(u0, v0, n, i, logit_gap);
            let e = f.exp();
            v.push(r * e / (1.0 + r * (e - 1.0)));
        }
        let log_one = rho.iter().zip(&v).map(|(r, p)| (p / r).ln()).collect();
        let log_zero = rho
            .iter()
            .zip(&v)
            .map(|(r, p)| ((1.0 - p) / (1.0 - r)).ln())
            .collect();
        Ok(TiltedInitial {
            rho,
            v,
            log_one,
            log_zero,
        })
    }

    /// Per-site probabilities under the tilted measure.
    pub fn probabilities(&self) -> &[f64] {
        &self.v
    }

    /// Per-site probabilities of the reference local equilibrium.
    pub fn reference_probabilities(&self) -> &[f64] {
        &self.rho
    }

    pub fn log_density(&self, config: &Configuration) -> f64 {
        config
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &b)| if b == 1 { self.log_one[i] } else { self.log_zero[i] })
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> InitialState {
        let config = sample_bernoulli(&self.v, rng);
        let log_rn = self.log_density(&config);
        InitialState { config, log_rn }
    }
}

// tent average split at the knots of both profiles
fn tent_average_pair(
    u0: &DensityProfile,
    v0: &DensityProfile,
    n: usize,
    i: usize,
    g: impl Fn(f64) -> f64,
) -> f64 {
    let mut knots = u0.knot_positions().to_vec();
    knots.extend_from_slice(v0.knot_positions());
    tent_average(&knots, n, i, g)
}

/// `sample_tilted_initial` as a one-shot call.
pub fn sample_tilted_initial<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    u0: &DensityProfile,
    v0: &DensityProfile,
    rng: &mut R,
) -> Result<InitialState> {
    Ok(TiltedInitial::new(lattice, u0, v0)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degenerate_profiles() {
        let l = TorusLattice::new(20).unwrap();
        let mut rng = stream(1, 0);
        let ones = sample_product_profile(&l, &DensityProfile::constant(1.0).unwrap(), &mut rng);
        assert_eq!(ones, Configuration::ones(20));
        let zeros = sample_product_profile(&l, &DensityProfile::constant(0.0).unwrap(), &mut rng);
        assert_eq!(zeros, Configuration::zeros(20));
    }

    #[test]
    fn half_density_concentrates() {
        let l = TorusLattice::new(10_000).unwrap();
        let p = DensityProfile::constant(0.5).unwrap();
        let mut inside = 0;
        for seed in 0..100 {
            let eta = sample_product_profile(&l, &p, &mut stream(seed, 3));
            let mean = eta.particle_count() as f64 / 10_000.0;
            if (mean - 0.5).abs() <= 0.015 {
                inside += 1;
            }
        }
        // each draw is inside with probability ~0.997
        assert!(inside >= 97, "{inside}");
    }

    #[test]
    fn canonical_extremes_and_range() {
        let l = TorusLattice::new(6).unwrap();
        let mut rng = stream(2, 0);
        assert_eq!(sample_canonical(&l, 0, &mut rng).unwrap(), Configuration::zeros(6));
        assert_eq!(sample_canonical(&l, 6, &mut rng).unwrap(), Configuration::ones(6));
        assert!(sample_canonical(&l, 7, &mut rng).is_err());
    }

    #[test]
    fn canonical_is_uniform_on_n4_k2() {
        let l = TorusLattice::new(4).unwrap();
        let mut rng = stream(3, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(sample_canonical(&l, 2, &mut rng).unwrap().to_string()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 5 degrees of freedom, 0.999 quantile ~ 20.5
        assert!(chi2 < 20.5, "{chi2}");
        for &c in counts.values() {
            assert!((c as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.02);
        }
    }

    #[test]
    fn tilted_constant_profiles() {
        let l = TorusLattice::new(16).unwrap();
        let half = DensityProfile::constant(0.5).unwrap();
        let up = TiltedInitial::new(&l, &half, &DensityProfile::constant(0.75).unwrap()).unwrap();
        for &p in up.probabilities() {
            assert!((p - 0.75).abs() < 1e-12);
        }
        let down = TiltedInitial::new(&l, &half, &DensityProfile::constant(0.25).unwrap()).unwrap();
        for &p in down.probabilities() {
            assert!((p - 0.25).abs() < 1e-12);
        }
        let eta = Configuration::from_bits("1100000000000000").unwrap();
        let expected = 2.0 * (1.5f64).ln() + 14.0 * (0.5f64).ln();
        assert!((up.log_density(&eta) - expected).abs() < 1e-12);
    }

    #[test]
    fn untilted_matches_local_equilibrium() {
        let l = TorusLattice::new(32).unwrap();
        let u0 = DensityProfile::cosine(0.5, 0.25, 1, 64).unwrap();
        let t = TiltedInitial::new(&l, &u0, &u0).unwrap();
        assert_eq!(t.probabilities(), u0.cell_averages(&l).as_slice());
        let s = t.sample(&mut stream(4, 0));
        assert_eq!(s.log_rn, 0.0);
    }

    #[test]
    fn tilted_requires_interior() {
        let l = TorusLattice::new(8).unwrap();
        let half = DensityProfile::constant(0.5).unwrap();
        assert!(TiltedInitial::new(&l, &half, &DensityProfile::constant(1.0).unwrap()).is_err());
    }
}
