//! Mean-field walker speeds `v±(rho)` as exact polynomials in the density.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::local::{to_f64, LocalFunction, LocalRate};

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    exact: Vec<BigRational>,
    fast: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        let fast = coeffs.iter().map(to_f64).collect();
        Polynomial {
            exact: coeffs,
            fast,
        }
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn degree(&self) -> usize {
        self.exact.len() - 1
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.fast.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.exact
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Derivative polynomial.
    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .exact
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        Polynomial::new(coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.exact.iter().enumerate() {
            if c.is_zero() && self.exact.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c}) rho")?,
                _ => write!(f, "({c}) rho^{k}")?,
            }
        }
        Ok(())
    }
}

/// Grand-canonical expectation `integral f d nu_rho` as a polynomial in `rho`.
pub fn grand_canonical_polynomial(f: &LocalFunction) -> Polynomial {
    let s = f.support().len();
    // rho^j (1 - rho)^(s - j) expanded: sum_i C(s-j, i) (-1)^i rho^(j+i)
    let mut coeffs = vec![BigRational::zero(); s + 1];
    for (idx, value) in f.table().iter().enumerate() {
        if value.is_zero() {
            continue;
        }
        let j = (idx as u64).count_ones() as usize;
        for i in 0..=s - j {
            let mut term = value * BigRational::from_integer(binomial(BigInt::from(s - j), BigInt::from(i)));
            if i % 2 == 1 {
                term = -term;
            }
            coeffs[j + i] += term;
        }
    }
    Polynomial::new(coeffs)
}

/// Mean-field speeds of a jump rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    plus: Polynomial,
    minus: Polynomial,
}

/// `(v+, v-, v+ - v-)` at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity {
    pub plus: f64,
    pub minus: f64,
    pub v: f64,
}

impl MeanField {
    pub fn new(c: &LocalRate) -> Self {
        MeanField {
            plus: grand_canonical_polynomial(c.plus()),
            minus: grand_canonical_polynomial(c.minus()),
        }
    }

    pub fn plus(&self) -> &Polynomial {
        &self.plus
    }

    pub fn minus(&self) -> &Polynomial {
        &self.minus
    }

    /// Net speed `v = v+ - v-` as a polynomial.
    pub fn net(&self) -> Polynomial {
        let len = self.plus.exact.len().max(self.minus.exact.len());
        let coeff = |p: &Polynomial, k: usize| p.exact.get(k).cloned().unwrap_or_else(BigRational::zero);
        Polynomial::new((0..len).map(|k| coeff(&self.plus, k) - coeff(&self.minus, k)).collect())
    }

    #[inline]
    pub fn at(&self, rho: f64) -> Velocity {
        let plus = self.plus.eval(rho).max(0.0);
        let minus = self.minus.eval(rho).max(0.0);
        Velocity {
            plus,
            minus,
            v: plus - minus,
        }
    }

    pub fn at_exact(&self, rho: &BigRational) -> (BigRational, BigRational, BigRational) {
        let p = self.plus.eval_exact(rho);
        let m = self.minus.eval_exact(rho);
        let v = &p - &m;
        (p, m, v)
    }
}

/// `(v+, v-, v)` at density `rho`.
pub fn mean_field_velocity(c: &LocalRate, rho: f64) -> Velocity {
    MeanField::new(c).at(rho)
}

/// Reference evaluation by direct enumeration of windows weighted by
/// Bernoulli products, without building the polynomial.
pub fn enumerate_expectation(f: &LocalFunction, rho: &BigRational) -> BigRational {
    let s = f.support().len();
    let one = BigRational::one();
    let mut total = BigRational::zero();
    for (idx, value) in f.table().iter().enumerate() {
        let mut w = BigRational::one();
        for j in 0..s {
            if idx >> j & 1 == 1 {
                w *= rho;
            } else {
                w *= &one - rho;
            }
        }
        total += w * value;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::Configuration;
    use crate::model::lattice::TorusLattice;
    use crate::model::measures::sample_product_profile;
    use crate::model::profile::DensityProfile;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn intro_velocity_is_affine() {
        let mf = MeanField::new(&LocalRate::intro());
        // (2 rho - 1) / 3
        assert_eq!(mf.net().coefficients(), &[q(-1, 3), q(2, 3)]);
        for r in [q(0, 1), q(1, 4), q(1, 2), q(1, 1)] {
            let (_, _, v) = mf.at_exact(&r);
            assert_eq!(v, (q(2, 1) * &r - q(1, 1)) / q(3, 1));
        }
        let half = mf.at(0.5);
        assert_eq!((half.plus, half.minus, half.v), (0.5, 0.5, 0.0));
    }

    #[test]
    fn archetype_at_quarter_density() {
        let c = LocalRate::archetype(q(1, 1), q(2, 1)).unwrap();
        let (p, m, v) = MeanField::new(&c).at_exact(&q(1, 4));
        assert_eq!((p, m, v), (q(5, 4), q(7, 4), q(-1, 2)));
    }

    #[test]
    fn polynomial_matches_monte_carlo() {
        // c+ = eta(0) eta(2) + 1/4, c- = 1 - eta(-1)/2
        let c = LocalRate::new(
            vec![0, 2, -1],
            (0..8).map(|i| if i & 3 == 3 { q(5, 4) } else { q(1, 4) }).collect(),
            (0..8).map(|i| if i & 4 == 4 { q(1, 2) } else { q(1, 1) }).collect(),
        )
        .unwrap();
        let mf = MeanField::new(&c);
        let rho = 0.3;
        let l = TorusLattice::new(100_000).unwrap();
        let eta = sample_product_profile(&l, &DensityProfile::constant(rho).unwrap(), &mut stream(9, 0));
        let samples: Vec<f64> = (0..l.n()).map(|x| c.evaluate(&eta, x).0).collect();
        let est = crate::stats::Estimate::from_samples(&samples);
        // neighbouring windows overlap, so inflate the i.i.d. standard error
        assert!((est.mean - mf.at(rho).plus).abs() < 4.0 * 3.0 * est.stderr, "{est:?}");
        let _ = Configuration::zeros(1);
    }

    proptest! {
        #[test]
        fn polynomial_equals_enumeration(bits in proptest::collection::vec(0i64..7, 8), num in 0i64..=16) {
            let f = LocalFunction::new(vec![0, 1, 3], bits.iter().map(|&b| q(b, 3)).collect()).unwrap();
            let rho = q(num, 16);
            let poly = grand_canonical_polynomial(&f);
            prop_assert_eq!(poly.eval_exact(&rho), enumerate_expectation(&f, &rho));
            prop_assert!(poly.degree() <= 3);
        }
    }
}
