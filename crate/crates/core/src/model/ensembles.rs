//! Canonical averages over a box of `ell` sites by exact enumeration.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::local::LocalFunction;
use crate::model::velocity::grand_canonical_polynomial;

/// Largest box that is enumerated.
pub const MAX_ENUMERATION: usize = 24;

/// `integral f d nu_{k, ell}` where the box is sites `1..=ell` and `f` reads
/// offsets inside the box.
pub fn canonical_average(f: &LocalFunction, k: usize, ell: usize) -> Result<BigRational> {
    if ell > MAX_ENUMERATION {
        return Err(Error::EnumerationBudget {
            ell,
            max: MAX_ENUMERATION,
        });
    }
    if k > ell {
        return Err(Error::ParticleCount { k, n: ell });
    }
    if let Some(&bad) = f.support().iter().find(|&&o| o < 1 || o > ell as i64) {
        return Err(Error::InvalidArgument(format!(
            "support offset {bad} outside the box 1..={ell}"
        )));
    }
    let positions: Vec<usize> = f.support().iter().map(|&o| (o - 1) as usize).collect();
    let mut counts = vec![0u64; f.table().len()];
    let mut visit = |set: u32| {
        let idx = positions
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &p)| acc | (((set >> p) & 1) as usize) << j);
        counts[idx] += 1;
    };
    if k == 0 {
        visit(0);
    } else {
        // Gosper's hack walks all k-subsets of ell bits in increasing order
        let limit: u64 = 1 << ell;
        let mut set: u64 = (1 << k) - 1;
        while set < limit {
            visit(set as u32);
            let c = set & set.wrapping_neg();
            let r = set + c;
            set = (((r ^ set) >> 2) / c) | r;
        }
    }
    let total = binomial(BigInt::from(ell), BigInt::from(k));
    let mut sum = BigRational::zero();
    for (count, value) in counts.iter().zip(f.table()) {
        if *count > 0 {
            sum += value * BigRational::from_integer(BigInt::from(*count));
        }
    }
    Ok(sum / BigRational::from_integer(total))
}

/// `sup_k |f_bar(k; ell) - f_bar(k / ell)|`, exact, with the maximizing `k`.
pub fn ensembles_gap(f: &LocalFunction, ell: usize) -> Result<(BigRational, usize)> {
    let poly = grand_canonical_polynomial(f);
    let mut best = (BigRational::zero(), 0);
    for k in 0..=ell {
        let canon = canonical_average(f, k, ell)?;
        let gc = poly.eval_exact(&BigRational::new(BigInt::from(k), BigInt::from(ell)));
        let gap = (canon - gc).abs();
        if gap > best.0 {
            best = (gap, k);
        }
    }
    Ok(best)
}
