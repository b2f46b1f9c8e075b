//! Local functions of the environment and walker jump rates as truth tables.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::config::Configuration;

const MAX_SUPPORT: usize = 16;

/// Parses `"p/q"`, integers and decimals (`"0.25"`, `"1e-3"`) into exact rationals.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn index_of(eta: &[u8], x: usize, support: &[i64]) -> usize {
    let n = eta.len() as i64;
    let mut idx = 0usize;
    for (j, &off) in support.iter().enumerate() {
        let site = (x as i64 + off).rem_euclid(n) as usize;
        idx |= (eta[site] as usize) << j;
    }
    idx
}

fn check_support(support: &[i64]) -> Result<()> {
    if support.len() > MAX_SUPPORT {
        return Err(Error::LocalRate(format!(
            "support of size {} exceeds {MAX_SUPPORT}",
            support.len()
        )));
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != support.len() {
        return Err(Error::LocalRate("repeated support offset".into()));
    }
    Ok(())
}

/// A real function of the configuration that reads a finite window of sites.
///
/// Entry `idx` of the table is the value on the window whose bit `j` is the
/// occupancy at offset `support[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFunction {
    support: Vec<i64>,
    exact: Vec<BigRational>,
    fast: Vec<f64>,
}

impl LocalFunction {
    pub fn new(support: Vec<i64>, values: Vec<BigRational>) -> Result<Self> {
        check_support(&support)?;
        if values.len() != 1 << support.len() {
            return Err(Error::LocalRate(format!(
                "expected {} table entries, got {}",
                1usize << support.len(),
                values.len()
            )));
        }
        let fast = values.iter().map(to_f64).collect();
        Ok(LocalFunction {
            support,
            exact: values,
            fast,
        })
    }

    pub fn constant(c: BigRational) -> Self {
        LocalFunction {
            support: Vec::new(),
            fast: vec![to_f64(&c)],
            exact: vec![c],
        }
    }

    /// `xi(offset)`.
    pub fn occupation(offset: i64) -> Self {
        Self::product(&[offset])
    }

    /// `prod_j xi(offsets[j])`.
    pub fn product(offsets: &[i64]) -> Self {
        let s = offsets.len();
        let values = (0..1usize << s)
            .map(|idx| {
                if idx == (1 << s) - 1 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        Self::new(offsets.to_vec(), values).expect("product of distinct offsets")
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn table(&self) -> &[BigRational] {
        &self.exact
    }

    #[inline]
    pub fn value_at_index(&self, idx: usize) -> f64 {
        self.fast[idx]
    }

    /// `f(tau_x eta)`.
    #[inline]
    pub fn eval(&self, eta: &[u8], x: usize) -> f64 {
        self.fast[index_of(eta, x, &self.support)]
    }

    pub fn eval_config(&self, eta: &Configuration, x: usize) -> f64 {
        self.eval(eta.as_slice(), x)
    }

    /// Exact value on a window given as occupancy per support offset.
    pub fn exact_on_window(&self, window: &[u8]) -> &BigRational {
        let idx = window
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | ((b as usize) << j));
        &self.exact[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.fast.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Walker jump rates `c(., +)` and `c(., -)` on a common support window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateRepr", into = "RateRepr")]
pub struct LocalRate {
    plus: LocalFunction,
    minus: LocalFunction,
    unit_sum: bool,
}

#[derive(Serialize, Deserialize)]
struct RateRepr {
    table: String,
}

impl TryFrom<RateRepr> for LocalRate {
    type Error = Error;
    fn try_from(r: RateRepr) -> Result<Self> {
        LocalRate::from_str(&r.table)
    }
}

impl From<LocalRate> for RateRepr {
    fn from(r: LocalRate) -> Self {
        RateRepr { table: r.to_text() }
    }
}

impl LocalRate {
    pub fn new(support: Vec<i64>, plus: Vec<BigRational>, minus: Vec<BigRational>) -> Result<Self> {
        if plus.iter().chain(minus.iter()).any(|r| r.is_negative()) {
            return Err(Error::LocalRate("negative rate".into()));
        }
        let unit_sum = plus.iter().zip(minus.iter()).all(|(p, m)| (p + m).is_one());
        Ok(LocalRate {
            plus: LocalFunction::new(support.clone(), plus)?,
            minus: LocalFunction::new(support, minus)?,
            unit_sum,
        })
    }

    /// `c+ = (1 + eta(0)) / 3`, `c- = (2 - eta(0)) / 3`.
    pub fn intro() -> Self {
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        Self::new(vec![0], vec![r(1, 3), r(2, 3)], vec![r(2, 3), r(1, 3)]).expect("valid table")
    }

    /// `c+ = alpha + (beta - alpha) eta(0)`, `c- = beta + (alpha - beta) eta(0)`.
    pub fn archetype(alpha: BigRational, beta: BigRational) -> Result<Self> {
        Self::new(
            vec![0],
            vec![alpha.clone(), beta.clone()],
            vec![beta, alpha],
        )
    }

    /// Environment-blind rates.
    pub fn constant(plus: BigRational, minus: BigRational) -> Result<Self> {
        Self::new(Vec::new(), vec![plus], vec![minus])
    }

    pub fn zero() -> Self {
        Self::constant(BigRational::zero(), BigRational::zero()).expect("zero rates")
    }

    pub fn support(&self) -> &[i64] {
        self.plus.support()
    }

    pub fn plus(&self) -> &LocalFunction {
        &self.plus
    }

    pub fn minus(&self) -> &LocalFunction {
        &self.minus
    }

    /// Whether `c+ + c- = 1` on every window.
    pub fn has_unit_sum(&self) -> bool {
        self.unit_sum
    }

    #[inline]
    pub fn window_index(&self, eta: &[u8], x: usize) -> usize {
        index_of(eta, x, self.plus.support())
    }

    #[inline]
    pub fn rates_at_index(&self, idx: usize) -> (f64, f64) {
        (self.plus.fast[idx], self.minus.fast[idx])
    }

    /// `(c+(eta; x), c-(eta; x))` via the cocycle property.
    #[inline]
    pub fn evaluate(&self, eta: &Configuration, x: usize) -> (f64, f64) {
        self.rates_at_index(self.window_index(eta.as_slice(), x))
    }

    pub fn max_plus(&self) -> f64 {
        self.plus.max_abs()
    }

    pub fn max_minus(&self) -> f64 {
        self.minus.max_abs()
    }

    /// Text block: a `support:` line, then one `bits c+ c-` line per window.
    pub fn to_text(&self) -> String {
        let s = self.support().len();
        let mut out = String::from("support:");
        for off in self.support() {
            let _ = write!(out, " {off}");
        }
        out.push('\n');
        for idx in 0..1usize << s {
            let bits: String = (0..s).map(|j| if idx >> j & 1 == 1 { '1' } else { '0' }).collect();
            let bits = if bits.is_empty() { "-".to_string() } else { bits };
            let _ = writeln!(out, "{bits} {} {}", self.plus.exact[idx], self.minus.exact[idx]);
        }
        out
    }
}

impl FromStr for LocalRate {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::LocalRate("empty rate table".into()))?;
        let offsets = head
            .strip_prefix("support:")
            .ok_or_else(|| Error::LocalRate("first line must start with `support:`".into()))?;
        let support = offsets
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::LocalRate(format!("bad offset {t:?}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        check_support(&support)?;
        let s = support.len();
        let mut plus: Vec<Option<BigRational>> = vec![None; 1 << s];
        let mut minus: Vec<Option<BigRational>> = vec![None; 1 << s];
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::LocalRate(format!("expected `bits c+ c-`, got {line:?}")));
            }
            let bits = if parts[0] == "-" { "" } else { parts[0] };
            if bits.len() != s || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::LocalRate(format!("bad window {:?}", parts[0])));
            }
            let idx = bits
                .chars()
                .enumerate()
                .fold(0usize, |acc, (j, c)| acc | (((c == '1') as usize) << j));
            let p = parse_rational(parts[1])
                .ok_or_else(|| Error::LocalRate(format!("bad rate {:?}", parts[1])))?;
            let m = parse_rational(parts[2])
                .ok_or_else(|| Error::LocalRate(format!("bad rate {:?}", parts[2])))?;
            if plus[idx].is_some() {
                return Err(Error::LocalRate(format!("window {bits:?} listed twice")));
            }
            plus[idx] = Some(p);
            minus[idx] = Some(m);
        }
        let missing = plus.iter().filter(|v| v.is_none()).count();
        if missing > 0 {
            return Err(Error::LocalRate(format!("{missing} windows missing from table")));
        }
        LocalRate::new(
            support,
            plus.into_iter().map(Option::unwrap).collect(),
            minus.into_iter().map(Option::unwrap).collect(),
        )
    }
}
