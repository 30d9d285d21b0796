//! Spectral levels `λ`, optionally carried as exact rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    value: f64,
    exact: Option<BigRational>,
    label: String,
}

impl Level {
    /// A level known only as a floating-point number.
    pub fn float(value: f64) -> Self {
        Level { value, exact: None, label: value.to_string() }
    }

    pub fn rational(num: i64, den: i64) -> Self {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let label = if q.denom().is_one() { q.numer().to_string() } else { q.to_string() };
        Level { value: q.to_f64().unwrap_or(f64::NAN), exact: Some(q), label }
    }

    pub fn integer(k: i64) -> Self {
        Level::rational(k, 1)
    }

    /// Parses `3`, `-1/2`, `0.25`, `sqrt(2)` or `-sqrt(2)`. Integers,
    /// fractions and decimals are exact; square roots of non-squares are not.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse level `{text}`"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, s.strip_prefix('+').unwrap_or(s).trim()),
        };
        if let Some(arg) = body.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let k: u64 = arg.trim().parse().map_err(|_| bad())?;
            let root = (k as f64).sqrt().round() as u64;
            let sign = if neg { -1.0 } else { 1.0 };
            if root * root == k {
                let mut lvl = Level::integer(root as i64 * sign as i64);
                lvl.label = s.to_string();
                return Ok(lvl);
            }
            return Ok(Level { value: sign * (k as f64).sqrt(), exact: None, label: s.to_string() });
        }
        let q = if let Some((n, d)) = body.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        } else {
            parse_decimal(body).ok_or_else(bad)?
        };
        let q = if neg { -q } else { q };
        Ok(Level { value: q.to_f64().unwrap_or(f64::NAN), exact: Some(q), label: s.to_string() })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.exact.is_some()
    }

    pub fn require_exact(&self) -> Result<&BigRational> {
        self.exact.as_ref().ok_or_else(|| Error::IrrationalLevel(self.label.clone()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    if s.is_empty() || s.contains(['e', 'E']) {
        let v: f64 = s.parse().ok()?;
        return BigRational::from_float(v);
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac).parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, den))
}
