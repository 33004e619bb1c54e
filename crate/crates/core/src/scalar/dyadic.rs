//! Exact dyadic rationals `m · 2^e`.
//!
//! Every weight that shows up in the shift examples is a signed power of
//! two, so products of weights along an orbit stay dyadic and can be
//! compared exactly. The mantissa is arbitrary precision: `W^n` weight
//! products reach `2^{±n}` and sums of such terms carry long mantissas.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest binary exponent (of the leading bit) accepted when converting to `f64`.
const F64_EXPONENT_CAP: i64 = 1024;

/// Exponent threshold above which a decimal rendering is produced.
const DECIMAL_MIN_EXPONENT: i64 = -64;

/// An exact value `mantissa · 2^exponent`, kept normalized: the mantissa is
/// odd, or the value is zero and then the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Self {
        let mut d = Dyadic {
            mantissa: mantissa.into(),
            exponent,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::pow2(0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(v, 0)
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{v} is not a finite number")));
        }
        if v == 0.0 {
            return Ok(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), raw_exp - 1075)
        };
        Ok(Dyadic::new(sign * m, e))
    }

    fn normalize(&mut self) {
        match self.mantissa.trailing_zeros() {
            None => self.exponent = 0,
            Some(0) => {}
            Some(tz) => {
                self.mantissa >>= tz;
                self.exponent += tz as i64;
            }
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// True for `±2^e`.
    pub fn is_signed_power_of_two(&self) -> bool {
        self.mantissa.magnitude().is_one()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplication by `2^e`.
    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + e,
        }
    }

    /// Reciprocal, defined only for signed powers of two.
    pub fn inv2(&self) -> Result<Self> {
        if !self.is_signed_power_of_two() {
            return Err(Error::Domain(format!(
                "inv2 needs a signed power of two, got {self}"
            )));
        }
        Ok(Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: -self.exponent,
        })
    }

    /// Integer power; negative exponents need a signed power of two.
    pub fn powi(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inv2()? } else { self.clone() };
        let k = n.unsigned_abs();
        let k32 = u32::try_from(k).map_err(|_| Error::Overflow(format!("power {n} too large")))?;
        Ok(Dyadic::new(
            base.mantissa.pow(k32),
            base.exponent
                .checked_mul(k as i64)
                .ok_or_else(|| Error::Overflow(format!("exponent of {self}^{n}")))?,
        ))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Position of the leading bit: `|self| ∈ [2^(k-1), 2^k)` for the returned `k`.
    fn magnitude_bits(&self) -> i64 {
        self.mantissa.bits() as i64 + self.exponent
    }

    /// Nearest-ish binary64 value. Fails when the magnitude reaches `2^1024`;
    /// values below the subnormal range flush to zero.
    pub fn to_f64(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if self.magnitude_bits() > F64_EXPONENT_CAP {
            return Err(Error::Overflow(format!(
                "{self} exceeds the binary64 range"
            )));
        }
        let bits = self.mantissa.bits() as i64;
        let (m, e) = if bits > 64 {
            let shift = bits - 64;
            (&self.mantissa >> shift as u64, self.exponent + shift)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let base = m.to_f64().expect("64-bit mantissa converts");
        Ok(ldexp(base, e))
    }

    /// `to_f64` saturating at ±∞ instead of failing; used for threshold comparisons.
    pub fn to_f64_lossy(&self) -> f64 {
        match self.to_f64() {
            Ok(v) => v,
            Err(_) if self.is_negative() => f64::NEG_INFINITY,
            Err(_) => f64::INFINITY,
        }
    }

    /// Exact decimal expansion, available when the exponent is at least -64.
    pub fn to_decimal_string(&self) -> Option<String> {
        if self.exponent < DECIMAL_MIN_EXPONENT {
            return None;
        }
        if self.exponent >= 0 {
            return Some((&self.mantissa << self.exponent as u64).to_string());
        }
        let places = (-self.exponent) as usize;
        // m / 2^p = m·5^p / 10^p
        let scaled = self.mantissa.abs() * BigInt::from(5u32).pow(places as u32);
        let digits = scaled.to_string();
        let padded = if digits.len() <= places {
            format!("{}{}", "0".repeat(places - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        let frac_part = frac_part.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        Some(if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        })
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a_sign, b_sign) = (self.mantissa.sign(), other.mantissa.sign());
        if a_sign != b_sign {
            return sign_rank(a_sign).cmp(&sign_rank(b_sign));
        }
        if a_sign == Sign::NoSign {
            return Ordering::Equal;
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        a.cmp(&b)
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &rhs.mantissa << (rhs.exponent - e) as u64;
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd: already normalized
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        -&self
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

/// Accepted forms: `m*2^e`, `2^e`, integers, `a/b` with `b` a power of two,
/// and terminating decimals whose value is dyadic (`0.375`).
impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not a dyadic value"));
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((m, e)) = t.split_once("*2^") {
            let m: BigInt = m.trim().parse().map_err(|_| bad())?;
            let e: i64 = e.trim().parse().map_err(|_| bad())?;
            return Ok(Dyadic::new(m, e));
        }
        if let Some(rest) = t.strip_prefix("2^") {
            let e: i64 = rest.trim().parse().map_err(|_| bad())?;
            return Ok(Dyadic::pow2(e));
        }
        if let Some(rest) = t.strip_prefix("-2^") {
            let e: i64 = rest.trim().parse().map_err(|_| bad())?;
            return Ok(-Dyadic::pow2(e));
        }
        if let Some((a, b)) = t.split_once('/') {
            let a: Dyadic = a.parse()?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if !b.is_positive() || b.trailing_zeros() != Some(b.bits() - 1) {
                return Err(Error::Parse(format!(
                    "`{s}`: denominator must be a positive power of two"
                )));
            }
            return Ok(a.mul_pow2(-((b.bits() - 1) as i64)));
        }
        if let Some((int_part, frac_part)) = t.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int_part.starts_with('-');
            let int_digits = int_part.trim_start_matches(['-', '+']);
            let all: BigInt = format!("{int_digits}{frac_part}").parse().map_err(|_| bad())?;
            let p = frac_part.len() as u32;
            let five_p = BigInt::from(5u32).pow(p);
            let (q, r) = all.div_rem(&five_p);
            if !r.is_zero() {
                return Err(Error::Parse(format!("`{s}` is not a dyadic rational")));
            }
            let q = if negative { -q } else { q };
            return Ok(Dyadic::new(q, -(p as i64)));
        }
        let m: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(m, 0))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
