//! Exact dyadic rationals `m * 2^e`.
//!
//! Every coefficient that appears in an orbit of a finitely supported vector
//! under the operator is dyadic, so this is the only scalar type the crate
//! needs. Values are kept in canonical form (odd mantissa, or the single zero
//! `0 * 2^0`), which makes structural equality coincide with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exponents in this window render as plain decimals.
const DECIMAL_RENDER_LIMIT: i64 = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

fn exp_add(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("dyadic exponent overflow")
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    /// Builds `mantissa * 2^exponent` and brings it to canonical form.
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Dyadic::zero(),
            Some(0) => Dyadic { mantissa, exponent },
            Some(tz) => Dyadic {
                mantissa: mantissa >> tz,
                exponent: exp_add(exponent, tz as i64),
            },
        }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// `2^e`, exactly.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` (an exponent shift, never a mantissa change).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: exp_add(self.exponent, k),
        }
    }

    pub fn pow(&self, p: u32) -> Self {
        if p == 0 {
            return Dyadic::one();
        }
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: num_traits::pow(self.mantissa.clone(), p as usize),
            exponent: self.exponent.checked_mul(p as i64).expect("dyadic exponent overflow"),
        }
    }

    /// Position of the leading bit: `floor(log2 |x|)`. `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(exp_add(self.exponent, self.mantissa.bits() as i64 - 1))
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as usize))
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << ((-self.exponent) as usize))
        }
    }

    /// Converts a rational whose reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        let tz = den.trailing_zeros()?;
        if den.magnitude() != &(BigUint::one() << tz) {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), -(tz as i64)))
    }

    /// Integer value if the number is a non-negative integer.
    pub fn to_biguint(&self) -> Option<BigUint> {
        if self.is_negative() || self.exponent < 0 {
            return None;
        }
        Some(self.mantissa.magnitude() << (self.exponent as usize))
    }

    /// Approximate `f64` value; under/overflows to 0 or infinity.
    pub fn to_f64(&self) -> f64 {
        let (m, e) = self.top_bits();
        let e = e.clamp(i32::MIN as i64 / 2, i32::MAX as i64 / 2) as i32;
        let mut v = m;
        let mut rem = e;
        while rem != 0 {
            let step = rem.clamp(-1000, 1000);
            v *= 2f64.powi(step);
            rem -= step;
            if v == 0.0 || v.is_infinite() {
                break;
            }
        }
        v
    }

    /// Leading 53 bits as an `f64` plus the binary exponent that goes with them.
    fn top_bits(&self) -> (f64, i64) {
        let bits = self.mantissa.bits() as i64;
        if bits <= 53 {
            return (self.mantissa.to_f64().unwrap_or(0.0), self.exponent);
        }
        let shift = bits - 53;
        let top = (&self.mantissa >> (shift as usize)).to_f64().unwrap_or(0.0);
        (top, exp_add(self.exponent, shift))
    }

    /// Scientific-notation approximation that never under/overflows,
    /// e.g. `2.500000e-1` or `1.000000e-78913`.
    pub fn approx_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let (m, e) = self.top_bits();
        let log10 = m.abs().log10() + e as f64 * std::f64::consts::LOG10_2;
        let mut dexp = log10.floor();
        let mut digits = 10f64.powf(log10 - dexp);
        if digits >= 9.9999995 {
            digits /= 10.0;
            dexp += 1.0;
        }
        let sign = if self.is_negative() { "-" } else { "" };
        format!("{sign}{digits:.6}e{}", dexp as i64)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        // same nonzero sign: compare magnitudes, then flip for negatives
        let lead_a = self.log2_floor().unwrap();
        let lead_b = other.log2_floor().unwrap();
        let mag = if lead_a != lead_b {
            lead_a.cmp(&lead_b)
        } else {
            let (a, b) = (self.mantissa.magnitude(), other.mantissa.magnitude());
            match self.exponent.cmp(&other.exponent) {
                Ordering::Equal => a.cmp(b),
                Ordering::Greater => {
                    let shifted = a << ((self.exponent - other.exponent) as usize);
                    shifted.cmp(b)
                }
                Ordering::Less => {
                    let shifted = b << ((other.exponent - self.exponent) as usize);
                    a.cmp(&shifted)
                }
            }
        };
        if sa < 0 {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exponent <= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = (hi.exponent - lo.exponent) as usize;
        let sum = &lo.mantissa + (&hi.mantissa << shift);
        Dyadic::new(sum, lo.exponent)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd: already canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: exp_add(self.exponent, rhs.exponent),
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

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &'a Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = &*self - rhs;
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.exponent;
        if self.is_zero() {
            write!(f, "0")
        } else if (0..=DECIMAL_RENDER_LIMIT).contains(&e) {
            write!(f, "{}", &self.mantissa << (e as usize))
        } else if (-DECIMAL_RENDER_LIMIT..0).contains(&e) {
            // m / 2^k = m * 5^k / 10^k
            let k = (-e) as usize;
            let scaled = self.mantissa.magnitude() * num_traits::pow(BigUint::from(5u32), k);
            let digits = format!("{:0>width$}", scaled.to_string(), width = k + 1);
            let (int_part, frac_part) = digits.split_at(digits.len() - k);
            let sign = if self.is_negative() { "-" } else { "" };
            write!(f, "{sign}{int_part}.{frac_part}")
        } else if self.mantissa.magnitude().is_one() {
            let sign = if self.is_negative() { "-" } else { "" };
            write!(f, "{sign}2^{e}")
        } else {
            write!(f, "{}*2^{e}", self.mantissa)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

fn bad(s: &str) -> Error {
    Error::Malformed(format!("not a dyadic rational: {s:?}"))
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `-3`, `0.75`, `-3/4`, `3*2^-5`, `2^-78` and `-2^-78`.
    fn from_str(raw: &str) -> Result<Self, Error> {
        let s = raw.trim();
        if s.is_empty() {
            return Err(bad(raw));
        }
        if let Some((m, e)) = s.split_once("*2^") {
            let m: BigInt = m.trim().parse().map_err(|_| bad(raw))?;
            let e: i64 = e.trim().parse().map_err(|_| bad(raw))?;
            return Ok(Dyadic::new(m, e));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let value = if let Some(e) = body.strip_prefix("2^") {
            Dyadic::pow2(e.trim().parse().map_err(|_| bad(raw))?)
        } else if let Some((num, den)) = body.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad(raw))?;
            let den: BigInt = den.trim().parse().map_err(|_| bad(raw))?;
            if den.is_zero() {
                return Err(bad(raw));
            }
            Dyadic::from_rational(&BigRational::new(num, den)).ok_or_else(|| bad(raw))?
        } else if let Some((int_part, frac_part)) = body.split_once('.') {
            if !frac_part.chars().all(|c| c.is_ascii_digit()) || !int_part.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad(raw));
            }
            let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad(raw))?;
            let den = num_traits::pow(BigInt::from(10), frac_part.len() + 1);
            Dyadic::from_rational(&BigRational::new(digits, den)).ok_or_else(|| bad(raw))?
        } else {
            if !body.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad(raw));
            }
            Dyadic::new(body.parse().map_err(|_| bad(raw))?, 0)
        };
        Ok(if neg { -value } else { value })
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    m: String,
    e: i64,
    s: i8,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr {
            m: self.mantissa.magnitude().to_string(),
            e: self.exponent,
            s: self.signum(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DyadicRepr::deserialize(deserializer)?;
        let mag: BigUint = repr
            .m
            .parse()
            .map_err(|_| D::Error::custom(format!("bad mantissa {:?}", repr.m)))?;
        let sign = match (repr.s, mag.is_zero()) {
            (0, true) => Sign::NoSign,
            (1, false) => Sign::Plus,
            (-1, false) => Sign::Minus,
            _ => return Err(D::Error::custom("sign inconsistent with mantissa")),
        };
        Ok(Dyadic::new(BigInt::from_biguint(sign, mag), repr.e))
    }
}
