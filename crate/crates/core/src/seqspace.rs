//! Finitely supported sequences with dyadic coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// `sum x_k e_k` over a finite support. Zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: BTreeMap<u64, Dyadic>,
}

impl SparseVec {
    pub fn zero() -> Self {
        SparseVec::default()
    }

    /// The basis vector `e_k`.
    pub fn basis(k: u64) -> Self {
        SparseVec::single(k, Dyadic::one())
    }

    pub fn single(k: u64, c: Dyadic) -> Self {
        let mut v = SparseVec::zero();
        v.add_at(k, &c);
        v
    }

    pub fn from_entries<I: IntoIterator<Item = (u64, Dyadic)>>(entries: I) -> Self {
        let mut v = SparseVec::zero();
        for (k, c) in entries {
            v.add_at(k, &c);
        }
        v
    }

    /// Adds `c` to coordinate `k`, dropping the entry if it cancels.
    pub fn add_at(&mut self, k: u64, c: &Dyadic) {
        if c.is_zero() {
            return;
        }
        match self.entries.get_mut(&k) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.entries.remove(&k);
                }
            }
            None => {
                self.entries.insert(k, c.clone());
            }
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: &Dyadic, other: &SparseVec) {
        if scale.is_zero() {
            return;
        }
        for (&k, c) in &other.entries {
            self.add_at(k, &(scale * c));
        }
    }

    pub fn get(&self, k: u64) -> Dyadic {
        self.entries.get(&k).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Dyadic)> + '_ {
        self.entries.iter().map(|(&k, c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn scale(&self, c: &Dyadic) -> SparseVec {
        let mut out = SparseVec::zero();
        out.add_scaled(c, self);
        out
    }

    /// Restriction to indices in `[lo, hi)`.
    pub fn restrict(&self, lo: u64, hi: u64) -> SparseVec {
        SparseVec {
            entries: self.entries.range(lo..hi).map(|(&k, c)| (k, c.clone())).collect(),
        }
    }

    pub fn norm(&self, kind: NormKind) -> NormValue {
        let abs = self.entries.values().map(Dyadic::abs);
        let (value, power) = match kind {
            NormKind::L1 => (abs.sum(), 1),
            NormKind::Sup => (abs.max().unwrap_or_default(), 1),
            NormKind::Lp(p) => {
                assert!(p >= 1, "l^p needs p >= 1");
                (abs.map(|a| a.pow(p)).sum(), p)
            }
        };
        NormValue { value, power }
    }

    /// Shorthand for the `l^1` norm, which is exact and dyadic.
    pub fn l1(&self) -> Dyadic {
        self.entries.values().map(Dyadic::abs).sum()
    }
}

/// `P_n v`: the coordinates of `v` in block `n`.
pub fn project(v: &SparseVec, n: usize, s: &Schedule) -> Result<SparseVec> {
    s.check_block(n)?;
    Ok(v.restrict(s.b(n), s.b(n + 1)))
}

/// `X_n = sum_{k in block n} 2^{#[k - b_n, delta_n)} x_k e_k`: block `n`
/// reweighted by the doublings each coordinate has still to undergo.
pub fn weighted_x(v: &SparseVec, n: usize, s: &Schedule) -> Result<SparseVec> {
    s.check_block(n)?;
    let (start, delta) = (s.b(n), s.delta(n));
    Ok(SparseVec::from_entries(v.entries.range(start..s.b(n + 1)).map(
        |(&k, c)| (k, c.mul_pow2(delta.saturating_sub(k - start) as i64)),
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    L1,
    /// `l^p`, represented by the `p`-th power of the norm.
    Lp(u32),
    Sup,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "l1" => Ok(NormKind::L1),
            "sup" | "linf" | "c0" => Ok(NormKind::Sup),
            _ => s
                .strip_prefix('l')
                .and_then(|p| p.parse::<u32>().ok())
                .filter(|&p| p >= 1)
                .map(|p| if p == 1 { NormKind::L1 } else { NormKind::Lp(p) })
                .ok_or_else(|| Error::Malformed(format!("unknown norm {s:?}"))),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::L1 => write!(f, "l1"),
            NormKind::Lp(p) => write!(f, "l{p}"),
            NormKind::Sup => write!(f, "sup"),
        }
    }
}

/// An exact norm, stored as its `power`-th power (`power = 1` except for `l^p`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: Dyadic,
    pub power: u32,
}

impl NormValue {
    /// Raises a scale factor to the same power so it can multiply `value`.
    pub fn scaled(&self, factor: &Dyadic) -> NormValue {
        NormValue {
            value: &self.value * &factor.pow(self.power),
            power: self.power,
        }
    }

    pub fn le(&self, other: &NormValue) -> bool {
        assert_eq!(self.power, other.power, "comparing norms of different kinds");
        self.value <= other.value
    }
}

impl Add<&SparseVec> for &SparseVec {
    type Output = SparseVec;

    fn add(self, rhs: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(&Dyadic::one(), rhs);
        out
    }
}

impl Sub<&SparseVec> for &SparseVec {
    type Output = SparseVec;

    fn sub(self, rhs: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(&Dyadic::from_int(-1), rhs);
        out
    }
}

impl Add<&SparseVec> for SparseVec {
    type Output = SparseVec;

    fn add(mut self, rhs: &SparseVec) -> SparseVec {
        self.add_scaled(&Dyadic::one(), rhs);
        self
    }
}

impl Sub<&SparseVec> for SparseVec {
    type Output = SparseVec;

    fn sub(mut self, rhs: &SparseVec) -> SparseVec {
        self.add_scaled(&Dyadic::from_int(-1), rhs);
        self
    }
}

impl Neg for &SparseVec {
    type Output = SparseVec;

    fn neg(self) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl Mul<&SparseVec> for &Dyadic {
    type Output = SparseVec;

    fn mul(self, rhs: &SparseVec) -> SparseVec {
        rhs.scale(self)
    }
}

/// Renders like `4*e_0 - 2^-78*e_1376`.
impl fmt::Display for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.iter().enumerate() {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            match (i, c.is_negative()) {
                (0, false) => {}
                (0, true) => write!(f, "-")?,
                _ => write!(f, " {sign} ")?,
            }
            if mag == Dyadic::one() {
                write!(f, "e_{k}")?;
            } else {
                write!(f, "{mag}*e_{k}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseVec({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct SparseVecRepr {
    entries: Vec<(u64, Dyadic)>,
}

impl Serialize for SparseVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SparseVecRepr {
            entries: self.entries.iter().map(|(&k, c)| (k, c.clone())).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SparseVecRepr::deserialize(deserializer)?;
        let mut entries = BTreeMap::new();
        let mut last = None;
        for (k, c) in repr.entries {
            if last.is_some_and(|l| l >= k) {
                return Err(D::Error::custom("entries must be sorted by strictly increasing index"));
            }
            if c.is_zero() {
                return Err(D::Error::custom(format!("zero coefficient stored at index {k}")));
            }
            last = Some(k);
            entries.insert(k, c);
        }
        Ok(SparseVec { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn small2() -> Schedule {
        Schedule::small2(4).unwrap()
    }

    #[test]
    fn norm_examples() {
        let v = SparseVec::from_entries([(0, d("1")), (1376, -Dyadic::pow2(-80))]);
        assert_eq!(v.norm(NormKind::L1).value, Dyadic::one() + Dyadic::pow2(-80));
        for kind in [NormKind::L1, NormKind::Sup, NormKind::Lp(3)] {
            assert!(SparseVec::zero().norm(kind).value.is_zero());
        }
        let w = SparseVec::from_entries([(0, d("4")), (1376, -Dyadic::pow2(-78))]);
        assert_eq!(w.norm(NormKind::Sup).value, d("4"));
        let lp = w.norm(NormKind::Lp(2));
        assert_eq!(lp.power, 2);
        assert_eq!(lp.value, d("16") + Dyadic::pow2(-156));
    }

    #[test]
    fn projection_examples() {
        let s = small2();
        let v = SparseVec::basis(0) + &SparseVec::basis(40);
        assert_eq!(project(&v, 1, &s).unwrap(), SparseVec::basis(40));
        assert!(project(&SparseVec::basis(5), 2, &s).unwrap().is_zero());
        assert_eq!(project(&SparseVec::basis(32), 1, &s).unwrap(), SparseVec::basis(32));
        assert!(matches!(project(&v, 5, &s), Err(Error::PrefixExceeded(_))));
    }

    #[test]
    fn weighted_x_examples() {
        let s = small2();
        assert_eq!(
            weighted_x(&SparseVec::basis(32), 1, &s).unwrap(),
            SparseVec::single(32, Dyadic::pow2(14))
        );
        assert_eq!(weighted_x(&SparseVec::basis(95), 1, &s).unwrap(), SparseVec::basis(95));
        assert_eq!(weighted_x(&SparseVec::basis(0), 0, &s).unwrap(), SparseVec::basis(0));
        // #[8, 14) = 6
        assert_eq!(
            weighted_x(&SparseVec::basis(40), 1, &s).unwrap(),
            SparseVec::single(40, Dyadic::pow2(6))
        );
    }

    #[test]
    fn cancellation_drops_entries() {
        let mut v = SparseVec::basis(3);
        v.add_at(3, &d("-1"));
        assert!(v.is_zero());
        assert_eq!(v.len(), 0);
    }

    #[test]
    fn display_form() {
        let v = SparseVec::from_entries([(0, d("4")), (1376, -Dyadic::pow2(-78))]);
        assert_eq!(v.to_string(), "4*e_0 - 2^-78*e_1376");
        assert_eq!((-&SparseVec::basis(0)).to_string(), "-e_0");
        assert_eq!(SparseVec::zero().to_string(), "0");
    }

    #[test]
    fn json_format() {
        let v = SparseVec::from_entries([(7, d("-3/4")), (2, d("1"))]);
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"entries": [[2, {"m": "1", "e": 0, "s": 1}], [7, {"m": "3", "e": -2, "s": -1}]]})
        );
        let unsorted =
            serde_json::json!({"entries": [[7, {"m": "1", "e": 0, "s": 1}], [2, {"m": "1", "e": 0, "s": 1}]]});
        assert!(serde_json::from_value::<SparseVec>(unsorted).is_err());
        let zero = serde_json::json!({"entries": [[7, {"m": "0", "e": 0, "s": 0}]]});
        assert!(serde_json::from_value::<SparseVec>(zero).is_err());
    }

    #[test]
    fn norm_kind_parsing() {
        assert_eq!("l1".parse::<NormKind>().unwrap(), NormKind::L1);
        assert_eq!("l3".parse::<NormKind>().unwrap(), NormKind::Lp(3));
        assert_eq!("sup".parse::<NormKind>().unwrap(), NormKind::Sup);
        assert!("l0".parse::<NormKind>().is_err());
    }
}
