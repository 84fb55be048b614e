//! Witness reports: constructed objects plus exactly evaluated inequalities.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;

/// An exact scalar appearing on one side of a checked inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Dyadic(Dyadic),
    Rational(#[serde(with = "rational_serde")] BigRational),
}

impl Exact {
    pub fn to_rational(&self) -> BigRational {
        match self {
            Exact::Dyadic(d) => d.to_rational(),
            Exact::Rational(r) => r.clone(),
        }
    }

    fn cmp_exact(&self, other: &Exact) -> Ordering {
        match (self, other) {
            (Exact::Dyadic(a), Exact::Dyadic(b)) => a.cmp(b),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

impl From<Dyadic> for Exact {
    fn from(d: Dyadic) -> Self {
        Exact::Dyadic(d)
    }
}

impl From<BigRational> for Exact {
    fn from(r: BigRational) -> Self {
        Exact::Rational(r)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exact::Dyadic(d) => write!(f, "{d}"),
            Exact::Rational(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord.is_lt(),
            Relation::Le => ord.is_le(),
            Relation::Eq => ord.is_eq(),
            Relation::Ge => ord.is_ge(),
            Relation::Gt => ord.is_gt(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub lhs: Exact,
    pub relation: Relation,
    pub rhs: Exact,
    pub holds: bool,
}

impl Check {
    /// Evaluates `lhs relation rhs`; `holds` is always derived, never supplied.
    pub fn new(
        description: impl Into<String>,
        lhs: impl Into<Exact>,
        relation: Relation,
        rhs: impl Into<Exact>,
    ) -> Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let holds = relation.holds(lhs.cmp_exact(&rhs));
        Check {
            description: description.into(),
            lhs,
            relation,
            rhs,
            holds,
        }
    }

    /// Re-evaluates the relation from the stored sides.
    pub fn is_consistent(&self) -> bool {
        self.holds == self.relation.holds(self.lhs.cmp_exact(&self.rhs))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.holds { "ok  " } else { "FAIL" };
        write!(
            f,
            "[{mark}] {}: {} {} {}",
            self.description,
            self.lhs,
            self.relation.symbol(),
            self.rhs
        )
    }
}

/// Claim a report certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Periodicity,
    Hyp0,
    Transitivity,
    Reiterative,
    Fhc0,
    Fhc1,
    Fhc2,
    Prelim,
    Cool,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Claim::Periodicity => "periodicity",
            Claim::Hyp0 => "hyp0",
            Claim::Transitivity => "transitivity",
            Claim::Reiterative => "reiterative",
            Claim::Fhc0 => "fhc0",
            Claim::Fhc1 => "fhc1",
            Claim::Fhc2 => "fhc2",
            Claim::Prelim => "prelim",
            Claim::Cool => "cool",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport<W> {
    pub claim: Claim,
    pub witness: W,
    pub checks: Vec<Check>,
}

impl<W> WitnessReport<W> {
    pub fn new(claim: Claim, witness: W, checks: Vec<Check>) -> Self {
        WitnessReport { claim, witness, checks }
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.claim,
            if self.holds() { "all checks hold" } else { "FAILED" }
        );
        for c in &self.checks {
            out.push_str(&format!("  {c}\n"));
        }
        out
    }
}

/// Serializes a `BigRational` as `{"num": "...", "den": "..."}`.
pub mod rational_serde {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let repr = Repr::deserialize(d)?;
        let num: BigInt = repr.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = repr.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(num, den))
    }
}

/// Serializes a `BigUint` as a decimal string.
pub mod biguint_serde {
    use num_bigint::BigUint;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}
