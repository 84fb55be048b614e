//! Finite-horizon density functionals on sets of non-negative integers.
//!
//! Lower, upper and upper Banach density are limits; from finitely many
//! observations they can only be estimated, and every functional here says so
//! by taking the observation horizon explicitly. Sets given as unions of
//! arithmetic progressions additionally get their exact asymptotic density.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_PROGRESSIONS: usize = 16;

/// A finite set observed on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IndexSetRepr", into = "IndexSetRepr")]
pub struct IndexSet {
    elements: Vec<u64>,
    horizon: u64,
    structure: Option<Vec<Progression>>,
}

/// `{start + j * step : j >= 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub start: u64,
    pub step: u64,
}

#[derive(Serialize, Deserialize)]
struct IndexSetRepr {
    elements: Vec<u64>,
    horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    structure: Option<Vec<Progression>>,
}

impl TryFrom<IndexSetRepr> for IndexSet {
    type Error = Error;

    fn try_from(r: IndexSetRepr) -> Result<Self> {
        let set = IndexSet::new(r.elements, r.horizon)?;
        match r.structure {
            None => Ok(set),
            Some(ps) => {
                let structured = IndexSet::from_progressions(&ps, set.horizon)?;
                if structured.elements != set.elements {
                    return Err(Error::Malformed(
                        "elements disagree with the declared progressions".into(),
                    ));
                }
                Ok(structured)
            }
        }
    }
}

impl From<IndexSet> for IndexSetRepr {
    fn from(s: IndexSet) -> Self {
        IndexSetRepr {
            elements: s.elements,
            horizon: s.horizon,
            structure: s.structure,
        }
    }
}

impl IndexSet {
    /// Sorts and deduplicates; every element must lie in `[0, horizon]`.
    pub fn new(mut elements: Vec<u64>, horizon: u64) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if let Some(&last) = elements.last() {
            if last > horizon {
                return Err(Error::Malformed(format!(
                    "element {last} lies beyond the horizon {horizon}"
                )));
            }
        }
        Ok(IndexSet {
            elements,
            horizon,
            structure: None,
        })
    }

    /// The union of the progressions, cut at the horizon.
    pub fn from_progressions(progressions: &[Progression], horizon: u64) -> Result<Self> {
        if progressions.iter().any(|p| p.step == 0) {
            return Err(Error::InvalidArgument("progression step must be positive".into()));
        }
        let mut elements = Vec::new();
        for p in progressions {
            let mut a = p.start;
            while a <= horizon {
                elements.push(a);
                a = match a.checked_add(p.step) {
                    Some(next) => next,
                    None => break,
                };
            }
        }
        let mut set = IndexSet::new(elements, horizon)?;
        set.structure = Some(progressions.to_vec());
        Ok(set)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn structure(&self) -> Option<&[Progression]> {
        self.structure.as_deref()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `#(A ∩ [lo, hi])`.
    pub fn count_in(&self, lo: u64, hi: u64) -> u64 {
        if lo > hi {
            return 0;
        }
        let a = self.elements.partition_point(|&x| x < lo);
        let b = self.elements.partition_point(|&x| x <= hi);
        (b - a) as u64
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `#(A ∩ [0, N]) / (N + 1)` for `N = 0..=horizon`.
pub fn density_profile(a: &IndexSet) -> Vec<BigRational> {
    profile_counts(a)
        .into_iter()
        .enumerate()
        .map(|(n, c)| ratio(c, n as u64 + 1))
        .collect()
}

/// Running counts `#(A ∩ [0, N])` for `N = 0..=horizon`.
pub fn profile_counts(a: &IndexSet) -> Vec<u64> {
    let mut counts = Vec::with_capacity(a.horizon as usize + 1);
    let mut it = a.elements.iter().peekable();
    let mut c = 0u64;
    for n in 0..=a.horizon {
        while it.next_if(|&&x| x <= n).is_some() {
            c += 1;
        }
        counts.push(c);
    }
    counts
}

/// Empirical lower and upper density: min and max of the profile over
/// `N ∈ [tail_start, horizon]`. The default tail is the last half.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDensity {
    pub lower: BigRational,
    pub upper: BigRational,
    pub tail_start: u64,
}

pub fn empirical_density(a: &IndexSet, tail_start: Option<u64>) -> EmpiricalDensity {
    let tail_start = tail_start.unwrap_or(a.horizon / 2).min(a.horizon);
    let profile = density_profile(a);
    let tail = &profile[tail_start as usize..];
    EmpiricalDensity {
        lower: tail.iter().min().cloned().unwrap_or_else(BigRational::zero),
        upper: tail.iter().max().cloned().unwrap_or_else(BigRational::zero),
        tail_start,
    }
}

/// Maximum count of `A` in a window of `window` consecutive integers inside
/// `[0, horizon]`, with the exact ratio count / window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BanachWindow {
    pub window: u64,
    pub max_count: u64,
    /// First index of a window attaining the maximum.
    pub argmax_start: u64,
    #[serde(with = "crate::report::rational_serde")]
    pub ratio: BigRational,
}

pub fn banach_window(a: &IndexSet, window: u64) -> Result<BanachWindow> {
    if window == 0 || window > a.horizon {
        return Err(Error::InvalidArgument(format!(
            "window must lie in [1, {}], got {window}",
            a.horizon
        )));
    }
    let last_start = a.horizon - window + 1;
    // a best window can be slid right until it starts at an element or hits the horizon
    let mut best = (a.count_in(last_start, a.horizon), last_start);
    for &x in &a.elements {
        let start = x.min(last_start);
        let c = a.count_in(start, start + window - 1);
        if c > best.0 || (c == best.0 && start < best.1) {
            best = (c, start);
        }
    }
    Ok(BanachWindow {
        window,
        max_count: best.0,
        argmax_start: best.1,
        ratio: ratio(best.0, window),
    })
}

/// Largest `a_N / N` over `N ∈ [1, horizon]`.
pub fn max_banach_ratio(a: &IndexSet) -> Result<BigRational> {
    let mut best = BigRational::zero();
    for n in 1..=a.horizon {
        let r = banach_window(a, n)?.ratio;
        if r > best {
            best = r;
        }
        if best.is_one() {
            break;
        }
    }
    Ok(best)
}

/// Natural density of a union of arithmetic progressions, by
/// inclusion-exclusion over residue classes: a finite initial offset does not
/// change density, and each nonempty intersection of classes is a class modulo
/// the lcm of the steps. For such sets lower, upper and upper Banach density
/// coincide.
pub fn exact_ap_density(progressions: &[Progression]) -> Result<BigRational> {
    if progressions.len() > MAX_PROGRESSIONS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_PROGRESSIONS} progressions supported, got {}",
            progressions.len()
        )));
    }
    if progressions.iter().any(|p| p.step == 0) {
        return Err(Error::InvalidArgument("progression step must be positive".into()));
    }
    let mut total = BigRational::zero();
    let count = progressions.len();
    for mask in 1u32..(1u32 << count) {
        let mut class: Option<(u64, u64)> = Some((0, 1));
        for (i, p) in progressions.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            class = match class {
                Some((r, m)) => crt(r, m, p.start % p.step, p.step)?,
                None => None,
            };
        }
        if let Some((_, modulus)) = class {
            let term = ratio(1, modulus);
            if mask.count_ones() % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    Ok(total)
}

/// Combines `x ≡ r1 (mod m1)` and `x ≡ r2 (mod m2)`; `None` if incompatible.
fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> Result<Option<(u64, u64)>> {
    let (r1, m1, r2, m2) = (r1 as i128, m1 as i128, r2 as i128, m2 as i128);
    let g = m1.gcd(&m2);
    if (r2 - r1) % g != 0 {
        return Ok(None);
    }
    let lcm = m1 / g * m2;
    if lcm > u64::MAX as i128 {
        return Err(Error::Overflow(format!("progression lcm {lcm} exceeds 64 bits")));
    }
    // solve m1 * t ≡ r2 - r1 (mod m2)
    let ext = (m1 / g).extended_gcd(&(m2 / g));
    let t = ((r2 - r1) / g % (m2 / g)) * ext.x % (m2 / g);
    let x = (r1 + m1 * t).rem_euclid(lcm);
    Ok(Some((x as u64, lcm as u64)))
}
