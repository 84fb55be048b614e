//! Block-interaction estimates: how much mass block `l` sends to a lower
//! block `n`, and how often block `l` keeps at least half its weighted size.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::operator::OperatorT;
use crate::report::{rational_serde, Check, Claim, Relation, WitnessReport};
use crate::schedule::Schedule;
use crate::seqspace::{project, weighted_x, NormKind, NormValue, SparseVec};

fn check_pair(s: &Schedule, n: usize, l: usize) -> Result<()> {
    s.check_block(l)?;
    if n >= l {
        return Err(Error::InvalidArgument(format!("need n < l, got n = {n}, l = {l}")));
    }
    Ok(())
}

/// Largest `norm(P_n T^j P_l x)` over `j` in `[0, until)`, with the first
/// `j` attaining it.
fn max_leak(op: &OperatorT, block_part: &SparseVec, n: usize, until: u64, kind: NormKind) -> Result<(NormValue, u64)> {
    let s = op.schedule();
    let mut best = (SparseVec::zero().norm(kind), 0);
    for (j, v) in op.orbit(block_part)?.take(until as usize).enumerate() {
        let leak = project(&v, n, s)?.norm(kind);
        if leak.value > best.0.value {
            best = (leak, j as u64);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakWitness {
    pub n: usize,
    pub l: usize,
    pub norm: String,
    /// Number of iterates scanned, starting at `j = 0`.
    pub scanned: u64,
    pub max: NormValue,
    pub argmax: u64,
    pub bound: NormValue,
}

/// `sup_j norm(P_n T^j P_l x) <= norm(X_l) / 2^{2(l+1)}`.
///
/// `P_l x` is periodic with period `2 (b_{l+1} - b_l)`, so the supremum is a
/// maximum over one period. For `l^p` both sides are compared as `p`-th powers.
pub fn fhc0_check(
    op: &OperatorT,
    x: &SparseVec,
    n: usize,
    l: usize,
    kind: NormKind,
) -> Result<WitnessReport<LeakWitness>> {
    let s = op.schedule();
    check_pair(s, n, l)?;
    let part = project(x, l, s)?;
    let period = s.block_period(l);
    let (max, argmax) = max_leak(op, &part, n, period, kind)?;
    let bound = weighted_x(x, l, s)?
        .norm(kind)
        .scaled(&Dyadic::pow2(-2 * (l as i64 + 1)));
    let check = Check::new(
        format!("sup_j {kind}(P_{n} T^j P_{l} x) <= {kind}(X_{l}) / 2^{}", 2 * (l + 1)),
        max.value.clone(),
        Relation::Le,
        bound.value.clone(),
    );
    Ok(WitnessReport::new(
        Claim::Fhc0,
        LeakWitness {
            n,
            l,
            norm: kind.to_string(),
            scanned: period,
            max,
            argmax,
            bound,
        },
        vec![check],
    ))
}

/// `norm(P_n T^j P_l x) <= norm(P_l x) / 2^{2(l+1)}` for every
/// `j` in `[0, b_{l+1} - b_l - delta_l]`.
pub fn fhc1_check(
    op: &OperatorT,
    x: &SparseVec,
    n: usize,
    l: usize,
    kind: NormKind,
) -> Result<WitnessReport<LeakWitness>> {
    let s = op.schedule();
    check_pair(s, n, l)?;
    let part = project(x, l, s)?;
    let last = s.block_len(l) - s.delta(l);
    let (max, argmax) = max_leak(op, &part, n, last + 1, kind)?;
    let bound = part.norm(kind).scaled(&Dyadic::pow2(-2 * (l as i64 + 1)));
    let check = Check::new(
        format!(
            "max_(j <= {last}) {kind}(P_{n} T^j P_{l} x) <= {kind}(P_{l} x) / 2^{}",
            2 * (l + 1)
        ),
        max.value.clone(),
        Relation::Le,
        bound.value.clone(),
    );
    Ok(WitnessReport::new(
        Claim::Fhc1,
        LeakWitness {
            n,
            l,
            norm: kind.to_string(),
            scanned: last + 1,
            max,
            argmax,
            bound,
        },
        vec![check],
    ))
}

/// The window `I_i` of block `l` whose weighted coordinates may be lost at
/// offset `i`: `[b_{l+1}-i, b_{l+1}-i+delta_l)`, split across the block end
/// when `i < delta_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSet {
    pub l: usize,
    pub i: u64,
    /// Half-open intervals `[lo, hi)`.
    pub intervals: Vec<(u64, u64)>,
}

impl ExclusionSet {
    pub fn contains(&self, m: u64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= m && m < hi)
    }

    pub fn len(&self) -> u64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `I_i` for `0 <= i < b_{l+1} - b_l`. Offset `0` wraps to the block start.
pub fn exclusion_set(s: &Schedule, l: usize, i: u64) -> Result<ExclusionSet> {
    s.check_block(l)?;
    let len = s.block_len(l);
    if i >= len {
        return Err(Error::InvalidArgument(format!("offset {i} outside [0, {len})")));
    }
    let (start, end, delta) = (s.b(l), s.b(l + 1), s.delta(l));
    let mut intervals = Vec::with_capacity(2);
    if i >= delta {
        if delta > 0 {
            intervals.push((end - i, end - i + delta));
        }
    } else {
        if i > 0 {
            intervals.push((end - i, end));
        }
        intervals.push((start, start + delta - i));
    }
    Ok(ExclusionSet { l, i, intervals })
}

/// One period of the flags `norm(P_l T^j P_l x) >= norm(X_l) / 2`, from which
/// the count over any horizon follows.
#[derive(Clone, Debug)]
pub struct Fhc2Census {
    l: usize,
    delta: u64,
    len: u64,
    threshold: Dyadic,
    /// `prefix[j]` = number of good iterates among `0..j`.
    prefix: Vec<u64>,
    /// `norm(P_l T^j P_l x)` for `j` in one period.
    norms: Vec<Dyadic>,
    weighted: SparseVec,
}

impl Fhc2Census {
    pub fn new(op: &OperatorT, x: &SparseVec, l: usize) -> Result<Self> {
        let s = op.schedule();
        s.check_block(l)?;
        let part = project(x, l, s)?;
        let weighted = weighted_x(x, l, s)?;
        let threshold = weighted.l1().mul_pow2(-1);
        let period = s.block_period(l);
        let mut prefix = Vec::with_capacity(period as usize + 1);
        let mut norms = Vec::with_capacity(period as usize);
        prefix.push(0);
        for v in op.orbit(&part)?.take(period as usize) {
            let norm = project(&v, l, s)?.l1();
            let good = norm >= threshold;
            prefix.push(prefix.last().unwrap() + u64::from(good));
            norms.push(norm);
        }
        Ok(Fhc2Census {
            l,
            delta: s.delta(l),
            len: s.block_len(l),
            threshold,
            prefix,
            norms,
            weighted,
        })
    }

    pub fn period(&self) -> u64 {
        self.norms.len() as u64
    }

    pub fn threshold(&self) -> &Dyadic {
        &self.threshold
    }

    /// `norm(P_l T^j P_l x)`.
    pub fn norm_at(&self, j: u64) -> &Dyadic {
        &self.norms[(j % self.period()) as usize]
    }

    /// `#{j <= k : norm(P_l T^j P_l x) >= norm(X_l)/2}`.
    pub fn count_upto(&self, k: u64) -> u64 {
        let p = self.period();
        let full = (k + 1) / p;
        let rest = (k + 1) % p;
        full * self.prefix[p as usize] + self.prefix[rest as usize]
    }

    /// `1 - 2 delta_l / (k+1) - 2 delta_l / (b_{l+1} - b_l)`.
    pub fn bound(&self, k: u64) -> BigRational {
        let two_delta = BigInt::from(2 * self.delta);
        BigRational::from_integer(1.into())
            - BigRational::new(two_delta.clone(), BigInt::from(k) + 1u32)
            - BigRational::new(two_delta, self.len.into())
    }

    pub fn report(&self, k: u64) -> WitnessReport<Fhc2Witness> {
        let count = self.count_upto(k);
        let fraction = BigRational::new(count.into(), BigInt::from(k) + 1u32);
        let bound = self.bound(k);
        let check = Check::new(
            format!(
                "#{{j <= {k} : ||P_{l} T^j P_{l} x|| >= ||X_{l}||/2}} / {}",
                k + 1,
                l = self.l
            ),
            fraction.clone(),
            Relation::Ge,
            bound.clone(),
        );
        WitnessReport::new(
            Claim::Fhc2,
            Fhc2Witness {
                l: self.l,
                k,
                count,
                threshold: self.threshold.clone(),
                fraction,
                bound,
            },
            vec![check],
        )
    }

    /// Compares `norm(P_l T^j P_l x)` with `norm(X_l) - sum_{m in I_{j mod len}} |X_{l,m}|`
    /// over one period. The lower bound is not assumed anywhere; this only
    /// reports where it holds.
    pub fn exclusion_probe(&self, s: &Schedule) -> Result<ExclusionProbe> {
        let total = self.weighted.l1();
        let mut violations = Vec::new();
        for (j, norm) in self.norms.iter().enumerate() {
            let set = exclusion_set(s, self.l, j as u64 % self.len)?;
            let lost: Dyadic = self
                .weighted
                .iter()
                .filter(|&(m, _)| set.contains(m))
                .map(|(_, c)| c.abs())
                .sum();
            if *norm < &total - &lost {
                violations.push(j as u64);
            }
        }
        Ok(ExclusionProbe {
            l: self.l,
            checked: self.period(),
            violations,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fhc2Witness {
    pub l: usize,
    pub k: u64,
    pub count: u64,
    pub threshold: Dyadic,
    #[serde(with = "rational_serde")]
    pub fraction: BigRational,
    #[serde(with = "rational_serde")]
    pub bound: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionProbe {
    pub l: usize,
    pub checked: u64,
    /// Offsets `j` in one period where the lower bound fails.
    pub violations: Vec<u64>,
}

pub fn fhc2_fraction(op: &OperatorT, x: &SparseVec, l: usize, k: u64) -> Result<WitnessReport<Fhc2Witness>> {
    Ok(Fhc2Census::new(op, x, l)?.report(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op() -> OperatorT {
        OperatorT::new(Schedule::small2(4).unwrap()).unwrap()
    }

    fn e(k: u64) -> SparseVec {
        SparseVec::basis(k)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fhc0_tight_at_block_start() {
        let rep = fhc0_check(&op(), &e(32), 0, 1, NormKind::L1).unwrap();
        assert_eq!(rep.witness.max.value, Dyadic::from_int(1024));
        assert_eq!(rep.witness.bound.value, Dyadic::from_int(1024));
        assert!(rep.holds());
    }

    #[test]
    fn fhc0_other_norms() {
        for kind in [NormKind::Sup, NormKind::Lp(2), NormKind::Lp(3)] {
            let rep = fhc0_check(&op(), &e(40), 0, 1, kind).unwrap();
            assert!(rep.holds(), "{kind}: {}", rep.summary());
        }
    }

    #[test]
    fn fhc0_rejects_bad_pair() {
        assert!(fhc0_check(&op(), &e(32), 1, 1, NormKind::L1).is_err());
    }

    #[test]
    fn fhc1_examples() {
        let rep = fhc1_check(&op(), &e(32), 0, 1, NormKind::L1).unwrap();
        assert!(rep.witness.max.value.is_zero());
        assert_eq!(rep.witness.scanned, 51);
        let rep = fhc1_check(&op(), &e(95), 0, 1, NormKind::L1).unwrap();
        assert_eq!(rep.witness.max.value, Dyadic::pow2(-4));
        assert_eq!(rep.witness.argmax, 1);
        assert_eq!(rep.witness.bound.value, Dyadic::pow2(-4));
        assert!(rep.holds());
    }

    #[test]
    fn fhc2_worked_case() {
        let rep = fhc2_fraction(&op(), &e(32), 1, 127).unwrap();
        assert_eq!(rep.witness.fraction, rat(102, 128));
        assert_eq!(rep.witness.bound, rat(44, 128));
        assert!(rep.holds());
        let rep = fhc2_fraction(&op(), &e(0), 0, 127).unwrap();
        assert_eq!(rep.witness.fraction, rat(1, 1));
    }

    #[test]
    fn count_matches_direct_scan() {
        let t = op();
        let x = SparseVec::from_entries([(33, Dyadic::from_int(3)), (70, Dyadic::pow2(-2))]);
        let census = Fhc2Census::new(&t, &x, 1).unwrap();
        let s = t.schedule();
        let mut direct = 0;
        for (j, v) in t.orbit(&project(&x, 1, s).unwrap()).unwrap().take(400).enumerate() {
            if project(&v, 1, s).unwrap().l1() >= *census.threshold() {
                direct += 1;
            }
            assert_eq!(census.count_upto(j as u64), direct);
        }
    }

    #[test]
    fn exclusion_sets_have_length_delta() {
        let s = Schedule::small2(4).unwrap();
        for l in 0..4 {
            for i in 0..s.block_len(l) {
                let set = exclusion_set(&s, l, i).unwrap();
                assert_eq!(set.len(), s.delta(l), "l = {l}, i = {i}");
                for &(lo, hi) in &set.intervals {
                    assert!(s.b(l) <= lo && hi <= s.b(l + 1));
                }
            }
        }
        let set = exclusion_set(&s, 1, 5).unwrap();
        assert_eq!(set.intervals, vec![(91, 96), (32, 41)]);
    }
}
