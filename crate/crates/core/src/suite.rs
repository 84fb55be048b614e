//! Seeded batteries of checker runs.
//!
//! Random inputs are drawn sequentially from one ChaCha stream, so a seed
//! fixes every case; the checks then run in parallel and come back in case
//! order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::operator::OperatorT;
use crate::report::Claim;
use crate::schedule::Schedule;
use crate::seqspace::{NormKind, SparseVec};
use crate::verify::{cool_certificate, fhc0_check, fhc1_check, periodicity_check, Fhc2Census};

pub const DEFAULT_SEED: u64 = 0x5eed_0b10c;
pub const DEFAULT_TRIALS: usize = 100;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `±m 2^e` with `m` in `[1, 15]` and `e` in `[-6, 6]`.
pub fn random_dyadic<R: Rng>(rng: &mut R) -> Dyadic {
    let m: i64 = rng.random_range(1..=15);
    let sign = if rng.random_bool(0.5) { -1 } else { 1 };
    Dyadic::from_int(sign * m).mul_pow2(rng.random_range(-6..=6))
}

/// Up to `max_support` random coordinates inside block `l`, at least one.
pub fn random_block_vector<R: Rng>(rng: &mut R, s: &Schedule, l: usize, max_support: usize) -> SparseVec {
    random_in(rng, s.b(l), s.b(l + 1), max_support)
}

/// Up to `max_support` random coordinates below `limit`, at least one.
pub fn random_sparse<R: Rng>(rng: &mut R, limit: u64, max_support: usize) -> SparseVec {
    random_in(rng, 0, limit, max_support)
}

fn random_in<R: Rng>(rng: &mut R, lo: u64, hi: u64, max_support: usize) -> SparseVec {
    let count = rng.random_range(1..=max_support.max(1));
    let mut v = SparseVec::zero();
    for _ in 0..count {
        let k = rng.random_range(lo..hi);
        v.add_at(k, &random_dyadic(rng));
    }
    if v.is_zero() {
        v.add_at(rng.random_range(lo..hi), &Dyadic::one());
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub key: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub claim: Claim,
    pub cases: Vec<CaseOutcome>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseOutcome> {
        self.cases.iter().filter(|c| !c.holds)
    }

    pub fn summary(&self) -> String {
        let failed = self.failures().count();
        format!("{}: {} cases, {} failed", self.claim, self.cases.len(), failed)
    }
}

fn run<T: Sync>(
    claim: Claim,
    cases: Vec<T>,
    f: impl Fn(&T) -> Result<CaseOutcome> + Sync + Send,
) -> Result<SuiteResult> {
    let cases = cases.par_iter().map(f).collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult { claim, cases })
}

/// `T^{period} e_k = e_k` for every `k < limit`.
pub fn periodicity_suite(op: &OperatorT, limit: u64) -> Result<SuiteResult> {
    if limit > op.schedule().index_limit() {
        return Err(Error::PrefixExceeded(format!(
            "limit {limit} beyond b_{} = {}",
            op.schedule().prefix() + 1,
            op.schedule().index_limit()
        )));
    }
    run(Claim::Periodicity, (0..limit).collect(), |&k| {
        let rep = periodicity_check(op, k)?;
        Ok(CaseOutcome {
            key: format!("e_{k}"),
            holds: rep.holds(),
            detail: format!("period {}", rep.witness),
        })
    })
}

/// `trials` random block-`l` vectors for each `1 <= l <= max_l`; every pair
/// `n < l` is checked on each.
fn block_corpus(op: &OperatorT, max_l: usize, trials: usize, seed: u64) -> Result<Vec<(usize, usize, SparseVec)>> {
    let s = op.schedule();
    s.check_block(max_l)?;
    let mut rng = rng(seed);
    let mut cases = Vec::new();
    for l in 1..=max_l {
        for t in 0..trials {
            let x = random_block_vector(&mut rng, s, l, 8);
            cases.push((l, t, x));
        }
    }
    Ok(cases)
}

fn leak_suite(
    claim: Claim,
    op: &OperatorT,
    max_l: usize,
    trials: usize,
    seed: u64,
    kind: NormKind,
) -> Result<SuiteResult> {
    let cases = block_corpus(op, max_l, trials, seed)?;
    let pairs: Vec<(usize, usize, usize, &SparseVec)> = cases
        .iter()
        .flat_map(|(l, t, x)| (0..*l).map(move |n| (n, *l, *t, x)))
        .collect();
    run(claim, pairs, |&(n, l, t, x)| {
        let rep = match claim {
            Claim::Fhc0 => fhc0_check(op, x, n, l, kind)?,
            _ => fhc1_check(op, x, n, l, kind)?,
        };
        Ok(CaseOutcome {
            key: format!("l={l} trial={t} n={n}"),
            holds: rep.holds(),
            detail: format!("max {} vs bound {}", rep.witness.max.value, rep.witness.bound.value),
        })
    })
}

pub fn fhc0_suite(op: &OperatorT, max_l: usize, trials: usize, seed: u64, kind: NormKind) -> Result<SuiteResult> {
    leak_suite(Claim::Fhc0, op, max_l, trials, seed, kind)
}

pub fn fhc1_suite(op: &OperatorT, max_l: usize, trials: usize, seed: u64, kind: NormKind) -> Result<SuiteResult> {
    leak_suite(Claim::Fhc1, op, max_l, trials, seed, kind)
}

/// Random block-`l` vectors for `l <= max_l`; the fraction bound is checked
/// for every horizon `k` in `[0, 4 * period]`.
pub fn fhc2_suite(op: &OperatorT, max_l: usize, trials: usize, seed: u64) -> Result<SuiteResult> {
    let s = op.schedule();
    s.check_block(max_l)?;
    let mut rng = rng(seed);
    let mut cases = Vec::new();
    for l in 0..=max_l {
        for t in 0..trials {
            cases.push((l, t, random_block_vector(&mut rng, s, l, 8)));
        }
    }
    run(Claim::Fhc2, cases, |(l, t, x)| {
        let census = Fhc2Census::new(op, x, *l)?;
        let last = 4 * census.period();
        let first_bad = (0..=last).find(|&k| !census.report(k).holds());
        Ok(CaseOutcome {
            key: format!("l={l} trial={t}"),
            holds: first_bad.is_none(),
            detail: match first_bad {
                None => format!("k in [0, {last}] all hold"),
                Some(k) => format!("fails at k = {k}"),
            },
        })
    })
}

/// Random nonzero vectors with top block `<= max_top`, horizon eight periods.
pub fn cool_suite(op: &OperatorT, max_top: usize, trials: usize, seed: u64) -> Result<SuiteResult> {
    let s = op.schedule();
    s.check_block(max_top)?;
    let mut rng = rng(seed);
    let cases: Vec<(usize, SparseVec)> = (0..trials)
        .map(|t| (t, random_sparse(&mut rng, s.b(max_top + 1), 6)))
        .collect();
    run(Claim::Cool, cases, |(t, x)| {
        let horizon = 8 * op.period_of(x)?;
        let rep = cool_certificate(op, x, horizon)?;
        Ok(CaseOutcome {
            key: format!("trial={t}"),
            holds: rep.holds(),
            detail: format!(
                "n={} fraction {} vs bound {}",
                rep.witness.n, rep.witness.fraction, rep.witness.bound
            ),
        })
    })
}
