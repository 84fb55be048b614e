//! Orbits of nonzero finite vectors stay away from 0 on a set of positive
//! lower density: the escalation scan across blocks and the finite-horizon
//! certificate built on the top block.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::density::IndexSet;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::operator::OperatorT;
use crate::report::{rational_serde, Check, Claim, Relation, WitnessReport};
use crate::seqspace::{project, weighted_x, SparseVec};

/// `T^{period} e_k = e_k` for the block period of `k`, evaluated without
/// assuming any period.
pub fn periodicity_check(op: &OperatorT, k: u64) -> Result<WitnessReport<u64>> {
    let s = op.schedule();
    let period = s.block_period(s.block_of(k)?);
    let e = SparseVec::basis(k);
    let back = op.apply_power_stepped(&e, period)?;
    let check = Check::new(
        format!("||T^{period} e_{k} - e_{k}|| = 0"),
        (&back - &e).l1(),
        Relation::Eq,
        Dyadic::zero(),
    );
    Ok(WitnessReport::new(Claim::Periodicity, period, vec![check]))
}

fn top_block(op: &OperatorT, x: &SparseVec) -> Result<usize> {
    let k = x
        .max_index()
        .ok_or_else(|| Error::InvalidArgument("the zero vector has no top block".into()))?;
    op.schedule().block_of(k)
}

/// One escalation step: at `j`, the blocks above `from` push more than a
/// quarter of `||X_from||` into block `from`, most of it coming from block `to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escalation {
    pub from: usize,
    pub j: u64,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PrelimOutcome {
    /// `sum_{l > block} ||P_block T^j P_l x|| <= ||X_block|| / 4` for all `j`:
    /// either `block` is the top block, or a full period was scanned.
    Certificate { block: usize, top: bool },
    /// No escalation from `level` within the horizon, and the horizon is
    /// shorter than the period, so nothing is claimed.
    HorizonExhausted { level: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrelimWitness {
    pub l0: usize,
    pub escalation: Vec<Escalation>,
    pub outcome: PrelimOutcome,
}

/// Follows the escalating block sequence `l_0 < l_1 < ...` for a nonzero `x`
/// and stops at a certificate or when the horizon runs out.
pub fn prelim_scan(op: &OperatorT, x: &SparseVec, horizon: u64) -> Result<WitnessReport<PrelimWitness>> {
    let s = op.schedule();
    let top = top_block(op, x)?;
    let total = x.l1();
    let l0 = (0..=top)
        .find(|&l| {
            let part = x.restrict(s.b(l), s.b(l + 1)).l1();
            part >= total.mul_pow2(-(l as i64 + 1))
        })
        .expect("the top block always qualifies");
    let x_norm = |l: usize| weighted_x(x, l, s).map(|w| w.l1());
    let base = x_norm(l0)?;

    let mut checks = Vec::new();
    let mut escalation = Vec::new();
    let mut level = l0;
    let outcome = loop {
        if level == top {
            break PrelimOutcome::Certificate {
                block: level,
                top: true,
            };
        }
        let level_norm = x_norm(level)?;
        let quarter = level_norm.mul_pow2(-2);
        // the part above `level` has a period; scanning it settles every j
        let period = op.period_of(&x.restrict(s.b(level + 1), u64::MAX))?;
        let until = horizon.min(period - 1);
        let parts: Vec<(usize, SparseVec)> = (level + 1..=top)
            .map(|l| Ok((l, project(x, l, s)?)))
            .collect::<Result<_>>()?;
        let mut orbits = parts.iter().map(|(_, p)| op.orbit(p)).collect::<Result<Vec<_>>>()?;
        let mut hit = None;
        for j in 0..=until {
            let leaks: Vec<Dyadic> = orbits
                .iter_mut()
                .map(|o| project(&o.next().expect("orbits are infinite"), level, s).map(|v| v.l1()))
                .collect::<Result<_>>()?;
            let sum: Dyadic = leaks.iter().sum();
            if sum > quarter {
                hit = Some((j, leaks));
                break;
            }
        }
        let Some((j, leaks)) = hit else {
            if until == period - 1 {
                break PrelimOutcome::Certificate {
                    block: level,
                    top: false,
                };
            }
            break PrelimOutcome::HorizonExhausted { level };
        };
        // the weights 2^{level}/2^{l+2} over l > level sum to 1/4, so some l exceeds its share
        let (idx, leak) = leaks
            .iter()
            .enumerate()
            .find(|(i, leak)| {
                let l = parts[*i].0 as i64;
                **leak > level_norm.mul_pow2(level as i64 - l - 2)
            })
            .expect("a quarter cannot be exceeded without one block exceeding its share");
        let next = parts[idx].0;
        let next_norm = x_norm(next)?;
        if escalation.is_empty() {
            let floor = s.block_len(next) - s.delta(next);
            checks.push(Check::new(
                format!("j_1 > b_{{l_1+1}} - b_{{l_1}} - delta_{{l_1}} (l_1 = {next})"),
                Dyadic::from_int(j as i64),
                Relation::Gt,
                Dyadic::from_int(floor as i64),
            ));
        }
        checks.push(Check::new(
            format!(
                "||P_{level} T^{j} P_{next} x|| > ||X_{level}|| 2^{level}/2^{}",
                next + 2
            ),
            leak.clone(),
            Relation::Gt,
            level_norm.mul_pow2(level as i64 - next as i64 - 2),
        ));
        checks.push(Check::new(
            format!("||X_{next}|| >= 2^{} ||X_{level}||", next + level),
            next_norm.clone(),
            Relation::Ge,
            level_norm.mul_pow2((next + level) as i64),
        ));
        checks.push(Check::new(
            format!("||X_{next}|| >= ||X_{l0}||"),
            next_norm,
            Relation::Ge,
            base.clone(),
        ));
        escalation.push(Escalation {
            from: level,
            j,
            to: next,
        });
        level = next;
    };
    Ok(WitnessReport::new(
        Claim::Prelim,
        PrelimWitness {
            l0,
            escalation,
            outcome,
        },
        checks,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoolWitness {
    /// Top block of the support.
    pub n: usize,
    pub tau: Dyadic,
    pub horizon: u64,
    /// Iterates `j <= horizon` with `||T^j x|| < tau`.
    pub below: IndexSet,
    #[serde(with = "rational_serde")]
    pub fraction: BigRational,
    #[serde(with = "rational_serde")]
    pub bound: BigRational,
}

/// With `n` the top block of `x` and `tau = ||X_n|| / 4`, checks
/// `#{j <= horizon : ||T^j x|| >= tau} / (horizon+1) >= 1 - 2 delta_n/(horizon+1) - 2 delta_n/(b_{n+1}-b_n)`.
///
/// Nothing above block `n` can feed it, so `||T^j x|| >= ||P_n T^j P_n x|| - 0`
/// and the count inherits the bound of [`super::fhc2_fraction`].
pub fn cool_certificate(op: &OperatorT, x: &SparseVec, horizon: u64) -> Result<WitnessReport<CoolWitness>> {
    let s = op.schedule();
    let n = top_block(op, x)?;
    let tau = weighted_x(x, n, s)?.l1().mul_pow2(-2);
    let period = op.period_of(x)?;
    let scan = horizon.min(period - 1);
    let mut below_one_period = Vec::new();
    for (j, v) in op.orbit(x)?.take(scan as usize + 1).enumerate() {
        if v.l1() < tau {
            below_one_period.push(j as u64);
        }
    }
    let mut below = Vec::new();
    let mut offset = 0u64;
    'outer: loop {
        for &j in &below_one_period {
            let t = offset + j;
            if t > horizon {
                break 'outer;
            }
            below.push(t);
        }
        offset += period;
        if offset > horizon {
            break;
        }
    }
    let below = IndexSet::new(below, horizon)?;
    let size = BigInt::from(horizon) + 1u32;
    let fraction = BigRational::new(&size - BigInt::from(below.len()), size.clone());
    let two_delta = BigInt::from(2 * s.delta(n));
    let len = BigInt::from(s.block_len(n));
    let asymptotic = BigRational::from_integer(1.into()) - BigRational::new(two_delta.clone(), len);
    let bound = &asymptotic - BigRational::new(two_delta, size);
    let checks = vec![
        Check::new(
            format!("#{{j <= {horizon} : ||T^j x|| >= tau}} / {}", horizon + 1),
            fraction.clone(),
            Relation::Ge,
            bound.clone(),
        ),
        Check::new(
            format!("1 - 2 delta_{n} / (b_{} - b_{n}) > 0", n + 1),
            asymptotic,
            Relation::Gt,
            BigRational::from_integer(0.into()),
        ),
    ];
    Ok(WitnessReport::new(
        Claim::Cool,
        CoolWitness {
            n,
            tau,
            horizon,
            below,
            fraction,
            bound,
        },
        checks,
    ))
}
