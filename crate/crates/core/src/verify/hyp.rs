//! Constructive hypercyclicity: single-coordinate approximation, transitivity
//! and reiterative return sets.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::density::{banach_window, IndexSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::operator::OperatorT;
use crate::report::{biguint_serde, Check, Claim, Relation, WitnessReport};
use crate::seqspace::SparseVec;

fn uint(n: &BigUint) -> Dyadic {
    Dyadic::from(num_bigint::BigInt::from(n.clone()))
}

/// Output of the single-coordinate construction: `z e_m` whose
/// `exponent`-th iterate lands within the residual of `x_k e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyp0Witness {
    /// Block containing the target coordinate `k`.
    pub block: usize,
    pub s: u64,
    /// Block hosting `m`; `phi(t)` is the target block.
    pub t: usize,
    pub r: u64,
    pub m: u64,
    pub z: Dyadic,
    #[serde(with = "biguint_serde")]
    pub exponent: BigUint,
    /// `exponent = l * N + M`.
    #[serde(with = "biguint_serde")]
    pub l: BigUint,
    /// `2^{k-b_n} 2^{tau_t - delta_t - j} |x_k|`.
    pub residual: Dyadic,
}

/// One target coordinate `x_k e_k` started from `z e_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub k: u64,
    pub xk: Dyadic,
    pub m: u64,
    pub z: Dyadic,
    pub residual: Dyadic,
}

/// Several coordinates of one target block hosted in the same block `t`,
/// all reached by the same exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockWitness {
    pub block: usize,
    pub s: u64,
    pub t: usize,
    pub r: u64,
    #[serde(with = "biguint_serde")]
    pub exponent: BigUint,
    #[serde(with = "biguint_serde")]
    pub l: BigUint,
    pub entries: Vec<Placement>,
}

impl BlockWitness {
    pub fn z(&self) -> SparseVec {
        SparseVec::from_entries(self.entries.iter().map(|p| (p.m, p.z.clone())))
    }

    pub fn residual(&self) -> Dyadic {
        self.entries.iter().map(|p| &p.residual).sum()
    }
}

/// Builds `m`, `z` and an exponent `l N + M` with `|z| < eps` and
/// `||T^{lN+M}(z e_m) - x_k e_k|| < eps`. The smallest `s`, `t`, `r` are
/// chosen, so the witness is deterministic.
pub fn hyp0_witness(
    op: &OperatorT,
    eps: &Dyadic,
    k: u64,
    modulus: &BigUint,
    residue: &BigUint,
    xk: &Dyadic,
) -> Result<WitnessReport<Hyp0Witness>> {
    let rep = block_witness(op, eps, &[(k, xk.clone())], modulus, residue)?;
    let w = rep.witness;
    let p = w.entries.into_iter().next().expect("one entry in, one out");
    Ok(WitnessReport::new(
        Claim::Hyp0,
        Hyp0Witness {
            block: w.block,
            s: w.s,
            t: w.t,
            r: w.r,
            m: p.m,
            z: p.z,
            exponent: w.exponent,
            l: w.l,
            residual: p.residual,
        },
        rep.checks,
    ))
}

/// The single-coordinate construction run on every coordinate of one block
/// at once: with `kmax` the largest target, `x_k` starts at
/// `m_k = b_t + delta_t - tau_t - s - r - (kmax - k)`, so all of them arrive
/// at the same exponent. Each `|z_k| < eps` and each residual is `< eps`.
pub fn block_witness(
    op: &OperatorT,
    eps: &Dyadic,
    targets: &[(u64, Dyadic)],
    modulus: &BigUint,
    residue: &BigUint,
) -> Result<WitnessReport<BlockWitness>> {
    let s = op.schedule();
    if eps.signum() <= 0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if modulus.is_zero() || residue >= modulus {
        return Err(Error::InvalidArgument(format!(
            "need N >= 1 and 0 <= M < N, got N = {modulus}, M = {residue}"
        )));
    }
    let (first, _) = targets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no target coordinates".into()))?;
    let n = s.block_of(*first)?;
    let (bn, block_len) = (s.b(n), s.block_len(n));
    if let Some((k, _)) = targets.iter().find(|(k, _)| !(bn..bn + block_len).contains(k)) {
        return Err(Error::InvalidArgument(format!(
            "targets {first} and {k} lie in different blocks"
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some((k, _)) = targets.iter().find(|(k, _)| !seen.insert(*k)) {
        return Err(Error::InvalidArgument(format!("coordinate {k} given twice")));
    }
    let kmax = targets.iter().map(|(k, _)| *k).max().expect("nonempty");
    // N larger than any u64 cannot fit under delta_t - tau_t anyway
    let big_n = modulus
        .to_u64()
        .ok_or_else(|| Error::PrefixTooShort(format!("modulus {modulus} exceeds every block gap")))?;
    let m_res = residue.to_u64().expect("M < N fits");

    // smallest positive s with max |x_k| < eps 2^s; it is at least lead(x) - lead(eps)
    let mag = targets.iter().map(|(_, x)| x.abs()).max().expect("nonempty");
    let mut shift: u64 = match (mag.log2_floor(), eps.log2_floor()) {
        (Some(a), Some(b)) => (a - b - 1).max(1) as u64,
        _ => 1,
    };
    while mag >= eps.mul_pow2(shift as i64) {
        shift += 1;
    }

    let need = shift as i128 + big_n as i128 + block_len as i128;
    let t = (1..=s.prefix())
        .find(|&t| s.phi(t) == n && s.delta(t) as i128 - s.tau(t) as i128 >= need)
        .ok_or_else(|| {
            Error::PrefixTooShort(format!(
                "no block t <= {} with phi(t) = {n} and delta_t - tau_t >= {need}",
                s.prefix()
            ))
        })?;
    let (bt, delta_t, tau_t) = (s.b(t), s.delta(t), s.tau(t));
    let base = bt + delta_t - tau_t - shift;
    // exponent(r) = b_{t+1} - (base - r) + kmax - b_n; pick r with exponent ≡ M (mod N)
    let e0 = s.b(t + 1) - base + (kmax - bn);
    let r = (m_res + big_n - e0 % big_n) % big_n;
    let exponent = e0 + r;

    let mut entries = Vec::with_capacity(targets.len());
    let mut checks = Vec::new();
    for (k, xk) in targets {
        let (k, lag) = (*k, kmax - *k);
        let m = base - r - lag;
        let j = (k - bn).min(s.delta(n));
        let z = xk.mul_pow2(-((shift + r + lag + j) as i64));
        let residual = xk
            .abs()
            .mul_pow2((k - bn) as i64 + tau_t as i64 - delta_t as i64 - j as i64);
        checks.push(Check::new(format!("|z_{k}| < eps"), z.abs(), Relation::Lt, eps.clone()));
        checks.push(Check::new(
            format!("residual at e_{k} < eps"),
            residual.clone(),
            Relation::Lt,
            eps.clone(),
        ));
        checks.push(Check::new(
            format!("m_{k} >= b_t"),
            Dyadic::from(m as i64),
            Relation::Ge,
            Dyadic::from(bt as i64),
        ));
        checks.push(Check::new(
            format!("m_{k} <= b_t + delta_t"),
            Dyadic::from(m as i64),
            Relation::Le,
            Dyadic::from((bt + delta_t) as i64),
        ));
        entries.push(Placement {
            k,
            xk: xk.clone(),
            m,
            z,
            residual,
        });
    }

    let start = SparseVec::from_entries(entries.iter().map(|p| (p.m, p.z.clone())));
    let goal = SparseVec::from_entries(targets.iter().cloned());
    let image = op.apply_power_u64(&start, exponent)?;
    let distance = (&image - &goal).l1();
    let residual: Dyadic = entries.iter().map(|p| &p.residual).sum();
    let exponent_big = BigUint::from(exponent);
    let l = (&exponent_big - residue) / modulus;
    checks.push(Check::new(
        "||T^exponent z - x|| equals the summed residuals",
        distance,
        Relation::Eq,
        residual,
    ));
    checks.push(Check::new(
        "exponent mod N = M",
        uint(&(&exponent_big % modulus)),
        Relation::Eq,
        uint(residue),
    ));
    Ok(WitnessReport::new(
        Claim::Hyp0,
        BlockWitness {
            block: n,
            s: shift,
            t,
            r,
            exponent: exponent_big,
            l,
            entries,
        },
        checks,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitivityWitness {
    pub z: SparseVec,
    #[serde(with = "biguint_serde")]
    pub n: BigUint,
    /// Period of the starting point `y`.
    #[serde(with = "biguint_serde")]
    pub base_period: BigUint,
    /// Per-coordinate tolerance, `eps / 2^ceil(log2 c)` for `c` coordinates.
    pub eps_per_coordinate: Dyadic,
    pub steps: Vec<TransitivityStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitivityStep {
    #[serde(with = "biguint_serde")]
    pub modulus: BigUint,
    #[serde(with = "biguint_serde")]
    pub residue: BigUint,
    pub witness: BlockWitness,
}

/// Finds `z` and `n` with `||z|| < eps`, `n` a multiple of the period of `y`,
/// and `||T^n(y + z) - x|| < eps`.
///
/// The coordinates of `x - y` are handled one target block at a time by
/// [`block_witness`]; each step's modulus is the lcm of the period of `y` and
/// the hosting blocks before it, and its residue is the previous exponent, so
/// later steps leave the earlier ones in place.
pub fn transitivity_witness(
    op: &OperatorT,
    y: &SparseVec,
    x: &SparseVec,
    eps: &Dyadic,
) -> Result<WitnessReport<TransitivityWitness>> {
    if eps.signum() <= 0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let s = op.schedule();
    let base_period = BigUint::from(op.period_of(y)?);
    op.period_of(x)?;
    let target = x - y;
    let count = target.len().max(1) as u64;
    let eps_each = eps.mul_pow2(-(count.next_power_of_two().trailing_zeros() as i64));
    let mut groups: BTreeMap<usize, Vec<(u64, Dyadic)>> = BTreeMap::new();
    for (k, c) in target.iter() {
        groups.entry(s.block_of(k)?).or_default().push((k, c.clone()));
    }

    let mut z = SparseVec::zero();
    let mut acc = BigUint::zero();
    let mut lcm = base_period.clone();
    let mut steps = Vec::new();
    let mut checks = Vec::new();
    for coords in groups.into_values() {
        let modulus = lcm.clone();
        let residue = &acc % &modulus;
        let report = block_witness(op, &eps_each, &coords, &modulus, &residue)?;
        checks.extend(report.checks.iter().filter(|c| !c.holds).cloned());
        let w = report.witness;
        z = z + &w.z();
        lcm = lcm.lcm(&BigUint::from(s.block_period(w.t)));
        acc = w.exponent.clone();
        steps.push(TransitivityStep {
            modulus,
            residue,
            witness: w,
        });
    }
    let n = if steps.is_empty() { base_period.clone() } else { acc };

    let moved = op.apply_power(&(y + &z), &n)?;
    let distance = (&moved - x).l1();
    checks.push(Check::new("||z|| < eps", z.l1(), Relation::Lt, eps.clone()));
    checks.push(Check::new(
        "n mod period(y) = 0",
        uint(&(&n % &base_period)),
        Relation::Eq,
        Dyadic::zero(),
    ));
    checks.push(Check::new(
        "||T^n(y + z) - x|| < eps",
        distance,
        Relation::Lt,
        eps.clone(),
    ));
    Ok(WitnessReport::new(
        Claim::Transitivity,
        TransitivityWitness {
            z,
            n,
            base_period,
            eps_per_coordinate: eps_each,
            steps,
        },
        checks,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReiterativeWitness {
    /// Vector whose orbit returns to the ball at every hit.
    pub y: SparseVec,
    #[serde(with = "biguint_serde")]
    pub kstar: BigUint,
    /// Period of the center.
    pub d: u64,
    pub hits: IndexSet,
    /// Tolerance handed to the transitivity construction.
    pub inner_eps: Dyadic,
}

/// Return times `kstar + l d`, `0 <= l <= depth`, of a single orbit to the
/// ball of `radius` around `center`, where `d` is the period of the center.
///
/// The starting vector comes from [`transitivity_witness`] at tolerance
/// `radius / 2^{depth d}`; since `||T|| <= 2` that tolerance survives `depth d`
/// further steps.
pub fn reiterative_witness(
    op: &OperatorT,
    center: &SparseVec,
    radius: &Dyadic,
    depth: u64,
) -> Result<WitnessReport<ReiterativeWitness>> {
    if radius.signum() <= 0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let d = op.period_of(center)?;
    let spread = depth
        .checked_mul(d)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| Error::Resource(format!("depth {depth} times period {d} overflows")))?;
    let (y, kstar, inner_eps, mut checks) = if center.is_zero() {
        (SparseVec::zero(), BigUint::zero(), radius.clone(), Vec::new())
    } else {
        let inner_eps = radius.mul_pow2(-(spread as i64));
        let tw = transitivity_witness(op, &SparseVec::zero(), center, &inner_eps)?;
        let checks: Vec<Check> = tw.checks.into_iter().filter(|c| !c.holds).collect();
        (tw.witness.z, tw.witness.n, inner_eps, checks)
    };

    let kstar_small = kstar
        .to_u64()
        .filter(|k| k.checked_add(spread).is_some())
        .ok_or_else(|| Error::Resource(format!("return time {kstar} does not fit an index set")))?;
    let mut state = op.apply_power(&y, &kstar)?;
    let mut hits = Vec::new();
    for l in 0..=depth {
        if l > 0 {
            state = op.apply_power_u64(&state, d)?;
        }
        let time = kstar_small + l * d;
        checks.push(Check::new(
            format!("||T^(k*+{l}d) y - center|| <= radius"),
            (&state - center).l1(),
            Relation::Le,
            radius.clone(),
        ));
        hits.push(time);
    }
    // leave room for a window of `spread + 1` even when the first hit is at 0
    let hits = IndexSet::new(hits, (kstar_small + spread).max(spread + 1))?;
    if depth >= 1 {
        let window = banach_window(&hits, spread + 1)?;
        let floor = num_rational::BigRational::new((depth + 1).into(), (spread + 1).into());
        checks.push(Check::new(
            format!("hit ratio in a window of {}", spread + 1),
            window.ratio.clone(),
            Relation::Ge,
            floor,
        ));
        // equality is all one can ask for when d = 1
        let relation = if d > 1 { Relation::Gt } else { Relation::Ge };
        checks.push(Check::new(
            "hit ratio against 1/d",
            window.ratio,
            relation,
            num_rational::BigRational::new(1.into(), d.into()),
        ));
    }
    Ok(WitnessReport::new(
        Claim::Reiterative,
        ReiterativeWitness {
            y,
            kstar,
            d,
            hits,
            inner_eps,
        },
        checks,
    ))
}
