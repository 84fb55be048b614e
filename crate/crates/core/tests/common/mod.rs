//! Reference implementations written straight from the definitions, sharing
//! nothing with the library beyond its public types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pchaos::{Dyadic, SparseVec};

pub type RVec = BTreeMap<u64, BigRational>;

/// Raw schedule tables: `phi[n]`, `delta[n]` for `n <= p`, `tau[n]` for
/// `1 <= n <= p` (index 0 unused), `b[n]` for `n <= p + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tables {
    pub phi: Vec<usize>,
    pub delta: Vec<u64>,
    pub tau: Vec<u64>,
    pub b: Vec<u64>,
    pub mult: Vec<u64>,
}

pub fn triangular(len: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut row = 1;
    while out.len() < len {
        for v in 0..row {
            out.push(v);
        }
        row += 1;
    }
    out.truncate(len);
    out
}

/// tau_n = delta_{n-1} + 2(n+1), delta_n = tau_n + 5 * 2^n, b_1 = 32, each
/// block multiplier the least one keeping 2 delta_n < len_n and the ratio
/// delta_n / len_n strictly decreasing.
pub fn small2_tables(p: usize) -> Tables {
    let mut delta = vec![0u64];
    let mut tau = vec![0u64];
    let mut b = vec![0u64, 32];
    let mut mult = vec![0u64];
    for n in 1..=p {
        let t = delta[n - 1] + 2 * (n as u64 + 1);
        let d = t + 5 * (1u64 << n);
        let prev = b[n] - b[n - 1];
        let mut m = 1;
        loop {
            let len = 2 * m * prev;
            let gap = 2 * d < len;
            let ratio = n < 2 || (d as u128) * (prev as u128) < (delta[n - 1] as u128) * (len as u128);
            if gap && ratio {
                break;
            }
            m += 1;
        }
        tau.push(t);
        delta.push(d);
        mult.push(m);
        b.push(b[n] + 2 * m * prev);
    }
    Tables {
        phi: triangular(p + 1),
        delta,
        tau,
        b,
        mult,
    }
}

pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn block(t: &Tables, k: u64) -> usize {
    (0..t.b.len() - 1)
        .find(|&n| t.b[n] <= k && k < t.b[n + 1])
        .expect("index in prefix")
}

fn add(v: &mut RVec, k: u64, c: BigRational) {
    let e = v.entry(k).or_insert_with(BigRational::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&k);
    }
}

/// One step of the operator, case by case.
pub fn step(t: &Tables, v: &RVec) -> RVec {
    let mut out = RVec::new();
    for (&k, c) in v {
        let n = block(t, k);
        let off = k - t.b[n];
        if k + 1 < t.b[n + 1] {
            let w = if off < t.delta[n] { 2 } else { 1 };
            add(&mut out, k + 1, c * BigRational::from_integer(w.into()));
        } else if n == 0 {
            add(&mut out, 0, -c.clone());
        } else {
            add(&mut out, t.b[t.phi[n]], c * pow2(-(t.tau[n] as i64)));
            add(&mut out, t.b[n], -(c * pow2(-(t.delta[n] as i64))));
        }
    }
    out
}

pub fn power(t: &Tables, v: &RVec, j: u64) -> RVec {
    let mut cur = v.clone();
    for _ in 0..j {
        cur = step(t, &cur);
    }
    cur
}

pub fn l1(v: &RVec) -> BigRational {
    v.values().map(|c| c.abs()).sum()
}

pub fn restrict(v: &RVec, lo: u64, hi: u64) -> RVec {
    v.range(lo..hi).map(|(&k, c)| (k, c.clone())).collect()
}

/// Block `n` weighted by `2^{#[k - b_n, delta_n)}`.
pub fn weighted(t: &Tables, v: &RVec, n: usize) -> RVec {
    restrict(v, t.b[n], t.b[n + 1])
        .into_iter()
        .map(|(k, c)| {
            let w = t.delta[n].saturating_sub(k - t.b[n]);
            (k, c * pow2(w as i64))
        })
        .collect()
}

pub fn to_r(v: &SparseVec) -> RVec {
    v.iter().map(|(k, c)| (k, c.to_rational())).collect()
}

pub fn from_r(v: &RVec) -> SparseVec {
    SparseVec::from_entries(v.iter().map(|(&k, c)| (k, Dyadic::from_rational(c).expect("dyadic"))))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
