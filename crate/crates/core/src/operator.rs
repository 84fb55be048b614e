//! The block operator `T`.
//!
//! On block `n = [b_n, b_{n+1})` the operator is a forward shift with weight 2
//! on the first `delta_n` positions and weight 1 afterwards. The last index of
//! a block wraps:
//!
//! ```text
//! T e_{b_{n+1}-1} = 2^{-tau_n} e_{b_phi(n)} - 2^{-delta_n} e_{b_n}   (n >= 1)
//! T e_{b_1-1}     = -e_0
//! ```
//!
//! Every `e_k` in block `n` satisfies `T^{2(b_{n+1}-b_n)} e_k = e_k`, which
//! lets [`OperatorT::apply_power`] reduce arbitrarily large exponents.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::seqspace::SparseVec;

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
const DEFAULT_MEMO_CAP: usize = 1 << 16;

pub struct OperatorT {
    schedule: Schedule,
    support_cap: usize,
    memo_cap: usize,
    memo: Mutex<HashMap<(u64, u64), Arc<SparseVec>>>,
}

impl Clone for OperatorT {
    fn clone(&self) -> Self {
        OperatorT {
            schedule: self.schedule.clone(),
            support_cap: self.support_cap,
            memo_cap: self.memo_cap,
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for OperatorT {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorT")
            .field("prefix", &self.schedule.prefix())
            .field("support_cap", &self.support_cap)
            .finish()
    }
}

/// Number of doubling positions in `[from, to)` for a block with `delta`
/// doubling slots, all offsets relative to the block start.
fn doublings(from: u64, to: u64, delta: u64) -> u64 {
    to.min(delta).saturating_sub(from)
}

impl OperatorT {
    /// Wraps a schedule after checking every admissibility condition.
    pub fn new(schedule: Schedule) -> Result<Self> {
        let report = schedule.validate();
        if !report.all_pass() {
            return Err(Error::InvalidSchedule(report));
        }
        Ok(OperatorT {
            schedule,
            support_cap: DEFAULT_SUPPORT_CAP,
            memo_cap: DEFAULT_MEMO_CAP,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn check_support(&self, v: &SparseVec) -> Result<()> {
        match v.max_index() {
            Some(k) if k >= self.schedule.index_limit() => Err(Error::PrefixExceeded(format!(
                "support reaches index {k}, beyond b_{} = {}",
                self.schedule.prefix() + 1,
                self.schedule.index_limit()
            ))),
            _ => Ok(()),
        }
    }

    fn guard(&self, len: usize) -> Result<()> {
        if len > self.support_cap {
            return Err(Error::Resource(format!(
                "intermediate support {len} exceeds the cap of {}",
                self.support_cap
            )));
        }
        Ok(())
    }

    /// Adds `c * T e_k` into `out`.
    fn push_image(&self, out: &mut SparseVec, k: u64, c: &Dyadic) -> Result<()> {
        let s = &self.schedule;
        let n = s.block_of(k)?;
        let (start, end) = (s.b(n), s.b(n + 1));
        if k < start + s.delta(n) {
            out.add_at(k + 1, &c.mul_pow2(1));
        } else if k + 1 < end {
            out.add_at(k + 1, c);
        } else if n == 0 {
            out.add_at(0, &-c);
        } else {
            out.add_at(s.b(s.phi(n)), &c.mul_pow2(-(s.tau(n) as i64)));
            out.add_at(start, &-c.mul_pow2(-(s.delta(n) as i64)));
        }
        Ok(())
    }

    pub fn apply(&self, v: &SparseVec) -> Result<SparseVec> {
        self.check_support(v)?;
        let mut out = SparseVec::zero();
        for (k, c) in v.iter() {
            self.push_image(&mut out, k, c)?;
        }
        Ok(out)
    }

    /// `T^j v` by `j` single steps. Reference path for [`Self::apply_power`].
    pub fn apply_power_naive(&self, v: &SparseVec, j: u64) -> Result<SparseVec> {
        let mut cur = v.clone();
        for _ in 0..j {
            cur = self.apply(&cur)?;
            self.guard(cur.len())?;
        }
        Ok(cur)
    }

    /// Iterator over `v, T v, T^2 v, ...`.
    pub fn orbit<'a>(&'a self, v: &SparseVec) -> Result<Orbit<'a>> {
        self.check_support(v)?;
        Ok(Orbit {
            op: self,
            next: Some(v.clone()),
        })
    }

    /// `T^j v` for an arbitrary-precision `j`.
    pub fn apply_power(&self, v: &SparseVec, j: &BigUint) -> Result<SparseVec> {
        self.check_support(v)?;
        let mut out = SparseVec::zero();
        for (k, c) in v.iter() {
            let n = self.schedule.block_of(k)?;
            let r = (j % self.schedule.block_period(n))
                .to_u64()
                .expect("residue below a u64 period");
            let image = self.basis_power(k, r)?;
            out.add_scaled(c, &image);
            self.guard(out.len())?;
        }
        Ok(out)
    }

    pub fn apply_power_u64(&self, v: &SparseVec, j: u64) -> Result<SparseVec> {
        self.apply_power(v, &BigUint::from(j))
    }

    /// `T^j v` by jumping every entry to the next wrap position and taking a
    /// single step there. Periodicity is never used, so this can certify a
    /// period; the cost is the number of wraps met.
    pub fn apply_power_stepped(&self, v: &SparseVec, mut j: u64) -> Result<SparseVec> {
        self.check_support(v)?;
        let s = &self.schedule;
        let mut cur = v.clone();
        while j > 0 && !cur.is_zero() {
            let mut gap = j;
            for (k, _) in cur.iter() {
                gap = gap.min(s.b(s.block_of(k)? + 1) - 1 - k);
            }
            if gap == 0 {
                cur = self.apply(&cur)?;
                j -= 1;
                continue;
            }
            let mut next = SparseVec::zero();
            for (k, c) in cur.iter() {
                let n = s.block_of(k)?;
                let offset = k - s.b(n);
                next.add_at(k + gap, &c.mul_pow2(doublings(offset, offset + gap, s.delta(n)) as i64));
            }
            cur = next;
            j -= gap;
        }
        Ok(cur)
    }

    /// `T^r e_k` for `r` below the period of `k`'s block, memoized.
    fn basis_power(&self, k: u64, r: u64) -> Result<Arc<SparseVec>> {
        if let Some(hit) = self.memo.lock().unwrap().get(&(k, r)) {
            return Ok(Arc::clone(hit));
        }
        let result = Arc::new(self.expand_basis_power(k, r)?);
        let mut memo = self.memo.lock().unwrap();
        if memo.len() >= self.memo_cap {
            memo.clear();
        }
        memo.insert((k, r), Arc::clone(&result));
        Ok(result)
    }

    /// Closed-form traversal of blocks. Each pending term `(c, idx, steps)`
    /// either finishes inside its block, or reaches the wrap and splits into a
    /// term in block `phi(n) < n` and a term back at `b_n` with strictly fewer
    /// steps left, so the work queue drains.
    fn expand_basis_power(&self, k: u64, r: u64) -> Result<SparseVec> {
        let s = &self.schedule;
        let mut out = SparseVec::zero();
        let mut pending = vec![(Dyadic::one(), k, r)];
        while let Some((c, idx, steps)) = pending.pop() {
            let n = s.block_of(idx)?;
            let steps = steps % s.block_period(n);
            let (start, end, delta) = (s.b(n), s.b(n + 1), s.delta(n));
            let offset = idx - start;
            let to_wrap = end - idx;
            if steps < to_wrap {
                let gain = doublings(offset, offset + steps, delta);
                out.add_at(idx + steps, &c.mul_pow2(gain as i64));
            } else {
                let at_wrap = c.mul_pow2(doublings(offset, end - start, delta) as i64);
                let rest = steps - to_wrap;
                if n == 0 {
                    pending.push((-at_wrap, 0, rest));
                } else {
                    pending.push((at_wrap.mul_pow2(-(s.tau(n) as i64)), s.b(s.phi(n)), rest));
                    pending.push((-at_wrap.mul_pow2(-(delta as i64)), start, rest));
                }
            }
            self.guard(out.len().max(pending.len()))?;
        }
        Ok(out)
    }

    /// `2 (b_{n+1} - b_n)` for the smallest `n` with `supp v ⊂ [0, b_{n+1})`.
    /// A period, not necessarily the minimal one. The zero vector is a fixed
    /// point and gets period 1.
    pub fn period_of(&self, v: &SparseVec) -> Result<u64> {
        period_of(v, &self.schedule)
    }

    pub fn clear_cache(&self) {
        self.memo.lock().unwrap().clear();
    }
}

pub fn period_of(v: &SparseVec, s: &Schedule) -> Result<u64> {
    match v.max_index() {
        None => Ok(1),
        Some(k) => Ok(s.block_period(s.block_of(k)?)),
    }
}

pub struct Orbit<'a> {
    op: &'a OperatorT,
    next: Option<SparseVec>,
}

impl Iterator for Orbit<'_> {
    type Item = SparseVec;

    fn next(&mut self) -> Option<SparseVec> {
        let cur = self.next.take()?;
        // support only moves down or one step right inside a block; the
        // support check in `orbit` makes `apply` infallible here
        self.next = self.op.apply(&cur).ok();
        Some(cur)
    }
}
