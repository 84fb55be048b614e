//! Block schedules `(phi, delta, tau, b)` and their admissibility conditions.
//!
//! A schedule with prefix `P` knows blocks `0..=P`: the boundaries
//! `b_0..=b_{P+1}`, the doubling lengths `delta_0..=delta_P`, the wrap damping
//! exponents `tau_1..=tau_P`, the wrap targets `phi(0..=P)` and the block
//! multipliers `N_1..=N_P` with `b_{n+1} - b_n = 2 N_n (b_n - b_{n-1})`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    phi: Vec<usize>,
    delta: Vec<u64>,
    tau: Vec<u64>,
    b: Vec<u64>,
    multipliers: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    phi: Vec<usize>,
    delta: Vec<u64>,
    tau: Vec<u64>,
    b: Vec<u64>,
    #[serde(rename = "N")]
    multipliers: Vec<u64>,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Schedule::from_parts(r.phi, r.delta, r.tau, r.b, r.multipliers)
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr {
            phi: s.phi,
            delta: s.delta,
            tau: s.tau,
            b: s.b,
            multipliers: s.multipliers,
        }
    }
}

/// Named schedule generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `tau_n = 4^{n+1}`, `delta_n = 2 tau_n`, `b_n - b_{n-1} = 4^{2n+1}`.
    Canonical,
    /// Desk-scale schedule with the smallest blocks the conditions allow.
    Small2,
}

impl Preset {
    pub fn build(self, prefix: usize) -> Result<Schedule> {
        match self {
            Preset::Canonical => Schedule::canonical(prefix),
            Preset::Small2 => Schedule::small2(prefix),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "canonical" => Ok(Preset::Canonical),
            "small-2" | "small2" => Ok(Preset::Small2),
            other => Err(Error::Malformed(format!("unknown schedule preset {other:?}"))),
        }
    }
}

/// Triangular enumeration: `phi(0) = 0`, then the rows `0; 0,1; 0,1,2; ...`
/// concatenated, so every value recurs infinitely often and `phi(m) < m`.
pub fn phi_diagonal(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    // row r (0-based) starts at position 1 + r(r+1)/2
    let mut m = n - 1;
    let mut row = 0;
    while m > row {
        m -= row + 1;
        row += 1;
    }
    m
}

/// Past this, `b_{prefix+1}` no longer stays below `2^62`.
pub const SMALL2_MAX_PREFIX: usize = 53;

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("schedule {what} does not fit in 64 bits"))
}

impl Schedule {
    /// Assembles a schedule, checking only that the arrays have consistent
    /// lengths. Use [`Schedule::validate`] for the admissibility conditions.
    pub fn from_parts(
        phi: Vec<usize>,
        delta: Vec<u64>,
        tau: Vec<u64>,
        b: Vec<u64>,
        multipliers: Vec<u64>,
    ) -> Result<Self> {
        let prefix = tau.len();
        if prefix == 0 {
            return Err(Error::Malformed("schedule prefix must be at least 1".into()));
        }
        let lens = [
            ("phi", phi.len(), prefix + 1),
            ("delta", delta.len(), prefix + 1),
            ("b", b.len(), prefix + 2),
            ("N", multipliers.len(), prefix),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::Malformed(format!(
                    "{name} has {got} entries, expected {want} for prefix {prefix}"
                )));
            }
        }
        if b.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Malformed("block boundaries must be strictly increasing".into()));
        }
        Ok(Schedule {
            phi,
            delta,
            tau,
            b,
            multipliers,
        })
    }

    pub fn canonical(prefix: usize) -> Result<Self> {
        if prefix == 0 {
            return Err(Error::InvalidArgument("prefix must be at least 1".into()));
        }
        let pow4 = |k: usize| -> Result<u64> {
            u32::try_from(2 * k)
                .ok()
                .and_then(|e| 1u64.checked_shl(e))
                .filter(|_| 2 * k < 64)
                .ok_or_else(|| overflow("power of four"))
        };
        let mut tau = Vec::with_capacity(prefix);
        let mut delta = vec![0];
        for n in 1..=prefix {
            let t = pow4(n + 1)?;
            tau.push(t);
            delta.push(2 * t);
        }
        let mut b = vec![0u64];
        for n in 1..=prefix + 1 {
            let next = b[n - 1]
                .checked_add(pow4(2 * n + 1)?)
                .ok_or_else(|| overflow("boundary"))?;
            b.push(next);
        }
        let multipliers = (1..=prefix)
            .map(|n| (b[n + 1] - b[n]) / (2 * (b[n] - b[n - 1])))
            .collect();
        let phi = (0..=prefix).map(phi_diagonal).collect();
        Schedule::from_parts(phi, delta, tau, b, multipliers)
    }

    /// `tau_n = delta_{n-1} + 2(n+1)`, `delta_n = tau_n + 5 * 2^n`, `b_1 = 32`,
    /// and each `N_n` the smallest multiplier keeping the block-gap and
    /// ratio-decrease conditions.
    pub fn small2(prefix: usize) -> Result<Self> {
        if !(1..=SMALL2_MAX_PREFIX).contains(&prefix) {
            return Err(Error::InvalidArgument(format!(
                "SMALL-2 supports prefixes 1..={SMALL2_MAX_PREFIX}, got {prefix}"
            )));
        }
        let mut delta = vec![0u64];
        let mut tau = Vec::new();
        for n in 1..=prefix {
            let t = delta[n - 1] + 2 * (n as u64 + 1);
            tau.push(t);
            delta.push(t + 5 * (1u64 << n));
        }
        let mut b = vec![0u64, 32];
        let mut multipliers = Vec::new();
        for n in 1..=prefix {
            let prev_len = b[n] - b[n - 1];
            let mut mult = 1u64;
            loop {
                let len = 2 * mult * prev_len;
                let gap_ok = 2 * delta[n] < len;
                // delta_n / len < delta_{n-1} / (b_n - b_{n-1}), cross-multiplied
                let ratio_ok =
                    n == 1 || u128::from(delta[n]) * u128::from(prev_len) < u128::from(delta[n - 1]) * u128::from(len);
                if gap_ok && ratio_ok {
                    break;
                }
                mult += 1;
            }
            multipliers.push(mult);
            b.push(b[n] + 2 * mult * prev_len);
        }
        let phi = (0..=prefix).map(phi_diagonal).collect();
        Schedule::from_parts(phi, delta, tau, b, multipliers)
    }

    /// Number of blocks past block 0 that the schedule fully describes.
    pub fn prefix(&self) -> usize {
        self.tau.len()
    }

    pub fn phi(&self, n: usize) -> usize {
        self.phi[n]
    }

    pub fn delta(&self, n: usize) -> u64 {
        self.delta[n]
    }

    /// `tau_n` for `n >= 1`.
    pub fn tau(&self, n: usize) -> u64 {
        assert!(n >= 1, "tau is indexed from 1");
        self.tau[n - 1]
    }

    pub fn b(&self, n: usize) -> u64 {
        self.b[n]
    }

    /// `N_n` for `n >= 1`.
    pub fn multiplier(&self, n: usize) -> u64 {
        self.multipliers[n - 1]
    }

    pub fn phis(&self) -> &[usize] {
        &self.phi
    }

    pub fn deltas(&self) -> &[u64] {
        &self.delta
    }

    pub fn taus(&self) -> &[u64] {
        &self.tau
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.b
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    pub fn block_len(&self, n: usize) -> u64 {
        self.b[n + 1] - self.b[n]
    }

    /// `2 (b_{n+1} - b_n)`, a period of every `e_k` in block `n`.
    pub fn block_period(&self, n: usize) -> u64 {
        2 * self.block_len(n)
    }

    /// First index the schedule cannot place in a block (`b_{prefix+1}`).
    pub fn index_limit(&self) -> u64 {
        *self.b.last().unwrap()
    }

    /// Block `n` with `k` in `[b_n, b_{n+1})`.
    pub fn block_of(&self, k: u64) -> Result<usize> {
        if k >= self.index_limit() {
            return Err(Error::PrefixExceeded(format!(
                "index {k} is beyond b_{} = {}",
                self.prefix() + 1,
                self.index_limit()
            )));
        }
        Ok(self.b.partition_point(|&bn| bn <= k) - 1)
    }

    /// Checks that blocks `0..=n` exist, i.e. `b_{n+1}` is known.
    pub fn check_block(&self, n: usize) -> Result<()> {
        if n > self.prefix() {
            return Err(Error::PrefixExceeded(format!(
                "block {n} needs b_{} but the prefix is {}",
                n + 1,
                self.prefix()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> ConditionReport {
        let p = self.prefix();
        let mut results = Vec::new();

        // (delta_n), (tau_n) strictly increasing positive, delta_0 = 0, b_0 = 0
        let mut seq_violation = None;
        if self.delta[0] != 0 || self.b[0] != 0 {
            seq_violation = Some(0);
        }
        for n in 1..=p {
            if seq_violation.is_some() {
                break;
            }
            let delta_bad = self.delta[n] <= self.delta[n - 1];
            let tau_bad = self.tau(n) == 0 || (n > 1 && self.tau(n) <= self.tau(n - 1));
            if delta_bad || tau_bad {
                seq_violation = Some(n);
            }
        }
        results.push(ConditionResult::new(Condition::Sequences, seq_violation, None));

        // phi(0) = 0, phi(n) < n, image is an initial segment of the naturals
        let mut phi_violation = if self.phi[0] != 0 { Some(0) } else { None };
        if phi_violation.is_none() {
            phi_violation = (1..=p).find(|&n| self.phi[n] >= n);
        }
        if phi_violation.is_none() {
            let top = *self.phi.iter().max().unwrap();
            let mut seen = vec![false; top + 1];
            for &v in &self.phi {
                seen[v] = true;
            }
            phi_violation = seen.iter().position(|s| !s);
        }
        results.push(ConditionResult::new(
            Condition::Phi,
            phi_violation,
            Some("infinite recurrence is checked as: every value up to max phi is attained"),
        ));

        // delta_n - tau_n strictly increasing on the prefix
        let diff = |n: usize| self.delta[n] as i128 - self.tau(n) as i128;
        let dt = (2..=p).find(|&n| diff(n) <= diff(n - 1));
        results.push(ConditionResult::new(
            Condition::DeltaMinusTau,
            dt,
            Some("divergence is checked as strict increase on the prefix"),
        ));

        // tau_n >= delta_{n-1} + 2(n+1)
        let lower = (1..=p).find(|&n| self.tau(n) < self.delta[n - 1] + 2 * (n as u64 + 1));
        results.push(ConditionResult::new(Condition::TauLowerBound, lower, None));

        // b_{n+1} - b_n = 2 N_n (b_n - b_{n-1}), N_n >= 1
        let mult = (1..=p).find(|&n| {
            let want = (self.block_len(n - 1) as u128) * 2 * self.multiplier(n) as u128;
            self.multiplier(n) == 0 || self.block_len(n) as u128 != want
        });
        results.push(ConditionResult::new(Condition::BlockMultiple, mult, None));

        // 2 delta_n < b_{n+1} - b_n
        let gap = (0..=p).find(|&n| 2 * self.delta[n] as u128 >= self.block_len(n) as u128);
        results.push(ConditionResult::new(Condition::BlockGap, gap, None));

        // delta_n / (b_{n+1} - b_n) strictly decreasing for n >= 1
        let ratio = (2..=p).find(|&n| {
            self.delta[n] as u128 * self.block_len(n - 1) as u128
                >= self.delta[n - 1] as u128 * self.block_len(n) as u128
        });
        results.push(ConditionResult::new(
            Condition::RatioDecreasing,
            ratio,
            Some("convergence to 0 is checked as strict decrease on the prefix"),
        ));

        ConditionReport { results }
    }

    /// The sequence-space variant of the `tau` lower bound:
    /// `2^{delta_{n-1}} (b_{n+1} - b_n) / 2^{tau_n} <= 2^{-2(n+1)}` for `n >= 1`.
    pub fn validate_lp_bound(&self) -> ConditionReport {
        let violation = (1..=self.prefix()).find(|&n| !self.holds_lp_bound(n));
        ConditionReport {
            results: vec![ConditionResult::new(Condition::SequenceSpaceBound, violation, None)],
        }
    }

    /// `(b_{n+1} - b_n) * 2^{delta_{n-1} + 2(n+1)} <= 2^{tau_n}`, compared
    /// through bit lengths so huge exponents never materialize.
    fn holds_lp_bound(&self, n: usize) -> bool {
        let len = self.block_len(n);
        let shift = self.delta[n - 1] as u128 + 2 * (n as u128 + 1);
        let tau = self.tau(n) as u128;
        if shift > tau {
            return false;
        }
        // len * 2^shift <= 2^tau  <=>  len <= 2^(tau - shift)
        let room = tau - shift;
        room >= 64 || len <= 1u64 << room
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Monotone positive `delta`, `tau`; `delta_0 = b_0 = 0`.
    Sequences,
    /// `phi(0) = 0`, `phi(n) < n`, every value recurs.
    Phi,
    /// `delta_n - tau_n` diverges.
    DeltaMinusTau,
    /// `tau_n >= delta_{n-1} + 2(n+1)`.
    TauLowerBound,
    /// `b_{n+1} - b_n = 2 N_n (b_n - b_{n-1})`.
    BlockMultiple,
    /// `2 delta_n < b_{n+1} - b_n`.
    BlockGap,
    /// `delta_n / (b_{n+1} - b_n)` decreases to 0.
    RatioDecreasing,
    /// Needed for the `c_0` / `l^p` variants of the block bounds.
    SequenceSpaceBound,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Sequences => "sequences",
            Condition::Phi => "phi",
            Condition::DeltaMinusTau => "delta-tau increasing",
            Condition::TauLowerBound => "tau lower bound",
            Condition::BlockMultiple => "block multiple",
            Condition::BlockGap => "block gap",
            Condition::RatioDecreasing => "ratio decreasing",
            Condition::SequenceSpaceBound => "sequence-space bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub passed: bool,
    pub first_violation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionResult {
    fn new(condition: Condition, violation: Option<usize>, note: Option<&str>) -> Self {
        ConditionResult {
            condition,
            passed: violation.is_none(),
            first_violation: violation,
            note: note.map(str::to_owned),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub results: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, c: Condition) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.condition == c)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.results.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match r.first_violation {
                None => write!(f, "{}: pass", r.condition.label())?,
                Some(n) => write!(f, "{}: FAIL at n={n}", r.condition.label())?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_triangular_prefix() {
        let got: Vec<_> = (0..=6).map(phi_diagonal).collect();
        assert_eq!(got, [0, 0, 0, 1, 0, 1, 2]);
        assert_eq!(phi_diagonal(4), 0);
        assert!((1..=1000).all(|m| phi_diagonal(m) < m));
        // row 0,1,2,3 starts at 7
        assert_eq!(phi_diagonal(7), 0);
        assert_eq!(phi_diagonal(10), 3);
    }

    #[test]
    fn canonical_values() {
        let s = Schedule::canonical(3).unwrap();
        assert_eq!(s.boundaries(), [0, 64, 1088, 17472, 279616]);
        let s2 = Schedule::canonical(2).unwrap();
        assert_eq!(s2.taus(), [16, 64]);
        assert_eq!(s2.deltas(), [0, 32, 128]);
        assert_eq!(s2.multipliers(), [8, 8]);
        assert!(Schedule::canonical(5).unwrap().validate().all_pass());
        assert!(Schedule::canonical(40).is_err());
    }

    #[test]
    fn small2_values() {
        let s = Schedule::small2(4).unwrap();
        assert_eq!(s.taus(), [4, 20, 48, 98]);
        assert_eq!(s.deltas(), [0, 14, 40, 88, 178]);
        assert_eq!(s.boundaries(), [0, 32, 96, 352, 1376, 5472]);
        assert_eq!(s.multipliers(), [1, 2, 2, 2]);
        assert!(Schedule::small2(5).unwrap().validate().all_pass());
        assert!(Schedule::small2(54).is_err());
        let long = Schedule::small2(SMALL2_MAX_PREFIX).unwrap();
        assert!(long.validate().all_pass());
        assert!(long.index_limit() < 1 << 62);
    }

    #[test]
    fn lowered_tau_breaks_condition_3() {
        let s = Schedule::small2(5).unwrap();
        let mut tau = s.taus().to_vec();
        tau[1] = 19;
        let bad = Schedule::from_parts(
            s.phis().to_vec(),
            s.deltas().to_vec(),
            tau,
            s.boundaries().to_vec(),
            s.multipliers().to_vec(),
        )
        .unwrap();
        let report = bad.validate();
        let c3 = report.get(Condition::TauLowerBound).unwrap();
        assert!(!c3.passed);
        assert_eq!(c3.first_violation, Some(2));
        assert!(!report.all_pass());
    }

    #[test]
    fn malformed_lengths_rejected() {
        let err = Schedule::from_parts(vec![0, 0], vec![0, 14], vec![4], vec![0, 32], vec![1]);
        assert!(matches!(err, Err(Error::Malformed(_))));
    }

    #[test]
    fn block_of_examples() {
        let s = Schedule::small2(4).unwrap();
        assert_eq!(s.block_of(0).unwrap(), 0);
        assert_eq!(s.block_of(31).unwrap(), 0);
        assert_eq!(s.block_of(32).unwrap(), 1);
        assert_eq!(s.block_of(95).unwrap(), 1);
        assert_eq!(s.block_of(1454).unwrap(), 4);
        assert!(matches!(s.block_of(5472), Err(Error::PrefixExceeded(_))));
    }

    #[test]
    fn lp_bound_condition() {
        assert!(Schedule::canonical(4).unwrap().validate_lp_bound().all_pass());
        let r = Schedule::small2(4).unwrap().validate_lp_bound();
        assert_eq!(r.results[0].first_violation, Some(1));
    }

    #[test]
    fn json_round_trip() {
        let s = Schedule::small2(3).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["N"], serde_json::json!([1, 2, 2]));
        assert_eq!(v["b"], serde_json::json!([0, 32, 96, 352, 1376]));
        let back: Schedule = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"phi": [0], "delta": [0], "tau": [], "b": [0, 32], "N": []});
        assert!(serde_json::from_value::<Schedule>(bad).is_err());
    }
}
