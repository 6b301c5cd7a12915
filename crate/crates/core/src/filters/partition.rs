use std::fmt;

use crate::error::{Error, Result};

/// Block lengths for [`PartitionFilter::Ranges`]: block `k` (from 1) has
/// `slope·k + offset` consecutive elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LengthRule {
    pub slope: u64,
    pub offset: u64,
}

impl LengthRule {
    pub fn constant(len: u64) -> Result<Self> {
        Self::linear(0, len)
    }

    pub fn linear(slope: u64, offset: u64) -> Result<Self> {
        if slope + offset == 0 {
            return Err(Error::InvalidValue("block length must be positive".into()));
        }
        Ok(Self { slope, offset })
    }

    pub fn len(&self, k: u64) -> u64 {
        self.slope * k + self.offset
    }

    /// First element of block `k`, saturating.
    pub fn start(&self, k: u64) -> u64 {
        let k1 = k.saturating_sub(1) as u128;
        let s = 1 + (self.slope as u128) * k1 * (k1 + 1) / 2 + (self.offset as u128) * k1;
        s.min(u64::MAX as u128) as u64
    }
}

/// A countably generated free filter, given by its generating partition
/// `(A_k)` of ℕ. Its dual ideal is the sets meeting finitely many blocks.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PartitionFilter {
    /// `A_k = {k}`; the cofinite filter.
    Singletons,
    /// Consecutive ranges.
    Ranges(LengthRule),
    /// `A_v = {n : 2^v exactly divides n}`, indexed from 0.
    DyadicValuationBlocks,
    /// `table[n-1]` is the block of `n` for `n <= table.len()`; later points
    /// are singleton blocks numbered after the largest table index.
    TableWithTailRule(Vec<u64>),
}

impl PartitionFilter {
    pub fn ranges(rule: LengthRule) -> Self {
        PartitionFilter::Ranges(rule)
    }

    /// Checks that the table names every index in `1..=max` at least once.
    pub fn table(table: Vec<u64>) -> Result<Self> {
        let max = table.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; max as usize + 1];
        for &k in &table {
            if k == 0 {
                return Err(Error::InvalidValue("table block indices start at 1".into()));
            }
            seen[k as usize] = true;
        }
        if let Some(k) = (1..=max).find(|&k| !seen[k as usize]) {
            return Err(Error::InvalidValue(format!("table skips block {k}")));
        }
        Ok(PartitionFilter::TableWithTailRule(table))
    }

    pub fn builtins() -> Vec<(&'static str, PartitionFilter)> {
        vec![
            ("singletons", PartitionFilter::Singletons),
            ("ranges-linear", PartitionFilter::Ranges(LengthRule { slope: 1, offset: 0 })),
            ("ranges-3", PartitionFilter::Ranges(LengthRule { slope: 0, offset: 3 })),
            ("dyadic", PartitionFilter::DyadicValuationBlocks),
            ("table", PartitionFilter::TableWithTailRule(vec![1, 1, 2, 1, 3, 2, 3, 3])),
        ]
    }

    /// Smallest block index.
    pub fn first_block(&self) -> u64 {
        match self {
            PartitionFilter::DyadicValuationBlocks => 0,
            _ => 1,
        }
    }

    /// Whether every block is finite.
    pub fn has_finite_blocks(&self) -> bool {
        !matches!(self, PartitionFilter::DyadicValuationBlocks)
    }

    pub fn block_of(&self, n: u64) -> u64 {
        assert!(n > 0, "points start at 1");
        match self {
            PartitionFilter::Singletons => n,
            PartitionFilter::Ranges(rule) => {
                // largest k with start(k) <= n
                let (mut lo, mut hi) = (1u64, 2u64);
                while rule.start(hi) <= n {
                    lo = hi;
                    hi = hi.saturating_mul(2);
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if rule.start(mid) <= n {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
            PartitionFilter::DyadicValuationBlocks => n.trailing_zeros() as u64,
            PartitionFilter::TableWithTailRule(t) => match t.get(n as usize - 1) {
                Some(&k) => k,
                None => self.table_max() + (n - t.len() as u64),
            },
        }
    }

    fn table_max(&self) -> u64 {
        match self {
            PartitionFilter::TableWithTailRule(t) => t.iter().copied().max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Smallest element of block `k`, if it fits in `u64`.
    pub fn block_start(&self, k: u64) -> Option<u64> {
        match self {
            PartitionFilter::Singletons => (k >= 1).then_some(k),
            PartitionFilter::Ranges(rule) => (k >= 1 && rule.start(k) < u64::MAX).then(|| rule.start(k)),
            PartitionFilter::DyadicValuationBlocks => 1u64.checked_shl(k.try_into().ok()?).filter(|_| k < 64),
            PartitionFilter::TableWithTailRule(t) => {
                if k == 0 {
                    return None;
                }
                let m = self.table_max();
                if k <= m {
                    t.iter().position(|&b| b == k).map(|i| i as u64 + 1)
                } else {
                    Some(t.len() as u64 + (k - m))
                }
            }
        }
    }

    /// A bound `B` such that every block index in `first_block()..=k` has an
    /// element in `[1, B]`.
    pub fn witness_bound(&self, k: u64) -> u64 {
        (self.first_block()..=k).filter_map(|j| self.block_start(j)).max().unwrap_or(1)
    }

    /// `A_k ∩ [1, depth]`.
    pub fn block_members(&self, k: u64, depth: u64) -> Vec<u64> {
        match self {
            PartitionFilter::Singletons => if (1..=depth).contains(&k) { vec![k] } else { vec![] },
            PartitionFilter::Ranges(rule) => {
                if k == 0 {
                    return vec![];
                }
                let s = rule.start(k);
                let e = s.saturating_add(rule.len(k)).saturating_sub(1).min(depth);
                (s..=e).collect()
            }
            PartitionFilter::DyadicValuationBlocks => {
                let Some(s) = self.block_start(k) else { return vec![] };
                (0..).map(|j| s.saturating_mul(2 * j + 1)).take_while(|&n| n <= depth).collect()
            }
            PartitionFilter::TableWithTailRule(t) => {
                let m = self.table_max();
                if k == 0 {
                    vec![]
                } else if k <= m {
                    (1..=t.len() as u64).filter(|&n| n <= depth && t[n as usize - 1] == k).collect()
                } else {
                    let n = t.len() as u64 + (k - m);
                    if n <= depth { vec![n] } else { vec![] }
                }
            }
        }
    }

    /// Elements of the block of `n` that are smaller than `n`.
    pub fn block_members_below(&self, n: u64) -> impl Iterator<Item = u64> + '_ {
        let k = self.block_of(n);
        let v: Vec<u64> = match self {
            PartitionFilter::Singletons => vec![],
            PartitionFilter::Ranges(rule) => (rule.start(k)..n).collect(),
            PartitionFilter::DyadicValuationBlocks => {
                let s = 1u64 << k;
                (0..).map(|j| s * (2 * j + 1)).take_while(|&m| m < n).collect()
            }
            PartitionFilter::TableWithTailRule(t) => {
                (1..n.min(t.len() as u64 + 1)).filter(|&m| self.block_of(m) == k).collect()
            }
        };
        v.into_iter()
    }
}

impl fmt::Display for PartitionFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionFilter::Singletons => f.write_str("singletons"),
            PartitionFilter::Ranges(r) => write!(f, "(ranges {} {})", r.slope, r.offset),
            PartitionFilter::DyadicValuationBlocks => f.write_str("dyadic"),
            PartitionFilter::TableWithTailRule(t) => {
                f.write_str("(table")?;
                for k in t {
                    write!(f, " {k}")?;
                }
                f.write_str(")")
            }
        }
    }
}
