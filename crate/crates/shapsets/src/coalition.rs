//! Coalitions of training-data subsets as bitmasks.

use std::fmt;

/// Maximum number of subsets representable by a coalition bitmask.
pub const MAX_SUBSETS: usize = 64;

/// A set of subset indices (0-based), packed into a `u64` bitmask.
///
/// Bit `i` set means subset `i` is in the coalition. The CLI and reports
/// print subsets 1-based to match the usual game-theory notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    /// The grand coalition over `k` subsets.
    pub fn grand(k: usize) -> Coalition {
        assert!(k <= MAX_SUBSETS, "at most {MAX_SUBSETS} subsets");
        if k == MAX_SUBSETS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << k) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Coalition {
        Coalition(bits)
    }

    /// Build from 0-based member indices.
    pub fn from_members(members: &[usize]) -> Coalition {
        let mut c = Coalition::EMPTY;
        for &m in members {
            c = c.with(m);
        }
        c
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, subset: usize) -> bool {
        subset < MAX_SUBSETS && self.0 & (1u64 << subset) != 0
    }

    pub fn with(self, subset: usize) -> Coalition {
        assert!(subset < MAX_SUBSETS);
        Coalition(self.0 | (1u64 << subset))
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    /// 0-based member indices, ascending.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_SUBSETS).filter(move |i| bits & (1u64 << i) != 0)
    }

    /// Subsets of `0..k` not in this coalition, ascending.
    pub fn excluded(self, k: usize) -> Vec<usize> {
        (0..k).filter(|&i| !self.contains(i)).collect()
    }

    /// True when every member is a valid subset index under `k`.
    pub fn fits(self, k: usize) -> bool {
        if k == MAX_SUBSETS {
            return true;
        }
        self.0 & !((1u64 << k) - 1) == 0
    }
}

impl fmt::Display for Coalition {
    /// Members printed 1-based, e.g. `{2,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}
