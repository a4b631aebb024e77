//! Vertices of the infinite binary tree, written as bit strings.
//!
//! A vertex is the root symbol `0` followed by the turns taken from the root
//! (`0` = lower child, `1` = upper child). `"0110"` is the height-3 vertex
//! reached by going up, up, down. Each height-`k` vertex names the dyadic
//! interval `[p/2^k, (p+1)/2^k]` where `p` is the path read as a binary
//! number.

use std::fmt;
use std::str::FromStr;

use crate::dyadic::Dyadic;
use crate::interval::DyadicInterval;

/// A binary-tree vertex: height plus the root-to-vertex turn sequence.
///
/// Ordering is breadth-first: by height, then left to right within a level.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    height: u8,
    path: u64,
}

/// Heights are capped so that `path` and flat tree indices fit in `u64`.
pub const MAX_HEIGHT: u32 = 62;

impl BitString {
    pub fn root() -> Self {
        BitString { height: 0, path: 0 }
    }

    /// Vertex at `height` whose turn sequence reads `path` in binary,
    /// most significant bit first.
    pub fn new(height: u32, path: u64) -> Self {
        assert!(height <= MAX_HEIGHT, "vertex height {height} too large");
        assert!(
            path < (1u64 << height),
            "path {path} out of range for height {height}"
        );
        BitString {
            height: height as u8,
            path,
        }
    }

    pub fn height(self) -> u32 {
        self.height as u32
    }

    pub fn path(self) -> u64 {
        self.path
    }

    pub fn is_root(self) -> bool {
        self.height == 0
    }

    pub fn child(self, bit: u8) -> Self {
        debug_assert!(bit <= 1);
        BitString::new(self.height() + 1, (self.path << 1) | bit as u64)
    }

    pub fn parent(self) -> Option<Self> {
        if self.height == 0 {
            None
        } else {
            Some(BitString {
                height: self.height - 1,
                path: self.path >> 1,
            })
        }
    }

    pub fn sibling(self) -> Option<Self> {
        if self.height == 0 {
            None
        } else {
            Some(BitString {
                height: self.height,
                path: self.path ^ 1,
            })
        }
    }

    /// The `i`-th turn from the root, `0`-based; `i < height`.
    pub fn bit(self, i: u32) -> u8 {
        assert!(i < self.height());
        ((self.path >> (self.height() - 1 - i)) & 1) as u8
    }

    pub fn last_bit(self) -> Option<u8> {
        if self.height == 0 {
            None
        } else {
            Some((self.path & 1) as u8)
        }
    }

    /// Ancestor at height `k <= height`.
    pub fn prefix(self, k: u32) -> Self {
        assert!(k <= self.height());
        BitString {
            height: k as u8,
            path: self.path >> (self.height() - k),
        }
    }

    /// True when `self` lies on the root path of `other` (equality counts).
    pub fn is_prefix_of(self, other: BitString) -> bool {
        self.height() <= other.height() && other.prefix(self.height()) == self
    }

    /// Mirror image under `x -> 1 - x`: flips every turn.
    pub fn reflected(self) -> Self {
        if self.height == 0 {
            return self;
        }
        let mask = (1u64 << self.height()) - 1;
        BitString {
            height: self.height,
            path: !self.path & mask,
        }
    }

    /// The dyadic interval this vertex names.
    pub fn interval(self) -> DyadicInterval {
        DyadicInterval::new(
            Dyadic::new(self.path as i64, self.height() as u64),
            self.height(),
        )
    }

    /// Flat breadth-first index: root 0, then level by level.
    pub fn tree_index(self) -> u64 {
        ((1u64 << self.height()) - 1) + self.path
    }

    /// All `2^height` vertices of a level, left to right.
    pub fn level(height: u32) -> impl Iterator<Item = BitString> {
        assert!(height <= MAX_HEIGHT);
        (0..(1u64 << height)).map(move |p| BitString::new(height, p))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0")?;
        for i in 0..self.height() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parse error for vertex notation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid vertex {input:?}: expected root symbol `0` followed by bits")]
pub struct ParseBitStringError {
    pub input: String,
}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseBitStringError {
            input: s.to_string(),
        };
        let s = s.trim();
        let rest = s.strip_prefix('0').ok_or_else(bad)?;
        let height = rest.len();
        if height > MAX_HEIGHT as usize {
            return Err(bad());
        }
        let mut path = 0u64;
        for c in rest.chars() {
            path = (path << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(bad()),
                };
        }
        Ok(BitString::new(height as u32, path))
    }
}
