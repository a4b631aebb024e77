//! Closed intervals with dyadic endpoints, and the contraction maps used to
//! build direction families.

use std::fmt;

use crate::dyadic::Dyadic;

/// A closed dyadic grid interval `[left, left + 2^-exp]`.
///
/// The length is always an exact power of two; `exp` is the length exponent.
/// These are the intervals named by tree vertices and used for strip bases.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    left: Dyadic,
    exp: u32,
}

impl DyadicInterval {
    pub fn new(left: Dyadic, exp: u32) -> Self {
        DyadicInterval { left, exp }
    }

    /// The aligned interval `[index/2^exp, (index+1)/2^exp]`.
    pub fn aligned(index: i64, exp: u32) -> Self {
        DyadicInterval::new(Dyadic::new(index, exp as u64), exp)
    }

    pub fn left(&self) -> Dyadic {
        self.left.clone()
    }

    pub fn right(&self) -> Dyadic {
        &self.left + &Dyadic::pow2(-(self.exp as i64))
    }

    pub fn length_exp(&self) -> u32 {
        self.exp
    }

    pub fn length(&self) -> Dyadic {
        Dyadic::pow2(-(self.exp as i64))
    }

    pub fn midpoint(&self) -> Dyadic {
        &self.left + &Dyadic::pow2(-(self.exp as i64 + 1))
    }

    /// Closed-interval membership: endpoints count.
    pub fn contains(&self, t: &Dyadic) -> bool {
        *t >= self.left && *t <= self.right()
    }

    /// Open-interval membership: endpoints excluded.
    pub fn contains_open(&self, t: &Dyadic) -> bool {
        *t > self.left && *t < self.right()
    }

    /// Closed containment of another interval.
    pub fn contains_interval(&self, other: &DyadicInterval) -> bool {
        self.left <= other.left && other.right() <= self.right()
    }

    /// True when the closed intervals share at least a point.
    pub fn intersects(&self, other: &DyadicInterval) -> bool {
        self.left <= other.right() && other.left <= self.right()
    }

    /// Gap between the closed intervals: zero when they overlap or touch.
    pub fn distance(&self, other: &DyadicInterval) -> Dyadic {
        if self.intersects(other) {
            Dyadic::zero()
        } else if self.left < other.left {
            &other.left - &self.right()
        } else {
            &self.left - &other.right()
        }
    }

    /// The two aligned halves.
    pub fn halves(&self) -> (DyadicInterval, DyadicInterval) {
        let mid = self.midpoint();
        (
            DyadicInterval::new(self.left.clone(), self.exp + 1),
            DyadicInterval::new(mid, self.exp + 1),
        )
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right())
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Errors from interval construction and contraction maps.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("interval endpoints out of order: [{lo}, {hi}]")]
    Inverted { lo: Dyadic, hi: Dyadic },
    #[error("contraction undefined on the degenerate interval [{at}, {at}]")]
    Degenerate { at: Dyadic },
}

/// A general closed interval `[lo, hi]` with dyadic endpoints, `lo <= hi`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, IntervalError> {
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Dyadic::zero(),
            hi: Dyadic::one(),
        }
    }

    pub fn lo(&self) -> Dyadic {
        self.lo.clone()
    }

    pub fn hi(&self) -> Dyadic {
        self.hi.clone()
    }

    pub fn length(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).mul_pow2(-1)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Mirror image under `x -> 1 - x`.
    pub fn reflect(&self) -> Interval {
        let one = Dyadic::one();
        Interval {
            lo: &one - &self.hi,
            hi: &one - &self.lo,
        }
    }

    pub fn translate(&self, h: &Dyadic) -> Interval {
        Interval {
            lo: &self.lo + h,
            hi: &self.hi + h,
        }
    }

    /// Contracts toward the midpoint from below: the image is
    /// `[m - 2^-j * len, m]` where `m` is the midpoint.
    pub fn contract_low(&self, j: u32) -> Result<Interval, IntervalError> {
        if self.is_degenerate() {
            return Err(IntervalError::Degenerate { at: self.lo() });
        }
        let m = self.midpoint();
        let step = self.length().mul_pow2(-(j as i64));
        Ok(Interval {
            lo: &m - &step,
            hi: m,
        })
    }

    /// Contracts toward the midpoint from above: the image is
    /// `[m, m + 2^-j * len]`.
    pub fn contract_high(&self, j: u32) -> Result<Interval, IntervalError> {
        if self.is_degenerate() {
            return Err(IntervalError::Degenerate { at: self.lo() });
        }
        let m = self.midpoint();
        let step = self.length().mul_pow2(-(j as i64));
        Ok(Interval {
            hi: &m + &step,
            lo: m,
        })
    }

    /// Eighth-scale contraction sitting just below the midpoint.
    pub fn contract_eighth_low(&self) -> Result<Interval, IntervalError> {
        self.contract_low(3)
    }

    /// Eighth-scale contraction sitting just above the midpoint.
    pub fn contract_eighth_high(&self) -> Result<Interval, IntervalError> {
        self.contract_high(3)
    }

    pub fn apply(&self, t: &Transform) -> Result<Interval, IntervalError> {
        match t {
            Transform::Reflect => Ok(self.reflect()),
            Transform::Translate(h) => Ok(self.translate(h)),
            Transform::ContractEighthLow => self.contract_eighth_low(),
            Transform::ContractEighthHigh => self.contract_eighth_high(),
            Transform::ContractLow(j) => self.contract_low(*j),
            Transform::ContractHigh(j) => self.contract_high(*j),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// The interval maps the direction families are built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    Reflect,
    Translate(Dyadic),
    ContractEighthLow,
    ContractEighthHigh,
    ContractLow(u32),
    ContractHigh(u32),
}
