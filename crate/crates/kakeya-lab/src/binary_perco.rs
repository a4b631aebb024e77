//! Bernoulli percolation on the full binary tree.
//!
//! Keep each edge of the depth-`N` full binary tree independently with
//! probability `p` and ask for the probability that an open path connects
//! the root to depth `N`. Conditioning on the two root edges gives the
//! recursion `s(0) = 1`, `s(n+1) = 1 - (1 - p s(n))^2`. At the critical
//! `p = 1/2` the survival decays like `4/N`, which is the engine behind
//! the measure lower bounds for the random unions built elsewhere in this
//! crate.
//!
//! The exact recursion squares denominators at every level, so it is only
//! usable for small heights. For the long-range behaviour there is a
//! certified variant that carries a dyadic enclosure `[lo, hi]` of each
//! `s(n)` with directed rounding, exploiting that the iteration map is
//! monotone on `[0, 1]` whenever `p <= 1`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dyadic::Dyadic;

/// Exact survival probability for the height-`n` full binary tree with
/// edge probability `p`. Denominator bit length doubles per level; keep
/// `height` modest.
pub fn survival_exact(height: u32, p: &BigRational) -> BigRational {
    assert!(
        *p >= BigRational::zero() && *p <= BigRational::one(),
        "edge probability must lie in [0, 1]"
    );
    let mut s = BigRational::one();
    for _ in 0..height {
        let miss = BigRational::one() - p * &s;
        s = BigRational::one() - &miss * &miss;
    }
    s
}

/// A certified enclosure `lo <= s <= hi` of one survival probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalBounds {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl SurvivalBounds {
    /// Upper bound on the enclosure width.
    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }
}

/// Enclosures of `s(0), s(1), ..., s(height)` with edge probability `p`,
/// each endpoint rounded outward to `precision_bits` fractional bits.
///
/// Requires `0 <= p <= 1` dyadic. The iteration map `s -> 1 - (1 - p s)^2`
/// is nondecreasing there, so the images of interval endpoints enclose the
/// image of the interval, and the directed rounding keeps that property
/// while stopping the denominator growth.
pub fn survival_bounds(height: u32, p: &Dyadic, precision_bits: u64) -> Vec<SurvivalBounds> {
    assert!(
        !p.is_negative() && *p <= Dyadic::one(),
        "edge probability must lie in [0, 1]"
    );
    let mut out = Vec::with_capacity(height as usize + 1);
    let mut lo = Dyadic::one();
    let mut hi = Dyadic::one();
    out.push(SurvivalBounds {
        lo: lo.clone(),
        hi: hi.clone(),
    });
    for _ in 0..height {
        // Lower side: round the miss probability up, so the next survival
        // value rounds down.
        let miss_up = (&Dyadic::one() - &(p * &lo)).round_up(precision_bits);
        lo = (&Dyadic::one() - &(&miss_up * &miss_up)).round_down(precision_bits);
        if lo.is_negative() {
            lo = Dyadic::zero();
        }
        let miss_down = (&Dyadic::one() - &(p * &hi)).round_down(precision_bits);
        hi = (&Dyadic::one() - &(&miss_down * &miss_down)).round_up(precision_bits);
        if hi > Dyadic::one() {
            hi = Dyadic::one();
        }
        out.push(SurvivalBounds {
            lo: lo.clone(),
            hi: hi.clone(),
        });
    }
    out
}
