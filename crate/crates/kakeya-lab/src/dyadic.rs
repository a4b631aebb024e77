//! Exact dyadic rationals: numbers of the form `n / 2^e`.
//!
//! Every geometric quantity in this crate (direction values, interval
//! endpoints, slopes, sample coordinates) is a dyadic rational, so equality
//! tests and comparisons are exact and never go through floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact dyadic rational `numer / 2^exp`.
///
/// Canonical form: `exp` is zero whenever the value is an integer (including
/// zero), and `numer` is odd whenever `exp > 0`. Construction always
/// canonicalizes, so structural equality coincides with numeric equality and
/// the derived `Hash` is consistent.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numer: BigInt,
    exp: u64,
}

impl Dyadic {
    /// Builds `numer / 2^exp` and reduces it to canonical form.
    pub fn new(numer: impl Into<BigInt>, exp: u64) -> Self {
        let mut d = Dyadic {
            numer: numer.into(),
            exp,
        };
        d.canonicalize();
        d
    }

    fn canonicalize(&mut self) {
        if self.numer.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.numer.trailing_zeros().unwrap_or(0);
        let drop = tz.min(self.exp);
        if drop > 0 {
            self.numer >>= drop;
            self.exp -= drop;
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            numer: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            numer: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic {
            numer: BigInt::from(n),
            exp: 0,
        }
    }

    /// `2^k` for any integer `k`, negative exponents included.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic {
                numer: BigInt::one() << (k as u64),
                exp: 0,
            }
        } else {
            Dyadic {
                numer: BigInt::one(),
                exp: (-k) as u64,
            }
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.numer.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            numer: self.numer.abs(),
            exp: self.exp,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.numer.is_zero() {
            return Dyadic::zero();
        }
        if k >= 0 {
            let k = k as u64;
            let drop = k.min(self.exp);
            Dyadic {
                numer: &self.numer << (k - drop),
                exp: self.exp - drop,
            }
        } else {
            Dyadic::new(self.numer.clone(), self.exp + (-k) as u64)
        }
    }

    /// Largest integer `<=` the value.
    pub fn floor(&self) -> BigInt {
        // BigInt's shift-right rounds toward negative infinity, which is
        // exactly floor division by a power of two.
        &self.numer >> self.exp
    }

    /// `floor(value * 2^level)` without building the intermediate product.
    pub fn floor_scaled(&self, level: u32) -> BigInt {
        self.mul_pow2(level as i64).floor()
    }

    /// True when `value * 2^level` is an integer.
    pub fn is_integer_scaled(&self, level: u32) -> bool {
        self.exp <= level as u64
    }

    /// Greatest dyadic with denominator dividing `2^bits` that is `<=` the
    /// value. Exact when the value already fits in that precision.
    pub fn round_down(&self, bits: u64) -> Self {
        if self.exp <= bits {
            return self.clone();
        }
        let shift = self.exp - bits;
        Dyadic::new(&self.numer >> shift, bits)
    }

    /// Least dyadic with denominator dividing `2^bits` that is `>=` the value.
    pub fn round_up(&self, bits: u64) -> Self {
        if self.exp <= bits {
            return self.clone();
        }
        // ceil(n / 2^s) == -floor(-n / 2^s)
        let shift = self.exp - bits;
        Dyadic::new(-((-&self.numer) >> shift), bits)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numer.clone(), BigInt::one() << self.exp)
    }

    /// Nearest `f64`, safe for giant exponents (overflow saturates to
    /// infinity, underflow to zero, as with ordinary float division).
    pub fn to_f64(&self) -> f64 {
        if self.numer.is_zero() {
            return 0.0;
        }
        let bits = self.numer.bits();
        if bits <= 63 {
            let n = self.numer.to_i64().expect("fits by bit count") as f64;
            return n * 2f64.powi(-(self.exp as i32).min(i32::MAX));
        }
        // Keep the top 63 bits and fold the discarded scale into the exponent.
        let drop = bits - 63;
        let top: BigInt = &self.numer >> drop;
        let n = top.to_i64().expect("fits by bit count") as f64;
        let e = drop as i64 - self.exp as i64;
        if e > 2000 {
            return if self.numer.sign() == Sign::Minus {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        if e < -2000 {
            return 0.0;
        }
        n * 2f64.powi(e as i32)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numer, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parse error for the `n/2^e` notation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid dyadic literal {input:?}: expected `n` or `n/2^e`")]
pub struct ParseDyadicError {
    pub input: String,
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    /// Accepts `n/2^e`, `n/d` with a power-of-two denominator `d`, or a
    /// bare integer `n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseDyadicError {
            input: s.to_string(),
        };
        let s = s.trim();
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Dyadic::new(n, 0))
            }
            Some((num, den)) => {
                let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
                let den = den.trim();
                let e = if let Some(e) = den.strip_prefix("2^") {
                    u64::from_str(e.trim()).map_err(|_| bad())?
                } else {
                    let d = BigUint::from_str(den).map_err(|_| bad())?;
                    if d.is_zero() || d.count_ones() != 1 {
                        return Err(bad());
                    }
                    u64::from(d.trailing_zeros().expect("nonzero"))
                };
                Ok(Dyadic::new(n, e))
            }
        }
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare n1/2^e1 with n2/2^e2 by shifting both to the common
        // exponent max(e1, e2); shifts are exact so this never allocates more
        // than the wider operand.
        let e = self.exp.max(other.exp);
        let a: BigInt = &self.numer << (e - self.exp);
        let b: BigInt = &other.numer << (e - other.exp);
        a.cmp(&b)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exp.max(rhs.exp);
        let a: BigInt = &self.numer << (e - self.exp);
        let b: BigInt = &rhs.numer << (e - rhs.exp);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exp.max(rhs.exp);
        let a: BigInt = &self.numer << (e - self.exp);
        let b: BigInt = &rhs.numer << (e - rhs.exp);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(
            &self.numer * &rhs.numer,
            self.exp.checked_add(rhs.exp).expect("exponent overflow"),
        )
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            numer: -&self.numer,
            exp: self.exp,
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$method(rhs)
            }
        }
        impl $trait<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(Dyadic::new(4, 2), Dyadic::from_int(1));
        assert_eq!(Dyadic::new(4, 2).exp(), 0);
        assert_eq!(Dyadic::new(6, 1), Dyadic::from_int(3));
        // Even integers keep exponent zero; the numerator stays even.
        assert_eq!(Dyadic::from_int(2).exp(), 0);
        assert_eq!(Dyadic::new(0, 17), Dyadic::zero());
        assert_eq!(Dyadic::new(12, 2).to_string(), "3/2^0");
        assert_eq!(Dyadic::new(-8, 5), Dyadic::new(-1, 2));
    }

    #[test]
    fn display_and_parse_round_trip() {
        for s in ["0/2^0", "3/2^3", "-5/2^1", "7/2^0", "1/2^100"] {
            assert_eq!(d(s).to_string(), s);
        }
        assert_eq!(d("5"), Dyadic::from_int(5));
        assert_eq!(d(" -3 / 2^2 "), Dyadic::new(-3, 2));
        // Plain power-of-two denominators are accepted on input.
        assert_eq!(d("1/2"), Dyadic::new(1, 1));
        assert_eq!(d("3/4"), Dyadic::new(3, 2));
        assert_eq!(d("-5/8"), Dyadic::new(-5, 3));
        assert_eq!(d("7/1"), Dyadic::from_int(7));
        assert_eq!(d("71/64"), Dyadic::new(71, 6));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("1/6".parse::<Dyadic>().is_err());
        assert!("1/0".parse::<Dyadic>().is_err());
        assert!("x/2^1".parse::<Dyadic>().is_err());
        assert!("1/2^-1".parse::<Dyadic>().is_err());
    }

    #[test]
    fn arithmetic() {
        let half = Dyadic::new(1, 1);
        let quarter = Dyadic::new(1, 2);
        assert_eq!(&half + &quarter, Dyadic::new(3, 2));
        assert_eq!(&half - &quarter, quarter);
        assert_eq!(&half * &half, quarter);
        assert_eq!(&half - &half, Dyadic::zero());
        assert_eq!(-&half, Dyadic::new(-1, 1));
        assert_eq!(half.mul_pow2(3), Dyadic::from_int(4));
        assert_eq!(Dyadic::from_int(3).mul_pow2(-2), Dyadic::new(3, 2));
        assert_eq!(Dyadic::pow2(-3), Dyadic::new(1, 3));
        assert_eq!(Dyadic::pow2(4), Dyadic::from_int(16));
    }

    #[test]
    fn ordering() {
        assert!(Dyadic::new(3, 3) < Dyadic::new(1, 1));
        assert!(Dyadic::new(-1, 1) < Dyadic::zero());
        assert_eq!(Dyadic::new(2, 1).cmp(&Dyadic::one()), Ordering::Equal);
    }

    #[test]
    fn floor_and_scaling() {
        assert_eq!(Dyadic::new(7, 2).floor(), BigInt::from(1));
        assert_eq!(Dyadic::new(-7, 2).floor(), BigInt::from(-2));
        assert_eq!(Dyadic::new(1, 1).floor_scaled(3), BigInt::from(4));
        assert_eq!(Dyadic::new(3, 3).floor_scaled(2), BigInt::from(1));
        assert!(Dyadic::new(1, 1).is_integer_scaled(1));
        assert!(!Dyadic::new(1, 2).is_integer_scaled(1));
    }

    #[test]
    fn directed_rounding() {
        let x = Dyadic::new(5, 4); // 0.3125
        assert_eq!(x.round_down(2), Dyadic::new(1, 2));
        assert_eq!(x.round_up(2), Dyadic::new(2, 2));
        assert_eq!(x.round_down(4), x);
        assert_eq!(x.round_up(4), x);
        let y = Dyadic::new(-5, 4);
        assert_eq!(y.round_down(2), Dyadic::new(-2, 2));
        assert_eq!(y.round_up(2), Dyadic::new(-1, 2));
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(Dyadic::new(3, 1).to_f64(), 1.5);
        assert_eq!(Dyadic::new(-1, 2).to_f64(), -0.25);
        assert_eq!(Dyadic::zero().to_f64(), 0.0);
        // Giant exponents must not panic.
        assert_eq!(Dyadic::new(1, 8000).to_f64(), 0.0);
        let big = Dyadic::new(BigInt::one() << 9000u32, 0);
        assert_eq!(big.to_f64(), f64::INFINITY);
        // A value needing more than 64 bits of numerator still rounds well.
        let v = Dyadic::new((BigInt::one() << 100u32) + 1, 100);
        assert!((v.to_f64() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(n in -1_000_000i64..1_000_000, e in 0u64..40) {
            let a = Dyadic::new(n, e);
            let b = Dyadic::new(a.numer().clone(), a.exp());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn add_sub_round_trip(
            n1 in -1_000_000i64..1_000_000, e1 in 0u64..40,
            n2 in -1_000_000i64..1_000_000, e2 in 0u64..40,
        ) {
            let a = Dyadic::new(n1, e1);
            let b = Dyadic::new(n2, e2);
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn cmp_matches_rational(
            n1 in -1_000_000i64..1_000_000, e1 in 0u64..40,
            n2 in -1_000_000i64..1_000_000, e2 in 0u64..40,
        ) {
            let a = Dyadic::new(n1, e1);
            let b = Dyadic::new(n2, e2);
            prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        }

        #[test]
        fn mul_matches_rational(
            n1 in -10_000i64..10_000, e1 in 0u64..30,
            n2 in -10_000i64..10_000, e2 in 0u64..30,
        ) {
            let a = Dyadic::new(n1, e1);
            let b = Dyadic::new(n2, e2);
            prop_assert_eq!((&a * &b).to_rational(), a.to_rational() * b.to_rational());
        }

        #[test]
        fn parse_display_round_trip(n in -1_000_000i64..1_000_000, e in 0u64..40) {
            let a = Dyadic::new(n, e);
            let back: Dyadic = a.to_string().parse().unwrap();
            prop_assert_eq!(a, back);
        }

        #[test]
        fn rounding_brackets_value(n in -1_000_000i64..1_000_000, e in 0u64..40, bits in 0u64..20) {
            let x = Dyadic::new(n, e);
            let lo = x.round_down(bits);
            let hi = x.round_up(bits);
            prop_assert!(lo <= x && x <= hi);
            prop_assert!(&hi - &lo <= Dyadic::pow2(-(bits as i64)));
            prop_assert!(lo.exp() <= bits && hi.exp() <= bits);
        }

        #[test]
        fn to_f64_close(n in -1_000_000i64..1_000_000, e in 0u64..40) {
            let x = Dyadic::new(n, e);
            let approx = x.to_f64();
            let exact = n as f64 / 2f64.powi(e as i32);
            prop_assert!((approx - exact).abs() <= exact.abs() * 1e-12);
        }
    }
}
