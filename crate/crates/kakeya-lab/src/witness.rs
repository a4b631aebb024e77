//! Local averages of a second-strip set over enclosing parallelograms.
//!
//! For a point of the first strip, the construction tilts an enclosing
//! parallelogram along a true direction close to the slope of the
//! parallelogram through the point, spans the abscissae `[0, X]` with
//! `X = 1/(2 eta) + 1`, and measures which fraction of the enclosure is
//! covered by the part of the set lying in the second strip `[X - 1, X]`.
//! The reference value is the average over the point's own parallelogram,
//! which is exactly `1/X`.

use num_rational::BigRational;

use crate::dyadic::Dyadic;
use crate::kset::KSet;
use crate::sweep::{union_strip_band_area, Band};

/// Why a witness average could not be formed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    /// The strip bounds `1/(2 eta)` are dyadic only for these etas.
    #[error("eta must be a positive power of two, got {0}")]
    EtaNotPowerOfTwo(Dyadic),
    /// The point lies in no parallelogram of the union (boundaries count
    /// as outside).
    #[error("point ({0}, {1}) lies in no parallelogram of the union")]
    PointOutside(Dyadic, Dyadic),
    /// No supplied direction is within `2^-h` of the slope of any
    /// parallelogram containing the point.
    #[error("no direction within 2^-{height} of a containing parallelogram")]
    NoNearbyDirection { height: u32 },
    /// A parallelogram index out of range.
    #[error("parallelogram index {index} out of range ({count} available)")]
    BadIndex { index: usize, count: usize },
}

/// The best enclosing-parallelogram average at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Largest area fraction over the admissible enclosures.
    pub average: BigRational,
    /// The reference value `1/X`.
    pub base_value: BigRational,
    /// `average / base_value`; at least `1/(1 + X)` by containment.
    pub containment_ratio: BigRational,
    /// The true direction the best enclosure is oriented along.
    pub omega: Dyadic,
    /// Index of the containing parallelogram the enclosure was built from.
    pub para_index: usize,
}

/// The horizontal extent `X = 1/(2 eta) + 1`, defined for eta a positive
/// power of two so that `X` stays dyadic.
pub fn x_extent(eta: &Dyadic) -> Result<Dyadic, WitnessError> {
    if !eta.is_positive() || eta.numer().bits() != 1 {
        return Err(WitnessError::EtaNotPowerOfTwo(eta.clone()));
    }
    // eta = 2^-j gives 1/(2 eta) = 2^(j-1).
    let j = i64::try_from(eta.exp()).expect("exponent fits");
    Ok(&Dyadic::pow2(j - 1) + &Dyadic::one())
}

/// The second strip `[X - 1, X]` for the given eta.
pub fn second_strip(eta: &Dyadic) -> Result<(Dyadic, Dyadic), WitnessError> {
    let hi = x_extent(eta)?;
    let lo = &hi - &Dyadic::one();
    Ok((lo, hi))
}

/// Maximizes, over parallelograms of `kset` containing `(x, y)` and true
/// directions within `2^-h` of their slopes, the exact fraction of the
/// enclosing parallelogram covered by `kset` restricted to the second
/// strip. The enclosure tilted along `omega` spans `[0, X]` horizontally
/// and, in the sheared coordinate `t = y - omega x`, the interval of width
/// `2^-h + |d - omega| X` swept by the containing parallelogram.
pub fn witness_average(
    kset: &KSet,
    x: &Dyadic,
    y: &Dyadic,
    omega_slopes: &[Dyadic],
    eta: &Dyadic,
) -> Result<WitnessReport, WitnessError> {
    let x_ext = x_extent(eta)?;
    let strip_lo = &x_ext - &Dyadic::one();
    let thickness = Dyadic::pow2(-i64::from(kset.height));
    let x_rat = x_ext.to_rational();
    let base_value = x_rat.recip();

    let mut found_para = false;
    let mut best: Option<WitnessReport> = None;
    for (idx, para) in kset.parallelograms.iter().enumerate() {
        if !para.contains(x, y) {
            continue;
        }
        found_para = true;
        for omega in omega_slopes {
            let dev = &para.slope - omega;
            if dev.abs() > thickness {
                continue;
            }
            let drift = &dev * &x_ext;
            let t0 = if drift.is_negative() {
                &para.base.left() + &drift
            } else {
                para.base.left()
            };
            let width = &thickness + &drift.abs();
            let band = Band {
                slope: omega.clone(),
                t0,
                width: width.clone(),
            };
            let area = union_strip_band_area(&kset.parallelograms, &strip_lo, &x_ext, &band);
            let average = area / (width.to_rational() * &x_rat);
            if best.as_ref().is_none_or(|b| average > b.average) {
                let containment_ratio = &average * &x_rat;
                best = Some(WitnessReport {
                    average,
                    base_value: base_value.clone(),
                    containment_ratio,
                    omega: omega.clone(),
                    para_index: idx,
                });
            }
        }
    }
    if !found_para {
        return Err(WitnessError::PointOutside(x.clone(), y.clone()));
    }
    best.ok_or(WitnessError::NoNearbyDirection {
        height: kset.height,
    })
}

/// The exact average of the second-strip indicator over one parallelogram
/// of the union, spanning `[0, X]`. Equals `1/X` identically: the
/// parallelogram meets its own strip restriction in a piece of area
/// `2^-h * 1` out of `2^-h * X`.
pub fn parallelogram_average(
    kset: &KSet,
    index: usize,
    eta: &Dyadic,
) -> Result<BigRational, WitnessError> {
    let para = kset
        .parallelograms
        .get(index)
        .ok_or(WitnessError::BadIndex {
            index,
            count: kset.parallelograms.len(),
        })?;
    let x_ext = x_extent(eta)?;
    let strip_lo = &x_ext - &Dyadic::one();
    let band = Band {
        slope: para.slope.clone(),
        t0: para.base.left(),
        width: para.base.length(),
    };
    let area = union_strip_band_area(&kset.parallelograms, &strip_lo, &x_ext, &band);
    Ok(area / (para.base.length().to_rational() * x_ext.to_rational()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirtree::DirTree;
    use crate::families::{generate, Family};
    use crate::kset::KSet;
    use crate::sticky::StickyMap;
    use num_bigint::BigInt;
    use num_traits::One;

    fn d(text: &str) -> Dyadic {
        text.parse().unwrap()
    }

    fn rational(n: i64, m: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(m))
    }

    fn slab(height: u32) -> KSet {
        let tree = DirTree::from_directions(&[Dyadic::zero()], height).unwrap();
        let sigma = StickyMap::sample(&tree, height, 1).unwrap();
        KSet::from_sticky(&tree, &sigma).unwrap()
    }

    #[test]
    fn x_extent_requires_power_of_two_eta() {
        assert_eq!(x_extent(&d("1/2^1")).unwrap(), d("2"));
        assert_eq!(x_extent(&d("1/2^2")).unwrap(), d("3"));
        assert_eq!(x_extent(&d("1")).unwrap(), d("3/2^1"));
        assert!(matches!(
            x_extent(&d("3/2^3")),
            Err(WitnessError::EtaNotPowerOfTwo(_))
        ));
        assert!(matches!(
            x_extent(&Dyadic::zero()),
            Err(WitnessError::EtaNotPowerOfTwo(_))
        ));
    }

    #[test]
    fn every_parallelogram_averages_to_the_base_value() {
        let eta = d("1/2^1");
        let k = slab(3);
        for index in 0..k.parallelograms.len() {
            let avg = parallelogram_average(&k, index, &eta).unwrap();
            assert_eq!(avg, rational(1, 2));
        }

        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let sigma = StickyMap::sample(&instance.tree, instance.tree.height(), 9).unwrap();
        let k = KSet::from_sticky(&instance.tree, &sigma).unwrap();
        for index in 0..k.parallelograms.len() {
            let avg = parallelogram_average(&k, index, &eta).unwrap();
            assert_eq!(avg, rational(1, 2), "parallelogram {index}");
        }
        let narrow = d("1/2^3");
        let avg = parallelogram_average(&k, 0, &narrow).unwrap();
        assert_eq!(avg, rational(1, 5));
    }

    #[test]
    fn slab_witness_recovers_the_base_value_exactly() {
        let k = slab(3);
        let eta = d("1/2^1");
        let report = witness_average(&k, &d("1/2^1"), &d("5/2^4"), &[Dyadic::zero()], &eta).unwrap();
        assert_eq!(report.average, rational(1, 2));
        assert_eq!(report.base_value, rational(1, 2));
        assert!(report.containment_ratio.is_one());
        assert_eq!(report.omega, Dyadic::zero());
    }

    #[test]
    fn family_witness_meets_the_containment_bound() {
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let sigma = StickyMap::sample(&instance.tree, instance.tree.height(), 5).unwrap();
        let k = KSet::from_sticky(&instance.tree, &sigma).unwrap();
        let eta = d("1/2^1");
        // An interior point of the first parallelogram at x = 1/2.
        let para = &k.parallelograms[0];
        let x = d("1/2^1");
        let mid = {
            let (lo, hi) = para.y_bounds(&x);
            (&lo + &hi).mul_pow2(-1)
        };
        let report = witness_average(&k, &x, &mid, &instance.directions, &eta).unwrap();
        // The enclosure contains the strip piece of the point's own
        // parallelogram, so the ratio is at least 1/(1 + X) = 1/3.
        assert!(report.containment_ratio >= rational(1, 3));
        assert!(report.average <= BigRational::one());
        assert!(k.parallelograms[report.para_index].contains(&x, &mid));
    }

    #[test]
    fn points_outside_and_faraway_directions_are_rejected() {
        let k = slab(2);
        let eta = d("1/2^1");
        assert!(matches!(
            witness_average(&k, &d("1/2^1"), &d("5"), &[Dyadic::zero()], &eta),
            Err(WitnessError::PointOutside(_, _))
        ));
        // Boundary points count as outside.
        assert!(matches!(
            witness_average(&k, &d("1/2^1"), &d("1/2^1"), &[Dyadic::zero()], &eta),
            Err(WitnessError::PointOutside(_, _))
        ));
        assert!(matches!(
            witness_average(&k, &d("1/2^1"), &d("5/2^4"), &[Dyadic::one()], &eta),
            Err(WitnessError::NoNearbyDirection { height: 2 })
        ));
    }

    #[test]
    fn bad_parallelogram_index_is_reported() {
        let k = slab(1);
        let eta = d("1/2^1");
        assert!(matches!(
            parallelogram_average(&k, 5, &eta),
            Err(WitnessError::BadIndex { index: 5, count: 2 })
        ));
    }
}
