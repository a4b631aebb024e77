//! Local averages of a sticky union around one of its points. For a point
//! of the first strip, some direction close to the containing
//! parallelogram's slope sees an average over the second strip of at least
//! the containment ratio divided by the horizontal extent X = 1/(2 eta) + 1.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{generate, Family};
use kakeya_lab::kset::KSet;
use kakeya_lab::sticky::StickyMap;
use kakeya_lab::witness::{parallelogram_average, witness_average, x_extent};
use num_traits::ToPrimitive;

fn main() {
    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let target = instance.tree.prune(2).expect("order is attainable");
    let sigma = StickyMap::sample(&target, target.height(), 11).expect("small height");
    let kset = KSet::from_sticky(&target, &sigma).expect("sigma maps the full tree");

    let eta = Dyadic::pow2(-1);
    let x_ext = x_extent(&eta).expect("eta is a power of two");
    println!("eta = {eta}, horizontal extent X = {x_ext}");

    // Probe the vertical midline of each parallelogram at x = 1/2.
    let x = Dyadic::pow2(-1);
    let slopes: Vec<Dyadic> = kset.parallelograms.iter().map(|p| p.slope.clone()).collect();
    for (idx, para) in kset.parallelograms.iter().enumerate() {
        let (lo, hi) = para.y_bounds(&x);
        let y = (&lo + &hi).mul_pow2(-1);
        let report = witness_average(&kset, &x, &y, &slopes, &eta).expect("point is inside");
        println!(
            "para {idx}: witness slope {}, average {:.6}, base 1/X = {:.6}, ratio {:.6}",
            report.omega,
            report.average.to_f64().unwrap(),
            report.base_value.to_f64().unwrap(),
            report.containment_ratio.to_f64().unwrap()
        );
        assert!(report.average >= &report.base_value * &report.containment_ratio);
    }

    // Averaging the second-strip indicator over one parallelogram of the
    // union gives exactly 1/X, independent of the map.
    let own = parallelogram_average(&kset, 0, &eta).expect("index in range");
    println!("\nsecond-strip average over parallelogram 0: {own}");
    assert_eq!(own, x_ext.to_rational().recip());
}
