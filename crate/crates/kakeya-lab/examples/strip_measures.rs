//! Exact strip measures against Monte-Carlo estimates.
//!
//! The exact value comes from a plane sweep over the union of
//! parallelograms restricted to a vertical strip; the estimate throws
//! uniform points at the bounding box. The two must agree to within a few
//! standard errors, and with a seeded generator the estimate is
//! reproducible bit for bit.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{generate, Family};
use kakeya_lab::kset::KSet;
use kakeya_lab::sticky::StickyMap;

fn main() {
    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let target = instance.tree.prune(2).expect("order is attainable");

    let x0 = Dyadic::zero();
    let x1 = Dyadic::one();
    for seed in [1u64, 2, 3] {
        let sigma = StickyMap::sample(&target, target.height(), seed).expect("height is small");
        let kset = KSet::from_sticky(&target, &sigma).expect("sigma maps the full tree");

        let exact = kset.strip_measure_exact(&x0, &x1);
        let exact_f64 = rational_to_f64(&exact);
        let mc = kset.strip_measure_mc(&x0, &x1, 20_000, 1000 + seed);

        println!(
            "seed {seed}: |K over [0,1]| = {exact} = {exact_f64:.6}, mc {:.6} +- {:.6} ({}/{} hits)",
            mc.estimate, mc.stderr, mc.hits, mc.samples
        );
        assert!((mc.estimate - exact_f64).abs() <= 4.0 * mc.stderr.max(1e-9));
    }
}

fn rational_to_f64(q: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().expect("measure fits in f64")
}
