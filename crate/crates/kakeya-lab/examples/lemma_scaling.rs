//! How strip measures of sticky unions scale with the order of the
//! underlying quarter-Cantor tree. Over many sampled maps the second-strip
//! measure decays like 1/N while the first-strip measure stays above
//! c / log N, so the scaled columns hold roughly level.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{generate, Family};
use kakeya_lab::kset::KSet;
use kakeya_lab::sticky::StickyMap;
use kakeya_lab::witness::second_strip;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DRAWS: u64 = 40;

fn main() {
    let eta = Dyadic::pow2(-1);
    let (x0, x1) = second_strip(&eta).expect("eta is a power of two");
    println!("second strip for eta = {eta}: [{x0}, {x1}]");
    println!("{:>2} {:>12} {:>12} {:>14} {:>16}", "n", "mean|K1|", "mean|K2|", "mean|K2|*n", "min|K1|*n/ln n");

    for n in 2..=4u32 {
        let instance = generate(Family::QuarterCantor, n).expect("order within range");
        let target = instance.tree.prune(n).expect("order is attainable");
        let zero = Dyadic::zero();
        let one = Dyadic::one();

        let mut sum1 = BigRational::zero();
        let mut sum2 = BigRational::zero();
        let mut min1: Option<BigRational> = None;
        for draw in 0..DRAWS {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + 100 * u64::from(n) + draw);
            let sigma =
                StickyMap::sample_with(&target, target.height(), &mut rng).expect("small height");
            let kset = KSet::from_sticky(&target, &sigma).expect("sigma maps the full tree");
            let m1 = kset.strip_measure_exact(&zero, &one);
            let m2 = kset.strip_measure_exact(&x0, &x1);
            if min1.as_ref().is_none_or(|m| &m1 < m) {
                min1 = Some(m1.clone());
            }
            sum1 += m1;
            sum2 += m2;
        }
        let draws = BigRational::from_integer(DRAWS.into());
        let mean1 = (&sum1 / &draws).to_f64().unwrap();
        let mean2 = (&sum2 / &draws).to_f64().unwrap();
        let min1 = min1.expect("at least one draw").to_f64().unwrap();
        let nf = f64::from(n);
        println!(
            "{n:>2} {mean1:>12.6} {mean2:>12.6} {:>14.6} {:>16.6}",
            mean2 * nf,
            min1 * nf / nf.ln()
        );
    }
}
