//! Survival of root-to-leaf percolation on the full binary tree at
//! p = 1/2: exact rationals for small heights, then certified dyadic
//! enclosures out to height 200 where the exact recursion is far beyond
//! reach. The scaled sequence n * s(n) settles toward a constant.

use kakeya_lab::binary_perco::{survival_bounds, survival_exact};
use kakeya_lab::dyadic::Dyadic;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn main() {
    let half = BigRational::new(1.into(), 2.into());
    println!("exact survival, p = 1/2:");
    for h in 1..=8 {
        let s = survival_exact(h, &half);
        println!("  h = {h}: {s} = {:.8}", s.to_f64().unwrap());
    }

    let p = Dyadic::pow2(-1);
    let bounds = survival_bounds(200, &p, 192);
    println!("\ncertified enclosures at 192 bits:");
    for n in [10u32, 25, 50, 100, 150, 200] {
        let b = &bounds[n as usize];
        let scale = Dyadic::from_int(i64::from(n));
        let lo = (&scale * &b.lo).to_f64();
        let hi = (&scale * &b.hi).to_f64();
        println!(
            "  n = {n:3}: s in [{:.12}, {:.12}], n*s in [{lo:.9}, {hi:.9}]",
            b.lo.to_f64(),
            b.hi.to_f64()
        );
    }

    let last = &bounds[200];
    println!("\nenclosure width at n = 200: {:.3e}", last.width().to_f64());
}
