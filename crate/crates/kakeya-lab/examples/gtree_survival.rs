//! Coarsen the possible-base structure at a point into a choice tree and
//! read off its survival probability under independent Bernoulli(1/2)
//! choices. The survival dominates the exact membership probability at the
//! same point, which the example checks directly.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{generate, Family};
use kakeya_lab::gtree::build_gtree;
use kakeya_lab::poss::membership_probability_exact;
use num_rational::BigRational;

fn main() {
    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let target = instance.tree.prune(2).expect("order is attainable");

    let eta = Dyadic::pow2(-1);
    let x = Dyadic::from_int(2);
    let y = Dyadic::new(65, 7);

    let report = build_gtree(&target, &eta, &x, &y).expect("x is large enough for eta");
    println!("choice tree at ({x}, {y}), eta = {eta}:");
    print!("{}", report.tree.to_text());
    println!("clean: {}", report.is_clean());
    println!("hierarchy:");
    for (word, vertex) in &report.hierarchy {
        println!("  sigma word {:4} anchored at vertex {}", word.to_string(), vertex);
    }

    let half = BigRational::new(1.into(), 2.into());
    let survival = report.tree.survival_probability(&half);
    let pr = membership_probability_exact(&target, target.height(), &x, &y, 1 << 20)
        .expect("small forest");
    println!("survival at p=1/2: {survival}");
    println!("exact membership:  {pr}");
    assert!(pr <= survival, "survival must dominate membership");
}
