//! Membership probabilities for a fixed point under random sticky maps.
//!
//! Two contrasting cases: a point every sticky union must contain, and an
//! ordinary point hit only by some of the maps.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{forced_hit_point, generate, Family};
use kakeya_lab::poss::{membership_probability_exact, membership_probability_mc, poss_set};
use kakeya_lab::sticky::count_sticky_maps;

const CAP: u64 = 1 << 20;

fn main() {
    // The forced point of the order-1 forced-hit family.
    let instance = generate(Family::Tournament, 1).expect("order within range");
    let h = instance.tree.height();
    let (x, y) = forced_hit_point(1);
    let total = count_sticky_maps(&instance.tree, h);
    let pr = membership_probability_exact(&instance.tree, h, &x, &y, CAP).expect("tiny instance");
    println!("forced-hit n=1 at ({x}, {y}): {total} sticky maps, Pr = {pr}");

    // An ordinary point of the pruned quarter-Cantor family: several bases
    // could route a parallelogram over it, none is forced to.
    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let target = instance.tree.prune(2).expect("order is attainable");
    let h = target.height();
    let x = Dyadic::from_int(2);
    let y = Dyadic::new(65, 7);

    let poss = poss_set(&target, h, &x, &y);
    println!("\nquarter-cantor n=2 at ({x}, {y}): {} possible pairs", poss.pairs.len());
    for pair in &poss.pairs {
        println!("  base {} -> leaf {}", pair.base, pair.leaf);
    }

    let pr = membership_probability_exact(&target, h, &x, &y, CAP).expect("small forest");
    let mc = membership_probability_mc(&target, h, &x, &y, 20_000, 42).expect("small forest");
    println!("Pr = {pr} exactly, mc {:.6} +- {:.6}", mc.estimate, mc.stderr);
}
