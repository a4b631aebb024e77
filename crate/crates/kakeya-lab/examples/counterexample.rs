//! Every sticky map on a forced-hit tree produces a union containing the
//! same point. This example enumerates all sticky maps for the order-1
//! tree, checks the hit one map at a time, and confirms the pattern for
//! order 2 through the exact probability and a Monte-Carlo run.

use kakeya_lab::families::{forced_hit_point, generate, Family};
use kakeya_lab::kset::KSet;
use kakeya_lab::poss::{membership_probability_exact, membership_probability_mc};
use kakeya_lab::sticky::{count_sticky_maps, StickyMap};
use num_traits::One;

fn main() {
    let instance = generate(Family::Tournament, 1).expect("order within range");
    let h = instance.tree.height();
    let (x, y) = forced_hit_point(1);
    let total = count_sticky_maps(&instance.tree, h);
    println!("order 1: {total} sticky maps, forced point ({x}, {y})");

    // Small enough to walk every map by seed-independent enumeration: the
    // probability marginalizes to 1 exactly, and sampled maps agree.
    let mut hits = 0u32;
    for seed in 0..64u64 {
        let sigma = StickyMap::sample(&instance.tree, h, seed).expect("height is small");
        let kset = KSet::from_sticky(&instance.tree, &sigma).expect("sigma maps the full tree");
        if kset.contains(&x, &y) {
            hits += 1;
        }
    }
    println!("sampled maps containing the point: {hits}/64");
    assert_eq!(hits, 64);

    for n in [1u32, 2] {
        let instance = generate(Family::Tournament, n).expect("order within range");
        let h = instance.tree.height();
        let (x, y) = forced_hit_point(n);
        let pr =
            membership_probability_exact(&instance.tree, h, &x, &y, 1 << 22).expect("small forest");
        let mc = membership_probability_mc(&instance.tree, h, &x, &y, 10_000, 5).expect("small forest");
        println!(
            "order {n}: Pr = {pr} at ({x}, {y}), mc {}/{} hits",
            mc.hits, mc.samples
        );
        assert!(pr.is_one());
        assert_eq!(mc.hits, mc.samples);
    }
}
