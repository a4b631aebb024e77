//! Scan the maximal separation constant across the three direction
//! families, then search one tree for its best-separated subtrees. The
//! quarter-Cantor trees hold eta = 1/2 at every order, the forced-hit
//! trees collapse to zero, and the vanishing family admits no constraint
//! at order 1 and decays afterwards.

use kakeya_lab::families::{generate, Family};
use kakeya_lab::subtree::best_separated_subtree_capped;

fn main() {
    for (family, top) in [
        (Family::QuarterCantor, 4u32),
        (Family::Tournament, 3),
        (Family::Vanishing, 4),
    ] {
        println!("{family}:");
        for n in 1..=top {
            let instance = generate(family, n).expect("order within range");
            let pruned = instance.tree.prune(n).expect("order is attainable");
            let sep = pruned.separation_eta_max();
            match sep.value() {
                Some(eta) => println!("  n = {n}: eta_max = {eta}"),
                None => println!("  n = {n}: unconstrained (no nested splitting pair)"),
            }
        }
    }

    // The whole vanishing tree at order 3 forces small separation, but its
    // low-order subtrees do better: the search picks the widest-separated
    // splitting cascade of each order.
    let instance = generate(Family::Vanishing, 3).expect("order within range");
    println!("\nbest separated subtrees of vanishing n=3:");
    for n in 1..=3 {
        let best = best_separated_subtree_capped(&instance.tree, n, 1 << 20)
            .expect("search stays under the cap");
        match best.eta.value() {
            Some(eta) => println!(
                "  order {n}: eta_max = {eta} with {} vertices",
                best.witness.vertex_count()
            ),
            None => println!("  order {n}: unconstrained"),
        }
    }
}
