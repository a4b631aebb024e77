//! Prune a quarter-Cantor direction tree down to its lacunary skeleton and
//! compare sizes before and after.

use kakeya_lab::families::{generate, Family};

fn main() {
    for n in 1..=4 {
        let instance = generate(Family::QuarterCantor, n).expect("order within range");
        let pruned = instance.tree.prune(n).expect("order is attainable");

        println!(
            "quarter-cantor n={n}: depth {}, {} vertices, {} leaves",
            instance.depth,
            instance.tree.vertex_count(),
            instance.tree.leaves().len(),
        );
        println!(
            "  pruned to order {n}: height {}, {} vertices, {} leaves, order {}",
            pruned.height(),
            pruned.vertex_count(),
            pruned.leaves().len(),
            pruned.lacunary_order(),
        );

        // Every pruned vertex must come from the original tree.
        for v in pruned.vertices() {
            assert!(instance.tree.contains_vertex(v));
        }
    }

    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let pruned = instance.tree.prune(2).expect("order is attainable");
    println!("\npruned quarter-cantor n=2:\n{}", pruned.to_text());
}
