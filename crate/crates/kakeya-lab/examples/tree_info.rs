//! Build a direction tree from explicit slopes and inspect its structure:
//! the text form, the splitting vertices, the lambda statistic, and the
//! lacunary order.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::DirTree;

fn main() {
    let directions = [Dyadic::pow2(-1), Dyadic::pow2(-2), Dyadic::pow2(-3)];
    let depth = 6;
    let tree = DirTree::from_directions(&directions, depth).expect("directions are distinct");

    println!("tree over {{1/2, 1/4, 1/8}} at depth {depth}");
    println!("{}", tree.to_text());
    println!("vertices: {}", tree.vertex_count());
    println!("leaves:   {}", tree.leaves().len());

    let report = tree.splitting_values();
    println!("lambda:   {}", report.lambda);
    println!("order:    {}", tree.lacunary_order());

    println!("splitting vertices and their values:");
    for v in tree.splitting_vertices() {
        println!("  {:8} -> {}", v.to_string(), report.value(v));
    }

    // The recursive definition agrees with direct enumeration of every
    // subtree, which is cheap at this size.
    let brute = tree
        .brute_force_split(kakeya_lab::BitString::root(), 1 << 16)
        .expect("small tree");
    assert_eq!(report.lambda, brute);
    println!("brute-force check at the root agrees: {brute}");
}
