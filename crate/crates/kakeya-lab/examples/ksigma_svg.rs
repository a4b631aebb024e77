//! Sample a sticky map on the pruned quarter-Cantor tree, assemble the
//! union of parallelograms it induces, and render the picture to an SVG
//! file under the system temp directory.

use kakeya_lab::dyadic::Dyadic;
use kakeya_lab::families::{generate, Family};
use kakeya_lab::kset::KSet;
use kakeya_lab::sticky::StickyMap;

fn main() {
    let instance = generate(Family::QuarterCantor, 2).expect("order within range");
    let target = instance.tree.prune(2).expect("order is attainable");

    let sigma = StickyMap::sample(&target, target.height(), 7).expect("height is small");
    let kset = KSet::from_sticky(&target, &sigma).expect("sigma maps the full tree");

    println!(
        "sticky union: {} parallelograms of height 2^-{}",
        kset.parallelograms.len(),
        kset.height
    );
    let x = Dyadic::one();
    for para in &kset.parallelograms {
        let (lo, hi) = para.y_bounds(&x);
        println!("  slope {:8} base {:10} y at x=1 in [{lo}, {hi}]", para.slope.to_string(), para.base.to_string());
    }

    let x0 = Dyadic::zero();
    let x1 = Dyadic::from_int(2);
    let svg = kset.render_svg(&x0, &x1, Some("seed 7"));
    let path = std::env::temp_dir().join("ksigma_quarter_cantor_n2_seed7.svg");
    std::fs::write(&path, svg).expect("temp dir is writable");
    println!("wrote {}", path.display());
}
