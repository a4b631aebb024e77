//! Seeded random instances for cross-checking the exact algorithms.
//!
//! Everything here draws from a caller-supplied ChaCha generator, so a
//! fixed seed reproduces the same trees and unions on every run.

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::bitstring::BitString;
use crate::dirtree::DirTree;
use crate::kset::KSet;
use crate::sticky::StickyMap;

/// A random direction tree of height at most `max_height`, with leaves at
/// mixed depths, whose subtree count at the root stays within
/// `subtree_cap` so exhaustive cross-checks remain affordable. Draws fresh
/// candidates until one fits.
pub fn random_tree(rng: &mut ChaCha8Rng, max_height: u8, subtree_cap: u64) -> DirTree {
    assert!(max_height >= 1);
    loop {
        let leaf_count = 1 + (rng.next_u64() % 12) as usize;
        let mut leaves = Vec::with_capacity(leaf_count);
        for _ in 0..leaf_count {
            let height = 1 + (rng.next_u64() % u64::from(max_height)) as u32;
            let path = rng.next_u64() % (1u64 << height);
            leaves.push(BitString::new(height, path));
        }
        let tree = DirTree::from_leaves(&leaves).expect("at least one leaf");
        if tree
            .brute_force_split(BitString::root(), subtree_cap)
            .is_ok()
        {
            return tree;
        }
    }
}

/// A random direction tree with between 1 and `max_leaves` leaves, all at
/// exactly the given height.
pub fn random_uniform_tree(rng: &mut ChaCha8Rng, height: u8, max_leaves: usize) -> DirTree {
    assert!(height >= 1 && height <= 22);
    assert!(max_leaves >= 1);
    let leaf_count = 1 + (rng.next_u64() as usize) % max_leaves;
    let mut leaves = Vec::with_capacity(leaf_count);
    for _ in 0..leaf_count {
        let path = rng.next_u64() % (1u64 << height);
        leaves.push(BitString::new(u32::from(height), path));
    }
    DirTree::from_leaves(&leaves).expect("at least one leaf")
}

/// A random parallelogram union: a uniform-height random tree together
/// with a random sticky self-map of it.
pub fn random_kset(rng: &mut ChaCha8Rng, height: u8, max_leaves: usize) -> KSet {
    let tree = random_uniform_tree(rng, height, max_leaves);
    let sigma = StickyMap::sample_with(&tree, u32::from(height), rng)
        .expect("height fits the sticky sampler");
    KSet::from_sticky(&tree, &sigma).expect("sticky map covers the leaves")
}
