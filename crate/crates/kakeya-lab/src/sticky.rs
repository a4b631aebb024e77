//! Sticky maps: height-preserving, ancestry-preserving maps from the full
//! binary tree of height `h` into a direction tree.
//!
//! A sticky map sends the root to the root, and each vertex to a child of its
//! parent's image. All the freedom sits at vertices whose parent's image has
//! two children in the target; everywhere else the walk is forced. The map is
//! stored as one bit per domain vertex (the chosen child), normalized to 0
//! wherever there is no actual choice, so equal maps compare equal
//! structurally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitstring::BitString;
use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;

/// Largest supported domain height (the bit table has `2^(h+1)` entries).
pub const MAX_STICKY_HEIGHT: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StickyError {
    #[error("domain height {0} exceeds the supported maximum {MAX_STICKY_HEIGHT}")]
    HeightTooLarge(u32),
    #[error("domain height {h} exceeds the target tree height {tree_height}")]
    HeightExceedsTree { h: u32, tree_height: u32 },
    #[error("target dead-ends at {vertex} before reaching the domain height")]
    DeadEnd { vertex: BitString },
    #[error("vertex {vertex} maps to {image}, which is not in the target tree")]
    NotInTree { vertex: BitString, image: BitString },
    #[error("vertex {vertex} maps to {image}, whose height differs")]
    WrongHeight { vertex: BitString, image: BitString },
    #[error("vertex {vertex} maps to both {first} and {second}")]
    AncestryViolation {
        vertex: BitString,
        first: BitString,
        second: BitString,
    },
    #[error("no image determines domain vertex {leaf}")]
    MissingLeaf { leaf: BitString },
    #[error("vertex {vertex} lies above the domain height {h}")]
    AboveDomain { vertex: BitString, h: u32 },
    #[error("restricted enumeration needs {required} assignments, cap is {cap}")]
    EnumerationCapExceeded { required: BigUint, cap: u64 },
    #[error("line {line}: cannot parse sticky map entry {input:?}")]
    ParseEntry { line: usize, input: String },
}

/// A sticky map from the full binary tree of height `height` into a target
/// direction tree (borrowed at each call, not stored).
#[derive(Clone, PartialEq, Eq)]
pub struct StickyMap {
    height: u32,
    bits: Vec<u64>,
}

impl StickyMap {
    fn words(height: u32) -> usize {
        let entries = (1usize << (height + 1)) - 1;
        entries.div_ceil(64)
    }

    fn bit(&self, v: BitString) -> u8 {
        let i = v.tree_index() as usize;
        ((self.bits[i / 64] >> (i % 64)) & 1) as u8
    }

    fn set_bit(&mut self, v: BitString, bit: u8) {
        let i = v.tree_index() as usize;
        if bit != 0 {
            self.bits[i / 64] |= 1 << (i % 64);
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Image of a domain vertex, decoded by walking the target.
    pub fn image(&self, target: &DirTree, v: BitString) -> Result<BitString, StickyError> {
        let mut img = BitString::root();
        for i in 1..=v.height() {
            let u = v.prefix(i);
            img = match target.children(img) {
                (Some(c0), Some(_)) if self.bit(u) == 0 => c0,
                (Some(_), Some(c1)) => c1,
                (Some(c), None) | (None, Some(c)) => c,
                (None, None) => return Err(StickyError::DeadEnd { vertex: img }),
            };
        }
        Ok(img)
    }

    /// Samples a sticky map: walking the domain depth-first (lower child
    /// first), each vertex picks uniformly and independently among the
    /// children of its parent's image, consuming one generator bit per
    /// two-way choice.
    ///
    /// This is the uniform distribution over sticky maps exactly when every
    /// image vertex reached with two children is equally constrained, for
    /// example on targets where every non-leaf vertex splits; in general it
    /// is the independent-choice law, not uniform over the set of maps.
    pub fn sample_with(
        target: &DirTree,
        h: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<StickyMap, StickyError> {
        if h > MAX_STICKY_HEIGHT {
            return Err(StickyError::HeightTooLarge(h));
        }
        if h > target.height() {
            return Err(StickyError::HeightExceedsTree {
                h,
                tree_height: target.height(),
            });
        }
        let mut map = StickyMap {
            height: h,
            bits: vec![0u64; Self::words(h)],
        };
        fn walk(
            target: &DirTree,
            map: &mut StickyMap,
            rng: &mut ChaCha8Rng,
            u: BitString,
            img: BitString,
            h: u32,
        ) -> Result<(), StickyError> {
            if u.height() == h {
                return Ok(());
            }
            for bit in [0u8, 1] {
                let child = u.child(bit);
                let child_img = match target.children(img) {
                    (Some(c0), Some(c1)) => {
                        let rb = (rng.next_u32() & 1) as u8;
                        map.set_bit(child, rb);
                        if rb == 0 {
                            c0
                        } else {
                            c1
                        }
                    }
                    (Some(c), None) | (None, Some(c)) => c,
                    (None, None) => return Err(StickyError::DeadEnd { vertex: img }),
                };
                walk(target, map, rng, child, child_img, h)?;
            }
            Ok(())
        }
        walk(target, &mut map, rng, BitString::root(), BitString::root(), h)?;
        Ok(map)
    }

    /// [`StickyMap::sample_with`] from a fresh seeded generator.
    pub fn sample(target: &DirTree, h: u32, seed: u64) -> Result<StickyMap, StickyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::sample_with(target, h, &mut rng)
    }

    /// Builds and validates a sticky map from explicit vertex/image pairs.
    ///
    /// Pairs may cover any set of vertices as long as every domain leaf at
    /// height `h` is determined; ancestors are derived from prefixes, and any
    /// inconsistency is reported with the offending vertex.
    pub fn from_pairs(
        pairs: &[(BitString, BitString)],
        target: &DirTree,
        h: u32,
    ) -> Result<StickyMap, StickyError> {
        if h > MAX_STICKY_HEIGHT {
            return Err(StickyError::HeightTooLarge(h));
        }
        let mut images: BTreeMap<BitString, BitString> = BTreeMap::new();
        images.insert(BitString::root(), BitString::root());
        for (v, img) in pairs {
            if v.height() != img.height() {
                return Err(StickyError::WrongHeight {
                    vertex: *v,
                    image: *img,
                });
            }
            if v.height() > h {
                return Err(StickyError::AboveDomain { vertex: *v, h });
            }
            if !target.contains_vertex(*img) {
                return Err(StickyError::NotInTree {
                    vertex: *v,
                    image: *img,
                });
            }
            for k in 0..=v.height() {
                let u = v.prefix(k);
                let u_img = img.prefix(k);
                if let Some(prev) = images.get(&u) {
                    if *prev != u_img {
                        return Err(StickyError::AncestryViolation {
                            vertex: u,
                            first: *prev,
                            second: u_img,
                        });
                    }
                } else {
                    images.insert(u, u_img);
                }
            }
        }
        // Walk the domain top down: every leaf must be determined, and every
        // step must follow an edge of the target.
        let mut map = StickyMap {
            height: h,
            bits: vec![0u64; Self::words(h)],
        };
        let mut stack = vec![BitString::root()];
        while let Some(u) = stack.pop() {
            if u.height() == h {
                continue;
            }
            let img = images[&u];
            for bit in [0u8, 1] {
                let child = u.child(bit);
                let child_img = match images.get(&child) {
                    Some(ci) => *ci,
                    None => return Err(StickyError::MissingLeaf { leaf: child }),
                };
                match target.children(img) {
                    (Some(_), Some(_)) => map.set_bit(child, child_img.last_bit().unwrap_or(0)),
                    (Some(c), None) | (None, Some(c)) => {
                        if child_img != c {
                            return Err(StickyError::NotInTree {
                                vertex: child,
                                image: child_img,
                            });
                        }
                    }
                    (None, None) => return Err(StickyError::DeadEnd { vertex: img }),
                }
                stack.push(child);
            }
        }
        Ok(map)
    }

    /// Leaf/image pairs, enough to reconstruct the map.
    pub fn to_pairs(&self, target: &DirTree) -> Result<Vec<(BitString, BitString)>, StickyError> {
        let mut pairs = Vec::new();
        for leaf in BitString::level(self.height) {
            pairs.push((leaf, self.image(target, leaf)?));
        }
        Ok(pairs)
    }

    /// Two-column text, one domain leaf per line.
    pub fn to_text(&self, target: &DirTree) -> Result<String, StickyError> {
        let mut out = String::new();
        for (v, img) in self.to_pairs(target)? {
            writeln!(out, "{v} {img}").expect("string write");
        }
        Ok(out)
    }

    /// Parses the [`StickyMap::to_text`] format and validates against the
    /// target. Blank lines and `#` comments are ignored.
    pub fn from_text(s: &str, target: &DirTree) -> Result<StickyMap, StickyError> {
        let mut pairs = Vec::new();
        let mut h = 0;
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || StickyError::ParseEntry {
                line: i + 1,
                input: line.to_string(),
            };
            let (a, b) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
            let v: BitString = a.trim().parse().map_err(|_| bad())?;
            let img: BitString = b.trim().parse().map_err(|_| bad())?;
            h = h.max(v.height());
            pairs.push((v, img));
        }
        Self::from_pairs(&pairs, target, h)
    }
}

impl std::fmt::Debug for StickyMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StickyMap {{ height: {} }}", self.height)
    }
}

/// Exact number of sticky maps from the full binary tree of height `h` into
/// the target.
///
/// Writing `c(t)` for the count below an image vertex `t`, a domain vertex
/// mapped to `t` sends each of its two children independently to some child
/// of `t`, so `c(t) = (sum over children c(t'))^2`, with `c = 1` at height
/// `h`. A target that dead-ends early contributes zero.
pub fn count_sticky_maps(target: &DirTree, h: u32) -> BigUint {
    fn count(target: &DirTree, t: BitString, h: u32, memo: &mut BTreeMap<BitString, BigUint>) -> BigUint {
        if t.height() == h {
            return BigUint::one();
        }
        if let Some(c) = memo.get(&t) {
            return c.clone();
        }
        let mut sum = BigUint::zero();
        for child in [target.child(t, 0), target.child(t, 1)].into_iter().flatten() {
            sum += count(target, child, h, memo);
        }
        let result = &sum * &sum;
        memo.insert(t, result.clone());
        result
    }
    let mut memo = BTreeMap::new();
    count(target, BitString::root(), h, &mut memo)
}

/// One outcome of a restricted enumeration: the images of the requested
/// leaves, together with the probability of the choices that produce them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedAssignment {
    pub images: BTreeMap<BitString, BitString>,
    pub weight: Dyadic,
}

/// Enumerates every assignment of images to the given domain leaves,
/// marginalizing the rest of the map away.
///
/// Only the sub-forest spanned by the leaves and their ancestors is walked;
/// each two-way choice contributes a factor `1/2` to the weight, so the
/// weights of all assignments sum to exactly 1. Errors out when the exact
/// assignment count exceeds `cap`.
pub fn enumerate_restricted(
    target: &DirTree,
    h: u32,
    relevant: &[BitString],
    cap: u64,
) -> Result<Vec<RestrictedAssignment>, StickyError> {
    if h > MAX_STICKY_HEIGHT {
        return Err(StickyError::HeightTooLarge(h));
    }
    for v in relevant {
        if v.height() != h {
            return Err(StickyError::AboveDomain { vertex: *v, h });
        }
    }
    let mut span: BTreeSet<BitString> = BTreeSet::new();
    for v in relevant {
        for k in 0..=v.height() {
            span.insert(v.prefix(k));
        }
    }
    if span.is_empty() {
        return Ok(vec![RestrictedAssignment {
            images: BTreeMap::new(),
            weight: Dyadic::one(),
        }]);
    }

    let relevant: BTreeSet<BitString> = relevant.iter().copied().collect();
    let count = count_restricted(target, &span, BitString::root(), BitString::root());
    if count > BigUint::from(cap) {
        return Err(StickyError::EnumerationCapExceeded {
            required: count,
            cap,
        });
    }
    Ok(enumerate_rec(
        target,
        &span,
        &relevant,
        BitString::root(),
        BitString::root(),
    ))
}

fn span_children(span: &BTreeSet<BitString>, u: BitString) -> Vec<BitString> {
    [u.child(0), u.child(1)]
        .into_iter()
        .filter(|c| span.contains(c))
        .collect()
}

fn count_restricted(
    target: &DirTree,
    span: &BTreeSet<BitString>,
    u: BitString,
    t: BitString,
) -> BigUint {
    let mut product = BigUint::one();
    for c in span_children(span, u) {
        let mut sum = BigUint::zero();
        for t_child in [target.child(t, 0), target.child(t, 1)].into_iter().flatten() {
            sum += count_restricted(target, span, c, t_child);
        }
        product *= sum;
    }
    product
}

fn enumerate_rec(
    target: &DirTree,
    span: &BTreeSet<BitString>,
    relevant: &BTreeSet<BitString>,
    u: BitString,
    t: BitString,
) -> Vec<RestrictedAssignment> {
    let mut acc = vec![RestrictedAssignment {
        images: if relevant.contains(&u) {
            [(u, t)].into_iter().collect()
        } else {
            BTreeMap::new()
        },
        weight: Dyadic::one(),
    }];
    for c in span_children(span, u) {
        let t_children: Vec<BitString> = [target.child(t, 0), target.child(t, 1)]
            .into_iter()
            .flatten()
            .collect();
        let step = if t_children.len() == 2 {
            Dyadic::new(1, 1)
        } else {
            Dyadic::one()
        };
        let mut branch: Vec<RestrictedAssignment> = Vec::new();
        for t_child in &t_children {
            for sub in enumerate_rec(target, span, relevant, c, *t_child) {
                branch.push(RestrictedAssignment {
                    images: sub.images,
                    weight: &sub.weight * &step,
                });
            }
        }
        let mut next = Vec::new();
        for a in &acc {
            for b in &branch {
                let mut images = a.images.clone();
                images.extend(b.images.iter().map(|(k, v)| (*k, *v)));
                next.push(RestrictedAssignment {
                    images,
                    weight: &a.weight * &b.weight,
                });
            }
        }
        acc = next;
    }
    acc
}
