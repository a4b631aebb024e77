//! Which parallelograms can contain a point, and how likely one does.
//!
//! For a fixed target tree and height, every sticky map builds one
//! parallelogram per domain leaf. Whether the parallelogram from domain
//! leaf `b` contains a query point depends only on the image leaf it is
//! routed to: the slope must place the sheared ordinate `y - d x` strictly
//! inside the base interval of `b`. The possible (base, image-leaf) pairs
//! are a small set computed exactly, and membership probabilities reduce to
//! marginals of the sticky-map law over those bases.

use num_rational::BigRational;
use num_traits::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitstring::BitString;
use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;
use crate::kset::McEstimate;
use crate::sticky::{enumerate_restricted, StickyError, StickyMap};

/// One way the point could be covered: the parallelogram based at `base`
/// whose sticky image is `leaf` contains the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PossPair {
    pub base: BitString,
    pub leaf: BitString,
}

/// All covering options for one point at one height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossSet {
    pub pairs: Vec<PossPair>,
    pub height: u32,
}

impl PossSet {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The distinct base vertices, sorted.
    pub fn bases(&self) -> Vec<BitString> {
        let mut bases: Vec<BitString> = self.pairs.iter().map(|p| p.base).collect();
        bases.sort();
        bases.dedup();
        bases
    }
}

/// Computes all (base, image-leaf) pairs whose parallelogram contains
/// `(x, y)`: for each height-`h` vertex of the target with slope `d` (the
/// left endpoint of its interval), the base cell holding `y - d x` in its
/// open interior. Points landing exactly on a cell boundary are outside
/// every parallelogram, and bases must lie inside the unit interval.
pub fn poss_set(target: &DirTree, h: u32, x: &Dyadic, y: &Dyadic) -> PossSet {
    assert!(x.is_positive(), "the query abscissa must be positive");
    let mut pairs = Vec::new();
    for leaf in target.vertices_at(h) {
        let d = leaf.interval().left();
        let t = y - &(&d * x);
        if !t.is_positive() || t >= Dyadic::one() || t.is_integer_scaled(h) {
            continue;
        }
        let index = t.floor_scaled(h);
        let index = u64::try_from(&index).expect("cell index fits after range checks");
        pairs.push(PossPair {
            base: BitString::new(h, index),
            leaf,
        });
    }
    pairs.sort();
    PossSet { pairs, height: h }
}

/// Exact probability, over uniformly sampled sticky maps, that some
/// parallelogram of the associated union contains `(x, y)`. Marginalizes
/// the map law over the spanned forest of the possible bases; `cap` bounds
/// the number of enumerated restricted assignments.
pub fn membership_probability_exact(
    target: &DirTree,
    h: u32,
    x: &Dyadic,
    y: &Dyadic,
    cap: u64,
) -> Result<BigRational, StickyError> {
    let poss = poss_set(target, h, x, y);
    if poss.is_empty() {
        return Ok(BigRational::zero());
    }
    let bases = poss.bases();
    let assignments = enumerate_restricted(target, h, &bases, cap)?;
    let mut total = Dyadic::zero();
    for assignment in &assignments {
        let hit = poss
            .pairs
            .iter()
            .any(|pair| assignment.images.get(&pair.base) == Some(&pair.leaf));
        if hit {
            total = &total + &assignment.weight;
        }
    }
    Ok(total.to_rational())
}

/// Monte-Carlo estimate of the same probability: the fraction of sampled
/// sticky maps routing some possible base to its required leaf.
pub fn membership_probability_mc(
    target: &DirTree,
    h: u32,
    x: &Dyadic,
    y: &Dyadic,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, StickyError> {
    assert!(samples >= 1, "at least one sample is required");
    let poss = poss_set(target, h, x, y);
    if poss.is_empty() {
        return Ok(McEstimate {
            estimate: 0.0,
            stderr: 0.0,
            hits: 0,
            samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let sigma = StickyMap::sample_with(target, h, &mut rng)?;
        let hit = poss.pairs.iter().any(|pair| {
            sigma
                .image(target, pair.base)
                .map(|img| img == pair.leaf)
                .unwrap_or(false)
        });
        if hit {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let stderr = (p * (1.0 - p) / samples as f64).sqrt();
    Ok(McEstimate {
        estimate: p,
        stderr,
        hits,
        samples,
    })
}
