//! Finite binary trees of dyadic intervals encoding sets of directions.
//!
//! A direction set `D` in `[0, 1]`, observed down to resolution `2^-depth`,
//! becomes the tree of all dyadic grid intervals that meet `D` (closed
//! membership, so a direction sitting exactly on a grid point occupies the
//! cells on both sides). The shape of this tree carries the quantities the
//! experiments care about: where it splits, how deeply splits nest (the
//! lacunary order), and how far apart the split intervals sit (separation).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::bitstring::{BitString, MAX_HEIGHT};
use crate::dyadic::Dyadic;

/// Errors from tree construction and analysis.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("direction set is empty")]
    NoDirections,
    #[error("direction {0} lies outside [0, 1]")]
    DirectionOutOfRange(Dyadic),
    #[error("tree depth {0} exceeds the supported maximum {MAX_HEIGHT}")]
    DepthTooLarge(u32),
    #[error("vertex list is empty")]
    NoVertices,
    #[error("vertex {0} appears without its parent")]
    MissingParent(BitString),
    #[error("root vertex is missing")]
    MissingRoot,
    #[error("line {line}: cannot parse vertex {input:?}")]
    ParseVertex { line: usize, input: String },
    #[error("subtree count at {vertex} exceeds the cap of {cap}")]
    SubtreeCapExceeded { vertex: BitString, cap: u64 },
    #[error("requested order {requested} exceeds the lacunary order {lambda}")]
    OrderTooHigh { lambda: u32, requested: u32 },
}

/// A finite subtree of the binary tree: root always present, every vertex
/// keeps its parent, each vertex has zero, one, or two children.
///
/// Uniform leaf height is not required; trees loaded from text may have
/// dead-end branches. Vertices iterate in breadth-first order.
#[derive(Clone, PartialEq, Eq)]
pub struct DirTree {
    nodes: BTreeMap<BitString, u8>,
    height: u32,
}

impl DirTree {
    /// Observes a direction set at resolution `2^-depth`.
    ///
    /// A direction `d` occupies the level-`k` cell `floor(d * 2^k)` and, when
    /// `d * 2^k` is an integer, also the cell just below (closed membership),
    /// clamped to `[0, 1]`.
    pub fn from_directions(directions: &[Dyadic], depth: u32) -> Result<DirTree, TreeError> {
        if directions.is_empty() {
            return Err(TreeError::NoDirections);
        }
        if depth > MAX_HEIGHT {
            return Err(TreeError::DepthTooLarge(depth));
        }
        let zero = Dyadic::zero();
        let one = Dyadic::one();
        for d in directions {
            if *d < zero || *d > one {
                return Err(TreeError::DirectionOutOfRange(d.clone()));
            }
        }
        let mut verts = BTreeSet::new();
        verts.insert(BitString::root());
        for d in directions {
            for k in 1..=depth {
                let hi = (1u64 << k) - 1;
                let floor = d.floor_scaled(k);
                // floor lies in [0, 2^k] because d is in [0, 1].
                let idx = u64::try_from(&floor).expect("direction cell fits");
                verts.insert(BitString::new(k, idx.min(hi)));
                if d.is_integer_scaled(k) && idx > 0 {
                    verts.insert(BitString::new(k, (idx - 1).min(hi)));
                }
            }
        }
        Self::from_vertex_set(verts)
    }

    /// Builds the smallest tree containing the given leaves (ancestors are
    /// filled in automatically).
    pub fn from_leaves(leaves: &[BitString]) -> Result<DirTree, TreeError> {
        if leaves.is_empty() {
            return Err(TreeError::NoVertices);
        }
        let mut verts = BTreeSet::new();
        for leaf in leaves {
            let mut v = *leaf;
            while verts.insert(v) {
                match v.parent() {
                    Some(p) => v = p,
                    None => break,
                }
            }
        }
        Self::from_vertex_set(verts)
    }

    /// Builds from an explicit vertex list, validating parent closure.
    pub fn from_vertices(vertices: impl IntoIterator<Item = BitString>) -> Result<DirTree, TreeError> {
        let verts: BTreeSet<BitString> = vertices.into_iter().collect();
        if verts.is_empty() {
            return Err(TreeError::NoVertices);
        }
        if !verts.contains(&BitString::root()) {
            return Err(TreeError::MissingRoot);
        }
        for v in &verts {
            if let Some(p) = v.parent() {
                if !verts.contains(&p) {
                    return Err(TreeError::MissingParent(*v));
                }
            }
        }
        Self::from_vertex_set(verts)
    }

    /// The full binary tree of the given height.
    pub fn full_binary(height: u32) -> DirTree {
        assert!(height <= 22, "full binary tree of height {height} is too large");
        let verts: BTreeSet<BitString> = (0..=height).flat_map(BitString::level).collect();
        Self::from_vertex_set(verts).expect("full tree is parent-closed")
    }

    fn from_vertex_set(verts: BTreeSet<BitString>) -> Result<DirTree, TreeError> {
        let mut nodes: BTreeMap<BitString, u8> = verts.iter().map(|v| (*v, 0u8)).collect();
        let mut height = 0;
        for v in &verts {
            height = height.max(v.height());
            if let Some(p) = v.parent() {
                let bit = v.last_bit().expect("non-root has a last bit");
                *nodes.get_mut(&p).expect("validated parent") |= 1 << bit;
            }
        }
        Ok(DirTree { nodes, height })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = BitString> + '_ {
        self.nodes.keys().copied()
    }

    pub fn contains_vertex(&self, v: BitString) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn child(&self, v: BitString, bit: u8) -> Option<BitString> {
        let flags = self.nodes.get(&v)?;
        if flags & (1 << bit) != 0 {
            Some(v.child(bit))
        } else {
            None
        }
    }

    pub fn children(&self, v: BitString) -> (Option<BitString>, Option<BitString>) {
        (self.child(v, 0), self.child(v, 1))
    }

    pub fn child_count(&self, v: BitString) -> u32 {
        self.nodes.get(&v).map_or(0, |f| f.count_ones())
    }

    /// A splitting vertex has both children.
    pub fn is_splitting(&self, v: BitString) -> bool {
        self.nodes.get(&v).is_some_and(|f| *f == 0b11)
    }

    pub fn is_leaf(&self, v: BitString) -> bool {
        self.nodes.get(&v).is_some_and(|f| *f == 0)
    }

    /// Childless vertices in breadth-first order.
    pub fn leaves(&self) -> Vec<BitString> {
        self.nodes
            .iter()
            .filter(|(_, f)| **f == 0)
            .map(|(v, _)| *v)
            .collect()
    }

    /// All vertices at one level, left to right.
    pub fn vertices_at(&self, height: u32) -> Vec<BitString> {
        if height > self.height {
            return Vec::new();
        }
        let lo = BitString::new(height, 0);
        let hi = BitString::new(height, (1u64 << height.min(62)) - 1);
        self.nodes.range(lo..=hi).map(|(v, _)| *v).collect()
    }

    pub fn splitting_vertices(&self) -> Vec<BitString> {
        self.nodes
            .iter()
            .filter(|(_, f)| **f == 0b11)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Walks down through chain vertices to the first split, if any.
    pub fn first_split_at_or_below(&self, v: BitString) -> Option<BitString> {
        let mut v = v;
        loop {
            match self.nodes.get(&v)? {
                0b11 => return Some(v),
                0b01 => v = v.child(0),
                0b10 => v = v.child(1),
                _ => return None,
            }
        }
    }

    /// Splitting value of every vertex, bottom up: a leaf scores 0, a chain
    /// vertex inherits its child, and a split scores
    /// `max(f0, f1, 1 + min(f0, f1))`.
    pub fn splitting_values(&self) -> SplitReport {
        let mut values: BTreeMap<BitString, u32> = BTreeMap::new();
        for (v, flags) in self.nodes.iter().rev() {
            let f = match flags {
                0 => 0,
                0b01 => values[&v.child(0)],
                0b10 => values[&v.child(1)],
                _ => {
                    let f0 = values[&v.child(0)];
                    let f1 = values[&v.child(1)];
                    f0.max(f1).max(1 + f0.min(f1))
                }
            };
            values.insert(*v, f);
        }
        let lambda = values[&BitString::root()];
        SplitReport { values, lambda }
    }

    /// The lacunary order: splitting value of the root.
    pub fn lacunary_order(&self) -> u32 {
        self.splitting_values().lambda
    }

    /// Independent oracle for splitting values: enumerates the achievable
    /// values over all subtrees rooted at `v` and takes the maximum.
    ///
    /// The achievable set is computed as a recursion on sets (kept as bit
    /// masks), a different route than the single-pass recursion in
    /// [`DirTree::splitting_values`]. Errors out when the number of subtrees
    /// rooted at `v` exceeds `cap`.
    pub fn brute_force_split(&self, v: BitString, cap: u64) -> Result<u32, TreeError> {
        let count = self.subtree_count(v);
        if count > BigUint::from(cap) {
            return Err(TreeError::SubtreeCapExceeded { vertex: v, cap });
        }
        let mask = self.achievable_mask(v);
        Ok(63 - mask.leading_zeros())
    }

    fn subtree_count(&self, v: BitString) -> BigUint {
        let one = BigUint::one();
        let mut product = BigUint::one();
        for child in [self.child(v, 0), self.child(v, 1)].into_iter().flatten() {
            product *= &one + self.subtree_count(child);
        }
        product
    }

    /// Bit `k` set means some subtree rooted at `v` has splitting value `k`.
    fn achievable_mask(&self, v: BitString) -> u64 {
        let mut mask = 1u64; // the singleton subtree scores 0
        let (c0, c1) = self.children(v);
        let m0 = c0.map(|c| self.achievable_mask(c));
        let m1 = c1.map(|c| self.achievable_mask(c));
        if let Some(m) = m0 {
            mask |= m;
        }
        if let Some(m) = m1 {
            mask |= m;
        }
        if let (Some(m0), Some(m1)) = (m0, m1) {
            for a in 0..64 {
                if m0 & (1 << a) == 0 {
                    continue;
                }
                for b in 0..64 {
                    if m1 & (1 << b) == 0 {
                        continue;
                    }
                    let val = u32::max(a, b).max(1 + u32::min(a, b));
                    mask |= 1 << val;
                }
            }
        }
        mask
    }

    /// Worst-case relative separation over all nested splits.
    ///
    /// For each splitting vertex `w` with splitting descendants `u` (inside
    /// the lower half of `Q_w`) and `v` (inside the upper half), the ratio
    /// `distance(Q_u, Q_v) / |Q_w|` measures how separated the nested splits
    /// are. The result is the minimum over all such triples, or
    /// [`Separation::Unconstrained`] when no splitting vertex has splitting
    /// descendants on both sides.
    pub fn separation_eta_max(&self) -> Separation {
        let mut best = Separation::Unconstrained;
        for (w, flags) in &self.nodes {
            if *flags != 0b11 {
                continue;
            }
            // Every splitting descendant inside a half descends from the
            // first split below that child, so its interval is nested in the
            // first split's interval; the minimum over pairs is attained by
            // the first splits themselves.
            let t0 = self.first_split_at_or_below(w.child(0));
            let t1 = self.first_split_at_or_below(w.child(1));
            if let (Some(t0), Some(t1)) = (t0, t1) {
                let gap = t0.interval().distance(&t1.interval());
                let ratio = gap.mul_pow2(w.height() as i64);
                let cand = Separation::Value(ratio);
                if cand < best {
                    best = cand;
                }
            }
        }
        best
    }

    /// Extracts a pruned subtree of order `n`: a tree with `2^n` full-height
    /// leaves in which every root-to-leaf path passes exactly one split of
    /// each order `1..=n` and no others.
    ///
    /// Branches that dead-end early are padded with lower children to uniform
    /// height. Fails when the lacunary order of the tree is below `n`.
    pub fn prune(&self, n: u32) -> Result<DirTree, TreeError> {
        let report = self.splitting_values();
        if report.lambda < n {
            return Err(TreeError::OrderTooHigh {
                lambda: report.lambda,
                requested: n,
            });
        }
        let mut leaves = Vec::new();
        self.collect_pruned(BitString::root(), n, &report, &mut leaves);
        debug_assert_eq!(leaves.len(), 1usize << n);
        DirTree::from_leaves(&leaves)
    }

    fn collect_pruned(&self, v: BitString, k: u32, report: &SplitReport, out: &mut Vec<BitString>) {
        if k == 0 {
            out.push(self.ray_from(v));
            return;
        }
        let w = self.pick_split(v, k, report);
        self.collect_pruned(w.child(0), k - 1, report, out);
        self.collect_pruned(w.child(1), k - 1, report, out);
    }

    /// First vertex at or below `v` where both children support order `k-1`.
    /// Exists whenever the splitting value of `v` is at least `k >= 1`; the
    /// descent is forced because at most one child can score `>= k` while the
    /// other scores below `k-1`.
    fn pick_split(&self, v: BitString, k: u32, report: &SplitReport) -> BitString {
        debug_assert!(report.value(v) >= k && k >= 1);
        let mut v = v;
        loop {
            let (c0, c1) = self.children(v);
            if let (Some(c0), Some(c1)) = (c0, c1) {
                if report.value(c0).min(report.value(c1)) >= k - 1 {
                    return v;
                }
            }
            v = [c0, c1]
                .into_iter()
                .flatten()
                .find(|c| report.value(*c) >= k)
                .expect("a child sustains the splitting value");
        }
    }

    /// Descends from `v` to full height, preferring lower children and
    /// padding with zero bits past any dead end.
    pub(crate) fn ray_from(&self, v: BitString) -> BitString {
        let mut v = v;
        while v.height() < self.height {
            match self.children(v) {
                (Some(c), _) => v = c,
                (None, Some(c)) => v = c,
                (None, None) => {
                    let missing = self.height - v.height();
                    return BitString::new(self.height, v.path() << missing);
                }
            }
        }
        v
    }

    /// Mirror image of the tree under `x -> 1 - x`.
    pub fn reflected(&self) -> DirTree {
        let verts: BTreeSet<BitString> = self.nodes.keys().map(|v| v.reflected()).collect();
        Self::from_vertex_set(verts).expect("reflection preserves parent closure")
    }

    /// One vertex per line, breadth-first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in self.nodes.keys() {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the [`DirTree::to_text`] format. Blank lines and lines starting
    /// with `#` are ignored; parent closure is validated.
    pub fn from_text(s: &str) -> Result<DirTree, TreeError> {
        let mut verts = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: BitString = line.parse().map_err(|_| TreeError::ParseVertex {
                line: i + 1,
                input: line.to_string(),
            })?;
            verts.push(v);
        }
        Self::from_vertices(verts)
    }
}

impl fmt::Debug for DirTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DirTree {{ height: {}, vertices: {} }}",
            self.height,
            self.nodes.len()
        )
    }
}

/// Splitting value of every vertex plus the lacunary order of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitReport {
    pub values: BTreeMap<BitString, u32>,
    pub lambda: u32,
}

impl SplitReport {
    pub fn value(&self, v: BitString) -> u32 {
        self.values[&v]
    }
}

/// Result of a separation measurement.
///
/// `Unconstrained` means no pair of nested splits constrains the separation;
/// it compares greater than every finite value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    Value(Dyadic),
    Unconstrained,
}

impl Separation {
    pub fn value(&self) -> Option<&Dyadic> {
        match self {
            Separation::Value(d) => Some(d),
            Separation::Unconstrained => None,
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, Separation::Unconstrained)
    }
}

impl PartialOrd for Separation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Separation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Separation::*;
        match (self, other) {
            (Value(a), Value(b)) => a.cmp(b),
            (Value(_), Unconstrained) => std::cmp::Ordering::Less,
            (Unconstrained, Value(_)) => std::cmp::Ordering::Greater,
            (Unconstrained, Unconstrained) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::Value(d) => write!(f, "{}", d),
            Separation::Unconstrained => write!(f, "unconstrained"),
        }
    }
}
