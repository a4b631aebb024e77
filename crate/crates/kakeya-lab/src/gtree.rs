//! The coarsened choice tree that dominates membership probabilities.
//!
//! For a pruned direction tree and a query point, the construction walks
//! the hierarchy of lowest splitting vertices, collects for each one the
//! dyadic cells of intercepts compatible with the possible bases, and wires
//! the cells into a small tree by containment. On a well-separated tree,
//! reaching the point inside the random union requires one specific binary
//! choice per level of this tree, so survival of a Bernoulli percolation on
//! it bounds the membership probability from above. The construction also
//! audits the cell-count bounds and the half-interval disjointness that the
//! separation is supposed to guarantee, reporting violations as data.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bitstring::BitString;
use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;
use crate::poss::{poss_set, PossSet};

/// A finite tree with ordered children, a declared full height, and string
/// labels for display. Survival asks for a path of open edges from the
/// root to the declared height; vertices short of it with no children are
/// dead ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceTree {
    children: Vec<Vec<usize>>,
    labels: Vec<String>,
    depths: Vec<u32>,
    height: u32,
}

impl ChoiceTree {
    /// A tree with only a root, aiming at the given height.
    pub fn new(height: u32, root_label: impl Into<String>) -> ChoiceTree {
        ChoiceTree {
            children: vec![Vec::new()],
            labels: vec![root_label.into()],
            depths: vec![0],
            height,
        }
    }

    pub const ROOT: usize = 0;

    /// Appends a child and returns its index.
    pub fn add_child(&mut self, parent: usize, label: impl Into<String>) -> usize {
        let depth = self.depths[parent] + 1;
        assert!(depth <= self.height, "child would exceed the tree height");
        let index = self.children.len();
        self.children.push(Vec::new());
        self.labels.push(label.into());
        self.depths.push(depth);
        self.children[parent].push(index);
        index
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depths[v]
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Number of vertices at the given depth.
    pub fn level_count(&self, depth: u32) -> usize {
        self.depths.iter().filter(|&&d| d == depth).count()
    }

    /// The largest number of children at any vertex.
    pub fn max_arity(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Exact probability that, with each edge independently open with
    /// probability `p`, some vertex at the full height is connected to the
    /// root: `s(v) = 1` at full height, `0` at a childless vertex short of
    /// it, and otherwise `1 - prod_c (1 - p s(c))`.
    pub fn survival_probability(&self, p: &BigRational) -> BigRational {
        assert!(
            *p >= BigRational::zero() && *p <= BigRational::one(),
            "edge probability must lie in [0, 1]"
        );
        self.survival_at(Self::ROOT, p)
    }

    fn survival_at(&self, v: usize, p: &BigRational) -> BigRational {
        if self.depths[v] == self.height {
            return BigRational::one();
        }
        if self.children[v].is_empty() {
            return BigRational::zero();
        }
        let mut closed = BigRational::one();
        for &c in &self.children[v] {
            let s = self.survival_at(c, p);
            closed *= BigRational::one() - p * s;
        }
        BigRational::one() - closed
    }

    /// Indented text rendering, one vertex per line, children below their
    /// parent with two extra leading spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_vertex(Self::ROOT, &mut out);
        out
    }

    fn write_vertex(&self, v: usize, out: &mut String) {
        let indent = 2 * self.depths[v] as usize;
        let _ = writeln!(out, "{:indent$}{}", "", self.labels[v]);
        for &c in &self.children[v] {
            self.write_vertex(c, out);
        }
    }
}

/// Construction problems that prevent building the tree at all.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GtreeError {
    #[error("eta must be positive")]
    EtaNotPositive,
    #[error("the query abscissa {x} is not beyond 1/(2 eta) for eta = {eta}")]
    XTooSmall { x: Dyadic, eta: Dyadic },
    #[error("no splitting vertex at or below {below}; the tree is not pruned to uniform order")]
    NotPruned { below: BitString },
}

/// Two sibling-word cells landing in the same half of a parent cell: the
/// separation guarantee failed there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfViolation {
    pub parent_word: BitString,
    pub parent_cell: BitString,
    pub half: BitString,
    pub zero_side_cell: BitString,
    pub one_side_cell: BitString,
}

/// One cell claimed by two different words of the same generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedCell {
    pub level: u32,
    pub cell: BitString,
    pub first_word: BitString,
    pub second_word: BitString,
}

/// A quantitative bound from the construction that failed its audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditBreach {
    /// An intercept interval needed more cover cells than `ceil(2/eta)+1`.
    CoverTooLarge {
        word: BitString,
        count: usize,
        bound: usize,
    },
    /// A tree level exceeded `(4/eta) 2^level` vertices.
    LevelTooLarge { level: u32, count: usize },
    /// A vertex exceeded `8/eta` children.
    ArityTooLarge { cell: BitString, count: usize },
    /// A child cell's ancestor was not a cell of the parent word.
    OrphanCell { level: u32, cell: BitString },
}

/// The built tree together with everything the audits observed.
#[derive(Debug, Clone, PartialEq)]
pub struct GtreeReport {
    pub tree: ChoiceTree,
    pub poss: PossSet,
    /// The word-to-splitting-vertex hierarchy, words sorted.
    pub hierarchy: Vec<(BitString, BitString)>,
    pub half_violations: Vec<HalfViolation>,
    pub shared_cells: Vec<SharedCell>,
    pub audits: Vec<AuditBreach>,
}

impl GtreeReport {
    /// True when every separation-dependent property held.
    pub fn is_clean(&self) -> bool {
        self.half_violations.is_empty() && self.shared_cells.is_empty() && self.audits.is_empty()
    }
}

/// Builds the choice tree for `target` at the point `(x, y)`.
///
/// The target should be pruned to uniform splitting order `N` (its lacunary
/// order); the tree then has declared height `N - 1`, with the unit
/// interval as root and the cells of generation-`j` words at depth `j`.
/// Separation failures do not stop the construction: they are returned in
/// the report.
pub fn build_gtree(
    target: &DirTree,
    eta: &Dyadic,
    x: &Dyadic,
    y: &Dyadic,
) -> Result<GtreeReport, GtreeError> {
    if !eta.is_positive() {
        return Err(GtreeError::EtaNotPositive);
    }
    // x > 1/(2 eta), checked as 2 eta x > 1 to stay exact.
    let twice = &(&Dyadic::from_int(2) * eta) * x;
    if twice <= Dyadic::one() {
        return Err(GtreeError::XTooSmall {
            x: x.clone(),
            eta: eta.clone(),
        });
    }

    let order = target.lacunary_order();
    let poss = poss_set(target, target.height(), x, y);
    let declared_height = if poss.is_empty() {
        order.saturating_sub(1).max(1)
    } else {
        order.saturating_sub(1)
    };
    let mut report = GtreeReport {
        tree: ChoiceTree::new(declared_height, BitString::root().to_string()),
        poss,
        hierarchy: Vec::new(),
        half_violations: Vec::new(),
        shared_cells: Vec::new(),
        audits: Vec::new(),
    };
    if report.poss.is_empty() || order <= 1 {
        return Ok(report);
    }

    // The hierarchy of lowest splitting vertices, indexed by words.
    let mut hierarchy: BTreeMap<BitString, BitString> = BTreeMap::new();
    let g_root = target
        .first_split_at_or_below(BitString::root())
        .ok_or(GtreeError::NotPruned {
            below: BitString::root(),
        })?;
    hierarchy.insert(BitString::root(), g_root);
    for len in 0..order.saturating_sub(1) {
        let words: Vec<(BitString, BitString)> = hierarchy
            .iter()
            .filter(|(w, _)| u32::from(w.height()) == len)
            .map(|(w, g)| (*w, *g))
            .collect();
        for (word, g) in words {
            for bit in 0..2u8 {
                let child = g.child(bit);
                let below = target
                    .first_split_at_or_below(child)
                    .ok_or(GtreeError::NotPruned { below: child })?;
                hierarchy.insert(word.child(bit), below);
            }
        }
    }

    // Cover cells per word; words of length 0 participate in the checks
    // but only lengths >= 1 become tree levels.
    let bases = report.poss.bases();
    let cover_bound = cover_cell_bound(eta);
    let mut cells: BTreeMap<BitString, Vec<BitString>> = BTreeMap::new();
    for (&word, &g) in &hierarchy {
        let level = g.height();
        let interval = g.interval();
        let lo = y - &(&interval.right() * x);
        let hi = y - &(&interval.left() * x);
        let first = lo.floor_scaled(u32::from(level));
        // The last cell starts at ceil(hi * 2^level) - 1 so the cover ends
        // exactly at hi when hi is on the grid.
        let last = {
            let scaled = hi.floor_scaled(u32::from(level));
            if hi.is_integer_scaled(u32::from(level)) {
                scaled - 1
            } else {
                scaled
            }
        };
        let count = (&last - &first + BigInt::one())
            .max(BigInt::zero())
            .to_string()
            .parse::<usize>()
            .unwrap_or(usize::MAX);
        if count > cover_bound {
            report.audits.push(AuditBreach::CoverTooLarge {
                word,
                count,
                bound: cover_bound,
            });
        }
        let mut in_cover: Vec<BitString> = bases
            .iter()
            .map(|b| b.prefix(level))
            .filter(|cell| {
                let k = BigInt::from(cell.path());
                k >= first && k <= last
            })
            .collect();
        in_cover.sort();
        in_cover.dedup();
        cells.insert(word, in_cover);
    }

    // Shared-cell scan: distinct words of one generation must have
    // disjoint cell sets.
    let mut by_level: BTreeMap<u32, Vec<BitString>> = BTreeMap::new();
    for word in hierarchy.keys() {
        by_level
            .entry(u32::from(word.height()))
            .or_default()
            .push(*word);
    }
    for (&level, words) in &by_level {
        if level == 0 {
            continue;
        }
        for (i, &wa) in words.iter().enumerate() {
            for &wb in &words[i + 1..] {
                for cell in &cells[&wa] {
                    if cells[&wb].contains(cell) {
                        report.shared_cells.push(SharedCell {
                            level,
                            cell: *cell,
                            first_word: wa,
                            second_word: wb,
                        });
                    }
                }
            }
        }
    }

    // Half-interval disjointness: children cells of sibling words may not
    // share a half of any parent-word cell.
    for (&word, &g) in &hierarchy {
        if u32::from(word.height()) >= order - 1 {
            continue;
        }
        let parent_level = g.height();
        let zero_cells = &cells[&word.child(0)];
        let one_cells = &cells[&word.child(1)];
        for parent_cell in &cells[&word] {
            for za in zero_cells {
                if za.prefix(parent_level) != *parent_cell {
                    continue;
                }
                for ob in one_cells {
                    if ob.prefix(parent_level) != *parent_cell {
                        continue;
                    }
                    let half = za.prefix(parent_level + 1);
                    if half == ob.prefix(parent_level + 1) {
                        report.half_violations.push(HalfViolation {
                            parent_word: word,
                            parent_cell: *parent_cell,
                            half,
                            zero_side_cell: *za,
                            one_side_cell: *ob,
                        });
                    }
                }
            }
        }
    }

    // Assemble the tree level by level; a cell claimed by several words
    // keeps one vertex.
    let mut vertex_of: BTreeMap<BitString, usize> = BTreeMap::new();
    vertex_of.insert(BitString::root(), ChoiceTree::ROOT);
    for generation in 1..order {
        let Some(words) = by_level.get(&generation) else {
            continue;
        };
        let mut level_cells: BTreeMap<BitString, BitString> = BTreeMap::new();
        for &word in words {
            for cell in &cells[&word] {
                level_cells.entry(*cell).or_insert(word);
            }
        }
        for (&cell, &word) in &level_cells {
            let parent_vertex = if generation == 1 {
                Some(ChoiceTree::ROOT)
            } else {
                let parent_level = hierarchy[&word.parent().expect("nonroot word")].height();
                vertex_of.get(&cell.prefix(parent_level)).copied()
            };
            match parent_vertex {
                Some(pv) => {
                    let v = report.tree.add_child(pv, cell.to_string());
                    vertex_of.insert(cell, v);
                }
                None => report.audits.push(AuditBreach::OrphanCell {
                    level: generation,
                    cell,
                }),
            }
        }
        let count = level_cells.len();
        // count > (4/eta) 2^generation, exactly: count * eta > 2^(gen+2).
        let bound_rhs = Dyadic::pow2(i64::from(generation) + 2);
        if &Dyadic::from_int(count as i64) * eta > bound_rhs {
            report.audits.push(AuditBreach::LevelTooLarge {
                level: generation,
                count,
            });
        }
    }
    for v in 0..report.tree.len() {
        let arity = report.tree.children(v).len();
        if &Dyadic::from_int(arity as i64) * eta > Dyadic::from_int(8) {
            let cell: BitString = report.tree.label(v).parse().unwrap_or(BitString::root());
            report
                .audits
                .push(AuditBreach::ArityTooLarge { cell, count: arity });
        }
    }
    report.hierarchy = hierarchy.into_iter().collect();
    Ok(report)
}

/// `ceil(2/eta) + 1` cells of the matching length always suffice to cover
/// an intercept interval when `x <= 1/(2 eta) + 1`.
fn cover_cell_bound(eta: &Dyadic) -> usize {
    let numer = BigInt::from(2) << usize::try_from(eta.exp()).expect("exponent fits");
    let (q, r) = numer.div_rem(eta.numer());
    let ceil = if r.is_zero() { q } else { q + 1 };
    usize::try_from(&ceil).map(|c| c + 1).unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate, Family};
    use num_bigint::BigInt;

    fn d(text: &str) -> Dyadic {
        text.parse().unwrap()
    }

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    fn rational(n: i64, m: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(m))
    }

    fn full_binary_choice(height: u32) -> ChoiceTree {
        let mut tree = ChoiceTree::new(height, "root");
        let mut frontier = vec![ChoiceTree::ROOT];
        for _ in 0..height {
            let mut next = Vec::new();
            for v in frontier {
                next.push(tree.add_child(v, "."));
                next.push(tree.add_child(v, "."));
            }
            frontier = next;
        }
        tree
    }

    #[test]
    fn survival_on_small_full_binary_trees() {
        assert_eq!(
            full_binary_choice(1).survival_probability(&half()),
            rational(3, 4)
        );
        assert_eq!(
            full_binary_choice(2).survival_probability(&half()),
            rational(39, 64)
        );
        assert_eq!(
            full_binary_choice(3).survival_probability(&half()),
            rational(8463, 16384)
        );
    }

    #[test]
    fn survival_edge_probabilities() {
        let tree = full_binary_choice(3);
        assert!(tree.survival_probability(&BigRational::zero()).is_zero());
        assert!(tree.survival_probability(&BigRational::one()).is_one());
    }

    #[test]
    fn dead_ends_kill_survival() {
        let mut tree = ChoiceTree::new(2, "root");
        let a = tree.add_child(ChoiceTree::ROOT, "a");
        tree.add_child(ChoiceTree::ROOT, "b");
        tree.add_child(a, "aa");
        // Path through b dies at depth 1; only a-aa reaches depth 2.
        assert_eq!(tree.survival_probability(&half()), rational(1, 4));
    }

    #[test]
    fn text_rendering_indents_by_depth() {
        let mut tree = ChoiceTree::new(2, "0");
        let a = tree.add_child(ChoiceTree::ROOT, "00");
        tree.add_child(a, "001");
        tree.add_child(ChoiceTree::ROOT, "01");
        assert_eq!(tree.to_text(), "0\n  00\n    001\n  01\n");
    }

    #[test]
    fn separated_family_builds_a_clean_tree() {
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let pruned = instance.tree.prune(2).unwrap();
        // At x = 2 the point y = 65/128 sits inside the cones of the
        // slopes 0 and 3/16, with intercepts off every height-4 boundary.
        let report = build_gtree(&pruned, &d("1/2^1"), &d("2"), &d("65/2^7")).unwrap();
        assert!(!report.poss.is_empty());
        assert!(report.is_clean(), "{:?}", report);
        assert_eq!(report.tree.height(), 1);
        let level_one = report.tree.level_count(1);
        assert!(level_one >= 1 && level_one <= 16);
        let survival = report.tree.survival_probability(&half());
        assert!(survival > BigRational::zero() && survival <= BigRational::one());
    }

    #[test]
    fn boundary_aligned_points_have_empty_scans() {
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let pruned = instance.tree.prune(2).unwrap();
        // 3/8 minus any slope times 2 lands exactly on a height-4 cell
        // boundary, so the open-union convention excludes everything.
        let report = build_gtree(&pruned, &d("1/2^1"), &d("2"), &d("3/2^3")).unwrap();
        assert!(report.poss.is_empty());
        assert!(report.tree.survival_probability(&half()).is_zero());
    }

    #[test]
    fn tournament_family_fires_the_half_diagnostic() {
        let instance = generate(Family::Tournament, 2).unwrap();
        let (x, y) = crate::families::forced_hit_point(2);
        // The family is not separated at any positive eta; build with a
        // nominal eta = 1 so the precondition admits x = 1 and watch the
        // disjointness diagnostic fire at the forced point.
        let report = build_gtree(&instance.tree, &d("1"), &x, &y).unwrap();
        assert!(
            !report.half_violations.is_empty(),
            "expected a half violation: {:?}",
            report
        );
    }

    #[test]
    fn empty_poss_survives_with_probability_zero() {
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let pruned = instance.tree.prune(2).unwrap();
        let report = build_gtree(&pruned, &d("1/2^1"), &d("2"), &d("50")).unwrap();
        assert!(report.poss.is_empty());
        assert!(report.tree.survival_probability(&half()).is_zero());
    }

    #[test]
    fn x_precondition_is_enforced() {
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let err = build_gtree(&instance.tree, &d("1/2^1"), &d("1"), &d("1/2^1"));
        assert!(matches!(err, Err(GtreeError::XTooSmall { .. })));
        let err = build_gtree(&instance.tree, &Dyadic::zero(), &d("2"), &d("1/2^1"));
        assert!(matches!(err, Err(GtreeError::EtaNotPositive)));
    }

    #[test]
    fn order_one_trees_survive_immediately() {
        let instance = generate(Family::QuarterCantor, 1).unwrap();
        let pruned = instance.tree.prune(1).unwrap();
        // Any point inside some parallelogram at x = 2: slope 2^-8 leaf
        // cell [0, 1/4], base anywhere; pick y = t + 2 * 2^-8 with t = 1/8.
        let y = &d("1/2^3") + &d("1/2^7");
        let report = build_gtree(&pruned, &d("1/2^1"), &d("2"), &y).unwrap();
        assert!(!report.poss.is_empty());
        assert_eq!(report.tree.height(), 0);
        assert!(report.tree.survival_probability(&half()).is_one());
    }

    #[test]
    fn domination_holds_on_the_separated_family() {
        use crate::poss::membership_probability_exact;
        let instance = generate(Family::QuarterCantor, 2).unwrap();
        let pruned = instance.tree.prune(2).unwrap();
        let eta = d("1/2^1");
        for k in 0..12 {
            let y = Dyadic::new(BigInt::from(2 * k + 1), 4);
            let x = d("9/2^3");
            let report = build_gtree(&pruned, &eta, &x, &y).unwrap();
            let survival = report.tree.survival_probability(&half());
            let pr =
                membership_probability_exact(&pruned, pruned.height(), &x, &y, 1 << 20).unwrap();
            assert!(
                pr <= survival,
                "membership {pr} exceeds survival {survival} at y = {y}"
            );
        }
    }
}
