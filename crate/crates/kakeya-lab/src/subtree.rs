//! Search for the best-separated subtree of a given order.
//!
//! Among all subtrees of a direction tree whose lacunary order is at least
//! `n`, find one maximizing the worst-case separation. The optimum is always
//! attained by a bare cascade: a top split whose halves each carry a cascade
//! of the next order down, finished off with plain rays. Adding any other
//! vertex can only add separation constraints.
//!
//! The search runs bottom up. For every vertex and every order it keeps a
//! frontier of Pareto-optimal cascade states `(eta, hull)`, where `hull` is
//! the cascade's top split: a future combination only ever looks at the
//! state's `eta` and the endpoints of the hull interval, and a state whose
//! hull is nested inside another's with at least as good an `eta` can stand
//! in for it in any completion. Keeping all incomparable states makes the
//! uncapped search exact; a deterministic cap bounds the frontier on deep
//! trees.

use std::collections::BTreeMap;

use crate::bitstring::BitString;
use crate::dirtree::{DirTree, Separation, TreeError};

/// Result of the search: the optimal separation and a witness subtree
/// achieving it.
#[derive(Debug, Clone)]
pub struct SeparatedSubtree {
    pub eta: Separation,
    pub witness: DirTree,
}

#[derive(Clone)]
struct State {
    eta: Separation,
    hull: BitString,
    prov: Prov,
}

#[derive(Clone)]
enum Prov {
    /// Cascade topped by the split at this vertex; child state indices are
    /// absent when the order below is zero (plain rays).
    Combine { lo: Option<usize>, hi: Option<usize> },
    /// Cascade living inside one child's subtree.
    Pass { bit: u8, idx: usize },
}

/// Frontier cap applied to trees of height 10 and above; shallower trees are
/// searched exactly.
pub const DEFAULT_FRONTIER_CAP: usize = 64;

/// Searches with the default cap policy.
pub fn best_separated_subtree(tree: &DirTree, n: u32) -> Result<SeparatedSubtree, TreeError> {
    let cap = if tree.height() < 10 {
        usize::MAX
    } else {
        DEFAULT_FRONTIER_CAP
    };
    best_separated_subtree_capped(tree, n, cap)
}

/// Searches with an explicit frontier cap per vertex and order.
pub fn best_separated_subtree_capped(
    tree: &DirTree,
    n: u32,
    cap: usize,
) -> Result<SeparatedSubtree, TreeError> {
    if n == 0 {
        let leaf = tree.ray_from(BitString::root());
        return Ok(SeparatedSubtree {
            eta: Separation::Unconstrained,
            witness: DirTree::from_leaves(&[leaf])?,
        });
    }

    // buckets[v][k] holds the frontier for cascades of order k+1 rooted in
    // the subtree of v (reachable from v through a chain).
    let mut buckets: BTreeMap<BitString, Vec<Vec<State>>> = BTreeMap::new();
    let verts: Vec<BitString> = tree.vertices().collect();
    for v in verts.into_iter().rev() {
        let mut mine: Vec<Vec<State>> = vec![Vec::new(); n as usize];
        let (c0, c1) = tree.children(v);
        for (bit, child) in [(0u8, c0), (1u8, c1)] {
            if let Some(c) = child {
                for (k, states) in buckets[&c].iter().enumerate() {
                    for (idx, s) in states.iter().enumerate() {
                        mine[k].push(State {
                            eta: s.eta.clone(),
                            hull: s.hull,
                            prov: Prov::Pass { bit, idx },
                        });
                    }
                }
            }
        }
        if let (Some(c0), Some(c1)) = (c0, c1) {
            // Order-1 cascade topped here: rays below, nothing constrains.
            mine[0].push(State {
                eta: Separation::Unconstrained,
                hull: v,
                prov: Prov::Combine { lo: None, hi: None },
            });
            // Higher orders: combine an order-k cascade from each half.
            for k in 1..n as usize {
                let lo_states = &buckets[&c0][k - 1];
                let hi_states = &buckets[&c1][k - 1];
                let mut combos = Vec::new();
                for (i, s0) in lo_states.iter().enumerate() {
                    for (j, s1) in hi_states.iter().enumerate() {
                        let gap = &s1.hull.interval().left() - &s0.hull.interval().right();
                        let cross = Separation::Value(gap.mul_pow2(v.height() as i64));
                        let eta = cross.min(s0.eta.clone()).min(s1.eta.clone());
                        combos.push(State {
                            eta,
                            hull: v,
                            prov: Prov::Combine {
                                lo: Some(i),
                                hi: Some(j),
                            },
                        });
                    }
                }
                mine[k].extend(combos);
            }
        }
        for states in mine.iter_mut() {
            pareto_filter(states, cap);
        }
        buckets.insert(v, mine);
    }

    let root_states = &buckets[&BitString::root()][n as usize - 1];
    let best_idx = match root_states
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.eta.cmp(&b.eta).then(j.cmp(i)))
    {
        Some((i, _)) => i,
        None => {
            return Err(TreeError::OrderTooHigh {
                lambda: tree.lacunary_order(),
                requested: n,
            })
        }
    };

    let eta = root_states[best_idx].eta.clone();
    let mut leaves = Vec::new();
    collect_leaves(tree, &buckets, BitString::root(), n, best_idx, &mut leaves);
    let witness = DirTree::from_leaves(&leaves)?;
    Ok(SeparatedSubtree { eta, witness })
}

/// Drops dominated states; if more than `cap` survive, keeps the best `cap`
/// by separation (ties broken toward shallower hulls).
fn pareto_filter(states: &mut Vec<State>, cap: usize) {
    let snapshot = states.clone();
    let dominated = |i: usize| {
        let a = &snapshot[i];
        let ai = a.hull.interval();
        snapshot.iter().enumerate().any(|(j, b)| {
            if i == j {
                return false;
            }
            let bi = b.hull.interval();
            let streak = b.eta >= a.eta && bi.right() <= ai.right() && bi.left() >= ai.left();
            // Strict in at least one coordinate, or an earlier duplicate.
            streak && (b.eta > a.eta || bi != ai || j < i)
        })
    };
    let mut keep: Vec<State> = Vec::new();
    for i in 0..snapshot.len() {
        if !dominated(i) {
            keep.push(snapshot[i].clone());
        }
    }
    if keep.len() > cap {
        keep.sort_by(|a, b| b.eta.cmp(&a.eta).then(a.hull.cmp(&b.hull)));
        keep.truncate(cap);
    }
    *states = keep;
}

fn collect_leaves(
    tree: &DirTree,
    buckets: &BTreeMap<BitString, Vec<Vec<State>>>,
    v: BitString,
    order: u32,
    idx: usize,
    out: &mut Vec<BitString>,
) {
    if order == 0 {
        out.push(tree.ray_from(v));
        return;
    }
    let state = &buckets[&v][order as usize - 1][idx];
    match &state.prov {
        Prov::Pass { bit, idx } => {
            let child = v.child(*bit);
            collect_leaves(tree, buckets, child, order, *idx, out);
        }
        Prov::Combine { lo, hi } => {
            match lo {
                Some(i) => collect_leaves(tree, buckets, v.child(0), order - 1, *i, out),
                None => out.push(tree.ray_from(v.child(0))),
            }
            match hi {
                Some(j) => collect_leaves(tree, buckets, v.child(1), order - 1, *j, out),
                None => out.push(tree.ray_from(v.child(1))),
            }
        }
    }
}

/// Exhaustively enumerates the leaf sets of every order-`n` cascade subtree.
/// Intended as a test oracle on small trees; errors out past `cap` cascades.
pub fn enumerate_cascades(
    tree: &DirTree,
    n: u32,
    cap: usize,
) -> Result<Vec<Vec<BitString>>, TreeError> {
    let count = count_cascades(tree, BitString::root(), n);
    if count > cap as u128 {
        return Err(TreeError::SubtreeCapExceeded {
            vertex: BitString::root(),
            cap: cap as u64,
        });
    }
    Ok(cascades_below(tree, BitString::root(), n))
}

fn count_cascades(tree: &DirTree, v: BitString, n: u32) -> u128 {
    if n == 0 {
        return 1;
    }
    let mut total = 0u128;
    // Every split at or below v can serve as the cascade top.
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        let (c0, c1) = tree.children(u);
        if let (Some(c0), Some(c1)) = (c0, c1) {
            total = total.saturating_add(
                count_cascades(tree, c0, n - 1).saturating_mul(count_cascades(tree, c1, n - 1)),
            );
        }
        stack.extend([c0, c1].into_iter().flatten());
    }
    total
}

fn cascades_below(tree: &DirTree, v: BitString, n: u32) -> Vec<Vec<BitString>> {
    if n == 0 {
        return vec![vec![tree.ray_from(v)]];
    }
    let mut all = Vec::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        let (c0, c1) = tree.children(u);
        if let (Some(c0), Some(c1)) = (c0, c1) {
            for lo in cascades_below(tree, c0, n - 1) {
                for hi in cascades_below(tree, c1, n - 1) {
                    let mut leaves = lo.clone();
                    leaves.extend(hi.iter().copied());
                    all.push(leaves);
                }
            }
        }
        stack.extend([c0, c1].into_iter().flatten());
    }
    all
}
