use serde::Serialize;

use super::{
    all_ones, constant_coords, density_restoring_partition, entropy, expected_length, huffman_weights, intersect,
    is_dense, Branch, Fixed, InputSet, Label, NodeKind, SplitVerifier, Tree,
};
use crate::error::{Error, Result};
use crate::instances::Party;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TransformStats {
    pub nodes: usize,
    pub max_parts: usize,
    /// Rounds at which a Huffman code was built.
    pub huffman_codes: usize,
    /// Largest `E|C(k)| - H(k)` over all constructed codes.
    pub max_huffman_excess: f64,
    pub huffman_ok: bool,
}

/// Rewrites a one-bit-per-round tree so that every node is γ-subcube-like:
/// after each bit `b` the owner's set is split by a density-restoring
/// partition and the part index is sent Huffman-coded.
pub fn transform_alg3(tree: &Tree, gamma: f64) -> Result<(Tree, TransformStats)> {
    tree.validate()?;
    for node in &tree.nodes {
        if let NodeKind::Internal { branches, .. } = &node.kind {
            if branches.len() > 2 || branches.iter().any(|b| b.message.len() != 1) {
                return Err(Error::InvalidParams("transform expects one bit per round".into()));
            }
        }
    }
    let mut out = Tree::new(tree.n_bits)?;
    let mut stats = TransformStats { huffman_ok: true, ..Default::default() };
    let full = super::full_set(tree.n_bits);
    build(tree, 0, full.clone(), full, Fixed::default(), gamma, &mut out, &mut stats)?;
    stats.nodes = out.len();
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
fn build(
    orig: &Tree,
    v: usize,
    x: InputSet,
    y: InputSet,
    fixed: Fixed,
    gamma: f64,
    out: &mut Tree,
    stats: &mut TransformStats,
) -> Result<usize> {
    let (owner, branches) = match &orig.nodes[v].kind {
        NodeKind::Leaf { label } => return Ok(out.push(NodeKind::Leaf { label: *label }, fixed)),
        NodeKind::Internal { owner, branches } => (*owner, branches),
    };
    let id = out.push(NodeKind::Leaf { label: Label::Bottom }, fixed);
    let set = if owner == Party::Alice { &x } else { &y };
    let (fmask, fval) = fixed.side(owner);
    let free = all_ones(orig.n_bits) & !fmask;
    let mut new_branches = Vec::new();
    for br in branches {
        let sb = intersect(set, &br.members);
        if sb.is_empty() {
            continue;
        }
        let parts = density_restoring_partition(&sb, free, gamma)?;
        let weights: Vec<u64> = parts.iter().map(|p| p.members.len() as u64).collect();
        let codes = huffman_weights(&weights)?;
        let dist: Vec<f64> = weights.iter().map(|&w| w as f64 / sb.len() as f64).collect();
        let excess = expected_length(&codes, &dist) - entropy(&dist);
        stats.huffman_codes += 1;
        stats.max_huffman_excess = stats.max_huffman_excess.max(excess);
        stats.huffman_ok &= excess <= 1.0 + 1e-9;
        stats.max_parts = stats.max_parts.max(parts.len());
        for (part, code) in parts.into_iter().zip(codes) {
            let child_fixed = fixed.with_side(owner, fmask | part.i_mask, fval | part.a);
            let (cx, cy) = match owner {
                Party::Alice => (part.members.clone(), y.clone()),
                Party::Bob => (x.clone(), part.members.clone()),
            };
            let child = build(orig, br.child, cx, cy, child_fixed, gamma, out, stats)?;
            new_branches.push(Branch { members: part.members, message: format!("{}{code}", br.message), child });
        }
    }
    new_branches.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    out.nodes[id].kind = NodeKind::Internal { owner, branches: new_branches };
    Ok(id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubcubeReport {
    pub nodes_checked: usize,
    pub failures: usize,
    pub first_failure: Option<usize>,
}

/// Node, its `X` and `Y`, and whether each side passes.
type Frame<'a> = (usize, &'a [u32], &'a [u32], (bool, bool));

/// Every node: `X ⊆ {x_I = a}`, `Y ⊆ {y_J = b}`, and both sides γ-dense on
/// their free coordinates.
pub fn check_subcube_like(tree: &Tree, gamma: f64) -> Result<SubcubeReport> {
    let full = all_ones(tree.n_bits);
    let side_ok = |set: &[u32], (mask, val): (u32, u32)| -> Result<bool> {
        Ok(set.iter().all(|&v| v & mask == val) && is_dense(set, full & !mask, gamma)?)
    };
    let mut ok = vec![true; tree.nodes.len()];
    if !tree.nodes.is_empty() {
        let root_set = super::full_set(tree.n_bits);
        let f = tree.nodes[0].fixed;
        let root = (side_ok(&root_set, f.side(Party::Alice))?, side_ok(&root_set, f.side(Party::Bob))?);
        let mut stack: Vec<Frame> = vec![(0, &root_set, &root_set, root)];
        while let Some((id, x, y, (x_ok, y_ok))) = stack.pop() {
            ok[id] = x_ok && y_ok;
            let NodeKind::Internal { owner, branches } = &tree.nodes[id].kind else { continue };
            let fixed = tree.nodes[id].fixed;
            for b in branches {
                let cf = tree.nodes[b.child].fixed;
                // the other party's set is inherited unchanged
                let (cx, cy) = match owner {
                    Party::Alice => (b.members.as_slice(), y),
                    Party::Bob => (x, b.members.as_slice()),
                };
                let cx_ok = if *owner == Party::Bob && cf.side(Party::Alice) == fixed.side(Party::Alice) {
                    x_ok
                } else {
                    side_ok(cx, cf.side(Party::Alice))?
                };
                let cy_ok = if *owner == Party::Alice && cf.side(Party::Bob) == fixed.side(Party::Bob) {
                    y_ok
                } else {
                    side_ok(cy, cf.side(Party::Bob))?
                };
                stack.push((b.child, cx, cy, (cx_ok, cy_ok)));
            }
        }
    }
    let failures = ok.iter().filter(|&&b| !b).count();
    Ok(SubcubeReport { nodes_checked: ok.len(), failures, first_failure: ok.iter().position(|&b| !b) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CleanupStats {
    /// Abort threshold `|Π| / ε` on the codimension.
    pub threshold: f64,
    pub aborted_nodes: usize,
    pub original_error: f64,
    pub bottom_probability: f64,
}

/// Abort to `⊥` at any node whose rectangle has more than `|Π| / ε`
/// constant coordinates, then append verification rounds (Alice checks her
/// half of the label, then Bob his) before every labelled leaf.
pub fn cleanup(tree: &Tree, epsilon: f64, verifier: &dyn SplitVerifier) -> Result<(Tree, CleanupStats)> {
    tree.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams(format!("cleanup needs ε > 0, got {epsilon}")));
    }
    let threshold = tree.cost() as f64 / epsilon;
    let rects = tree.rectangles();
    let mut out = Tree::new(tree.n_bits)?;
    let mut aborted = 0;
    copy_clean(tree, 0, &rects, threshold, verifier, &mut out, &mut aborted);
    let stats = CleanupStats {
        threshold,
        aborted_nodes: aborted,
        original_error: tree.error_probability(verifier),
        bottom_probability: out.bottom_probability(),
    };
    Ok((out, stats))
}

fn copy_clean(
    tree: &Tree,
    v: usize,
    rects: &[super::Rect],
    threshold: f64,
    verifier: &dyn SplitVerifier,
    out: &mut Tree,
    aborted: &mut usize,
) -> usize {
    let node = &tree.nodes[v];
    let r = &rects[v];
    let codim = constant_coords(&r.x, tree.n_bits).0.count_ones() + constant_coords(&r.y, tree.n_bits).0.count_ones();
    if codim as f64 > threshold {
        *aborted += 1;
        return out.push(NodeKind::Leaf { label: Label::Bottom }, node.fixed);
    }
    match &node.kind {
        NodeKind::Leaf { label: Label::Bottom } => out.push(node.kind.clone(), node.fixed),
        NodeKind::Leaf { label: Label::Value(v) } => {
            let v = *v;
            let (ax, rx): (InputSet, InputSet) = r.x.iter().partition(|&&x| verifier.alice_ok(x, v));
            let (by, ry): (InputSet, InputSet) = r.y.iter().partition(|&&y| verifier.bob_ok(y, v));
            let bottom = |out: &mut Tree| out.push(NodeKind::Leaf { label: Label::Bottom }, node.fixed);
            let alice = bottom(out);
            let mut alice_branches = Vec::new();
            if !rx.is_empty() {
                let child = bottom(out);
                alice_branches.push(Branch { members: rx, message: "0".into(), child });
            }
            if !ax.is_empty() {
                let bob = bottom(out);
                let mut bob_branches = Vec::new();
                if !ry.is_empty() {
                    let child = bottom(out);
                    bob_branches.push(Branch { members: ry, message: "0".into(), child });
                }
                if !by.is_empty() {
                    let child = out.push(NodeKind::Leaf { label: Label::Value(v) }, node.fixed);
                    bob_branches.push(Branch { members: by, message: "1".into(), child });
                }
                out.nodes[bob].kind = NodeKind::Internal { owner: Party::Bob, branches: bob_branches };
                alice_branches.push(Branch { members: ax, message: "1".into(), child: bob });
            }
            out.nodes[alice].kind = NodeKind::Internal { owner: Party::Alice, branches: alice_branches };
            alice
        }
        NodeKind::Internal { owner, branches } => {
            let id = out.push(NodeKind::Leaf { label: Label::Bottom }, node.fixed);
            let new_branches = branches
                .iter()
                .map(|b| Branch {
                    members: b.members.clone(),
                    message: b.message.clone(),
                    child: copy_clean(tree, b.child, rects, threshold, verifier, out, aborted),
                })
                .collect();
            out.nodes[id].kind = NodeKind::Internal { owner: *owner, branches: new_branches };
            id
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proto::{alice_sends_prefix, random_tree, ZeroPair};

    fn same_outputs(a: &Tree, b: &Tree) -> bool {
        let n = 1u32 << a.n_bits;
        (0..n).all(|x| (0..n).all(|y| a.run(x, y).label == b.run(x, y).label))
    }

    #[test]
    fn leaf_tree_unchanged() {
        let t = Tree::constant(3, Label::Value(2)).unwrap();
        let (u, _) = transform_alg3(&t, 0.8).unwrap();
        assert_eq!(u, t);
    }

    #[test]
    fn one_round_fixes_coordinate() {
        let t = alice_sends_prefix(2, 1).unwrap();
        let (u, stats) = transform_alg3(&t, 0.8).unwrap();
        u.validate().unwrap();
        assert!(same_outputs(&t, &u));
        assert!(stats.huffman_ok);
        for leaf in u.leaves() {
            assert_eq!(u.node(leaf).fixed.i_mask & 1, 1);
        }
        assert_eq!(check_subcube_like(&u, 0.8).unwrap().failures, 0);
    }

    #[test]
    fn random_trees_preserved() {
        for seed in 0..10 {
            let t = random_tree(5, 4, 3, seed).unwrap();
            let (u, stats) = transform_alg3(&t, 0.8).unwrap();
            u.validate().unwrap();
            assert!(same_outputs(&t, &u), "seed {seed}");
            assert!(stats.huffman_ok);
            assert_eq!(check_subcube_like(&u, 0.8).unwrap().failures, 0, "seed {seed}");
        }
    }

    #[test]
    fn corrupted_fixing_is_reported() {
        let t = random_tree(5, 4, 3, 1).unwrap();
        let (mut u, _) = transform_alg3(&t, 0.8).unwrap();
        let id = (1..u.len()).find(|&i| u.nodes[i].fixed.i_mask != 0).unwrap();
        let low = u.nodes[id].fixed.i_mask & u.nodes[id].fixed.i_mask.wrapping_neg();
        u.nodes[id].fixed.a ^= low;
        let r = check_subcube_like(&u, 0.8).unwrap();
        assert_eq!(r.first_failure, Some(id));
        assert_eq!(r.nodes_checked, u.len());
    }

    #[test]
    fn cleanup_rejects_wrong_answers() {
        let z = ZeroPair { n_bits: 3 };
        // label (0, 0) is wrong whenever x_0 = 1 or y_0 = 1
        let t = alice_sends_prefix(3, 1).unwrap();
        let mut wrong = t.clone();
        for leaf in wrong.leaves() {
            wrong.nodes[leaf].kind = NodeKind::Leaf { label: Label::Value(0) };
        }
        let (c, stats) = cleanup(&wrong, 0.5, &z).unwrap();
        c.validate().unwrap();
        for x in 0..8 {
            for y in 0..8 {
                let out = c.run(x, y).label;
                assert!(out == Label::Bottom || z.valid(x, y, out));
            }
        }
        assert!((stats.bottom_probability - stats.original_error).abs() < 1e-12);
        let mut always_wrong = Tree::constant(3, Label::Value(0)).unwrap();
        always_wrong.nodes[0].kind = NodeKind::Leaf { label: Label::Value(99) };
        let (c, _) = cleanup(&always_wrong, 0.5, &z).unwrap();
        assert!((c.bottom_probability() - 1.0).abs() < 1e-12);
    }
}
