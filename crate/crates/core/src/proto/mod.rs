//! Deterministic two-party protocol trees over explicit input sets.
//!
//! Inputs are bit strings `x, y ∈ {0,1}^N` (`N <= 20`) stored as `u32`
//! with coordinate `i` at bit `i`. A node's rectangle is `X × Y`, where `X`
//! (resp. `Y`) is the member list of the last Alice (resp. Bob) branch on
//! the path from the root.

mod danger;
mod density;
mod huffman;
mod transform;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::Party;

pub use danger::{danger_track, random_bnc_tree, BncVerifier, DangerNode, DangerReport};
pub use density::{
    check_partition, density_restoring_partition, expected_codimension, find_violation, is_dense, min_entropy,
    DrpPart,
};
pub use huffman::{entropy, expected_length, huffman, huffman_weights};
pub use transform::{check_subcube_like, cleanup, transform_alg3, CleanupStats, SubcubeReport, TransformStats};

pub const MAX_BITS: u32 = 20;

/// Sorted list of inputs.
pub type InputSet = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Value(u64),
    Bottom,
}

/// Fixed coordinates of a rectangle: `x_I = a`, `y_J = b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixed {
    pub i_mask: u32,
    pub a: u32,
    pub j_mask: u32,
    pub b: u32,
}

impl Fixed {
    pub fn codim(&self) -> u32 {
        self.i_mask.count_ones() + self.j_mask.count_ones()
    }

    pub fn side(&self, party: Party) -> (u32, u32) {
        match party {
            Party::Alice => (self.i_mask, self.a),
            Party::Bob => (self.j_mask, self.b),
        }
    }

    pub fn with_side(mut self, party: Party, mask: u32, val: u32) -> Self {
        match party {
            Party::Alice => (self.i_mask, self.a) = (mask, val),
            Party::Bob => (self.j_mask, self.b) = (mask, val),
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub members: InputSet,
    pub message: String,
    pub child: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leaf { label: Label },
    Internal { owner: Party, branches: Vec<Branch> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    #[serde(default)]
    pub fixed: Fixed,
}

/// Arena protocol tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub n_bits: u32,
    pub nodes: Vec<Node>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: InputSet,
    pub y: InputSet,
}

impl Rect {
    pub fn side(&self, party: Party) -> &InputSet {
        match party {
            Party::Alice => &self.x,
            Party::Bob => &self.y,
        }
    }

    pub fn size(&self) -> u64 {
        self.x.len() as u64 * self.y.len() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub transcript: String,
    pub label: Label,
    pub leaf: usize,
    pub rounds: usize,
    pub path: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyStats {
    pub cost: usize,
    /// `H(Π)` of the transcript on uniform inputs.
    pub entropy: f64,
    pub expected_length: f64,
    pub expected_rounds: f64,
    /// `H(Π) / |Π|` (zero when `|Π| = 0`).
    pub ratio: f64,
    /// `E|Π| <= 2 E[d] + H(Π)`.
    pub decomposition_holds: bool,
}

pub fn full_set(n_bits: u32) -> InputSet {
    (0..1u32 << n_bits).collect()
}

pub fn all_ones(n_bits: u32) -> u32 {
    if n_bits >= 32 {
        u32::MAX
    } else {
        (1u32 << n_bits) - 1
    }
}

/// Coordinates constant on `set`, with their values.
pub fn constant_coords(set: &[u32], n_bits: u32) -> (u32, u32) {
    let (and, or) = set.iter().fold((u32::MAX, 0u32), |(a, o), &x| (a & x, o | x));
    let full = all_ones(n_bits);
    let mask = (and | !or) & full;
    (mask, and & mask)
}

pub fn intersect(a: &[u32], b: &[u32]) -> InputSet {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Tree {
    pub fn new(n_bits: u32) -> Result<Self> {
        if n_bits == 0 || n_bits > MAX_BITS {
            return Err(Error::InvalidParams(format!("N = {n_bits} outside 1..={MAX_BITS}")));
        }
        Ok(Tree { n_bits, nodes: Vec::new() })
    }

    /// Single-leaf tree.
    pub fn constant(n_bits: u32, label: Label) -> Result<Self> {
        let mut t = Tree::new(n_bits)?;
        t.push(NodeKind::Leaf { label }, Fixed::default());
        Ok(t)
    }

    pub fn push(&mut self, kind: NodeKind, fixed: Fixed) -> usize {
        self.nodes.push(Node { kind, fixed });
        self.nodes.len() - 1
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn children(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let branches: &[Branch] = match &self.nodes[id].kind {
            NodeKind::Internal { branches, .. } => branches,
            NodeKind::Leaf { .. } => &[],
        };
        branches.iter().map(|b| b.child)
    }

    /// Worst-case transcript length `|Π|`.
    pub fn cost(&self) -> usize {
        self.cost_from(0)
    }

    fn cost_from(&self, id: usize) -> usize {
        match &self.nodes[id].kind {
            NodeKind::Leaf { .. } => 0,
            NodeKind::Internal { branches, .. } => {
                branches.iter().map(|b| b.message.len() + self.cost_from(b.child)).max().unwrap_or(0)
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, id: usize) -> usize {
            t.children(id).map(|c| 1 + go(t, c)).max().unwrap_or(0)
        }
        go(self, 0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i].kind, NodeKind::Leaf { .. })).collect()
    }

    /// Explicit rectangle at every node (indexed by node id).
    pub fn rectangles(&self) -> Vec<Rect> {
        let mut out = vec![Rect { x: Vec::new(), y: Vec::new() }; self.nodes.len()];
        if self.nodes.is_empty() {
            return out;
        }
        out[0] = Rect { x: full_set(self.n_bits), y: full_set(self.n_bits) };
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if let NodeKind::Internal { owner, branches } = &self.nodes[id].kind {
                for b in branches {
                    let mut r = out[id].clone();
                    match owner {
                        Party::Alice => r.x = b.members.clone(),
                        Party::Bob => r.y = b.members.clone(),
                    }
                    out[b.child] = r;
                    stack.push(b.child);
                }
            }
        }
        out
    }

    /// Children partition the owner's current set at every node, and every
    /// node is reached from exactly one parent.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidParams("empty tree".into()));
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for id in 0..self.nodes.len() {
            for c in self.children(id) {
                if c >= self.nodes.len() || c == 0 {
                    return Err(Error::InvalidParams(format!("node {id} has invalid child {c}")));
                }
                parents[c] += 1;
            }
        }
        if let Some(id) = (1..self.nodes.len()).find(|&i| parents[i] != 1) {
            return Err(Error::InvalidParams(format!("node {id} has {} parents", parents[id])));
        }
        let rects = self.rectangles();
        for (id, node) in self.nodes.iter().enumerate() {
            if let NodeKind::Internal { owner, branches } = &node.kind {
                let mut all: Vec<u32> = branches.iter().flat_map(|b| b.members.iter().copied()).collect();
                all.sort_unstable();
                if all != *rects[id].side(*owner) {
                    return Err(Error::InvalidParams(format!("branches at node {id} do not partition the owner set")));
                }
                if branches.iter().any(|b| !b.members.windows(2).all(|w| w[0] < w[1])) {
                    return Err(Error::InvalidParams(format!("unsorted members at node {id}")));
                }
            }
        }
        Ok(())
    }

    pub fn run(&self, x: u32, y: u32) -> Run {
        let mut id = 0;
        let mut transcript = String::new();
        let mut path = vec![0];
        loop {
            match &self.nodes[id].kind {
                NodeKind::Leaf { label } => {
                    return Run { transcript, label: *label, leaf: id, rounds: path.len() - 1, path };
                }
                NodeKind::Internal { owner, branches } => {
                    let input = if *owner == Party::Alice { x } else { y };
                    let Some(b) = branches.iter().find(|b| b.members.binary_search(&input).is_ok()) else {
                        // input outside the root domain
                        return Run { transcript, label: Label::Bottom, leaf: id, rounds: path.len() - 1, path };
                    };
                    transcript.push_str(&b.message);
                    id = b.child;
                    path.push(id);
                }
            }
        }
    }

    /// `(leaf, Pr[leaf])` on uniform inputs.
    pub fn leaf_probabilities(&self) -> Vec<(usize, f64)> {
        let rects = self.rectangles();
        let total = (2.0f64).powi(2 * self.n_bits as i32);
        self.leaves().into_iter().map(|l| (l, rects[l].size() as f64 / total)).collect()
    }

    /// Exact transcript statistics on uniform inputs.
    pub fn entropy_stats(&self) -> EntropyStats {
        let mut lens = vec![(0usize, 0usize); self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if let NodeKind::Internal { branches, .. } = &self.nodes[id].kind {
                for b in branches {
                    lens[b.child] = (lens[id].0 + b.message.len(), lens[id].1 + 1);
                    stack.push(b.child);
                }
            }
        }
        let (mut h, mut el, mut ed) = (0.0, 0.0, 0.0);
        for (leaf, p) in self.leaf_probabilities() {
            if p > 0.0 {
                h -= p * p.log2();
                el += p * lens[leaf].0 as f64;
                ed += p * lens[leaf].1 as f64;
            }
        }
        let cost = self.cost();
        EntropyStats {
            cost,
            entropy: h,
            expected_length: el,
            expected_rounds: ed,
            ratio: if cost == 0 { 0.0 } else { h / cost as f64 },
            decomposition_holds: el <= 2.0 * ed + h + 1e-9,
        }
    }

    /// Probability on uniform inputs that the output is `⊥` or rejected.
    pub fn error_probability(&self, verifier: &dyn SplitVerifier) -> f64 {
        let rects = self.rectangles();
        let total = (2.0f64).powi(2 * self.n_bits as i32);
        let mut err = 0.0;
        for leaf in self.leaves() {
            let r = &rects[leaf];
            let bad = match self.nodes[leaf].kind {
                NodeKind::Leaf { label: Label::Value(v) } => {
                    let ax = r.x.iter().filter(|&&x| verifier.alice_ok(x, v)).count() as u64;
                    let by = r.y.iter().filter(|&&y| verifier.bob_ok(y, v)).count() as u64;
                    r.size() - ax * by
                }
                _ => r.size(),
            };
            err += bad as f64 / total;
        }
        err
    }

    pub fn bottom_probability(&self) -> f64 {
        let rects = self.rectangles();
        let total = (2.0f64).powi(2 * self.n_bits as i32);
        self.leaves()
            .into_iter()
            .filter(|&l| matches!(self.nodes[l].kind, NodeKind::Leaf { label: Label::Bottom }))
            .map(|l| rects[l].size() as f64 / total)
            .sum()
    }

    /// Relabel every leaf with the candidate valid on the most inputs of its
    /// rectangle (first candidate on ties).
    pub fn label_best(&mut self, verifier: &dyn SplitVerifier, candidates: &[u64]) {
        let rects = self.rectangles();
        for leaf in self.leaves() {
            let r = &rects[leaf];
            let best = candidates.iter().copied().max_by_key(|&v| {
                let ax = r.x.iter().filter(|&&x| verifier.alice_ok(x, v)).count() as u64;
                let by = r.y.iter().filter(|&&y| verifier.bob_ok(y, v)).count() as u64;
                (ax * by, std::cmp::Reverse(v))
            });
            self.nodes[leaf].kind = NodeKind::Leaf { label: best.map_or(Label::Bottom, Label::Value) };
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Tree =
            serde_json::from_str(s).map_err(|e| Error::Parse { file: "<tree>".into(), line: e.line(), msg: e.to_string() })?;
        t.validate()?;
        Ok(t)
    }
}

/// Validity of a label split into the two parties' local checks.
pub trait SplitVerifier: Sync {
    fn alice_ok(&self, x: u32, label: u64) -> bool;
    fn bob_ok(&self, y: u32, label: u64) -> bool;

    fn valid(&self, x: u32, y: u32, label: Label) -> bool {
        match label {
            Label::Value(v) => self.alice_ok(x, v) && self.bob_ok(y, v),
            Label::Bottom => false,
        }
    }
}

/// Relation "find `(i, j)` with `x_i = 0` and `y_j = 0`"; label `i N + j`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroPair {
    pub n_bits: u32,
}

impl ZeroPair {
    pub fn labels(&self) -> Vec<u64> {
        (0..(self.n_bits as u64).pow(2)).collect()
    }
}

impl SplitVerifier for ZeroPair {
    fn alice_ok(&self, x: u32, label: u64) -> bool {
        let i = label / self.n_bits as u64;
        i < self.n_bits as u64 && x >> i & 1 == 0
    }

    fn bob_ok(&self, y: u32, label: u64) -> bool {
        let j = label % self.n_bits as u64;
        y >> j & 1 == 0
    }
}

/// One-bit message function over at most two coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MsgFn {
    Bit(u32),
    And(u32, u32),
    Or(u32, u32),
    Xor(u32, u32),
}

impl MsgFn {
    pub fn eval(self, x: u32) -> bool {
        let b = |i: u32| x >> i & 1 == 1;
        match self {
            MsgFn::Bit(i) => b(i),
            MsgFn::And(i, j) => b(i) && b(j),
            MsgFn::Or(i, j) => b(i) || b(j),
            MsgFn::Xor(i, j) => b(i) ^ b(j),
        }
    }

    fn random(rng: &mut impl Rng, n_bits: u32) -> Self {
        let i = rng.random_range(0..n_bits);
        let j = rng.random_range(0..n_bits);
        match rng.random_range(0..4) {
            0 => MsgFn::Bit(i),
            1 => MsgFn::And(i, j),
            2 => MsgFn::Or(i, j),
            _ => MsgFn::Xor(i, j),
        }
    }
}

/// One-bit-per-round tree with random owners and message functions, depth
/// at most `max_depth`, leaves labelled uniformly from `0..labels`.
pub fn random_tree(n_bits: u32, max_depth: usize, labels: u64, seed: u64) -> Result<Tree> {
    let mut t = Tree::new(n_bits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = full_set(n_bits);
    build_random(&mut t, &mut rng, full.clone(), full, 0, max_depth, labels.max(1));
    Ok(t)
}

/// Tree for `(x, y) -> f(x)` where Alice sends `x_0, ..., x_{k-1}`.
pub fn alice_sends_prefix(n_bits: u32, k: u32) -> Result<Tree> {
    let mut t = Tree::new(n_bits)?;
    fn go(t: &mut Tree, set: InputSet, i: u32, k: u32, acc: u64) -> usize {
        if i == k {
            return t.push(NodeKind::Leaf { label: Label::Value(acc) }, Fixed::default());
        }
        let id = t.push(NodeKind::Leaf { label: Label::Bottom }, Fixed::default());
        let (zero, one): (InputSet, InputSet) = set.iter().partition(|&&x| x >> i & 1 == 0);
        let c0 = go(t, zero.clone(), i + 1, k, acc);
        let c1 = go(t, one.clone(), i + 1, k, acc | 1 << i);
        t.nodes[id].kind = NodeKind::Internal {
            owner: Party::Alice,
            branches: vec![
                Branch { members: zero, message: "0".into(), child: c0 },
                Branch { members: one, message: "1".into(), child: c1 },
            ],
        };
        id
    }
    go(&mut t, full_set(n_bits), 0, k.min(n_bits), 0);
    Ok(t)
}

fn build_random(
    t: &mut Tree,
    rng: &mut ChaCha8Rng,
    x: InputSet,
    y: InputSet,
    depth: usize,
    max_depth: usize,
    labels: u64,
) -> usize {
    let id = t.push(NodeKind::Leaf { label: Label::Value(rng.random_range(0..labels)) }, Fixed::default());
    if depth >= max_depth || (depth > 0 && rng.random_bool(0.15)) {
        return id;
    }
    let owner = if rng.random_bool(0.5) { Party::Alice } else { Party::Bob };
    let set = if owner == Party::Alice { &x } else { &y };
    for _ in 0..4 {
        let f = MsgFn::random(rng, t.n_bits);
        let (one, zero): (InputSet, InputSet) = set.iter().partition(|&&v| f.eval(v));
        if zero.is_empty() || one.is_empty() {
            continue;
        }
        let mut branches = Vec::with_capacity(2);
        for (bit, part) in [("0", zero), ("1", one)] {
            let (cx, cy) = match owner {
                Party::Alice => (part.clone(), y.clone()),
                Party::Bob => (x.clone(), part.clone()),
            };
            let child = build_random(t, rng, cx, cy, depth + 1, max_depth, labels);
            branches.push(Branch { members: part, message: bit.into(), child });
        }
        t.nodes[id].kind = NodeKind::Internal { owner, branches };
        break;
    }
    id
}
