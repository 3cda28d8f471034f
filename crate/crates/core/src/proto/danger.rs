use std::collections::BTreeSet;

use serde::Serialize;

use super::{constant_coords, random_tree, NodeKind, SplitVerifier, Tree};
use crate::budget::Budget;
use crate::codes::{list_recover_count, CodeSpec};
use crate::error::{Error, Result};
use crate::instances::{Party, Split};

/// Fraction of coordinates whose oracle bit must be fixed.
pub const DANGER_FRACTION: f64 = 0.4;

/// bNC validity over flattened party inputs: label `k` is the `k`-th
/// codeword in canonical order; each party checks its coordinates.
#[derive(Clone, Debug)]
pub struct BncVerifier {
    split: Split,
    ranks: Vec<Vec<u64>>,
}

impl BncVerifier {
    pub fn new(spec: &CodeSpec, budget: &Budget) -> Result<Self> {
        let sigma = spec.sigma_size().ok_or_else(|| Error::budget("|Σ|", f64::INFINITY, budget.enumeration as f64))?;
        let split = Split::new(spec.n(), sigma)?;
        if split.side_len() > super::MAX_BITS as usize {
            return Err(Error::InvalidParams(format!(
                "each party holds {} oracle bits; at most {} are supported",
                split.side_len(),
                super::MAX_BITS
            )));
        }
        let ranks = spec.codewords(budget)?.iter().map(|c| spec.symbol_ranks(c)).collect();
        Ok(BncVerifier { split, ranks })
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn n_bits(&self) -> u32 {
        self.split.side_len() as u32
    }

    pub fn codeword_count(&self) -> usize {
        self.ranks.len()
    }

    pub fn labels(&self) -> Vec<u64> {
        (0..self.ranks.len() as u64).collect()
    }

    /// Bit positions of `H_i(c_i)` for the codeword, per party.
    fn positions(&self, label: u64, party: Party) -> impl Iterator<Item = usize> + '_ {
        let ranks = &self.ranks[label as usize];
        self.split.coords(party).map(move |i| self.split.flat_index(i, ranks[i]).1)
    }

    fn side_ok(&self, input: u32, label: u64, party: Party) -> bool {
        (label as usize) < self.ranks.len() && self.positions(label, party).all(|p| input >> p & 1 == 0)
    }

    /// Whether `H(c) = 0^n`.
    pub fn is_solution(&self, x: u32, y: u32, label: u64) -> bool {
        self.alice_ok(x, label) && self.bob_ok(y, label)
    }
}

impl SplitVerifier for BncVerifier {
    fn alice_ok(&self, x: u32, label: u64) -> bool {
        self.side_ok(x, label, Party::Alice)
    }

    fn bob_ok(&self, y: u32, label: u64) -> bool {
        self.side_ok(y, label, Party::Bob)
    }
}

/// Random one-bit tree over the flattened oracle bits, leaves labelled with
/// the codeword valid on most inputs of the leaf rectangle.
pub fn random_bnc_tree(verifier: &BncVerifier, max_depth: usize, seed: u64) -> Result<Tree> {
    let mut t = random_tree(verifier.n_bits(), max_depth, 1, seed)?;
    t.label_best(verifier, &verifier.labels());
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DangerNode {
    pub node: usize,
    /// Indices of dangerous codewords.
    pub dangerous: BTreeSet<u64>,
    pub lr_count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DangerReport {
    /// `ceil(0.4 n)`.
    pub threshold: usize,
    pub nodes: Vec<DangerNode>,
    /// `Q_parent ⊆ Q_child` on every edge.
    pub monotone: bool,
    /// `list_recover_count` equals the direct count at every node.
    pub lr_consistent: bool,
    pub max_q: usize,
    pub runs: usize,
    /// Codewords that became dangerous during a run.
    pub danger_events: u64,
    /// Of those, the ones with `H(c) = 0^n` on that run's input.
    pub danger_then_solution: u64,
    pub frequency: f64,
}

/// Tracks the dangerous-codeword sets `Q_i` along every node of `tree` and
/// over the runs on `inputs`.
pub fn danger_track(
    tree: &Tree,
    spec: &CodeSpec,
    verifier: &BncVerifier,
    inputs: &[(u32, u32)],
    budget: &Budget,
) -> Result<DangerReport> {
    tree.validate()?;
    if tree.n_bits != verifier.n_bits() {
        return Err(Error::LengthMismatch { expected: verifier.n_bits() as usize, got: tree.n_bits as usize });
    }
    let n = spec.n();
    let split = verifier.split();
    let threshold = (DANGER_FRACTION * n as f64 - 1e-9).ceil() as usize;
    let rects = tree.rectangles();

    let mut nodes = Vec::with_capacity(tree.len());
    let mut lr_consistent = true;
    for (id, r) in rects.iter().enumerate() {
        let (mx, _) = constant_coords(&r.x, tree.n_bits);
        let (my, _) = constant_coords(&r.y, tree.n_bits);
        let fixed = |i: usize, rank: u64| {
            let (party, pos) = split.flat_index(i, rank);
            let mask = if party == Party::Alice { mx } else { my };
            mask >> pos & 1 == 1
        };
        let dangerous: BTreeSet<u64> = verifier
            .ranks
            .iter()
            .enumerate()
            .filter(|(_, ranks)| ranks.iter().enumerate().filter(|&(i, &r)| fixed(i, r)).count() >= threshold)
            .map(|(k, _)| k as u64)
            .collect();
        let sets: Vec<BTreeSet<u64>> =
            (0..n).map(|i| (0..split.sigma).filter(|&e| fixed(i, e)).collect()).collect();
        let lr_count = list_recover_count(spec, &sets, DANGER_FRACTION, budget)?;
        lr_consistent &= lr_count == dangerous.len() as u64;
        nodes.push(DangerNode { node: id, dangerous, lr_count });
    }

    let mut monotone = true;
    for (id, node) in tree.nodes.iter().enumerate() {
        if let NodeKind::Internal { branches, .. } = &node.kind {
            for b in branches {
                monotone &= nodes[id].dangerous.is_subset(&nodes[b.child].dangerous);
            }
        }
    }

    let (mut events, mut hits) = (0u64, 0u64);
    for &(x, y) in inputs {
        let run = tree.run(x, y);
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        for &v in &run.path {
            for &c in &nodes[v].dangerous {
                if seen.insert(c) {
                    events += 1;
                    if verifier.is_solution(x, y, c) {
                        hits += 1;
                    }
                }
            }
        }
    }

    Ok(DangerReport {
        threshold,
        max_q: nodes.iter().map(|d| d.dangerous.len()).max().unwrap_or(0),
        nodes,
        monotone,
        lr_consistent,
        runs: inputs.len(),
        danger_events: events,
        danger_then_solution: hits,
        frequency: if events == 0 { 0.0 } else { hits as f64 / events as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proto::{alice_sends_prefix, Label};
    use crate::toy::{random_binary_code, self_dual_8_4};

    #[test]
    fn no_fixed_bits_no_danger() {
        let c = self_dual_8_4();
        let b = Budget::default();
        let v = BncVerifier::new(&c, &b).unwrap();
        let t = Tree::constant(v.n_bits(), Label::Value(0)).unwrap();
        let r = danger_track(&t, &c, &v, &[(0, 0)], &b).unwrap();
        assert_eq!(r.threshold, 2);
        assert!(r.nodes[0].dangerous.is_empty());
    }

    #[test]
    fn one_fixed_bit_of_two() {
        // n = 2, Σ = F_2: Alice holds H_1(0), H_1(1)
        let c = random_binary_code(2, 1, 0).unwrap();
        let b = Budget::default();
        let v = BncVerifier::new(&c, &b).unwrap();
        let t = alice_sends_prefix(v.n_bits(), 1).unwrap();
        let r = danger_track(&t, &c, &v, &[(0, 0), (1, 1)], &b).unwrap();
        assert_eq!(r.threshold, 1);
        // fixing H_1(0) makes every codeword with c_1 = 0 dangerous
        for leaf in t.leaves() {
            assert!(r.nodes[leaf].dangerous.contains(&0));
        }
        assert!(r.monotone && r.lr_consistent);
    }
}
