use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use super::{constant_coords, InputSet, MAX_BITS};
use crate::error::{Error, Result};

/// `H∞` of the uniform marginal of `set` on the coordinates in `coords`.
pub fn min_entropy(set: &[u32], coords: u32) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut counts = HashMap::new();
    for &x in set {
        *counts.entry(x & coords).or_insert(0u64) += 1;
    }
    let max = counts.values().copied().max().unwrap_or(1);
    Ok((set.len() as f64 / max as f64).log2())
}

/// Largest free width whose submask orders are memoized.
const CACHED_WIDTH: u32 = 12;

thread_local! {
    static SUBMASKS: RefCell<HashMap<u32, Rc<[u32]>>> = RefCell::new(HashMap::new());
}

/// Nonzero submasks of `free` ordered by popcount descending, then value
/// ascending.
fn submasks_desc(free: u32) -> Rc<[u32]> {
    let compute = || {
        let mut subs = Vec::with_capacity(1 << free.count_ones());
        let mut s = free;
        while s != 0 {
            subs.push(s);
            s = (s - 1) & free;
        }
        subs.sort_unstable_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
        Rc::<[u32]>::from(subs)
    };
    if free.count_ones() > CACHED_WIDTH {
        return compute();
    }
    SUBMASKS.with(|c| c.borrow_mut().entry(free).or_insert_with(compute).clone())
}

fn check_width(free: u32) -> Result<()> {
    if free >> MAX_BITS != 0 {
        return Err(Error::InvalidParams(format!("coordinates beyond N = {MAX_BITS}")));
    }
    Ok(())
}

struct Counter {
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl Counter {
    fn new(free: u32) -> Self {
        let width = 32 - free.leading_zeros();
        Counter { counts: vec![0; 1usize << width], touched: Vec::new() }
    }

    /// Smallest `a` with `#{x : x_I = a} > threshold`.
    fn first_above(&mut self, set: &[u32], mask: u32, threshold: f64) -> Option<u32> {
        for &x in set {
            let k = (x & mask) as usize;
            if self.counts[k] == 0 {
                self.touched.push(k as u32);
            }
            self.counts[k] += 1;
        }
        let mut best: Option<u32> = None;
        for &k in &self.touched {
            if self.counts[k as usize] as f64 > threshold && best.is_none_or(|b| k < b) {
                best = Some(k);
            }
            self.counts[k as usize] = 0;
        }
        self.touched.clear();
        best
    }
}

/// Coordinates that are not constant on `set`.
fn varying(set: &[u32]) -> u32 {
    set.iter().fold(0, |acc, &x| acc | (x ^ set[0]))
}

/// No value of `x_mask` can occur more than `2^{|vary \ mask|}` times.
fn may_exceed(vary: u32, mask: u32, len: usize, thr: f64) -> bool {
    let cap = (vary & !mask).count_ones();
    cap >= 31 || ((1u64 << cap).min(len as u64)) as f64 > thr
}

fn threshold(len: usize, gamma: f64, k: u32) -> f64 {
    // relative slack only absorbs rounding at exact powers of two
    len as f64 * (-gamma * k as f64).exp2() * (1.0 + 1e-12)
}

/// Scatters the low bits of `c` onto the set bits of `mask`.
fn deposit(mut c: u32, mut mask: u32) -> u32 {
    let mut out = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if c & 1 == 1 {
            out |= low;
        }
        c >>= 1;
        mask &= mask - 1;
    }
    out
}

/// Gathers the bits of `x` at the set bits of `mask` into the low bits.
fn extract(x: u32, mut mask: u32) -> u32 {
    let mut out = 0;
    let mut bit = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if x & low != 0 {
            out |= 1 << bit;
        }
        bit += 1;
        mask &= mask - 1;
    }
    out
}

/// Widest free set handled by the marginal table.
const TABLE_WIDTH: u32 = 14;

/// Marginal tables pay off once `|set| · 2^k` exceeds `~2 · 3^k`.
fn use_table(len: usize, k: u32) -> bool {
    k <= TABLE_WIDTH && len as f64 > 2.0 * 1.5f64.powi(k as i32)
}

/// Same order and result as the scan in [`find_violation`], computed from
/// marginal counts derived one coordinate at a time.
fn find_violation_table(set: &[u32], free: u32, gamma: f64) -> Option<(u32, u32)> {
    let k = free.count_ones();
    let full = (1usize << k) - 1;
    let mut hist = vec![0u32; 1 << k];
    for &x in set {
        hist[extract(x, free) as usize] += 1;
    }
    let mut level: Vec<Option<Vec<u32>>> = vec![None; 1 << k];
    level[full] = Some(hist);
    for width in (1..=k).rev() {
        let thr = threshold(set.len(), gamma, width);
        for m in (0..=full).filter(|m| m.count_ones() == width) {
            let counts = level[m].as_ref().expect("marginal computed");
            if let Some(idx) = counts.iter().position(|&c| c as f64 > thr) {
                let mask = deposit(m as u32, free);
                return Some((mask, deposit(deposit(idx as u32, m as u32), free)));
            }
        }
        if width == 1 {
            break;
        }
        let mut next: Vec<Option<Vec<u32>>> = vec![None; 1 << k];
        for m in (0..=full).filter(|m| m.count_ones() == width - 1) {
            let j = !m & full & (!m & full).wrapping_neg();
            let parent = m | j;
            let r = (parent & (j - 1)).count_ones();
            let low = (1usize << r) - 1;
            let src = level[parent].as_ref().expect("parent computed");
            let mut dst = vec![0u32; 1 << (width - 1)];
            for (idx, &c) in src.iter().enumerate() {
                dst[((idx >> (r + 1)) << r) | (idx & low)] += c;
            }
            next[m] = Some(dst);
        }
        level = next;
    }
    None
}

/// Violating pair `(I, a)` with `Pr[x_I = a] > 2^{-γ|I|}`, `I ⊆ free`,
/// largest `|I|` first, ties by smallest `(I, a)` as bitmasks.
pub fn find_violation(set: &[u32], free: u32, gamma: f64) -> Result<Option<(u32, u32)>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    check_width(free)?;
    let vary = varying(set);
    let mut counter = Counter::new(free);
    for &mask in submasks_desc(free).iter() {
        let thr = threshold(set.len(), gamma, mask.count_ones());
        if !may_exceed(vary, mask, set.len(), thr) {
            continue;
        }
        if let Some(a) = counter.first_above(set, mask, thr) {
            return Ok(Some((mask, a)));
        }
    }
    Ok(None)
}

/// Exact γ-density of the uniform distribution on `set` over the `free`
/// coordinates.
pub fn is_dense(set: &[u32], free: u32, gamma: f64) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    check_width(free)?;
    if use_table(set.len(), free.count_ones()) {
        return Ok(find_violation_table(set, free, gamma).is_none());
    }
    let vary = varying(set);
    let mut counter = Counter::new(free);
    for &mask in submasks_desc(free).iter().rev() {
        let thr = threshold(set.len(), gamma, mask.count_ones());
        if may_exceed(vary, mask, set.len(), thr) && counter.first_above(set, mask, thr).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Part `X^j` with newly fixed coordinates `x_I = a` (`I ⊆ free`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DrpPart {
    pub members: InputSet,
    pub i_mask: u32,
    pub a: u32,
}

/// Greedy density-restoring partition. Coordinates constant on the residual
/// set are fixed first; while the residual is not γ-dense on the remaining
/// free coordinates, the maximal violating pair is peeled off.
pub fn density_restoring_partition(set: &[u32], free: u32, gamma: f64) -> Result<Vec<DrpPart>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut residual: InputSet = set.to_vec();
    let mut parts = Vec::new();
    let width = 32 - free.leading_zeros();
    while !residual.is_empty() {
        let (kmask, kval) = constant_coords(&residual, width);
        let (kmask, kval) = (kmask & free, kval & free);
        match find_violation(&residual, free & !kmask, gamma)? {
            None => {
                parts.push(DrpPart { members: residual, i_mask: kmask, a: kval });
                break;
            }
            Some((mask, a)) => {
                let (part, rest): (InputSet, InputSet) = residual.iter().partition(|&&x| x & mask == a);
                parts.push(DrpPart { members: part, i_mask: mask | kmask, a: a | kval });
                residual = rest;
            }
        }
    }
    Ok(parts)
}

/// `Σ_j |X^j| / |X| · |I_j|`.
pub fn expected_codimension(parts: &[DrpPart]) -> f64 {
    let total: usize = parts.iter().map(|p| p.members.len()).sum();
    parts.iter().map(|p| p.members.len() as f64 * p.i_mask.count_ones() as f64).sum::<f64>() / total as f64
}

/// Parts are disjoint, cover `set`, are fixed on `I_j`, and are γ-dense on
/// `free \ I_j`.
pub fn check_partition(set: &[u32], parts: &[DrpPart], free: u32, gamma: f64) -> Result<bool> {
    let mut all: Vec<u32> = parts.iter().flat_map(|p| p.members.iter().copied()).collect();
    all.sort_unstable();
    if all != set {
        return Ok(false);
    }
    for p in parts {
        if p.members.is_empty() || p.i_mask & !free != 0 || p.members.iter().any(|&x| x & p.i_mask != p.a) {
            return Ok(false);
        }
        if !is_dense(&p.members, free & !p.i_mask, gamma)? {
            return Ok(false);
        }
    }
    Ok(true)
}
