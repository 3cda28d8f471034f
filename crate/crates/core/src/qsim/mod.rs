//! Exact sparse state-vector simulation over `Σ^n`.
//!
//! A basis string is stored as the base-`q` integer of its unfolded word
//! (first digit most significant). With `q = 2^s` every digit occupies `s`
//! bits, so register addition is XOR on indices.

mod claim66;
mod lemma;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::budget::Budget;
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::instances::OracleInstance;

pub use claim66::{claim66_exact, claim66_monte_carlo, Claim66Exact, Claim66MonteCarlo, ElementMean};
pub use lemma::{
    alice_stage, apply_add_decode, bob_stage, charlie_stage, lemma51_for_instance, lemma51_pipeline,
    run_alg1, Alg1Result, CharlieOutput, GoodSet, Lemma51Result,
};

const PRUNE: f64 = 1e-13;
const MAX_DENSE_Q: u64 = 1 << 12;

/// Shape of one register: `digits` symbols of `F_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Register {
    pub q: u64,
    pub digits: usize,
}

impl Register {
    pub fn new(q: u64, digits: usize) -> Result<Self> {
        if !q.is_power_of_two() || q < 2 {
            return Err(Error::InvalidParams(format!("register base {q} is not a power of two >= 2")));
        }
        let bits = q.trailing_zeros() as usize * digits;
        if bits > 63 {
            return Err(Error::budget("register index width (bits)", bits as f64, 63.0));
        }
        Ok(Register { q, digits })
    }

    pub fn bits_per_digit(&self) -> u32 {
        self.q.trailing_zeros()
    }

    pub fn dim(&self) -> u64 {
        1u64 << (self.bits_per_digit() as usize * self.digits)
    }

    /// Digit `j` (0 = most significant).
    pub fn digit(&self, idx: u64, j: usize) -> u64 {
        let shift = self.bits_per_digit() as usize * (self.digits - 1 - j);
        (idx >> shift) & (self.q - 1)
    }

    pub fn with_digit(&self, idx: u64, j: usize, value: u64) -> u64 {
        let shift = self.bits_per_digit() as usize * (self.digits - 1 - j);
        (idx & !((self.q - 1) << shift)) | (value << shift)
    }

    pub fn index_of(&self, word: &[u32]) -> u64 {
        let b = self.bits_per_digit();
        word.iter().fold(0u64, |acc, &d| (acc << b) | d as u64)
    }

    pub fn word_of(&self, idx: u64) -> Vec<u32> {
        (0..self.digits).map(|j| self.digit(idx, j) as u32).collect()
    }
}

/// Sparse state over basis keys `K` (an index or a pair of indices).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<K: Ord> {
    reg: Register,
    amps: BTreeMap<K, Complex64>,
}

pub type State = SparseState<u64>;
pub type PairState = SparseState<(u64, u64)>;

impl<K: Ord + Copy> SparseState<K> {
    pub fn from_map(reg: Register, amps: BTreeMap<K, Complex64>) -> Self {
        SparseState { reg, amps }
    }

    pub fn register(&self) -> Register {
        self.reg
    }

    pub fn amplitudes(&self) -> &BTreeMap<K, Complex64> {
        &self.amps
    }

    pub fn amp(&self, k: K) -> Complex64 {
        self.amps.get(&k).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.values_mut().for_each(|a| *a /= n);
        }
    }

    /// Euclidean distance `‖self - other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut sum = 0.0;
        for (k, a) in &self.amps {
            sum += (a - other.amp(*k)).norm_sqr();
        }
        for (k, b) in &other.amps {
            if !self.amps.contains_key(k) {
                sum += b.norm_sqr();
            }
        }
        sum.sqrt()
    }
}

impl State {
    /// Uniform superposition over `support` (duplicates ignored).
    pub fn uniform(reg: Register, support: impl IntoIterator<Item = u64>) -> Result<Self> {
        let keys: std::collections::BTreeSet<u64> = support.into_iter().collect();
        if keys.is_empty() {
            return Err(Error::EmptySet);
        }
        let a = Complex64::new(1.0 / (keys.len() as f64).sqrt(), 0.0);
        Ok(SparseState { reg, amps: keys.into_iter().map(|k| (k, a)).collect() })
    }

    pub fn basis(reg: Register, idx: u64) -> Self {
        SparseState { reg, amps: BTreeMap::from([(idx, Complex64::new(1.0, 0.0))]) }
    }

    /// `self ⊗ other`, `self` in the high digits.
    pub fn tensor(&self, other: &State, budget: &Budget) -> Result<State> {
        let needed = self.amps.len() as u128 * other.amps.len() as u128;
        if needed > budget.amplitudes as u128 {
            return Err(Error::budget("tensor product amplitudes", needed as f64, budget.amplitudes as f64));
        }
        if self.reg.q != other.reg.q {
            return Err(Error::InvalidParams("tensor of registers over different fields".into()));
        }
        let reg = Register::new(self.reg.q, self.reg.digits + other.reg.digits)?;
        let shift = other.reg.bits_per_digit() as usize * other.reg.digits;
        let mut amps = BTreeMap::new();
        for (&a, &va) in &self.amps {
            for (&b, &vb) in &other.amps {
                amps.insert((a << shift) | b, va * vb);
            }
        }
        Ok(SparseState { reg, amps })
    }

    /// Probability of each basis string.
    pub fn probabilities(&self) -> BTreeMap<u64, f64> {
        self.amps.iter().map(|(&k, a)| (k, a.norm_sqr())).collect()
    }
}

impl PairState {
    /// Marginal distribution of the second register.
    pub fn second_marginal(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (&(_, z), a) in &self.amps {
            *out.entry(z).or_insert(0.0) += a.norm_sqr();
        }
        out
    }

    pub fn first_marginal(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (&(x, _), a) in &self.amps {
            *out.entry(x).or_insert(0.0) += a.norm_sqr();
        }
        out
    }
}

/// Sign table `(-1)^{Tr(xz)}` for one `F_q` digit.
#[derive(Clone, Debug)]
pub struct Qft {
    q: u64,
    scale: f64,
    signs: Vec<bool>,
}

impl Qft {
    pub fn new(ctx: &FieldCtx) -> Result<Self> {
        let q = ctx.order();
        if q > MAX_DENSE_Q {
            return Err(Error::budget("dense QFT dimension", q as f64, MAX_DENSE_Q as f64));
        }
        let mut signs = Vec::with_capacity((q * q) as usize);
        for z in 0..q as u32 {
            for x in 0..q as u32 {
                signs.push(ctx.trace(ctx.mul(x, z)) == 1);
            }
        }
        Ok(Qft { q, scale: 1.0 / (q as f64).sqrt(), signs })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Entry `(z, x)`.
    #[inline]
    pub fn entry(&self, z: u64, x: u64) -> f64 {
        if self.signs[(z * self.q + x) as usize] {
            -self.scale
        } else {
            self.scale
        }
    }

    /// Apply to digit `j` of the index selected by `get` / `set`.
    fn apply_digit<K: Ord + Copy>(
        &self,
        amps: &BTreeMap<K, Complex64>,
        reg: Register,
        j: usize,
        get: impl Fn(K) -> u64,
        set: impl Fn(K, u64) -> K,
        budget: &Budget,
    ) -> Result<BTreeMap<K, Complex64>> {
        let mut out: BTreeMap<K, Complex64> = BTreeMap::new();
        for (&k, &a) in amps {
            let idx = get(k);
            let x = reg.digit(idx, j);
            for z in 0..self.q {
                let nk = set(k, reg.with_digit(idx, j, z));
                *out.entry(nk).or_default() += a * self.entry(z, x);
            }
        }
        out.retain(|_, a| a.norm_sqr() > PRUNE * PRUNE);
        if out.len() as u64 > budget.amplitudes {
            return Err(Error::budget("QFT amplitudes", out.len() as f64, budget.amplitudes as f64));
        }
        Ok(out)
    }

    /// QFT on every digit of a single register.
    pub fn apply(&self, state: &State, budget: &Budget) -> Result<State> {
        self.check_reg(state.reg)?;
        let mut amps = state.amps.clone();
        for j in 0..state.reg.digits {
            amps = self.apply_digit(&amps, state.reg, j, |k| k, |_, v| v, budget)?;
        }
        Ok(SparseState { reg: state.reg, amps })
    }

    /// `I ⊗ QFT` on a pair state.
    pub fn apply_second(&self, state: &PairState, budget: &Budget) -> Result<PairState> {
        self.check_reg(state.reg)?;
        let mut amps = state.amps.clone();
        for j in 0..state.reg.digits {
            amps = self.apply_digit(&amps, state.reg, j, |k| k.1, |k, v| (k.0, v), budget)?;
        }
        Ok(SparseState { reg: state.reg, amps })
    }

    fn check_reg(&self, reg: Register) -> Result<()> {
        if reg.q != self.q {
            return Err(Error::InvalidParams(format!("QFT over F_{} applied to a base-{} register", self.q, reg.q)));
        }
        Ok(())
    }
}

/// The `q x q` matrix with entries `(-1)^{Tr(xz)} / √q`.
pub fn qft_matrix(ctx: &FieldCtx) -> Result<Vec<Vec<Complex64>>> {
    let t = Qft::new(ctx)?;
    Ok((0..t.q)
        .map(|z| (0..t.q).map(|x| Complex64::new(t.entry(z, x), 0.0)).collect())
        .collect())
}

/// Register holding one symbol of `Σ`.
pub fn symbol_register(spec: &CodeSpec) -> Result<Register> {
    Register::new(spec.q(), spec.m())
}

/// Register holding an unfolded word of `spec`.
pub fn word_register(spec: &CodeSpec) -> Result<Register> {
    Register::new(spec.q(), spec.len())
}

/// `|φ_i⟩`: uniform over `T_i = {e : H_i(e) = 0}`.
pub fn prepare_phi(inst: &OracleInstance, i: usize) -> Result<State> {
    let reg = symbol_register(inst.spec())?;
    let zeros = inst.zero_set(i);
    if zeros.is_empty() {
        return Err(Error::EmptySupport(i));
    }
    State::uniform(reg, zeros)
}

/// `|φ⟩ = |φ_1⟩ ⊗ ... ⊗ |φ_n⟩`.
pub fn tensor_all(states: &[State], budget: &Budget) -> Result<State> {
    let (first, rest) = states.split_first().ok_or(Error::EmptySet)?;
    rest.iter().try_fold(first.clone(), |acc, s| acc.tensor(s, budget))
}

/// `|ψ⟩`: uniform over the codewords of `spec`.
pub fn prepare_psi(spec: &CodeSpec, budget: &Budget) -> Result<State> {
    let reg = word_register(spec)?;
    let size = spec.enumerable(budget)?;
    if size > budget.amplitudes {
        return Err(Error::budget("|ψ⟩ amplitudes", size as f64, budget.amplitudes as f64));
    }
    State::uniform(reg, (0..size).map(|i| reg.index_of(&spec.codeword_at(i))))
}
