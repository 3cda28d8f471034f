//! λ-wise independent hashing by low-degree polynomials over `F_{2^r}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::codes::{CodeSpec, Codeword};
use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::instances::OracleInstance;
use crate::linalg::Matrix;

/// Width of the unfolded hash output per `(e, i)`.
pub const OUTPUT_BITS: u32 = 6;

/// Polynomial coefficients `c_0, ..., c_{λ-1}`.
pub type HashKey = Vec<u32>;

/// `h_k(e, i) = low bits of Σ_j c_j u^j` with `u = rank(e)·n + i`.
#[derive(Clone, Debug)]
pub struct HashFamily {
    field: FieldCtx,
    lambda: usize,
    n: usize,
    sigma: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashFamilyDesc {
    pub r: u32,
    pub modulus: u64,
    pub lambda: usize,
    pub n: usize,
    pub sigma: u64,
}

impl HashFamily {
    pub fn new(r: u32, lambda: usize, n: usize, sigma: u64) -> Result<Self> {
        let field = FieldCtx::with_default_modulus(r)?;
        Self::with_field(field, lambda, n, sigma)
    }

    pub fn with_field(field: FieldCtx, lambda: usize, n: usize, sigma: u64) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::InvalidParams("λ must be at least 1".into()));
        }
        let points = (sigma as u128) * (n as u128);
        if points == 0 || points > field.order() as u128 {
            return Err(Error::EncodingOverflow { r: field.s() });
        }
        Ok(HashFamily { field, lambda, n, sigma })
    }

    /// Family for `spec` with `r = max(6, ⌈log2(|Σ|·n)⌉)`, so outputs are
    /// full six-bit blocks.
    pub fn for_spec(spec: &CodeSpec, lambda: usize) -> Result<Self> {
        let sigma = spec.sigma_size().ok_or(Error::EncodingOverflow { r: 32 })?;
        let points = sigma as u128 * spec.n() as u128;
        let r = (128 - (points - 1).leading_zeros()).max(OUTPUT_BITS);
        if r > 32 {
            return Err(Error::EncodingOverflow { r });
        }
        Self::new(r, lambda, spec.n(), sigma)
    }

    pub fn from_desc(d: HashFamilyDesc) -> Result<Self> {
        Self::with_field(FieldCtx::new(d.r, d.modulus)?, d.lambda, d.n, d.sigma)
    }

    pub fn desc(&self) -> HashFamilyDesc {
        HashFamilyDesc { r: self.r(), modulus: self.field.modulus(), lambda: self.lambda, n: self.n, sigma: self.sigma }
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn r(&self) -> u32 {
        self.field.s()
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    /// `min(6, r)`.
    pub fn output_bits(&self) -> u32 {
        OUTPUT_BITS.min(self.r())
    }

    fn output_mask(&self) -> u32 {
        (1u32 << self.output_bits()) - 1
    }

    pub fn key_bits(&self) -> usize {
        self.r() as usize * self.lambda
    }

    pub fn zero_key(&self) -> HashKey {
        vec![0; self.lambda]
    }

    pub fn random_key<R: Rng>(&self, rng: &mut R) -> HashKey {
        let order = self.field.order();
        (0..self.lambda).map(|_| rng.random_range(0..order) as u32).collect()
    }

    /// Key from the low `rλ` bits of `bits`, coefficient `j` in bits
    /// `[j r, (j+1) r)`.
    pub fn key_from_bits(&self, bits: u64) -> HashKey {
        let r = self.r();
        let mask = ((1u64 << r) - 1) as u32;
        (0..self.lambda).map(|j| ((bits >> (j as u32 * r)) as u32) & mask).collect()
    }

    pub fn encode(&self, rank: u64, i: usize) -> Result<u32> {
        if rank >= self.sigma || i >= self.n {
            return Err(Error::EncodingOverflow { r: self.r() });
        }
        Ok((rank * self.n as u64 + i as u64) as u32)
    }

    fn check_key(&self, key: &[u32]) -> Result<()> {
        if key.len() != self.lambda {
            return Err(Error::LengthMismatch { expected: self.lambda, got: key.len() });
        }
        if let Some(&c) = key.iter().find(|&&c| !self.field.contains(c)) {
            return Err(Error::DomainMismatch { value: c as u64, s: self.r() });
        }
        Ok(())
    }

    fn poly_at(&self, key: &[u32], u: u32) -> u32 {
        key.iter().rev().fold(0, |acc, &c| self.field.add(self.field.mul(acc, u), c))
    }

    /// Unfolded output bits of `h_k(e, i)`.
    pub fn eval(&self, key: &[u32], rank: u64, i: usize) -> Result<u32> {
        self.check_key(key)?;
        let u = self.encode(rank, i)?;
        Ok(self.poly_at(key, u) & self.output_mask())
    }

    /// Bias bit: AND of the output bits.
    pub fn eval_bias(&self, key: &[u32], rank: u64, i: usize) -> Result<bool> {
        Ok(self.eval(key, rank, i)? == self.output_mask())
    }

    /// Output of `h` at `(rank, i)` for each unit key bit, indexed as in
    /// [`HashFamily::key_from_bits`].
    pub fn key_bit_images(&self, rank: u64, i: usize) -> Result<Vec<u32>> {
        let u = self.encode(rank, i)?;
        let mut out = Vec::with_capacity(self.key_bits());
        let mut power = 1u32;
        for _ in 0..self.lambda {
            for b in 0..self.r() {
                out.push(self.field.mul(1 << b, power) & self.output_mask());
            }
            power = self.field.mul(power, u);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub keys: u64,
    pub outcomes: u64,
    pub min_count: u64,
    pub max_count: u64,
    pub uniform: bool,
}

/// Exact joint output distribution at `points` over all keys.
pub fn independence_check(family: &HashFamily, points: &[(u64, usize)], budget: &Budget) -> Result<IndependenceReport> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut us = points.iter().map(|&(r, i)| family.encode(r, i)).collect::<Result<Vec<_>>>()?;
    us.sort_unstable();
    if us.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DistinctnessViolated);
    }
    let key_bits = family.key_bits() as u32;
    let out_bits = family.output_bits() * points.len() as u32;
    let limit = budget.enumeration.min(1 << 24);
    if key_bits > 24 || 1u64 << key_bits > limit || out_bits > 24 {
        return Err(Error::budget("hash keys", (key_bits as f64).exp2(), limit as f64));
    }
    let w = family.output_bits();
    let counts = (0..1u64 << key_bits)
        .into_par_iter()
        .fold(
            || vec![0u64; 1 << out_bits],
            |mut acc, bits| {
                let key = family.key_from_bits(bits);
                let idx = us.iter().fold(0usize, |idx, &u| {
                    (idx << w) | (family.poly_at(&key, u) & family.output_mask()) as usize
                });
                acc[idx] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; 1 << out_bits],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let min_count = *counts.iter().min().unwrap_or(&0);
    let max_count = *counts.iter().max().unwrap_or(&0);
    Ok(IndependenceReport {
        keys: 1 << key_bits,
        outcomes: 1 << out_bits,
        min_count,
        max_count,
        uniform: min_count == max_count,
    })
}

/// `h_{k ⊕ k'} = h_k ⊕ h_{k'}` on `samples` random key pairs at every
/// domain point, and unit-bit images compose to the full evaluation.
pub fn linearity_check(family: &HashFamily, samples: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let k1 = family.random_key(&mut rng);
        let k2 = family.random_key(&mut rng);
        let sum: HashKey = k1.iter().zip(&k2).map(|(a, b)| a ^ b).collect();
        for rank in 0..family.sigma {
            for i in 0..family.n {
                let (a, b, c) = (family.eval(&k1, rank, i)?, family.eval(&k2, rank, i)?, family.eval(&sum, rank, i)?);
                if a ^ b != c {
                    return Ok(false);
                }
                let images = family.key_bit_images(rank, i)?;
                let r = family.r() as usize;
                let composed = images
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| k1[idx / r] >> (idx % r) & 1 == 1)
                    .fold(0, |acc, (_, &v)| acc ^ v);
                if composed != a {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attack {
    pub key: HashKey,
    pub codeword: Codeword,
    pub rank: usize,
    pub equations: usize,
}

/// Gaussian elimination over the key bits: finds `k` with
/// `unf h_k(x_i, i) = unf H_i(x_i)` for every `i`, where `x` is the first
/// codeword, so the XORed oracle vanishes on `x`. `None` when the system is
/// inconsistent.
pub fn attack_solve(family: &HashFamily, inst: &OracleInstance) -> Result<Option<Attack>> {
    let spec = inst.spec();
    let unf = inst
        .unfolded()
        .ok_or_else(|| Error::InvalidParams("attack needs unfolded oracle tables".into()))?;
    let w = family.output_bits();
    if unf.block != w || family.n() != spec.n() || Some(family.sigma()) != spec.sigma_size() {
        return Err(Error::InvalidParams(format!(
            "family (n = {}, |Σ| = {}, {w}-bit outputs) does not match the instance (n = {}, block = {})",
            family.n(),
            family.sigma(),
            spec.n(),
            unf.block
        )));
    }
    let x = spec.codeword_at(0);
    let ranks = spec.symbol_ranks(&x);
    let gf2 = FieldCtx::with_default_modulus(1)?;
    let cols = family.key_bits();
    let rows = spec.n() * w as usize;
    let mut m = Matrix::zeros(rows, cols);
    let mut rhs = vec![0u32; rows];
    for (i, &rank) in ranks.iter().enumerate() {
        let images = family.key_bit_images(rank, i)?;
        let target = unf.block_value(i, rank) as u32;
        for t in 0..w as usize {
            let row = i * w as usize + t;
            for (c, img) in images.iter().enumerate() {
                m.set(row, c, img >> t & 1);
            }
            rhs[row] = target >> t & 1;
        }
    }
    let rank = m.rank(&gf2);
    let Some(bits) = m.solve(&gf2, &rhs) else {
        return Ok(None);
    };
    let r = family.r() as usize;
    let key = (0..family.lambda())
        .map(|j| (0..r).fold(0u32, |acc, b| acc | bits[j * r + b] << b))
        .collect();
    Ok(Some(Attack { key, codeword: x, rank, equations: rows }))
}
