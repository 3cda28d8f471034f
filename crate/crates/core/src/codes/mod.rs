//! Linear codes over GF(2^s): folded (generalized) Reed-Solomon codes with
//! the preset parameter schedule, generic codes given by a generator matrix,
//! duals, decoding and list-recovery counting.
//!
//! Codewords are always stored unfolded, as `N` field symbols. The folded
//! view groups `m` consecutive symbols into one letter of `Σ = F_q^m`.

mod decode;
mod listrec;

pub use decode::{
    berlekamp_welch, list_decode, list_decode_exhaustive, DecoderParams, DualDecoder,
    DEFAULT_EPSILON,
};
pub use listrec::{list_recover_count, lr_param_check, LrCheck};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElem, Generator};
use crate::linalg::{dot, Echelon, Matrix};

pub type Codeword = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    GrsFolded,
    GenericLinear,
}

/// A linear code of unfolded length `N` over `F_q`, folded with parameter `m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CodeDesc", into = "CodeDesc")]
pub struct CodeSpec {
    kind: CodeKind,
    field: FieldCtx,
    gamma: Option<Generator>,
    k: usize,
    len: usize,
    m: usize,
    v: Vec<u32>,
    genmat: Matrix,
    echelon: Echelon,
}

/// On-disk code description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeDesc {
    pub kind: CodeKind,
    pub field: FieldCtx,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<u32>,
    pub k: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genmat: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

impl TryFrom<CodeDesc> for CodeSpec {
    type Error = Error;
    fn try_from(d: CodeDesc) -> Result<Self> {
        match d.kind {
            CodeKind::GrsFolded => {
                let gamma = match d.gamma {
                    Some(g) => Generator { gamma: FieldElem(g) },
                    None => d.field.find_generator(),
                };
                let v = if d.v.is_empty() { None } else { Some(d.v) };
                CodeSpec::grs_folded(d.field, gamma, d.k, d.m, v)
            }
            CodeKind::GenericLinear => {
                let rows = d.genmat.unwrap_or_default();
                let len = match (rows.first(), d.length) {
                    (Some(r), _) => r.len(),
                    (None, Some(l)) => l,
                    (None, None) => {
                        return Err(Error::InvalidParams("empty genmat needs a length".into()))
                    }
                };
                CodeSpec::generic(d.field, &rows, len, d.m)
            }
        }
    }
}

impl From<CodeSpec> for CodeDesc {
    fn from(c: CodeSpec) -> Self {
        match c.kind {
            CodeKind::GrsFolded => CodeDesc {
                kind: c.kind,
                field: c.field,
                gamma: c.gamma.map(Generator::value),
                k: c.k,
                m: c.m,
                v: c.v,
                genmat: None,
                length: None,
            },
            CodeKind::GenericLinear => CodeDesc {
                kind: c.kind,
                field: c.field,
                gamma: None,
                k: c.k,
                m: c.m,
                v: Vec::new(),
                genmat: Some(c.genmat.to_rows()),
                length: Some(c.len),
            },
        }
    }
}

/// Parameters of the preset code family for a given `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PresetParams {
    pub t: u32,
    pub n: usize,
    pub q: u64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub m: usize,
    pub k: usize,
}

impl PresetParams {
    pub fn for_t(t: u32) -> Result<Self> {
        if t == 0 || 2 * t > 32 {
            return Err(Error::InvalidParams(format!("preset t must be in 1..=16, got {t}")));
        }
        let n = (1usize << t) - 1;
        let q = 1u64 << (2 * t);
        let big_n = (q - 1) as usize;
        let m = big_n / n;
        // 0.1 * N, floored; exact integer arithmetic avoids float drift
        let k = big_n / 10;
        Ok(PresetParams { t, n, q, big_n, m, k })
    }
}

/// Folded Reed-Solomon code with `n = 2^t - 1`, `q = 2^(2t)`, `N = q - 1`,
/// `m = 2^t + 1`, `k = floor(N / 10)` and the smallest generator.
pub fn paper_preset(t: u32) -> Result<CodeSpec> {
    let p = PresetParams::for_t(t)?;
    if p.k == 0 {
        log::warn!("preset t={t} is degenerate (k = 0)");
    }
    let field = FieldCtx::with_default_modulus(2 * t)?;
    let gamma = field.find_generator();
    CodeSpec::grs_folded(field, gamma, p.k, p.m, None)
}

impl CodeSpec {
    /// Folded GRS code: evaluations of polynomials of degree `<= k` at
    /// `γ^0, ..., γ^(N-1)`, coordinate `i` scaled by `v_i`.
    pub fn grs_folded(
        field: FieldCtx,
        gamma: Generator,
        k: usize,
        m: usize,
        v: Option<Vec<u32>>,
    ) -> Result<Self> {
        let len = (field.order() - 1) as usize;
        if field.order_of(gamma.value()).ok() != Some(len as u64) {
            return Err(Error::InvalidParams(format!("{} is not a generator", gamma.value())));
        }
        if m == 0 || !len.is_multiple_of(m) {
            return Err(Error::InvalidParams(format!("m = {m} does not divide N = {len}")));
        }
        if k + 1 > len {
            return Err(Error::InvalidParams(format!("degree {k} too large for N = {len}")));
        }
        let v = v.unwrap_or_else(|| vec![1; len]);
        if v.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: v.len() });
        }
        if v.iter().any(|&x| x == 0 || !field.contains(x)) {
            return Err(Error::InvalidParams("multipliers must be nonzero field elements".into()));
        }
        let mut genmat = Matrix::zeros(k + 1, len);
        for j in 0..=k {
            for i in 0..len {
                let point = field.pow(gamma.value(), i as u64);
                genmat.set(j, i, field.mul(v[i], field.pow(point, j as u64)));
            }
        }
        let echelon = genmat.echelon(&field);
        Ok(CodeSpec { kind: CodeKind::GrsFolded, field, gamma: Some(gamma), k, len, m, v, genmat, echelon })
    }

    /// Code spanned by the rows of `rows`, each of length `len`.
    pub fn generic(field: FieldCtx, rows: &[Vec<u32>], len: usize, m: usize) -> Result<Self> {
        if m == 0 || !len.is_multiple_of(m) {
            return Err(Error::InvalidParams(format!("m = {m} does not divide N = {len}")));
        }
        for r in rows {
            if r.len() != len {
                return Err(Error::LengthMismatch { expected: len, got: r.len() });
            }
            if r.iter().any(|&x| !field.contains(x)) {
                return Err(Error::DomainMismatch {
                    value: *r.iter().find(|&&x| !field.contains(x)).unwrap() as u64,
                    s: field.s(),
                });
            }
        }
        let genmat = Matrix::from_rows(rows, len);
        let echelon = genmat.echelon(&field);
        Ok(CodeSpec {
            kind: CodeKind::GenericLinear,
            field,
            gamma: None,
            k: rows.len().saturating_sub(1),
            len,
            m,
            v: Vec::new(),
            genmat,
            echelon,
        })
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn gamma(&self) -> Option<Generator> {
        self.gamma
    }

    /// Degree bound for GRS codes; row count minus one for generic codes.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Unfolded length `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Folding parameter `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Folded length `n = N / m`.
    pub fn n(&self) -> usize {
        self.len / self.m
    }

    pub fn multipliers(&self) -> &[u32] {
        &self.v
    }

    pub fn genmat(&self) -> &Matrix {
        &self.genmat
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    pub fn dimension(&self) -> usize {
        self.echelon.rank()
    }

    /// `log2 |C|`.
    pub fn log2_size(&self) -> f64 {
        self.dimension() as f64 * self.field.s() as f64
    }

    /// `|C|` when it fits in 64 bits.
    pub fn size(&self) -> Option<u64> {
        let bits = self.dimension() as u32 * self.field.s();
        (bits < 64).then(|| 1u64 << bits)
    }

    /// `|Σ| = q^m` when it fits in 64 bits.
    pub fn sigma_size(&self) -> Option<u64> {
        let bits = self.m as u32 * self.field.s();
        (bits < 64).then(|| 1u64 << bits)
    }

    /// Minimum distance: `N - k` for GRS codes, by enumeration otherwise.
    pub fn min_distance(&self, budget: &Budget) -> Result<usize> {
        if self.kind == CodeKind::GrsFolded {
            return Ok(self.len - self.k);
        }
        if self.dimension() == 0 {
            return Ok(self.len + 1);
        }
        Ok(self
            .codewords(budget)?
            .iter()
            .map(|c| hamming_weight(c))
            .filter(|&w| w > 0)
            .min()
            .unwrap_or(self.len + 1))
    }

    /// Largest radius with unique decoding, `floor((d - 1) / 2)`.
    pub fn unique_radius(&self, budget: &Budget) -> Result<usize> {
        Ok(self.min_distance(budget)?.saturating_sub(1) / 2)
    }

    /// Number of message symbols accepted by [`encode`](Self::encode).
    pub fn message_len(&self) -> usize {
        match self.kind {
            CodeKind::GrsFolded => self.k + 1,
            CodeKind::GenericLinear => self.genmat.rows,
        }
    }

    pub fn encode(&self, message: &[u32]) -> Result<Codeword> {
        let ok_len = match self.kind {
            CodeKind::GrsFolded => message.len() <= self.k + 1,
            CodeKind::GenericLinear => message.len() == self.genmat.rows,
        };
        if !ok_len {
            return Err(Error::LengthMismatch { expected: self.message_len(), got: message.len() });
        }
        if let Some(&bad) = message.iter().find(|&&x| !self.field.contains(x)) {
            return Err(Error::DomainMismatch { value: bad as u64, s: self.field.s() });
        }
        let f = &self.field;
        let mut out = vec![0u32; self.len];
        for (j, &c) in message.iter().enumerate() {
            if c != 0 {
                for (o, &g) in out.iter_mut().zip(self.genmat.row(j)) {
                    *o ^= f.mul(c, g);
                }
            }
        }
        Ok(out)
    }

    /// Rank-based membership test.
    pub fn contains(&self, word: &[u32]) -> bool {
        word.len() == self.len
            && word.iter().all(|&x| self.field.contains(x))
            && self.echelon.contains(&self.field, word)
    }

    /// Codeword with index `idx` in the canonical enumeration order: base-q
    /// digits of `idx` (least significant first) weight the echelon basis.
    pub fn codeword_at(&self, idx: u64) -> Codeword {
        let f = &self.field;
        let q = f.order();
        let mut out = vec![0u32; self.len];
        let mut rest = idx;
        for r in 0..self.dimension() {
            let c = (rest % q) as u32;
            rest /= q;
            if c != 0 {
                for (o, &g) in out.iter_mut().zip(self.echelon.matrix.row(r)) {
                    *o ^= f.mul(c, g);
                }
            }
        }
        out
    }

    /// All codewords in canonical order.
    pub fn codewords(&self, budget: &Budget) -> Result<Vec<Codeword>> {
        let size = self.enumerable(budget)?;
        Ok((0..size).into_par_iter().map(|i| self.codeword_at(i)).collect())
    }

    /// `|C|`, or `BudgetExceeded` when it exceeds the enumeration budget.
    pub fn enumerable(&self, budget: &Budget) -> Result<u64> {
        match self.size() {
            Some(s) if s <= budget.enumeration => Ok(s),
            _ => Err(Error::budget(
                "code enumeration",
                self.log2_size().exp2(),
                budget.enumeration as f64,
            )),
        }
    }

    /// Dual code. GRS codes map to GRS codes of degree `N - k - 2`.
    pub fn dual(&self) -> Result<CodeSpec> {
        match self.kind {
            CodeKind::GrsFolded if self.k + 2 <= self.len => {
                let v = self.dual_multipliers_nullspace()?;
                debug_assert_eq!(v, self.dual_multipliers_closed_form());
                CodeSpec::grs_folded(
                    self.field.clone(),
                    self.gamma.expect("GRS codes carry a generator"),
                    self.len - self.k - 2,
                    self.m,
                    Some(v),
                )
            }
            _ => {
                let ns = self.genmat.null_space(&self.field);
                CodeSpec::generic(self.field.clone(), &ns.to_rows(), self.len, self.m)
            }
        }
    }

    /// Dual multipliers from the one-dimensional null space of
    /// `[v_i α_i^j]` for `j = 0..N-2`, normalised so that `v'_0 = 1 / v_0`.
    pub fn dual_multipliers_nullspace(&self) -> Result<Vec<u32>> {
        let f = &self.field;
        let gamma = self.gamma.ok_or_else(|| Error::InvalidParams("not a GRS code".into()))?;
        let n = self.len;
        let mut a = Matrix::zeros(n - 1, n);
        for j in 0..n - 1 {
            for i in 0..n {
                let point = f.pow(gamma.value(), i as u64);
                a.set(j, i, f.mul(self.v[i], f.pow(point, j as u64)));
            }
        }
        let ns = a.null_space(f);
        if ns.rows != 1 {
            return Err(Error::InvalidParams(format!("dual multiplier space has dim {}", ns.rows)));
        }
        let row = ns.row(0);
        let scale = f.div(f.inv(self.v[0])?, row[0])?;
        Ok(row.iter().map(|&x| f.mul(x, scale)).collect())
    }

    /// `v'_i = γ^i / v_i`, valid because the evaluation points are all of
    /// `F_q^*` and the characteristic is 2.
    pub fn dual_multipliers_closed_form(&self) -> Vec<u32> {
        let f = &self.field;
        let g = self.gamma.map(Generator::value).unwrap_or(1);
        self.v
            .iter()
            .enumerate()
            .map(|(i, &vi)| f.div(f.pow(g, i as u64), vi).expect("multipliers are nonzero"))
            .collect()
    }

    /// True when both codes span the same subspace of `F_q^N`.
    pub fn same_subspace(&self, other: &CodeSpec) -> bool {
        self.len == other.len
            && self.field == other.field
            && self.dimension() == other.dimension()
            && (0..other.echelon.rank()).all(|r| self.contains(other.echelon.matrix.row(r)))
    }

    /// Unfolded inner product.
    pub fn inner(&self, a: &[u32], b: &[u32]) -> u32 {
        dot(&self.field, a, b)
    }

    pub fn fold(&self, word: &[u32]) -> Result<Vec<Vec<u32>>> {
        fold(word, self.m)
    }

    pub fn unfold(&self, folded: &[Vec<u32>]) -> Result<Codeword> {
        unfold(folded, self.m)
    }

    /// Rank of a folded symbol (`m` digits base `q`, first digit most
    /// significant).
    pub fn symbol_rank(&self, symbol: &[u32]) -> u64 {
        let q = self.q();
        symbol.iter().fold(0u64, |acc, &d| acc * q + d as u64)
    }

    pub fn symbol_from_rank(&self, mut rank: u64) -> Vec<u32> {
        let q = self.q();
        let mut out = vec![0u32; self.m];
        for d in out.iter_mut().rev() {
            *d = (rank % q) as u32;
            rank /= q;
        }
        out
    }

    /// Ranks of the `n` folded symbols of an unfolded word.
    pub fn symbol_ranks(&self, word: &[u32]) -> Vec<u64> {
        word.chunks(self.m).map(|c| self.symbol_rank(c)).collect()
    }

    pub fn from_symbol_ranks(&self, ranks: &[u64]) -> Codeword {
        ranks.iter().flat_map(|&r| self.symbol_from_rank(r)).collect()
    }

    /// Number of nonzero folded symbols.
    pub fn symbol_weight(&self, word: &[u32]) -> usize {
        word.chunks(self.m).filter(|c| c.iter().any(|&x| x != 0)).count()
    }
}

impl PartialEq for CodeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.m == other.m
            && self.k == other.k
            && self.v == other.v
            && self.gamma == other.gamma
            && self.same_subspace(other)
    }
}

pub fn fold(word: &[u32], m: usize) -> Result<Vec<Vec<u32>>> {
    if m == 0 {
        return Err(Error::InvalidParams("folding parameter must be positive".into()));
    }
    if !word.len().is_multiple_of(m) {
        return Err(Error::LengthMismatch { expected: word.len().next_multiple_of(m), got: word.len() });
    }
    Ok(word.chunks(m).map(<[u32]>::to_vec).collect())
}

pub fn unfold(folded: &[Vec<u32>], m: usize) -> Result<Codeword> {
    if let Some(bad) = folded.iter().find(|s| s.len() != m) {
        return Err(Error::LengthMismatch { expected: m, got: bad.len() });
    }
    Ok(folded.concat())
}

pub fn hamming_weight(word: &[u32]) -> usize {
    word.iter().filter(|&&x| x != 0).count()
}

pub fn hamming_distance(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Coordinate-wise sum (characteristic 2, so also the difference).
pub fn add_words(a: &[u32], b: &[u32]) -> Codeword {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs_f4(k: usize) -> CodeSpec {
        let f = FieldCtx::new(2, 0b111).unwrap();
        let g = f.find_generator();
        CodeSpec::grs_folded(f, g, k, 1, None).unwrap()
    }

    #[test]
    fn preset_schedule() {
        let p = PresetParams::for_t(2).unwrap();
        assert_eq!((p.n, p.q, p.big_n, p.m, p.k), (3, 16, 15, 5, 1));
        let p = PresetParams::for_t(3).unwrap();
        assert_eq!((p.n, p.q, p.big_n, p.m, p.k), (7, 64, 63, 9, 6));
        let p = PresetParams::for_t(1).unwrap();
        assert_eq!((p.n, p.q, p.big_n, p.m, p.k), (1, 4, 3, 3, 0));
        let c = paper_preset(2).unwrap();
        assert_eq!((c.n(), c.len(), c.m(), c.k()), (3, 15, 5, 1));
        assert_eq!(c.gamma().unwrap().value(), 2);
    }

    #[test]
    fn encode_identity_polynomial() {
        let c = rs_f4(1);
        assert_eq!(c.encode(&[0, 1]).unwrap(), vec![1, 2, 3]);
        assert_eq!(c.encode(&[0, 0]).unwrap(), vec![0, 0, 0]);
        assert_eq!(c.encode(&[1]).unwrap(), vec![1, 1, 1]);
        assert!(matches!(c.encode(&[1, 2, 3]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn dual_of_rs_f4() {
        let c = rs_f4(1);
        let d = c.dual().unwrap();
        assert_eq!(d.k(), 0);
        assert_eq!(d.multipliers(), &[1, 2, 3]);
        let mut words = d.codewords(&Budget::default()).unwrap();
        words.sort();
        assert_eq!(words, vec![vec![0, 0, 0], vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]);
        assert_eq!(c.inner(&[1, 2, 3], &[1, 2, 3]), 0);
        assert_eq!(d.dual().unwrap(), c);
    }

    #[test]
    fn multipliers_nullspace_matches_closed_form() {
        for t in 1..=3 {
            let c = paper_preset(t).unwrap();
            assert_eq!(c.dual_multipliers_nullspace().unwrap(), c.dual_multipliers_closed_form());
        }
    }

    #[test]
    fn fold_unfold_and_weights() {
        let x: Vec<u32> = (0..15).collect();
        assert_eq!(unfold(&fold(&x, 5).unwrap(), 5).unwrap(), x);
        assert_eq!(fold(&x, 1).unwrap().concat(), x);
        assert!(fold(&x, 4).is_err());
        let c = rs_f4(1);
        assert_eq!(c.symbol_weight(&[0, 2, 0]), 1);
    }

    #[test]
    fn symbol_rank_is_big_endian() {
        let c = paper_preset(2).unwrap();
        assert_eq!(c.symbol_rank(&[0, 0, 0, 0, 1]), 1);
        assert_eq!(c.symbol_rank(&[1, 0, 0, 0, 0]), 16u64.pow(4));
        assert_eq!(c.symbol_from_rank(16u64.pow(4) + 3), vec![1, 0, 0, 0, 3]);
    }

    #[test]
    fn desc_roundtrip() {
        let c = paper_preset(2).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: CodeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let d = c.dual().unwrap();
        let back: CodeSpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
