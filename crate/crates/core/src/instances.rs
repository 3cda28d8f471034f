//! Biased oracle instances `H = (H_1, ..., H_n)`, the null-codeword relation
//! and its verifier, brute-force solving, and the AND-block view that
//! realises a `2^-b` bias from uniform bits.
//!
//! Table `i` holds one bit per symbol of `Σ`, indexed by symbol rank. In the
//! instance file each table is hex-encoded with bit `j` at byte `j / 8`,
//! bit position `j % 8` (least significant first).

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::codes::{CodeSpec, Codeword};
use crate::error::{Error, Result};

pub type BitTable = BitVec<u8, Lsb0>;

const EXPAND_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Probability `num / den` that an oracle bit is one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bias {
    num: u64,
    den: u64,
}

impl Bias {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidParams(format!("bias {num}/{den} is not in [0, 1]")));
        }
        let g = gcd(num, den);
        Ok(Bias { num: num / g, den: den / g })
    }

    /// `p = 2^-b`.
    pub fn exponent(b: u32) -> Result<Self> {
        if b >= 63 {
            return Err(Error::InvalidParams(format!("exponent {b} too large")));
        }
        Bias::new(1, 1 << b)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// `Some(b)` when `p = 2^-b`.
    pub fn as_exponent(&self) -> Option<u32> {
        (self.num == 1 && self.den.is_power_of_two()).then(|| self.den.trailing_zeros())
    }

    pub fn require_exponent(&self) -> Result<u32> {
        self.as_exponent().ok_or_else(|| Error::BiasNotPowerOfTwo(self.to_string()))
    }

    fn sample_bit(&self, rng: &mut impl Rng) -> bool {
        rng.random_range(0..self.den) < self.num
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Bias {
    type Err = Error;
    /// Accepts `num/den`, `2^-b`, `0` and `1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParams(format!("cannot parse bias {s:?}"));
        if let Some(b) = s.strip_prefix("2^-") {
            return Bias::exponent(b.parse().map_err(|_| bad())?);
        }
        if let Some((n, d)) = s.split_once('/') {
            return Bias::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        }
        match s {
            "0" => Bias::new(0, 1),
            "1" => Bias::new(1, 1),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Bias {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bias {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which half of the coordinates a party holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// Bipartite split: Alice holds coordinates `0..n/2`, Bob `n/2..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub n: usize,
    pub sigma: u64,
}

impl Split {
    pub fn new(n: usize, sigma: u64) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::SplitRequiresEvenN(n));
        }
        Ok(Split { n, sigma })
    }

    pub fn coords(&self, party: Party) -> Range<usize> {
        match party {
            Party::Alice => 0..self.n / 2,
            Party::Bob => self.n / 2..self.n,
        }
    }

    pub fn owner(&self, coord: usize) -> Party {
        if coord < self.n / 2 {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    /// Bits per side, `n |Σ| / 2`.
    pub fn side_len(&self) -> usize {
        self.n / 2 * self.sigma as usize
    }

    /// `(owner, (i - offset) |Σ| + rank)`.
    pub fn flat_index(&self, coord: usize, rank: u64) -> (Party, usize) {
        let party = self.owner(coord);
        let offset = self.coords(party).start;
        (party, (coord - offset) * self.sigma as usize + rank as usize)
    }

    pub fn unflatten(&self, party: Party, pos: usize) -> (usize, u64) {
        let s = self.sigma as usize;
        (self.coords(party).start + pos / s, (pos % s) as u64)
    }
}

/// AND-block expansion of the bias tables: `block` bits per entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfoldedTables {
    pub block: u32,
    pub tables: Vec<BitTable>,
}

impl UnfoldedTables {
    pub fn block_value(&self, i: usize, rank: u64) -> u64 {
        let b = self.block as usize;
        let start = rank as usize * b;
        self.tables[i][start..start + b].load_le::<u64>()
    }

    fn all_ones(&self) -> u64 {
        (1u64 << self.block) - 1
    }

    /// Bias bit: AND of the block.
    pub fn collapsed_bit(&self, i: usize, rank: u64) -> bool {
        self.block_value(i, rank) == self.all_ones()
    }
}

/// A biased oracle instance for a code.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleInstance {
    spec: CodeSpec,
    p: Bias,
    seed: u64,
    tables: Vec<BitTable>,
    unfolded: Option<UnfoldedTables>,
}

/// Instance file layout.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    spec: CodeSpec,
    p: Bias,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
    tables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unfolded: Option<UnfoldedFile>,
}

#[derive(Serialize, Deserialize)]
struct UnfoldedFile {
    block: u32,
    tables: Vec<String>,
}

fn table_budget(spec: &CodeSpec, bits_per_entry: u32, budget: &Budget) -> Result<usize> {
    let sigma = spec.sigma_size().filter(|&s| s <= budget.enumeration);
    match sigma {
        Some(s) if (s as u128) * (spec.n() as u128) * (bits_per_entry as u128) <= 1 << 32 => {
            Ok(s as usize)
        }
        _ => Err(Error::budget(
            "oracle tables",
            (spec.m() as f64 * spec.field().s() as f64).exp2() * spec.n() as f64,
            budget.enumeration as f64,
        )),
    }
}

fn decode_table(hex_str: &str, len: usize) -> Result<BitTable> {
    let bytes = hex::decode(hex_str).map_err(|e| Error::InvalidParams(format!("bad hex table: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::LengthMismatch { expected: len.div_ceil(8), got: bytes.len() });
    }
    let mut t = BitTable::from_vec(bytes);
    t.truncate(len);
    Ok(t)
}

impl OracleInstance {
    /// Each bit independently one with probability `p`.
    pub fn sample(spec: &CodeSpec, p: Bias, seed: u64, budget: &Budget) -> Result<Self> {
        let sigma = table_budget(spec, 1, budget)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..spec.n())
            .map(|_| (0..sigma).map(|_| p.sample_bit(&mut rng)).collect())
            .collect();
        Ok(OracleInstance { spec: spec.clone(), p, seed, tables, unfolded: None })
    }

    /// Uniform unfolded bits with block size `b`; the bias tables are their
    /// AND-collapse and hence `2^-b`-biased.
    pub fn sample_unfolded(spec: &CodeSpec, b: u32, seed: u64, budget: &Budget) -> Result<Self> {
        let sigma = table_budget(spec, b, budget)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables: Vec<BitTable> = (0..spec.n())
            .map(|_| (0..sigma * b as usize).map(|_| rng.random::<bool>()).collect())
            .collect();
        Self::from_unfolded(spec, seed, UnfoldedTables { block: b, tables })
    }

    /// Instance whose bias tables are the collapse of `unfolded`.
    pub fn from_unfolded(spec: &CodeSpec, seed: u64, unfolded: UnfoldedTables) -> Result<Self> {
        let p = Bias::exponent(unfolded.block)?;
        let sigma = table_budget(spec, unfolded.block, &Budget::default())?;
        if unfolded.tables.len() != spec.n() {
            return Err(Error::LengthMismatch { expected: spec.n(), got: unfolded.tables.len() });
        }
        if let Some(t) = unfolded.tables.iter().find(|t| t.len() != sigma * unfolded.block as usize) {
            return Err(Error::LengthMismatch { expected: sigma * unfolded.block as usize, got: t.len() });
        }
        let tables = (0..spec.n())
            .map(|i| (0..sigma as u64).map(|r| unfolded.collapsed_bit(i, r)).collect())
            .collect();
        Ok(OracleInstance { spec: spec.clone(), p, seed, tables, unfolded: Some(unfolded) })
    }

    pub fn from_tables(spec: &CodeSpec, p: Bias, seed: u64, tables: Vec<BitTable>) -> Result<Self> {
        let sigma = table_budget(spec, 1, &Budget::default())?;
        if tables.len() != spec.n() {
            return Err(Error::LengthMismatch { expected: spec.n(), got: tables.len() });
        }
        if let Some(t) = tables.iter().find(|t| t.len() != sigma) {
            return Err(Error::LengthMismatch { expected: sigma, got: t.len() });
        }
        Ok(OracleInstance { spec: spec.clone(), p, seed, tables, unfolded: None })
    }

    /// All tables constant `value`.
    pub fn constant(spec: &CodeSpec, value: bool) -> Result<Self> {
        let sigma = table_budget(spec, 1, &Budget::default())?;
        let p = Bias::new(value as u64, 1)?;
        let tables = vec![BitTable::repeat(value, sigma); spec.n()];
        Ok(OracleInstance { spec: spec.clone(), p, seed: 0, tables, unfolded: None })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn bias(&self) -> Bias {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.tables.len()
    }

    pub fn sigma(&self) -> u64 {
        self.tables.first().map_or(0, |t| t.len() as u64)
    }

    pub fn tables(&self) -> &[BitTable] {
        &self.tables
    }

    pub fn unfolded(&self) -> Option<&UnfoldedTables> {
        self.unfolded.as_ref()
    }

    /// `H_i(e)` for the symbol of rank `rank`.
    #[inline]
    pub fn bit(&self, i: usize, rank: u64) -> bool {
        self.tables[i][rank as usize]
    }

    /// `T_i = {e : H_i(e) = 0}` as symbol ranks.
    pub fn zero_set(&self, i: usize) -> Vec<u64> {
        self.tables[i].iter_zeros().map(|r| r as u64).collect()
    }

    /// `H(x) = (H_1(x_1), ..., H_n(x_n))` for an unfolded word.
    pub fn eval(&self, x: &[u32]) -> Vec<bool> {
        self.spec.symbol_ranks(x).iter().enumerate().map(|(i, &r)| self.bit(i, r)).collect()
    }

    /// `x ∈ C` and `H_i(x_i) = 0` for all `i`.
    pub fn verify(&self, x: &[u32]) -> bool {
        x.len() == self.spec.len()
            && self.spec.contains(x)
            && self.spec.symbol_ranks(x).iter().enumerate().all(|(i, &r)| {
                (r as usize) < self.tables[i].len() && !self.bit(i, r)
            })
    }

    /// Every solution, in canonical codeword order.
    pub fn brute_solve(&self, budget: &Budget) -> Result<Vec<Codeword>> {
        let size = self.spec.enumerable(budget)?;
        Ok((0..size)
            .into_par_iter()
            .map(|i| self.spec.codeword_at(i))
            .filter(|c| self.eval(c).iter().all(|&b| !b))
            .collect())
    }

    pub fn count_solutions(&self, budget: &Budget) -> Result<u64> {
        let size = self.spec.enumerable(budget)?;
        Ok((0..size)
            .into_par_iter()
            .filter(|&i| self.eval(&self.spec.codeword_at(i)).iter().all(|&b| !b))
            .count() as u64)
    }

    pub fn split(&self) -> Result<Split> {
        Split::new(self.n(), self.sigma())
    }

    /// Flat bit string of one party (`n |Σ| / 2` bits).
    pub fn side_bits(&self, party: Party) -> Result<BitTable> {
        let split = self.split()?;
        let mut out = BitTable::with_capacity(split.side_len());
        for i in split.coords(party) {
            out.extend_from_bitslice(&self.tables[i]);
        }
        Ok(out)
    }

    /// Tables of one party.
    pub fn side_tables(&self, party: Party) -> Result<&[BitTable]> {
        let split = self.split()?;
        Ok(&self.tables[split.coords(party)])
    }

    /// Expand every bias bit into `b` bits whose AND equals it: a one becomes
    /// the all-ones block, a zero a uniform non-all-ones block.
    pub fn expand_and_blocks(&self, b: u32) -> Result<OracleInstance> {
        let pb = self.p.require_exponent()?;
        if pb != b {
            return Err(Error::BiasNotPowerOfTwo(format!("{} with block size {b}", self.p)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ EXPAND_SALT);
        let ones = (1u64 << b) - 1;
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut out = BitTable::repeat(false, t.len() * b as usize);
                for (r, bit) in t.iter().enumerate() {
                    let v = if *bit { ones } else { rng.random_range(0..ones) };
                    out[r * b as usize..(r + 1) * b as usize].store_le(v);
                }
                out
            })
            .collect();
        Ok(OracleInstance {
            unfolded: Some(UnfoldedTables { block: b, tables }),
            ..self.clone()
        })
    }

    /// Recompute bias tables from the unfolded blocks and drop them.
    pub fn collapse_and_blocks(&self) -> Result<OracleInstance> {
        let unf = self
            .unfolded
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("instance has no unfolded tables".into()))?;
        let tables = (0..self.n())
            .map(|i| (0..self.sigma()).map(|r| unf.collapsed_bit(i, r)).collect())
            .collect();
        Ok(OracleInstance { tables, unfolded: None, ..self.clone() })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            spec: self.spec.clone(),
            p: self.p,
            seed: self.seed,
            split: self.split().ok(),
            tables: self.tables.iter().map(|t| hex::encode(t.as_raw_slice())).collect(),
            unfolded: self.unfolded.as_ref().map(|u| UnfoldedFile {
                block: u.block,
                tables: u.tables.iter().map(|t| hex::encode(t.as_raw_slice())).collect(),
            }),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(s).map_err(|e| Error::Parse { file: "<instance>".into(), line: e.line(), msg: e.to_string() })?;
        let sigma = table_budget(&file.spec, 1, &Budget::default())?;
        let tables = file.tables.iter().map(|h| decode_table(h, sigma)).collect::<Result<Vec<_>>>()?;
        let mut inst = OracleInstance::from_tables(&file.spec, file.p, file.seed, tables)?;
        if let Some(u) = file.unfolded {
            let len = sigma * u.block as usize;
            let tables = u.tables.iter().map(|h| decode_table(h, len)).collect::<Result<Vec<_>>>()?;
            let unf = UnfoldedTables { block: u.block, tables };
            let collapsed = OracleInstance::from_unfolded(&file.spec, file.seed, unf.clone())?;
            if collapsed.tables != inst.tables {
                return Err(Error::InvalidParams("unfolded tables do not collapse to the bias tables".into()));
            }
            inst.unfolded = Some(unf);
        }
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse { file: path.display().to_string(), line, msg },
            other => other,
        })
    }
}

/// `|C| (1 - p)^n`: expected number of solutions under independent bias.
pub fn expected_solution_count(spec: &CodeSpec, p: f64) -> f64 {
    spec.log2_size().exp2() * (1.0 - p).powi(spec.n() as i32)
}
