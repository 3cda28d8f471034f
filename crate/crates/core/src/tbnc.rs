//! The total problem: `t` oracle copies sharing one hash key.

use std::path::Path;

use bitvec::field::BitField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::codes::{CodeSpec, Codeword};
use crate::error::{Error, Result};
use crate::hashing::{HashFamily, HashFamilyDesc, HashKey};
use crate::instances::{OracleInstance, UnfoldedTables};
use crate::qsim::{run_alg1, GoodSet};

pub const DEFAULT_T: usize = 4;
pub const DEFAULT_RETRY_CAP: usize = 64;

#[derive(Clone, Debug)]
pub struct TbncInstance {
    family: HashFamily,
    copies: Vec<OracleInstance>,
}

#[derive(Serialize, Deserialize)]
struct TbncFile {
    t: usize,
    family: HashFamilyDesc,
    spec: CodeSpec,
    copies: Vec<serde_json::Value>,
}

impl TbncInstance {
    pub fn new(family: HashFamily, copies: Vec<OracleInstance>) -> Result<Self> {
        let first = copies.first().ok_or_else(|| Error::InvalidParams("t must be at least 1".into()))?;
        for c in &copies {
            if c.spec() != first.spec() {
                return Err(Error::InvalidParams("copies use different codes".into()));
            }
            match c.unfolded() {
                Some(u) if u.block == family.output_bits() => {}
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "copies need unfolded tables with {}-bit blocks",
                        family.output_bits()
                    )))
                }
            }
        }
        if family.n() != first.n() || family.sigma() != first.sigma() {
            return Err(Error::InvalidParams("hash family domain does not match the code".into()));
        }
        Ok(TbncInstance { family, copies })
    }

    /// `t` uniform unfolded copies; copy `i` uses seed `seed + i`.
    pub fn sample(spec: &CodeSpec, family: HashFamily, t: usize, seed: u64, budget: &Budget) -> Result<Self> {
        let b = family.output_bits();
        let copies = (0..t as u64)
            .map(|i| OracleInstance::sample_unfolded(spec, b, seed.wrapping_add(i), budget))
            .collect::<Result<Vec<_>>>()?;
        Self::new(family, copies)
    }

    /// Every unfolded bit zero.
    pub fn zero(spec: &CodeSpec, family: HashFamily, t: usize) -> Result<Self> {
        let b = family.output_bits();
        let sigma = family.sigma() as usize;
        let tables = vec![crate::instances::BitTable::repeat(false, sigma * b as usize); spec.n()];
        let copy = OracleInstance::from_unfolded(spec, 0, UnfoldedTables { block: b, tables })?;
        Self::new(family, vec![copy; t])
    }

    pub fn t(&self) -> usize {
        self.copies.len()
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn spec(&self) -> &CodeSpec {
        self.copies[0].spec()
    }

    pub fn copies(&self) -> &[OracleInstance] {
        &self.copies
    }

    /// Oracle `unf H^{(copy)} ⊕ unf h_k`, collapsed blockwise.
    pub fn shifted(&self, copy: usize, key: &[u32]) -> Result<OracleInstance> {
        let inst = &self.copies[copy];
        let unf = inst.unfolded().ok_or_else(no_unfolded)?;
        let b = unf.block as usize;
        let mut tables = unf.tables.clone();
        for (i, table) in tables.iter_mut().enumerate() {
            for rank in 0..self.family.sigma() {
                let v = unf.block_value(i, rank) ^ self.family.eval(key, rank, i)? as u64;
                table[rank as usize * b..(rank as usize + 1) * b].store_le(v);
            }
        }
        OracleInstance::from_unfolded(inst.spec(), inst.seed(), UnfoldedTables { block: unf.block, tables })
    }

    pub fn to_json(&self) -> Result<String> {
        let copies = self
            .copies
            .iter()
            .map(|c| Ok(serde_json::from_str(&c.to_json()?)?))
            .collect::<Result<Vec<serde_json::Value>>>()?;
        let file = TbncFile { t: self.t(), family: self.family.desc(), spec: self.spec().clone(), copies };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TbncFile = serde_json::from_str(s)?;
        if file.copies.len() != file.t {
            return Err(Error::LengthMismatch { expected: file.t, got: file.copies.len() });
        }
        let copies = file
            .copies
            .iter()
            .map(|v| OracleInstance::from_json(&v.to_string()))
            .collect::<Result<Vec<_>>>()?;
        if copies.iter().any(|c| c.spec() != &file.spec) {
            return Err(Error::InvalidParams("copy code differs from header".into()));
        }
        Self::new(HashFamily::from_desc(file.family)?, copies)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn no_unfolded() -> Error {
    Error::InvalidParams("copy has no unfolded tables".into())
}

/// Every `x^{(i)} ∈ C` and the XORed oracle of copy `i` vanishes on it.
pub fn tbnc_verify(tb: &TbncInstance, key: &[u32], solutions: &[Codeword]) -> Result<bool> {
    if solutions.len() != tb.t() {
        return Err(Error::LengthMismatch { expected: tb.t(), got: solutions.len() });
    }
    if key.len() != tb.family.lambda() {
        return Err(Error::LengthMismatch { expected: tb.family.lambda(), got: key.len() });
    }
    let spec = tb.spec();
    for (inst, x) in tb.copies.iter().zip(solutions) {
        if !spec.contains(x) {
            return Ok(false);
        }
        let unf = inst.unfolded().ok_or_else(no_unfolded)?;
        let ones = (1u64 << unf.block) - 1;
        for (i, rank) in spec.symbol_ranks(x).into_iter().enumerate() {
            if unf.block_value(i, rank) ^ tb.family.eval(key, rank, i)? as u64 == ones {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyChoice {
    Random,
    Fixed(HashKey),
}

#[derive(Clone, Debug)]
pub struct Alg2Config {
    pub key: KeyChoice,
    pub retry_cap: usize,
    pub good: GoodSet,
}

impl Default for Alg2Config {
    fn default() -> Self {
        Alg2Config { key: KeyChoice::Random, retry_cap: DEFAULT_RETRY_CAP, good: GoodSet::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CopyDiag {
    pub copy: usize,
    /// Measurements beyond the first, summed over coordinates.
    pub retries: usize,
    pub success_probability: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub l2_distance: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Alg2Result {
    pub key: HashKey,
    pub solutions: Vec<Codeword>,
    pub success: bool,
    pub copies: Vec<CopyDiag>,
}

fn sample_outcome<'a, R: Rng>(dist: &'a [(Vec<u32>, f64)], rng: &mut R) -> &'a [u32] {
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    let mut u = rng.random::<f64>() * total;
    for (z, p) in dist {
        if u < *p {
            return z;
        }
        u -= p;
    }
    &dist.last().expect("nonempty distribution").0
}

/// Charlie draws the key, post-selects each shifted coordinate state on a
/// zero shift register (at most `1 + retry_cap` measurements), then runs
/// the exact Algorithm 1 processing per copy and samples its output.
pub fn run_alg2(tb: &TbncInstance, config: &Alg2Config, budget: &Budget, seed: u64) -> Result<Alg2Result> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = match &config.key {
        KeyChoice::Random => tb.family.random_key(&mut rng),
        KeyChoice::Fixed(k) => {
            if k.len() != tb.family.lambda() {
                return Err(Error::LengthMismatch { expected: tb.family.lambda(), got: k.len() });
            }
            k.clone()
        }
    };
    let sigma = tb.family.sigma() as f64;
    let runs = (0..tb.t())
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let shifted = tb.shifted(c, &key)?;
            let mut retries = 0;
            for i in 0..shifted.n() {
                let p0 = shifted.zero_set(i).len() as f64 / sigma;
                let mut attempts = 0;
                while rng.random::<f64>() >= p0 {
                    if attempts == config.retry_cap {
                        return Err(Error::RetriesExhausted { copy: c, coord: i });
                    }
                    attempts += 1;
                }
                retries += attempts;
            }
            let alg1 = run_alg1(&shifted, config.good, budget)?;
            let x = sample_outcome(&alg1.distribution, &mut rng).to_vec();
            let diag = CopyDiag {
                copy: c,
                retries,
                success_probability: alg1.success_probability,
                epsilon: alg1.epsilon,
                delta: alg1.delta,
                l2_distance: alg1.l2_distance,
                bound_holds: alg1.bound_holds,
            };
            Ok((x, diag))
        })
        .collect::<Result<Vec<_>>>()?;
    let (solutions, copies): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let success = tbnc_verify(tb, &key, &solutions)?;
    Ok(Alg2Result { key, solutions, success, copies })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyScan {
    /// All `2^{rλ}` keys.
    Exhaustive,
    /// The zero key plus this many uniform keys.
    Sampled(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalityReport {
    pub t: usize,
    pub h_samples: usize,
    pub keys_per_h: usize,
    /// Samples of `H` with at least one key making every copy solvable.
    pub h_with_good_key: usize,
    pub fraction_with_good_key: f64,
    /// Fraction of scanned `(H, key, copy)` with an empty solution set.
    pub per_key_empty_rate: f64,
    /// Exact emptiness probability of one uniform copy.
    pub predicted_empty_rate: f64,
    /// Standard error of `per_key_empty_rate` under the prediction, using
    /// one independent draw per `H`.
    pub sigma: f64,
    pub zero_key_good: usize,
}

/// Emptiness probability of the solution set for a `p`-biased oracle, by
/// weighted enumeration over all bias tables (`|Σ|·n ≤ 24`).
pub fn exact_empty_probability(spec: &CodeSpec, p: f64, budget: &Budget) -> Result<f64> {
    let sigma = spec.sigma_size().unwrap_or(u64::MAX);
    let bits = sigma.saturating_mul(spec.n() as u64);
    if bits > 24 {
        return Err(Error::budget("bias tables", (bits as f64).exp2(), (1u64 << 24) as f64));
    }
    let positions: Vec<u32> = spec
        .codewords(budget)?
        .iter()
        .map(|c| {
            spec.symbol_ranks(c).iter().enumerate().fold(0u32, |m, (i, &r)| m | 1 << (i as u64 * sigma + r))
        })
        .collect();
    let total: f64 = (0..1u32 << bits)
        .into_par_iter()
        .filter(|&ones| positions.iter().all(|&m| ones & m != 0))
        .map(|ones| p.powi(ones.count_ones() as i32) * (1.0 - p).powi((bits as u32 - ones.count_ones()) as i32))
        .sum();
    Ok(total)
}

/// Samples `h_samples` uniform inputs and, per input, counts keys for which
/// every copy's shifted oracle has a solution.
pub fn totality_scan(
    spec: &CodeSpec,
    family: &HashFamily,
    t: usize,
    h_samples: usize,
    keys: KeyScan,
    seed: u64,
    budget: &Budget,
) -> Result<TotalityReport> {
    let key_list: Vec<HashKey> = match keys {
        KeyScan::Exhaustive => {
            let bits = family.key_bits() as u32;
            if bits > 24 || 1u64 << bits > budget.enumeration {
                return Err(Error::budget("hash keys", (bits as f64).exp2(), budget.enumeration as f64));
            }
            (0..1u64 << bits).map(|b| family.key_from_bits(b)).collect()
        }
        KeyScan::Sampled(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b65_7973);
            std::iter::once(family.zero_key()).chain((0..count).map(|_| family.random_key(&mut rng))).collect()
        }
    };
    let per_h = (0..h_samples as u64)
        .into_par_iter()
        .map(|h| {
            let tb = TbncInstance::sample(spec, family.clone(), t, seed.wrapping_add(h.wrapping_mul(t as u64)), budget)?;
            let mut good_keys = 0usize;
            let mut empty = 0usize;
            let mut zero_good = false;
            for (ki, key) in key_list.iter().enumerate() {
                let mut all = true;
                for c in 0..t {
                    if tb.shifted(c, key)?.count_solutions(budget)? == 0 {
                        empty += 1;
                        all = false;
                    }
                }
                if all {
                    good_keys += 1;
                    zero_good |= ki == 0;
                }
            }
            Ok((good_keys, empty, zero_good))
        })
        .collect::<Result<Vec<_>>>()?;
    let h_with_good_key = per_h.iter().filter(|r| r.0 > 0).count();
    let empty: usize = per_h.iter().map(|r| r.1).sum();
    let scanned = (h_samples * key_list.len() * t).max(1);
    let predicted = exact_empty_probability(spec, (-(family.output_bits() as f64)).exp2(), budget)?;
    Ok(TotalityReport {
        t,
        h_samples,
        keys_per_h: key_list.len(),
        h_with_good_key,
        fraction_with_good_key: h_with_good_key as f64 / h_samples.max(1) as f64,
        per_key_empty_rate: empty as f64 / scanned as f64,
        predicted_empty_rate: predicted,
        sigma: (predicted * (1.0 - predicted) / (h_samples * t).max(1) as f64).sqrt(),
        zero_key_good: per_h.iter().filter(|r| r.2).count(),
    })
}

/// `2^r · suc_single^t`, via the log form only when the direct product
/// leaves the normal range.
pub fn union_bound(r: u32, t: u64, suc_single: f64) -> f64 {
    let power = match i32::try_from(t) {
        Ok(t) => suc_single.powi(t),
        Err(_) => suc_single.powf(t as f64),
    };
    let direct = 2f64.powi(r.min(i32::MAX as u32) as i32) * power;
    if direct.is_normal() || suc_single == 0.0 {
        direct
    } else {
        union_bound_log2(r, t, suc_single).exp2()
    }
}

/// `r + t·log2(suc_single)`.
pub fn union_bound_log2(r: u32, t: u64, suc_single: f64) -> f64 {
    if t == 0 {
        return r as f64;
    }
    r as f64 + t as f64 * suc_single.log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::self_dual_8_4;

    fn family() -> HashFamily {
        HashFamily::for_spec(&self_dual_8_4(), 4).unwrap()
    }

    #[test]
    fn zero_instance_zero_key() {
        let spec = self_dual_8_4();
        let tb = TbncInstance::zero(&spec, family(), 2).unwrap();
        let key = tb.family().zero_key();
        let cws = spec.codewords(&Budget::default()).unwrap();
        assert!(tbnc_verify(&tb, &key, &[cws[3].clone(), cws[7].clone()]).unwrap());
        let mut bad = cws[3].clone();
        bad[0] ^= 1;
        assert!(!tbnc_verify(&tb, &key, &[cws[3].clone(), bad]).unwrap());
        assert!(matches!(tbnc_verify(&tb, &key, &[cws[0].clone()]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn alg2_zero_key_succeeds() {
        let spec = self_dual_8_4();
        let tb = TbncInstance::zero(&spec, family(), 3).unwrap();
        let cfg = Alg2Config { key: KeyChoice::Fixed(tb.family().zero_key()), ..Default::default() };
        let r = run_alg2(&tb, &cfg, &Budget::default(), 5).unwrap();
        assert!(r.success);
        assert!(r.copies.iter().all(|c| (c.success_probability - 1.0).abs() < 1e-9 && c.retries == 0));
    }

    #[test]
    fn alg2_deterministic() {
        let spec = self_dual_8_4();
        let b = Budget::default();
        let tb = TbncInstance::sample(&spec, family(), 2, 11, &b).unwrap();
        let a = run_alg2(&tb, &Alg2Config::default(), &b, 3);
        let c = run_alg2(&tb, &Alg2Config::default(), &b, 3);
        match (a, c) {
            (Ok(a), Ok(c)) => assert_eq!((a.key, a.solutions), (c.key, c.solutions)),
            (Err(a), Err(c)) => assert_eq!(a, c),
            _ => panic!("nondeterministic"),
        }
    }

    #[test]
    fn retry_cap_zero() {
        let spec = self_dual_8_4();
        let b = Budget::default();
        // find a seed whose first measurement on some coordinate is nonzero
        let found = (0..200).any(|s| {
            let tb = TbncInstance::sample(&spec, family(), 1, s, &b).unwrap();
            let cfg = Alg2Config { retry_cap: 0, ..Default::default() };
            matches!(run_alg2(&tb, &cfg, &b, s), Err(Error::RetriesExhausted { .. }))
        });
        assert!(found);
    }

    #[test]
    fn json_round_trip() {
        let spec = self_dual_8_4();
        let tb = TbncInstance::sample(&spec, family(), 2, 1, &Budget::default()).unwrap();
        let back = TbncInstance::from_json(&tb.to_json().unwrap()).unwrap();
        assert_eq!(back.copies(), tb.copies());
        assert_eq!(back.family().desc(), tb.family().desc());
    }

    #[test]
    fn unfolded_xor_then_collapse() {
        let spec = self_dual_8_4();
        let tb = TbncInstance::sample(&spec, family(), 1, 9, &Budget::default()).unwrap();
        let key = vec![5, 17, 40, 63];
        let shifted = tb.shifted(0, &key).unwrap();
        let unf = tb.copies()[0].unfolded().unwrap();
        for i in 0..4 {
            for rank in 0..4 {
                let x = unf.block_value(i, rank) ^ tb.family().eval(&key, rank, i).unwrap() as u64;
                assert_eq!(shifted.bit(i, rank), x == 63);
            }
        }
        // XOR of the collapsed bits is a different function of the blocks
        let mut differ = 0;
        for h in 0u64..64 {
            for g in 0u64..64 {
                if ((h ^ g) == 63) != ((h == 63) ^ (g == 63)) {
                    differ += 1;
                }
            }
        }
        assert!(differ > 0);
    }

    #[test]
    fn union_bound_values() {
        assert_eq!(union_bound(10, 5, 1.0), 1024.0);
        assert_eq!(union_bound(10, 0, 0.3), 1024.0);
        assert_eq!(union_bound_log2(10, 100, 0.5), -90.0);
        assert_eq!(union_bound(10, 100, 0.5), (-90f64).exp2());
        assert_eq!(union_bound(6, 3, 0.75), 64.0 * 0.75f64.powi(3));
        assert_eq!(union_bound(4, 5000, 0.5), 0.0);
    }

    #[test]
    fn empty_probability_extremes() {
        let spec = self_dual_8_4();
        let b = Budget::default();
        assert_eq!(exact_empty_probability(&spec, 0.0, &b).unwrap(), 0.0);
        assert!((exact_empty_probability(&spec, 1.0, &b).unwrap() - 1.0).abs() < 1e-12);
    }
}
