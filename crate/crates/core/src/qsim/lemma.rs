use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{prepare_phi, prepare_psi, tensor_all, word_register, PairState, Qft, Register, State};
use crate::budget::Budget;
use crate::codes::{DualDecoder, DEFAULT_EPSILON};
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::instances::{OracleInstance, Party};

/// Which pairs `(x, e)` count as GOOD.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoodSet {
    /// `x ∈ C⊥` and `e` has at most `(p + ε) n` nonzero symbols.
    #[default]
    SymbolWeight,
    /// Every pair the decoder handles: `F(x + e) = x`.
    Maximal,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma51Result {
    pub epsilon: f64,
    pub delta: f64,
    pub l2_distance: f64,
    pub tv_distance: f64,
    pub bound: f64,
    pub bound_holds: bool,
    pub good_pairs_checked: u64,
    #[serde(skip)]
    pub actual: PairState,
    #[serde(skip)]
    pub ideal: PairState,
}

fn symbol_weight_of(reg: Register, idx: u64, m: usize) -> usize {
    let word = reg.word_of(idx);
    word.chunks(m).filter(|s| s.iter().any(|&d| d != 0)).count()
}

/// `|x⟩|e⟩ -> |x⟩|x+e⟩ -> |x - F(x+e)⟩|x+e⟩` on every basis pair.
pub fn apply_add_decode(joint: &PairState, decode: impl Fn(&[u32]) -> Vec<u32>) -> Result<PairState> {
    let reg = joint.register();
    let mut out = BTreeMap::new();
    for (&(x, e), &a) in joint.amplitudes() {
        let z = x ^ e;
        let f = reg.index_of(&decode(&reg.word_of(z)));
        if out.insert((x ^ f, z), a).is_some() {
            return Err(Error::InvalidParams("add-decode map is not injective".into()));
        }
    }
    Ok(PairState::from_map(reg, out))
}

/// Runs the full Lemma 5.1 pipeline for `|ψ⟩` over `spec` and
/// `|φ⟩ = ⊗ phis`, decoding with `decoder`.
pub fn lemma51_pipeline(
    spec: &CodeSpec,
    phis: &[State],
    decoder: &DualDecoder,
    good: GoodSet,
    budget: &Budget,
) -> Result<Lemma51Result> {
    if phis.len() != spec.n() {
        return Err(Error::LengthMismatch { expected: spec.n(), got: phis.len() });
    }
    let reg = word_register(spec)?;
    let qft = Qft::new(spec.field())?;
    let dual = decoder.dual();
    let decode = |w: &[u32]| decoder.decode_or_zero(w);

    let psi = prepare_psi(spec, budget)?;
    let phi = tensor_all(phis, budget)?;
    let vhat = qft.apply(&psi, budget)?;
    let phi_hats = phis.iter().map(|s| qft.apply(s, budget)).collect::<Result<Vec<_>>>()?;
    let what = tensor_all(&phi_hats, budget)?;

    let pairs = vhat.support_len() as u128 * what.support_len() as u128;
    if pairs > budget.amplitudes as u128 {
        return Err(Error::budget("joint amplitudes", pairs as f64, budget.amplitudes as f64));
    }

    let params = decoder.params();
    let max_weight = ((params.p + params.epsilon) * spec.n() as f64 + 1e-9).floor() as usize;
    let is_good = |x: u64, e: u64| match good {
        GoodSet::SymbolWeight => {
            symbol_weight_of(reg, e, spec.m()) <= max_weight && dual.contains(&reg.word_of(x))
        }
        GoodSet::Maximal => reg.index_of(&decode(&reg.word_of(x ^ e))) == x,
    };

    let good_pairs_checked = check_good_soundness(spec, reg, dual, &decode, max_weight, good, budget)?;

    let mut epsilon = 0.0;
    let mut bad_sums: BTreeMap<u64, Complex64> = BTreeMap::new();
    let mut joint = BTreeMap::new();
    for (&x, &vx) in vhat.amplitudes() {
        for (&e, &we) in what.amplitudes() {
            let a = vx * we;
            joint.insert((x, e), a);
            if !is_good(x, e) {
                epsilon += a.norm_sqr();
                *bad_sums.entry(x ^ e).or_default() += a;
            } else if good == GoodSet::SymbolWeight && reg.index_of(&decode(&reg.word_of(x ^ e))) != x {
                return Err(Error::GoodSetUnsound);
            }
        }
    }
    let delta = bad_sums.values().map(|s| s.norm_sqr()).sum();

    let permuted = apply_add_decode(&PairState::from_map(reg, joint), decode)?;
    let actual = qft.apply_second(&permuted, budget)?;

    let scale = (reg.dim() as f64).sqrt();
    let ideal_amps: BTreeMap<(u64, u64), Complex64> = psi
        .amplitudes()
        .iter()
        .filter_map(|(&z, &v)| {
            let w = phi.amp(z);
            (w.norm_sqr() > 0.0).then(|| ((0, z), v * w * scale))
        })
        .collect();
    let ideal = PairState::from_map(reg, ideal_amps);

    let l2_distance = actual.distance(&ideal);
    let tv_distance = tv(&actual.second_marginal(), &ideal.second_marginal());
    let bound = f64::sqrt(epsilon) + f64::sqrt(delta);
    Ok(Lemma51Result {
        epsilon,
        delta,
        l2_distance,
        tv_distance,
        bound,
        bound_holds: l2_distance <= bound + 1e-9,
        good_pairs_checked,
        actual,
        ideal,
    })
}

/// Exhaustive soundness check of the GOOD set where `C⊥ × Σ^n` fits the
/// enumeration budget; returns the number of pairs checked.
fn check_good_soundness(
    spec: &CodeSpec,
    reg: Register,
    dual: &CodeSpec,
    decode: &impl Fn(&[u32]) -> Vec<u32>,
    max_weight: usize,
    good: GoodSet,
    budget: &Budget,
) -> Result<u64> {
    if good == GoodSet::Maximal {
        return Ok(0);
    }
    let Ok(dual_size) = dual.enumerable(budget) else { return Ok(0) };
    if (dual_size as u128) * (reg.dim() as u128) > budget.enumeration as u128 {
        return Ok(0);
    }
    let duals: Vec<u64> = (0..dual_size).map(|i| reg.index_of(&dual.codeword_at(i))).collect();
    let mut checked = 0;
    for e in (0..reg.dim()).filter(|&e| symbol_weight_of(reg, e, spec.m()) <= max_weight) {
        for &x in &duals {
            if reg.index_of(&decode(&reg.word_of(x ^ e))) != x {
                return Err(Error::GoodSetUnsound);
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn tv(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    let zp: f64 = p.values().sum();
    let zq: f64 = q.values().sum();
    if zp == 0.0 || zq == 0.0 {
        return if zp == zq { 0.0 } else { 1.0 };
    }
    let mut keys: Vec<u64> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) / zp - q.get(k).unwrap_or(&0.0) / zq).abs())
        .sum::<f64>()
}

/// Decoder used by the protocol: dual decoding at radius `(p + ε) N`.
fn protocol_decoder(spec: &CodeSpec, p: f64, budget: &Budget) -> Result<DualDecoder> {
    DualDecoder::new(spec, p, DEFAULT_EPSILON, budget)
}

/// Lemma 5.1 for a whole instance, without the bipartite split.
pub fn lemma51_for_instance(inst: &OracleInstance, good: GoodSet, budget: &Budget) -> Result<Lemma51Result> {
    let phis = (0..inst.n()).map(|i| prepare_phi(inst, i)).collect::<Result<Vec<_>>>()?;
    let decoder = protocol_decoder(inst.spec(), inst.bias().value(), budget)?;
    lemma51_pipeline(inst.spec(), &phis, &decoder, good, budget)
}

fn party_stage(inst: &OracleInstance, party: Party) -> Result<Vec<State>> {
    inst.split()?.coords(party).map(|i| prepare_phi(inst, i)).collect()
}

/// Alice's message: `|φ_1⟩, ..., |φ_{n/2}⟩`, prepared from her tables only.
pub fn alice_stage(inst: &OracleInstance) -> Result<Vec<State>> {
    party_stage(inst, Party::Alice)
}

/// Bob's message: `|φ_{n/2+1}⟩, ..., |φ_n⟩`.
pub fn bob_stage(inst: &OracleInstance) -> Result<Vec<State>> {
    party_stage(inst, Party::Bob)
}

#[derive(Clone, Debug)]
pub struct CharlieOutput {
    pub lemma: Lemma51Result,
    /// Distribution of the measured second register.
    pub measurement: BTreeMap<u64, f64>,
}

/// Charlie sees only the public code, the bias, and the two messages.
pub fn charlie_stage(
    spec: &CodeSpec,
    p: f64,
    alice: Vec<State>,
    bob: Vec<State>,
    good: GoodSet,
    budget: &Budget,
) -> Result<CharlieOutput> {
    let phis: Vec<State> = alice.into_iter().chain(bob).collect();
    let decoder = protocol_decoder(spec, p, budget)?;
    let lemma = lemma51_pipeline(spec, &phis, &decoder, good, budget)?;
    let measurement = lemma.actual.second_marginal();
    Ok(CharlieOutput { lemma, measurement })
}

#[derive(Clone, Debug, Serialize)]
pub struct Alg1Result {
    pub success_probability: f64,
    /// `(z, Pr[z])` in index order; `z` is the unfolded word.
    pub distribution: Vec<(Vec<u32>, f64)>,
    pub epsilon: f64,
    pub delta: f64,
    pub l2_distance: f64,
    pub tv_distance: f64,
    pub bound_holds: bool,
    /// Every `z` with positive ideal mass is a solution.
    pub ideal_support_ok: bool,
}

/// Exact run of the quantum SMP protocol on `inst`.
pub fn run_alg1(inst: &OracleInstance, good: GoodSet, budget: &Budget) -> Result<Alg1Result> {
    let alice = alice_stage(inst)?;
    let bob = bob_stage(inst)?;
    let out = charlie_stage(inst.spec(), inst.bias().value(), alice, bob, good, budget)?;
    let reg = out.lemma.actual.register();
    let mut success_probability = 0.0;
    let mut distribution = Vec::with_capacity(out.measurement.len());
    for (&z, &pz) in &out.measurement {
        let word = reg.word_of(z);
        if inst.verify(&word) {
            success_probability += pz;
        }
        distribution.push((word, pz));
    }
    let ideal_support_ok = out.lemma.ideal.amplitudes().keys().all(|&(_, z)| inst.verify(&reg.word_of(z)));
    Ok(Alg1Result {
        success_probability,
        distribution,
        epsilon: out.lemma.epsilon,
        delta: out.lemma.delta,
        l2_distance: out.lemma.l2_distance,
        tv_distance: out.lemma.tv_distance,
        bound_holds: out.lemma.bound_holds,
        ideal_support_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Bias;
    use crate::toy::self_dual_8_4;

    #[test]
    fn clean_oracle_is_exact() {
        let c = self_dual_8_4();
        let b = Budget::default();
        let inst = OracleInstance::constant(&c, false).unwrap();
        let r = run_alg1(&inst, GoodSet::default(), &b).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-9);
        assert_eq!((r.epsilon, r.delta), (0.0, 0.0));
        assert!(r.l2_distance < 1e-9);
        assert_eq!(r.distribution.len(), 16);
        for (_, pz) in &r.distribution {
            assert!((pz - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirty_oracle_fails_trial() {
        let c = self_dual_8_4();
        let inst = OracleInstance::constant(&c, true).unwrap();
        assert!(matches!(run_alg1(&inst, GoodSet::default(), &Budget::default()), Err(Error::EmptySupport(0))));
    }

    #[test]
    fn add_decode_identity_gives_minus_e() {
        let reg = Register::new(4, 2).unwrap();
        let mut amps = BTreeMap::new();
        for x in 0..16u64 {
            for e in 0..16u64 {
                amps.insert((x, e), Complex64::new(0.0625, 0.0));
            }
        }
        let joint = PairState::from_map(reg, amps);
        let out = apply_add_decode(&joint, |z| z.to_vec()).unwrap();
        assert_eq!(out.support_len(), 256);
        for &(a, z) in out.amplitudes().keys() {
            // a = x - (x + e) = e in characteristic 2, and z = x + e
            assert!(joint.amplitudes().contains_key(&(z ^ a, a)));
        }
        assert!((out.norm_sqr() - joint.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn biased_bound_holds() {
        let c = self_dual_8_4();
        let b = Budget::default();
        for seed in 0..10 {
            let inst = OracleInstance::sample(&c, Bias::new(1, 16).unwrap(), seed, &b).unwrap();
            match lemma51_for_instance(&inst, GoodSet::default(), &b) {
                Ok(r) => {
                    assert!(r.bound_holds, "seed {seed}: {} > {}", r.l2_distance, r.bound);
                    assert!(r.good_pairs_checked > 0);
                }
                Err(Error::EmptySupport(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn maximal_good_set_also_bounded() {
        let c = self_dual_8_4();
        let b = Budget::default();
        let inst = OracleInstance::sample(&c, Bias::new(1, 16).unwrap(), 5, &b).unwrap();
        let r = lemma51_for_instance(&inst, GoodSet::Maximal, &b).unwrap();
        let d = lemma51_for_instance(&inst, GoodSet::SymbolWeight, &b).unwrap();
        assert!(r.bound_holds);
        assert!(r.epsilon <= d.epsilon + 1e-12);
    }
}
