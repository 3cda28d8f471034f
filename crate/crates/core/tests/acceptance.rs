//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nullcode::codes::{
    berlekamp_welch, hamming_distance, hamming_weight, list_decode_exhaustive, paper_preset, CodeSpec, Codeword,
    DualDecoder,
};
use nullcode::gf::FieldCtx;
use nullcode::hashing::{attack_solve, independence_check, HashFamily};
use nullcode::instances::{Bias, OracleInstance};
use nullcode::proto::{
    all_ones, check_partition, check_subcube_like, cleanup, danger_track, density_restoring_partition,
    expected_codimension, full_set, min_entropy, random_bnc_tree, random_tree, transform_alg3, BncVerifier, Label,
    SplitVerifier, Tree, ZeroPair,
};
use nullcode::qsim::{
    claim66_exact, claim66_monte_carlo, lemma51_for_instance, prepare_psi, qft_matrix, run_alg1, word_register,
    GoodSet, Qft,
};
use nullcode::tbnc::{
    run_alg2, tbnc_verify, totality_scan, union_bound, Alg2Config, KeyChoice, KeyScan, TbncInstance, DEFAULT_T,
};
use nullcode::{toy, Budget, Error};

type Outcome = Result<(bool, String), String>;

fn lib<T>(r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_word(spec: &CodeSpec, rng: &mut ChaCha8Rng) -> Result<Codeword, String> {
    let q = spec.field().order();
    let msg: Vec<u32> = (0..spec.message_len()).map(|_| rng.random_range(0..q) as u32).collect();
    lib(spec.encode(&msg))
}

fn random_error(len: usize, q: u64, weight: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut e = vec![0u32; len];
    for pos in sample(rng, len, weight) {
        e[pos] = rng.random_range(1..q) as u32;
    }
    e
}

fn c1_field() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for s in [2u32, 4] {
        let f = lib(FieldCtx::with_default_modulus(s))?;
        let q = f.order() as u32;
        let mut fails = 0usize;
        for a in 0..q {
            fails += (f.add(a, 0) != a) as usize;
            fails += (f.mul(a, 1) != a) as usize;
            fails += (f.add(a, a) != 0) as usize;
            fails += (f.trace(a) > 1 || f.trace(a) != f.trace_direct(a)) as usize;
            if a != 0 {
                fails += (lib(f.inv(a)).map(|i| f.mul(a, i)) != Ok(1)) as usize;
            }
            for b in 0..q {
                fails += (!f.contains(f.add(a, b)) || !f.contains(f.mul(a, b))) as usize;
                fails += (f.add(a, b) != f.add(b, a)) as usize;
                fails += (f.mul(a, b) != f.mul(b, a)) as usize;
                fails += (f.trace(f.add(a, b)) != f.trace(a) ^ f.trace(b)) as usize;
                for c in 0..q {
                    fails += (f.add(f.add(a, b), c) != f.add(a, f.add(b, c))) as usize;
                    fails += (f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c))) as usize;
                    fails += (f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c))) as usize;
                }
            }
        }
        ok &= fails == 0;
        details.push(format!("q={q} violations={fails}"));
    }
    Ok((ok, details.join(", ")))
}

fn c2_dual() -> Outcome {
    let budget = Budget::default();
    let spec = lib(paper_preset(2))?;
    let words = lib(spec.codewords(&budget))?;
    let dual = lib(spec.dual())?;
    let basis = dual.genmat().to_rows();
    let orthogonal = words.par_iter().all(|c| basis.iter().all(|b| spec.inner(c, b) == 0));
    let involution = lib(dual.dual())?.same_subspace(&spec);
    let dims = spec.dimension() + dual.dimension() == spec.len();
    let f = spec.field();
    let folded_basis: Vec<Vec<Vec<u32>>> = basis.iter().map(|b| lib(spec.fold(b))).collect::<Result<_, _>>()?;
    let folded_orthogonal = words.par_iter().all(|c| {
        let fc = spec.fold(c).expect("fold");
        folded_basis.iter().all(|fb| {
            fc.iter().zip(fb).fold(0, |acc, (x, y)| f.add(acc, x.iter().zip(y).fold(0, |s, (&a, &b)| f.add(s, f.mul(a, b)))))
                == 0
        })
    });
    let multipliers = lib(spec.dual_multipliers_nullspace())? == spec.dual_multipliers_closed_form();
    let same_fold = dual.m() == spec.m() && dual.n() == spec.n();
    let ok = words.len() == 256 && orthogonal && involution && dims && folded_orthogonal && multipliers && same_fold;
    Ok((
        ok,
        format!(
            "codewords={} orthogonal={orthogonal} dual_dual={involution} dims={dims} folded={folded_orthogonal} multipliers={multipliers}",
            words.len()
        ),
    ))
}

fn bw_agrees(s: u32, k: usize) -> Result<(bool, usize), String> {
    let budget = Budget::default();
    let f = lib(FieldCtx::with_default_modulus(s))?;
    let gamma = f.find_generator();
    let spec = lib(CodeSpec::grs_folded(f, gamma, k, 1, None))?;
    let radius = lib(spec.unique_radius(&budget))?;
    let len = spec.len() as u32;
    let total = 1u64 << (s * len);
    let agree = (0..total).into_par_iter().all(|idx| {
        let z: Vec<u32> = (0..len).map(|j| ((idx >> (s * j)) & ((1 << s) - 1)) as u32).collect();
        let bw = berlekamp_welch(&spec, &z, radius).expect("bw");
        let ex = list_decode_exhaustive(&spec, &z, radius, &budget).expect("exhaustive");
        ex.len() <= 1 && bw.as_ref() == ex.first()
    });
    Ok((agree, total as usize))
}

fn c3_decoder() -> Outcome {
    let budget = Budget::default();
    let spec = lib(paper_preset(3))?;
    let p = lib(Bias::exponent(6))?.value();
    let dec = lib(DualDecoder::new(&spec, p, 0.01, &budget))?;
    let radius = dec.params().radius_unfolded;
    let q = spec.field().order();
    let hits = (0..1000u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_word(dec.dual(), &mut rng).expect("dual word");
            let w = rng.random_range(0..=radius);
            let e = random_error(x.len(), q, w, &mut rng);
            let z: Vec<u32> = x.iter().zip(&e).map(|(a, b)| a ^ b).collect();
            dec.decode(&z).as_ref() == Some(&x)
        })
        .count();
    let (bw4, n4) = bw_agrees(2, 0)?;
    let (bw8, n8) = bw_agrees(3, 1)?;
    let ok = hits == 1000 && bw4 && bw8;
    Ok((
        ok,
        format!("radius={radius} decoded={hits}/1000 bw_vs_exhaustive: GF(4) {n4} inputs {bw4}, GF(8) {n8} inputs {bw8}"),
    ))
}

fn c4_good_error() -> Outcome {
    let spec = lib(paper_preset(3))?;
    let p = lib(Bias::exponent(6))?.value();
    let dual = lib(spec.dual())?;
    let big_n = spec.len();
    let bound = (p + 0.01) * big_n as f64;
    let max_w = bound.floor() as usize;
    let q = spec.field().order();
    let good = (0..1000u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
            let w = rng.random_range(0..=max_w);
            let e = random_error(big_n, q, w, &mut rng);
            let y = loop {
                let y = random_word(&dual, &mut rng).expect("dual word");
                if hamming_weight(&y) > 0 {
                    break y;
                }
            };
            hamming_distance(&e, &y) as f64 > bound
        })
        .count();
    Ok((good == 1000, format!("(p+eps)N={bound:.3} good={good}/1000")))
}

fn c5_qft() -> Outcome {
    let budget = Budget::default();
    let mut worst = 0.0f64;
    for s in [1u32, 2, 4] {
        let m = lib(qft_matrix(&lib(FieldCtx::with_default_modulus(s))?))?;
        let q = m.len();
        for i in 0..q {
            for j in 0..q {
                let dot: num_complex::Complex64 = (0..q).map(|k| m[i][k] * m[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
    }
    let spec = toy::self_dual_8_4();
    let psi = lib(prepare_psi(&spec, &budget))?;
    let out = lib(lib(Qft::new(spec.field()))?.apply(&psi, &budget))?;
    let reg = lib(word_register(&spec))?;
    let dual = lib(spec.dual())?;
    let found: BTreeSet<u64> = out.amplitudes().keys().copied().collect();
    let expected: BTreeSet<u64> = lib(dual.codewords(&budget))?.iter().map(|w| reg.index_of(w)).collect();
    let mag = 1.0 / (expected.len() as f64).sqrt();
    let uniform = out.amplitudes().values().all(|a| (a.norm() - mag).abs() <= 1e-10);
    let exact = found == expected;
    Ok((worst <= 1e-12 && exact && uniform, format!("max_unitarity_err={worst:.2e} support_is_dual={exact} uniform={uniform}")))
}

fn c6_lemma() -> Outcome {
    let budget = Budget::default();
    let spec = toy::self_dual_8_4();
    let p = lib(Bias::new(1, 16))?;
    let runs: Vec<Result<(bool, f64), String>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let inst = lib(OracleInstance::sample(&spec, p, seed, &budget))?;
            let r = lib(lemma51_for_instance(&inst, GoodSet::default(), &budget))?;
            let bound = r.epsilon.sqrt() + r.delta.sqrt();
            Ok((r.l2_distance <= bound + 1e-9, bound - r.l2_distance))
        })
        .collect();
    let runs: Vec<(bool, f64)> = runs.into_iter().collect::<Result<_, _>>()?;
    let held = runs.iter().filter(|r| r.0).count();
    let slack = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok((held == 100, format!("bound held {held}/100, min slack {slack:.3e}")))
}

fn c7_alg1() -> Outcome {
    let budget = Budget::default();
    let spec = toy::self_dual_8_4();
    let zero = lib(run_alg1(&lib(OracleInstance::constant(&spec, false))?, GoodSet::default(), &budget))?;
    let zero_ok = (zero.success_probability - 1.0).abs() <= 1e-9;
    let p = lib(Bias::new(1, 16))?;
    let runs: Vec<Result<(f64, f64, bool), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let inst = lib(OracleInstance::sample(&spec, p, seed, &budget))?;
            let r = lib(run_alg1(&inst, GoodSet::default(), &budget))?;
            let independent: f64 = r
                .distribution
                .iter()
                .filter(|(w, _)| {
                    spec.contains(w) && spec.symbol_ranks(w).iter().enumerate().all(|(i, &rank)| !inst.bit(i, rank))
                })
                .map(|(_, pz)| pz)
                .sum();
            let consistent = (independent - r.success_probability).abs() <= 1e-12 && r.ideal_support_ok;
            Ok((r.success_probability, r.epsilon.sqrt() + r.delta.sqrt(), consistent))
        })
        .collect();
    let runs: Vec<(f64, f64, bool)> = runs.into_iter().collect::<Result<_, _>>()?;
    let n = runs.len() as f64;
    let mean_success = runs.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_bound = runs.iter().map(|r| r.1).sum::<f64>() / n;
    let verified = runs.iter().all(|r| r.2);
    let ok = zero_ok && mean_success >= 1.0 - mean_bound - 1e-6 && verified;
    Ok((
        ok,
        format!(
            "zero oracle success={:.9}, mean success={mean_success:.6} >= {:.6}, solutions verified={verified}",
            zero.success_probability,
            1.0 - mean_bound
        ),
    ))
}

fn c8_claim66() -> Outcome {
    let budget = Budget::default();
    let exact = lib(claim66_exact(&lib(FieldCtx::with_default_modulus(2))?, 4, 0.25, &budget))?;
    let exact_err = (exact.mean_w0_sq - 0.75).abs();
    let mc = lib(claim66_monte_carlo(&lib(FieldCtx::with_default_modulus(3))?, 8, 0.125, 200_000, 7))?;
    let mc_err = (mc.mean_w0_sq - 0.875).abs();
    let ok = exact_err <= 1e-10 && mc_err <= 3.0 * mc.se_w0_sq && mc.nonzero_means_consistent;
    Ok((
        ok,
        format!(
            "exact={:.10} mc={:.5} (|err|={mc_err:.2e}, 3se={:.2e}) nonzero pairwise max z={:.2}",
            exact.mean_w0_sq,
            mc.mean_w0_sq,
            3.0 * mc.se_w0_sq,
            mc.max_pairwise_z
        ),
    ))
}

fn c9_drp() -> Outcome {
    let bits = 12u32;
    let gamma = 0.8;
    let free = all_ones(bits);
    let runs: Vec<Result<(bool, f64, f64), String>> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let density = rng.random_range(0.02..0.98);
            let mut set: Vec<u32> = full_set(bits).into_iter().filter(|_| rng.random_bool(density)).collect();
            if set.is_empty() {
                set.push(0);
            }
            let parts = lib(density_restoring_partition(&set, free, gamma))?;
            let ok = lib(check_partition(&set, &parts, free, gamma))?;
            let deficiency = bits as f64 - lib(min_entropy(&set, free))?;
            Ok((ok, expected_codimension(&parts), deficiency))
        })
        .collect();
    let runs: Vec<(bool, f64, f64)> = runs.into_iter().collect::<Result<_, _>>()?;
    let good = runs.iter().filter(|r| r.0).count();
    let gap = runs.iter().map(|r| r.1 - r.2).fold(f64::NEG_INFINITY, f64::max);
    let mean_codim = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
    let mean_def = runs.iter().map(|r| r.2).sum::<f64>() / runs.len() as f64;
    Ok((
        good == 500,
        format!("valid partitions {good}/500, mean codim={mean_codim:.3}, mean N-Hinf={mean_def:.3}, max gap={gap:.3}"),
    ))
}

fn same_outputs(a: &Tree, b: &Tree, pairs: usize, seed: u64) -> bool {
    let n = a.n_bits;
    if 2 * n <= 12 {
        (0..1u32 << n).into_par_iter().all(|x| (0..1u32 << n).all(|y| a.run(x, y).label == b.run(x, y).label))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<(u32, u32)> =
            (0..pairs).map(|_| (rng.random_range(0..1u32 << n), rng.random_range(0..1u32 << n))).collect();
        inputs.par_iter().all(|&(x, y)| a.run(x, y).label == b.run(x, y).label)
    }
}

fn c10_transform() -> Outcome {
    let gamma = 0.8;
    let mut lines = Vec::new();
    let mut ok = true;
    for (bits, trees, pairs) in [(10u32, 200u64, 100_000usize), (6, 200, 0)] {
        let runs: Vec<Result<(bool, bool, bool, f64), String>> = (0..trees)
            .into_par_iter()
            .map(|seed| {
                let t = lib(random_tree(bits, 6, 4, seed))?;
                let (u, stats) = lib(transform_alg3(&t, gamma))?;
                let sub = lib(check_subcube_like(&u, gamma))?;
                let equal = same_outputs(&t, &u, pairs, seed);
                let ratio = u.entropy_stats().entropy / t.cost().max(1) as f64;
                Ok((sub.failures == 0, equal, stats.huffman_ok, ratio))
            })
            .collect();
        let runs: Vec<(bool, bool, bool, f64)> = runs.into_iter().collect::<Result<_, _>>()?;
        let sub = runs.iter().filter(|r| r.0).count();
        let eq = runs.iter().filter(|r| r.1).count();
        let huff = runs.iter().filter(|r| r.2).count();
        let c = runs.iter().map(|r| r.3).fold(0.0, f64::max);
        ok &= sub == runs.len() && eq == runs.len() && huff == runs.len();
        lines.push(format!(
            "N={bits}: subcube-like {sub}/{trees}, outputs equal {eq}/{trees}, huffman {huff}/{trees}, c={c:.3}"
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn c11_cleanup() -> Outcome {
    let bits = 6u32;
    let z = ZeroPair { n_bits: bits };
    let runs: Vec<Result<(usize, bool), String>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut t = lib(random_tree(bits, 6, 1, seed))?;
            t.label_best(&z, &z.labels());
            let (u, _) = lib(transform_alg3(&t, 0.8))?;
            let err = u.error_probability(&z);
            let (c, stats) = lib(cleanup(&u, err.max(1e-9), &z))?;
            let wrong = (0..1u32 << bits)
                .flat_map(|x| (0..1u32 << bits).map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    let l = c.run(x, y).label;
                    l != Label::Bottom && !z.valid(x, y, l)
                })
                .count();
            Ok((wrong, stats.bottom_probability <= 2.0 * err.max(1e-9) + 1e-12))
        })
        .collect();
    let runs: Vec<(usize, bool)> = runs.into_iter().collect::<Result<_, _>>()?;
    let wrong: usize = runs.iter().map(|r| r.0).sum();
    let bounded = runs.iter().filter(|r| r.1).count();
    Ok((wrong == 0 && bounded == 100, format!("wrong non-bottom outputs={wrong}, bottom <= 2eps in {bounded}/100")))
}

fn c12_danger() -> Outcome {
    let budget = Budget::default();
    let spec = toy::self_dual_8_4();
    let v = lib(BncVerifier::new(&spec, &budget))?;
    let bits = v.n_bits();
    let pairs: Vec<(u32, u32)> = (0..1u32 << bits).flat_map(|x| (0..1u32 << bits).map(move |y| (x, y))).collect();
    let trees = 200u64;
    let runs: Vec<Result<(bool, bool, usize), String>> = (0..trees)
        .into_par_iter()
        .map(|seed| {
            let t = lib(random_bnc_tree(&v, 6, seed))?;
            let r = lib(danger_track(&t, &spec, &v, &pairs, &budget))?;
            Ok((r.monotone, r.lr_consistent, r.runs))
        })
        .collect();
    let runs: Vec<(bool, bool, usize)> = runs.into_iter().collect::<Result<_, _>>()?;
    let mono = runs.iter().filter(|r| r.0).count();
    let lr = runs.iter().filter(|r| r.1).count();
    let total: usize = runs.iter().map(|r| r.2).sum();
    Ok((
        mono == runs.len() && lr == runs.len(),
        format!("{trees} trees, {total} runs: monotone {mono}/{trees}, list-recovery recount {lr}/{trees}"),
    ))
}

fn c13_hashing() -> Outcome {
    let budget = Budget::default();
    let fam = lib(HashFamily::new(4, 2, 4, 4))?;
    let points: Vec<(u64, usize)> = (0..4u64).flat_map(|r| (0..4usize).map(move |i| (r, i))).collect();
    let mut pairs_ok = 0usize;
    let mut pairs = 0usize;
    let mut keys = 0u64;
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let rep = lib(independence_check(&fam, &[points[a], points[b]], &budget))?;
            keys = rep.keys;
            pairs += 1;
            pairs_ok += rep.uniform as usize;
        }
    }
    let spec = toy::self_dual_8_4();
    let afam = lib(HashFamily::for_spec(&spec, spec.n() * spec.n()))?;
    let solved: Vec<Result<bool, String>> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let inst = lib(OracleInstance::sample_unfolded(&spec, afam.output_bits(), seed, &budget))?;
            match lib(attack_solve(&afam, &inst))? {
                Some(a) => {
                    let tb = lib(TbncInstance::new(afam.clone(), vec![inst]))?;
                    lib(tbnc_verify(&tb, &a.key, std::slice::from_ref(&a.codeword)))
                }
                None => Ok(false),
            }
        })
        .collect();
    let solved = solved.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().filter(|&b| b).count();
    Ok((
        pairs_ok == pairs && keys == 256 && solved == 100,
        format!("pairwise uniform {pairs_ok}/{pairs} point pairs over {keys} keys, attack verified {solved}/100"),
    ))
}

fn c14_tbnc() -> Outcome {
    let budget = Budget::default();
    let spec = toy::self_dual_8_4();
    let fam = lib(HashFamily::for_spec(&spec, 2))?;
    let tb = lib(TbncInstance::zero(&spec, fam.clone(), DEFAULT_T))?;
    let cfg = Alg2Config { key: KeyChoice::Fixed(fam.zero_key()), ..Alg2Config::default() };
    let r = lib(run_alg2(&tb, &cfg, &budget, 0))?;
    let zero_ok = r.success
        && lib(tbnc_verify(&tb, &r.key, &r.solutions))?
        && r.copies.iter().all(|c| (c.success_probability - 1.0).abs() <= 1e-9);

    let small = lib(toy::random_binary_code(4, 2, 3))?;
    let sfam = lib(HashFamily::new(3, 2, 4, 2))?;
    let scan = lib(totality_scan(&small, &sfam, 1, 200, KeyScan::Exhaustive, 11, &budget))?;
    let dev = (scan.per_key_empty_rate - scan.predicted_empty_rate).abs();
    let within = dev <= 3.0 * scan.sigma;

    let mut exact = true;
    for (rb, t, s) in [(4u32, 2u64, 0.5f64), (6, 3, 0.75), (10, 5, 0.125), (3, 0, 0.3)] {
        exact &= union_bound(rb, t, s) == 2f64.powi(rb as i32) * s.powi(t as i32);
    }
    let rel = (union_bound(8, 4, 0.9) - 256.0 * 0.9f64.powi(4)).abs() / (256.0 * 0.9f64.powi(4));
    exact &= rel <= 1e-12;
    Ok((
        zero_ok && within && exact,
        format!(
            "alg2 zero oracle/key success={zero_ok}, empty rate {:.4} vs predicted {:.4} (3 sigma={:.4}), union bound exact={exact}",
            scan.per_key_empty_rate,
            scan.predicted_empty_rate,
            3.0 * scan.sigma
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 14] = [
        (1, "field algebra", 5, c1_field),
        (2, "dual code", 10, c2_dual),
        (3, "decoder", 120, c3_decoder),
        (4, "good errors", 60, c4_good_error),
        (5, "qft", 5, c5_qft),
        (6, "lemma pipeline", 300, c6_lemma),
        (7, "algorithm 1", 600, c7_alg1),
        (8, "fourier weight", 60, c8_claim66),
        (9, "density partition", 300, c9_drp),
        (10, "transformation", 600, c10_transform),
        (11, "cleanup", 300, c11_cleanup),
        (12, "danger ledger", 300, c12_danger),
        (13, "hashing", 120, c13_hashing),
        (14, "tbnc", 600, c14_tbnc),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !pass as usize;
        println!(
            "criterion {id:>2} {name:<18} {} [{:.2}s / {limit}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/14 passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
