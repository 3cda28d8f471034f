use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use nullcode::codes::{
    hamming_distance, list_recover_count, lr_param_check, paper_preset, CodeSpec, DualDecoder, PresetParams,
};
use nullcode::gf::FieldCtx;
use nullcode::hashing::{attack_solve, independence_check, linearity_check, HashFamily};
use nullcode::instances::{expected_solution_count, Bias, OracleInstance};
use nullcode::proto::{
    all_ones, check_partition, check_subcube_like, cleanup, danger_track, density_restoring_partition,
    expected_codimension, full_set, min_entropy, random_bnc_tree, random_tree, transform_alg3, BncVerifier, Label,
    SplitVerifier, Tree, ZeroPair,
};
use nullcode::qsim::{
    claim66_exact, claim66_monte_carlo, lemma51_for_instance, prepare_psi, qft_matrix, run_alg1, word_register, Qft,
};
use nullcode::tbnc::{
    run_alg2, tbnc_verify, totality_scan, union_bound, union_bound_log2, Alg2Config, KeyChoice, KeyScan,
    TbncInstance,
};
use nullcode::{toy, Budget, Error};

use super::{
    usage, CliResult, CodeArgs, CodeCmd, Command, Global, HashCmd, InstanceCmd, ProtoCmd, QsimCmd, Sink,
    TbncCmd, Toy,
};

fn resolve_code(args: &CodeArgs) -> CliResult<CodeSpec> {
    match (args.t, args.toy, &args.code) {
        (Some(t), None, None) => Ok(paper_preset(t)?),
        (None, Some(Toy::SelfDual84), None) => Ok(toy::self_dual_8_4()),
        (None, None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| usage(format!("--code {}: {e}", path.display())))
        }
        (None, None, None) => Err(usage("one of --t, --toy or --code is required")),
        _ => Err(usage("--t, --toy and --code are mutually exclusive")),
    }
}

fn parse_bias(flag: &str, s: &str) -> CliResult<Bias> {
    Bias::from_str(s).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn parse_word(flag: &str, s: &str) -> CliResult<Vec<u32>> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| usage(format!("--{flag}: {t:?}: {e}"))))
        .collect()
}

fn trial_seeds(g: &Global) -> Vec<(usize, u64)> {
    (0..g.trials).map(|i| (i, g.seed.wrapping_add(i as u64))).collect()
}

/// Runs `f` on every trial in parallel, emitting records in trial order.
fn for_trials<T: Serialize + Send>(
    sink: &mut Sink,
    g: &Global,
    f: impl Fn(u64) -> CliResult<(T, bool)> + Sync,
) -> CliResult<bool> {
    let results = trial_seeds(g)
        .into_par_iter()
        .map(|(i, seed)| f(seed).map(|r| (i, seed, r)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut ok = true;
    for (i, seed, (r, pass)) in results {
        sink.emit(i, seed, r)?;
        ok &= pass;
    }
    Ok(ok)
}

fn one(sink: &mut Sink, g: &Global, result: impl Serialize, ok: bool) -> CliResult<bool> {
    sink.emit(0, g.seed, result)?;
    Ok(ok)
}

pub fn run(name: &str, cmd: Command, g: &Global) -> CliResult<bool> {
    let config = json!({ "global": g, "args": cmd });
    let writes_artifact = matches!(cmd, Command::Instance(InstanceCmd::Gen { .. }) | Command::Tbnc(TbncCmd::Gen { .. }));
    let mut sink = Sink::new(name, config, if writes_artifact { None } else { g.out.as_ref() })?;
    let budget = g.budget();
    let ok = match cmd {
        Command::Code(c) => code(c, g, &budget, &mut sink)?,
        Command::Instance(c) => instance(c, g, &budget, &mut sink)?,
        Command::Qsim(c) => qsim(c, g, &budget, &mut sink)?,
        Command::Proto(c) => proto(c, g, &budget, &mut sink)?,
        Command::Hash(c) => hash(c, g, &budget, &mut sink)?,
        Command::Tbnc(c) => tbnc(c, g, &budget, &mut sink)?,
        Command::Report(_) => unreachable!("handled by the caller"),
    };
    sink.finish(g.csv.as_ref())?;
    Ok(ok)
}

fn random_dual_word(dual: &CodeSpec, rng: &mut ChaCha8Rng) -> CliResult<Vec<u32>> {
    let q = dual.field().order();
    let msg: Vec<u32> = (0..dual.message_len()).map(|_| rng.random_range(0..q) as u32).collect();
    Ok(dual.encode(&msg)?)
}

fn code(cmd: CodeCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        CodeCmd::Preset { t } => {
            let p = PresetParams::for_t(t).map_err(|e| usage(format!("--t: {e}")))?;
            one(sink, g, p, true)
        }
        CodeCmd::Dual { code } => {
            let spec = resolve_code(&code)?;
            let dual = spec.dual()?;
            let involution = dual.dual()?.same_subspace(&spec);
            let dims = spec.dimension() + dual.dimension() == spec.len();
            let orthogonal = match spec.codewords(budget) {
                Ok(words) => {
                    let basis = dual.genmat().to_rows();
                    Some(words.par_iter().all(|c| basis.iter().all(|b| spec.inner(c, b) == 0)))
                }
                Err(_) => None,
            };
            let ok = involution && dims && orthogonal != Some(false);
            let result = json!({
                "length": spec.len(),
                "n": spec.n(),
                "dimension": spec.dimension(),
                "dual_dimension": dual.dimension(),
                "dual_dual_equal": involution,
                "orthogonal": orthogonal,
                "dual": dual,
            });
            one(sink, g, result, ok)
        }
        CodeCmd::Decode { code, p, epsilon, word } => {
            let spec = resolve_code(&code)?;
            let p = parse_bias("p", &p)?.value();
            let dec = DualDecoder::new(&spec, p, epsilon, budget)?;
            let radius = dec.params().radius_unfolded;
            if let Some(w) = word {
                let z = parse_word("word", &w)?;
                let out = dec.decode(&z);
                return one(sink, g, json!({ "radius": radius, "decoded": out }), true);
            }
            let dual = dec.dual();
            let q = spec.field().order();
            for_trials(sink, g, |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x = random_dual_word(dual, &mut rng)?;
                let weight = rng.random_range(0..=radius);
                let mut z = x.clone();
                for pos in sample(&mut rng, z.len(), weight) {
                    z[pos] ^= rng.random_range(1..q) as u32;
                }
                let ok = dec.decode(&z).as_ref() == Some(&x);
                Ok((json!({ "radius": radius, "weight": weight, "distance": hamming_distance(&x, &z), "ok": ok }), ok))
            })
        }
        CodeCmd::Listrec { code, zeta, ell } => {
            let spec = resolve_code(&code)?;
            let sigma = spec.sigma_size().ok_or_else(|| usage("alphabet too large"))?;
            if ell > sigma {
                return Err(usage(format!("--ell: {ell} exceeds |Σ| = {sigma}")));
            }
            for_trials(sink, g, |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sets: Vec<BTreeSet<u64>> = (0..spec.n())
                    .map(|_| {
                        let mut s = BTreeSet::new();
                        while (s.len() as u64) < ell {
                            s.insert(rng.random_range(0..sigma));
                        }
                        s
                    })
                    .collect();
                let count = list_recover_count(&spec, &sets, zeta, budget)?;
                Ok((json!({ "zeta": zeta, "ell": ell, "count": count }), true))
            })
        }
        CodeCmd::Lrcheck { big_n, m, k, ell, s, r, zeta, q } => {
            let c = lr_param_check(big_n, m, k, ell, s, r, zeta, q)?;
            one(sink, g, c, true)
        }
    }
}

fn instance(cmd: InstanceCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        InstanceCmd::Gen { code, p, unfolded } => {
            let spec = resolve_code(&code)?;
            let bias = parse_bias("p", &p)?;
            let inst = if unfolded {
                let b = bias.require_exponent().map_err(|e| usage(format!("--p: {e}")))?;
                OracleInstance::sample_unfolded(&spec, b, g.seed, budget)?
            } else {
                OracleInstance::sample(&spec, bias, g.seed, budget)?
            };
            if let Some(path) = &g.out {
                inst.save(path)?;
            }
            let ones: usize = inst.tables().iter().map(|t| t.count_ones()).sum();
            let result = json!({
                "file": g.out,
                "n": inst.n(),
                "sigma": inst.sigma(),
                "p": bias,
                "ones": ones,
                "expected_solutions": expected_solution_count(&spec, bias.value()),
            });
            one(sink, g, result, true)
        }
        InstanceCmd::Verify { file, word } => {
            let inst = OracleInstance::load(&file)?;
            let x = parse_word("word", &word)?;
            let in_code = inst.spec().contains(&x);
            let valid = inst.verify(&x);
            one(sink, g, json!({ "in_code": in_code, "valid": valid }), valid)
        }
        InstanceCmd::Solve { file, limit } => {
            let inst = OracleInstance::load(&file)?;
            let sols = inst.brute_solve(budget)?;
            let ok = sols.iter().all(|x| inst.verify(x));
            let result = json!({
                "count": sols.len(),
                "expected": expected_solution_count(inst.spec(), inst.bias().value()),
                "solutions": sols.iter().take(limit).collect::<Vec<_>>(),
            });
            one(sink, g, result, ok)
        }
    }
}

fn qsim(cmd: QsimCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        QsimCmd::Qft { s, code } => {
            let mut ok = true;
            let mut unitarity = Vec::new();
            for &deg in &s {
                let f = FieldCtx::with_default_modulus(deg)?;
                let m = qft_matrix(&f)?;
                let q = m.len();
                let mut err = 0.0f64;
                for i in 0..q {
                    for j in 0..q {
                        let dot: num_complex::Complex64 = (0..q).map(|k| m[i][k] * m[j][k]).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        err = err.max((dot - target).norm());
                    }
                }
                ok &= err <= 1e-12;
                unitarity.push(json!({ "q": q, "max_error": err }));
            }
            let support = if code.t.is_some() || code.toy.is_some() || code.code.is_some() {
                let spec = resolve_code(&code)?;
                let psi = prepare_psi(&spec, budget)?;
                let out = Qft::new(spec.field())?.apply(&psi, budget)?;
                let reg = word_register(&spec)?;
                let dual = spec.dual()?;
                let found: BTreeSet<u64> = out.amplitudes().keys().copied().collect();
                let expected: BTreeSet<u64> = dual.codewords(budget)?.iter().map(|w| reg.index_of(w)).collect();
                let mag = 1.0 / (expected.len() as f64).sqrt();
                let uniform = out.amplitudes().values().all(|a| (a.norm() - mag).abs() <= 1e-10);
                let exact = found == expected;
                ok &= exact && uniform;
                Some(json!({ "support_is_dual": exact, "uniform": uniform, "support": found.len() }))
            } else {
                None
            };
            one(sink, g, json!({ "unitarity": unitarity, "code_state": support }), ok)
        }
        QsimCmd::Lemma51 { code, p, good } => {
            let spec = resolve_code(&code)?;
            let bias = parse_bias("p", &p)?;
            for_trials(sink, g, |seed| {
                let inst = OracleInstance::sample(&spec, bias, seed, budget)?;
                match lemma51_for_instance(&inst, good.into(), budget) {
                    Ok(r) => {
                        let ok = r.bound_holds;
                        Ok((
                            json!({
                                "empty_support": false,
                                "epsilon": r.epsilon,
                                "delta": r.delta,
                                "l2_distance": r.l2_distance,
                                "tv_distance": r.tv_distance,
                                "bound": r.bound,
                                "bound_holds": r.bound_holds,
                            }),
                            ok,
                        ))
                    }
                    Err(Error::EmptySupport(_)) => Ok((
                        json!({
                            "empty_support": true,
                            "epsilon": null,
                            "delta": null,
                            "l2_distance": null,
                            "tv_distance": null,
                            "bound": null,
                            "bound_holds": null,
                        }),
                        true,
                    )),
                    Err(e) => Err(e.into()),
                }
            })
        }
        QsimCmd::Alg1 { code, p, good, zero } => {
            let spec = resolve_code(&code)?;
            let bias = parse_bias("p", &p)?;
            for_trials(sink, g, |seed| {
                let inst = if zero {
                    OracleInstance::constant(&spec, false)?
                } else {
                    OracleInstance::sample(&spec, bias, seed, budget)?
                };
                let empty = |v: Value| Ok((v, true));
                let r = match run_alg1(&inst, good.into(), budget) {
                    Ok(r) => r,
                    Err(Error::EmptySupport(_)) => {
                        return empty(json!({
                            "empty_support": true,
                            "success_probability": 0.0,
                            "epsilon": null,
                            "delta": null,
                            "l2_distance": null,
                            "bound_holds": null,
                            "ideal_support_ok": null,
                            "outcomes": 0,
                        }))
                    }
                    Err(e) => return Err(e.into()),
                };
                let ok = r.bound_holds && r.ideal_support_ok;
                Ok((
                    json!({
                        "empty_support": false,
                        "success_probability": r.success_probability,
                        "epsilon": r.epsilon,
                        "delta": r.delta,
                        "l2_distance": r.l2_distance,
                        "bound_holds": r.bound_holds,
                        "ideal_support_ok": r.ideal_support_ok,
                        "outcomes": r.distribution.len(),
                    }),
                    ok,
                ))
            })
        }
        QsimCmd::Claim66 { s, sigma, p, samples } => {
            let f = FieldCtx::with_default_modulus(s)?;
            let p = parse_bias("p", &p)?.value();
            match samples {
                None => {
                    let r = claim66_exact(&f, sigma, p, budget)?;
                    let err = (r.mean_w0_sq - (1.0 - p)).abs();
                    let result = json!({ "mode": "exact", "p": p, "sigma": sigma, "mean": r.mean_w0_sq, "abs_err": err, "se": 0.0 });
                    one(sink, g, result, err <= 1e-10)
                }
                Some(n) => for_trials(sink, g, |seed| {
                    let r = claim66_monte_carlo(&f, sigma, p, n, seed)?;
                    let err = (r.mean_w0_sq - (1.0 - p)).abs();
                    let ok = err <= 3.0 * r.se_w0_sq && r.nonzero_means_consistent;
                    Ok((
                        json!({ "mode": "monte-carlo", "p": p, "sigma": sigma, "mean": r.mean_w0_sq, "abs_err": err, "se": r.se_w0_sq }),
                        ok,
                    ))
                }),
            }
        }
    }
}

fn same_outputs(a: &Tree, b: &Tree, pairs: u64, seed: u64) -> bool {
    let n = a.n_bits;
    if 2 * n <= 16 {
        (0..1u32 << n).into_par_iter().all(|x| (0..1u32 << n).all(|y| a.run(x, y).label == b.run(x, y).label))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<(u32, u32)> =
            (0..pairs).map(|_| (rng.random_range(0..1u32 << n), rng.random_range(0..1u32 << n))).collect();
        inputs.par_iter().all(|&(x, y)| a.run(x, y).label == b.run(x, y).label)
    }
}

fn proto(cmd: ProtoCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        ProtoCmd::Drp { bits, gamma, density } => {
            if bits == 0 || bits > 16 {
                return Err(usage("--bits must lie in 1..=16"));
            }
            for_trials(sink, g, |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut set: Vec<u32> = full_set(bits).into_iter().filter(|_| rng.random_bool(density)).collect();
                if set.is_empty() {
                    set.push(rng.random_range(0..1u32 << bits));
                }
                let free = all_ones(bits);
                let parts = density_restoring_partition(&set, free, gamma)?;
                let ok = check_partition(&set, &parts, free, gamma)?;
                let deficiency = bits as f64 - min_entropy(&set, free)?;
                Ok((
                    json!({
                        "size": set.len(),
                        "parts": parts.len(),
                        "expected_codimension": expected_codimension(&parts),
                        "deficiency": deficiency,
                        "ok": ok,
                    }),
                    ok,
                ))
            })
        }
        ProtoCmd::Transform { bits, depth, gamma, labels, pairs } => for_trials(sink, g, |seed| {
            let t = random_tree(bits, depth, labels, seed)?;
            let (u, stats) = transform_alg3(&t, gamma)?;
            let sub = check_subcube_like(&u, gamma)?;
            let equal = same_outputs(&t, &u, pairs, seed);
            let h = u.entropy_stats();
            let cost = t.cost().max(1) as f64;
            let ok = sub.failures == 0 && equal && stats.huffman_ok;
            Ok((
                json!({
                    "cost": t.cost(),
                    "nodes": u.len(),
                    "transformed_cost": u.cost(),
                    "entropy": h.entropy,
                    "entropy_ratio": h.entropy / cost,
                    "max_parts": stats.max_parts,
                    "max_huffman_excess": stats.max_huffman_excess,
                    "huffman_ok": stats.huffman_ok,
                    "subcube_failures": sub.failures,
                    "outputs_equal": equal,
                }),
                ok,
            ))
        }),
        ProtoCmd::Cleanup { bits, depth, gamma, epsilon } => {
            if bits > 8 {
                return Err(usage("--bits must be at most 8 for exhaustive cleanup checks"));
            }
            let z = ZeroPair { n_bits: bits };
            for_trials(sink, g, |seed| {
                let mut t = random_tree(bits, depth, 1, seed)?;
                t.label_best(&z, &z.labels());
                let (u, _) = transform_alg3(&t, gamma)?;
                let err = u.error_probability(&z);
                let eps = epsilon.unwrap_or(err).max(1e-9);
                let (c, stats) = cleanup(&u, eps, &z)?;
                let wrong = (0..1u32 << bits)
                    .into_par_iter()
                    .map(|x| {
                        (0..1u32 << bits)
                            .filter(|&y| {
                                let l = c.run(x, y).label;
                                l != Label::Bottom && !z.valid(x, y, l)
                            })
                            .count()
                    })
                    .sum::<usize>();
                let bound_ok = stats.bottom_probability <= 2.0 * err + 1e-12;
                let ok = wrong == 0 && (epsilon.is_some() || bound_ok);
                Ok((
                    json!({
                        "original_error": err,
                        "epsilon": eps,
                        "threshold": stats.threshold,
                        "aborted_nodes": stats.aborted_nodes,
                        "bottom_probability": stats.bottom_probability,
                        "bottom_within_2eps": bound_ok,
                        "wrong_outputs": wrong,
                    }),
                    ok,
                ))
            })
        }
        ProtoCmd::Run { tree, x, y } => {
            let t = Tree::from_json(&std::fs::read_to_string(&tree)?)?;
            one(sink, g, t.run(x, y), true)
        }
        ProtoCmd::Danger { code, depth, inputs } => {
            let spec = resolve_code(&code)?;
            let v = BncVerifier::new(&spec, budget)?;
            let bits = v.n_bits();
            for_trials(sink, g, |seed| {
                let t = random_bnc_tree(&v, depth, seed)?;
                let pairs: Vec<(u32, u32)> = if 2 * bits <= 16 {
                    (0..1u32 << bits).flat_map(|x| (0..1u32 << bits).map(move |y| (x, y))).collect()
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..inputs).map(|_| (rng.random_range(0..1u32 << bits), rng.random_range(0..1u32 << bits))).collect()
                };
                let r = danger_track(&t, &spec, &v, &pairs, budget)?;
                let ok = r.monotone && r.lr_consistent;
                Ok((
                    json!({
                        "threshold": r.threshold,
                        "nodes": r.nodes.len(),
                        "monotone": r.monotone,
                        "lr_consistent": r.lr_consistent,
                        "max_q": r.max_q,
                        "runs": r.runs,
                        "danger_events": r.danger_events,
                        "danger_then_solution": r.danger_then_solution,
                        "frequency": r.frequency,
                    }),
                    ok,
                ))
            })
        }
    }
}

fn family_for(spec: &CodeSpec, lambda: Option<usize>) -> CliResult<HashFamily> {
    Ok(HashFamily::for_spec(spec, lambda.unwrap_or(spec.n() * spec.n()))?)
}

fn hash(cmd: HashCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        HashCmd::Check { r, lambda, n, sigma } => {
            let fam = HashFamily::new(r, lambda, n, sigma)?;
            let points: Vec<(u64, usize)> =
                (0..lambda as u64).map(|k| (k / n as u64, (k % n as u64) as usize)).collect();
            let ind = independence_check(&fam, &points, budget)?;
            let linear = linearity_check(&fam, 16, g.seed)?;
            let ok = ind.uniform && linear;
            one(sink, g, json!({ "independence": ind, "linear": linear, "points": points }), ok)
        }
        HashCmd::Attack { code, lambda } => {
            let spec = resolve_code(&code)?;
            let fam = family_for(&spec, lambda)?;
            for_trials(sink, g, |seed| {
                let inst = OracleInstance::sample_unfolded(&spec, fam.output_bits(), seed, budget)?;
                let attack = attack_solve(&fam, &inst)?;
                let (solved, verified, rank) = match &attack {
                    Some(a) => {
                        let tb = TbncInstance::new(fam.clone(), vec![inst.clone()])?;
                        (true, tbnc_verify(&tb, &a.key, std::slice::from_ref(&a.codeword))?, Some(a.rank))
                    }
                    None => (false, false, None),
                };
                let ok = !solved || verified;
                Ok((json!({ "solved": solved, "verified": verified, "rank": rank, "key_bits": fam.key_bits() }), ok))
            })
        }
    }
}

fn parse_solutions(s: &str) -> CliResult<Vec<Vec<u32>>> {
    s.split(';').map(|w| parse_word("solutions", w)).collect()
}

fn tbnc(cmd: TbncCmd, g: &Global, budget: &Budget, sink: &mut Sink) -> CliResult<bool> {
    match cmd {
        TbncCmd::Gen { code, copies, lambda } => {
            let spec = resolve_code(&code)?;
            let tb = TbncInstance::sample(&spec, family_for(&spec, lambda)?, copies, g.seed, budget)?;
            if let Some(path) = &g.out {
                tb.save(path)?;
            }
            one(sink, g, json!({ "file": g.out, "t": tb.t(), "family": tb.family().desc() }), true)
        }
        TbncCmd::Verify { file, key, solutions } => {
            let tb = TbncInstance::load(&file)?;
            let key = parse_word("key", &key)?;
            let sols = parse_solutions(&solutions)?;
            let valid = tbnc_verify(&tb, &key, &sols)?;
            one(sink, g, json!({ "valid": valid }), valid)
        }
        TbncCmd::Alg2 { code, file, copies, lambda, zero_oracle, zero_key, retry_cap, good } => {
            let stored = match &file {
                Some(path) => Some(TbncInstance::load(path)?),
                None => None,
            };
            let spec = match &stored {
                Some(tb) => tb.spec().clone(),
                None => resolve_code(&code)?,
            };
            let fam = match &stored {
                Some(tb) => tb.family().clone(),
                None => family_for(&spec, lambda)?,
            };
            for_trials(sink, g, |seed| {
                let tb = match &stored {
                    Some(tb) => tb.clone(),
                    None if zero_oracle => TbncInstance::zero(&spec, fam.clone(), copies)?,
                    None => TbncInstance::sample(&spec, fam.clone(), copies, seed, budget)?,
                };
                let key = if zero_key { KeyChoice::Fixed(fam.zero_key()) } else { KeyChoice::Random };
                let cfg = Alg2Config { key, retry_cap, good: good.into() };
                match run_alg2(&tb, &cfg, budget, seed) {
                    Ok(r) => {
                        let verified = tbnc_verify(&tb, &r.key, &r.solutions)?;
                        let bounds = r.copies.iter().all(|c| c.bound_holds);
                        let mean_success =
                            r.copies.iter().map(|c| c.success_probability).sum::<f64>() / r.copies.len() as f64;
                        let max_l2 = r.copies.iter().map(|c| c.l2_distance).fold(0.0, f64::max);
                        let retries: usize = r.copies.iter().map(|c| c.retries).sum();
                        Ok((
                            json!({
                                "success": r.success,
                                "retries_exhausted": false,
                                "retries": retries,
                                "mean_copy_success": mean_success,
                                "max_l2_distance": max_l2,
                                "bounds_hold": bounds,
                            }),
                            verified == r.success && bounds,
                        ))
                    }
                    Err(Error::RetriesExhausted { .. }) => Ok((
                        json!({
                            "success": false,
                            "retries_exhausted": true,
                            "retries": null,
                            "mean_copy_success": null,
                            "max_l2_distance": null,
                            "bounds_hold": null,
                        }),
                        true,
                    )),
                    Err(e) => Err(e.into()),
                }
            })
        }
        TbncCmd::Totality { code, copies, lambda, h_samples, keys, all_keys } => {
            let spec = resolve_code(&code)?;
            let fam = family_for(&spec, lambda)?;
            let scan = if all_keys { KeyScan::Exhaustive } else { KeyScan::Sampled(keys) };
            let r = totality_scan(&spec, &fam, copies, h_samples, scan, g.seed, budget)?;
            let within = (r.per_key_empty_rate - r.predicted_empty_rate).abs() <= 3.0 * r.sigma + 1e-12;
            let mut v = serde_json::to_value(&r).map_err(nullcode::Error::from)?;
            v["within_3_sigma"] = json!(within);
            one(sink, g, v, within)
        }
        TbncCmd::UnionBound { r, copies, suc } => {
            if !(suc > 0.0 && suc <= 1.0) {
                return Err(usage("--suc must lie in (0, 1]"));
            }
            let result = json!({ "value": union_bound(r, copies, suc), "log2": union_bound_log2(r, copies, suc) });
            one(sink, g, result, true)
        }
    }
}
