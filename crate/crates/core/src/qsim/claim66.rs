use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Qft, Register, State};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::FieldCtx;

const MAX_EXACT_SIGMA: u64 = 20;
const MAX_EXACT_PER_ELEMENT: u64 = 10;
const PRODUCT_LAW_CHECKS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElementMean {
    pub rank: u64,
    pub mean: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim66Exact {
    pub sigma: u64,
    pub p: f64,
    /// `E |Ŵ_i(0)|^2`, empty tables contributing zero.
    pub mean_w0_sq: f64,
    /// Same expectation conditioned on `T_i` nonempty.
    pub mean_w0_sq_nonempty: f64,
    /// `E |Ŵ_i(e)|^2` for every `e` (empty when `|Σ|` is too large).
    pub per_element: Vec<ElementMean>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim66MonteCarlo {
    pub sigma: u64,
    pub p: f64,
    pub samples: u64,
    pub mean_w0_sq: f64,
    pub se_w0_sq: f64,
    pub per_element: Vec<ElementMean>,
    /// Largest `|m_e - m_e'| / sqrt(se_e^2 + se_e'^2)` over nonzero `e != e'`.
    pub max_pairwise_z: f64,
    pub nonzero_means_consistent: bool,
    pub product_law_checked: usize,
    pub product_law_max_err: f64,
}

/// `Σ = F_q^m` with `|Σ| = sigma`.
struct Alphabet {
    reg: Register,
    qft: Qft,
    sigma: u64,
}

impl Alphabet {
    fn new(ctx: &FieldCtx, sigma: u64) -> Result<Self> {
        let q = ctx.order();
        let mut m = 0;
        let mut size = 1u64;
        while size < sigma {
            size = size.saturating_mul(q);
            m += 1;
        }
        if size != sigma || m == 0 {
            return Err(Error::InvalidParams(format!("|Σ| = {sigma} is not a positive power of q = {q}")));
        }
        Ok(Alphabet { reg: Register::new(q, m)?, qft: Qft::new(ctx)?, sigma })
    }

    /// `√|Σ| · ⟨e| QFT |t⟩`, a sign.
    fn sign(&self, t: u64, e: u64) -> f64 {
        let s = (0..self.reg.digits)
            .map(|j| self.qft.entry(self.reg.digit(e, j), self.reg.digit(t, j)))
            .product::<f64>();
        s.signum()
    }

    /// `|Ŵ(e)|^2` for all `e`, given `T` as a list of ranks.
    fn w_hat_sq(&self, t: &[u64]) -> Vec<f64> {
        if t.is_empty() {
            return vec![0.0; self.sigma as usize];
        }
        let norm = (self.sigma as f64) * (t.len() as f64);
        (0..self.sigma)
            .map(|e| {
                let s: f64 = t.iter().map(|&x| self.sign(x, e)).sum();
                s * s / norm
            })
            .collect()
    }
}

fn ones(mask: u64, sigma: u64) -> Vec<u64> {
    (0..sigma).filter(|&r| mask >> r & 1 == 1).collect()
}

/// Exact expectation over all `2^{|Σ|}` tables, weighted by the bias.
pub fn claim66_exact(ctx: &FieldCtx, sigma: u64, p: f64, budget: &Budget) -> Result<Claim66Exact> {
    let alpha = Alphabet::new(ctx, sigma)?;
    if sigma > MAX_EXACT_SIGMA || (1u64 << sigma) > budget.enumeration.max(1 << MAX_EXACT_SIGMA) {
        return Err(Error::budget("table enumeration 2^|Σ|", (sigma as f64).exp2(), (MAX_EXACT_SIGMA as f64).exp2()));
    }
    let per_elem = sigma <= MAX_EXACT_PER_ELEMENT;
    let mut mean_w0_sq = 0.0;
    let mut nonempty_mass = 0.0;
    let mut sums = vec![0.0; if per_elem { sigma as usize } else { 0 }];
    // A one bit means H_i(e) = 1; T_i is the set of zero bits.
    for mask in 0..(1u64 << sigma) {
        let k = mask.count_ones() as i32;
        let w = p.powi(k) * (1.0 - p).powi(sigma as i32 - k);
        let t = ones(!mask & ((1u64 << sigma) - 1), sigma);
        mean_w0_sq += w * t.len() as f64 / sigma as f64;
        if !t.is_empty() {
            nonempty_mass += w;
        }
        if per_elem {
            for (acc, v) in sums.iter_mut().zip(alpha.w_hat_sq(&t)) {
                *acc += w * v;
            }
        }
    }
    Ok(Claim66Exact {
        sigma,
        p,
        mean_w0_sq,
        mean_w0_sq_nonempty: if nonempty_mass > 0.0 { mean_w0_sq / nonempty_mass } else { 0.0 },
        per_element: sums.into_iter().enumerate().map(|(r, mean)| ElementMean { rank: r as u64, mean, se: 0.0 }).collect(),
    })
}

/// Monte Carlo estimate with standard errors, the equal-means check over
/// nonzero `e`, and an exact check of `Ŵ(e) = Π Ŵ_i(e_i)` on sampled pairs.
pub fn claim66_monte_carlo(ctx: &FieldCtx, sigma: u64, p: f64, samples: u64, seed: u64) -> Result<Claim66MonteCarlo> {
    let alpha = Alphabet::new(ctx, sigma)?;
    if samples < 2 {
        return Err(Error::InvalidParams("need at least two samples".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} is not a probability")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_table = |rng: &mut ChaCha8Rng| -> Vec<u64> { (0..sigma).filter(|_| !rng.random_bool(p)).collect() };
    let s = sigma as usize;
    let (mut sum, mut sum_sq) = (vec![0.0; s], vec![0.0; s]);
    for _ in 0..samples {
        let t = sample_table(&mut rng);
        for (e, v) in alpha.w_hat_sq(&t).into_iter().enumerate() {
            sum[e] += v;
            sum_sq[e] += v * v;
        }
    }
    let nf = samples as f64;
    let per_element: Vec<ElementMean> = (0..s)
        .map(|e| {
            let mean = sum[e] / nf;
            let var = ((sum_sq[e] - nf * mean * mean) / (nf - 1.0)).max(0.0);
            ElementMean { rank: e as u64, mean, se: (var / nf).sqrt() }
        })
        .collect();
    let mut max_pairwise_z: f64 = 0.0;
    for a in 1..s {
        for b in a + 1..s {
            let (ma, mb) = (per_element[a], per_element[b]);
            let se = (ma.se * ma.se + mb.se * mb.se).sqrt();
            let z = if se > 0.0 { (ma.mean - mb.mean).abs() / se } else if ma.mean == mb.mean { 0.0 } else { f64::INFINITY };
            max_pairwise_z = max_pairwise_z.max(z);
        }
    }

    let mut product_law_checked = 0;
    let mut product_law_max_err: f64 = 0.0;
    let budget = Budget::default();
    for _ in 0..PRODUCT_LAW_CHECKS {
        let (t1, t2) = (sample_table(&mut rng), sample_table(&mut rng));
        if t1.is_empty() || t2.is_empty() {
            continue;
        }
        let (s1, s2) = (State::uniform(alpha.reg, t1)?, State::uniform(alpha.reg, t2)?);
        let (h1, h2) = (alpha.qft.apply(&s1, &budget)?, alpha.qft.apply(&s2, &budget)?);
        let joint = alpha.qft.apply(&s1.tensor(&s2, &budget)?, &budget)?;
        let shift = alpha.reg.bits_per_digit() as usize * alpha.reg.digits;
        for e1 in 0..sigma {
            for e2 in 0..sigma {
                let err = (joint.amp(e1 << shift | e2) - h1.amp(e1) * h2.amp(e2)).norm();
                product_law_max_err = product_law_max_err.max(err);
            }
        }
        product_law_checked += 1;
    }

    Ok(Claim66MonteCarlo {
        sigma,
        p,
        samples,
        mean_w0_sq: per_element[0].mean,
        se_w0_sq: per_element[0].se,
        per_element,
        max_pairwise_z,
        nonzero_means_consistent: max_pairwise_z <= 3.0,
        product_law_checked,
        product_law_max_err,
    })
}
