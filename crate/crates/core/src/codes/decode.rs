use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hamming_distance, CodeKind, CodeSpec, Codeword};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::linalg::Matrix;

/// Slack added to the bias when sizing the decoding radius.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// All codewords within Hamming distance `radius` of `z`, by enumeration.
pub fn list_decode_exhaustive(
    spec: &CodeSpec,
    z: &[u32],
    radius: usize,
    budget: &Budget,
) -> Result<Vec<Codeword>> {
    check_len(spec, z)?;
    let size = spec.enumerable(budget)?;
    Ok((0..size)
        .into_par_iter()
        .map(|i| spec.codeword_at(i))
        .filter(|c| hamming_distance(c, z) <= radius)
        .collect())
}

/// Codewords within `radius` of `z`: exhaustive when `|C|` fits the budget,
/// Berlekamp-Welch for GRS codes within the unique-decoding radius.
pub fn list_decode(
    spec: &CodeSpec,
    z: &[u32],
    radius: usize,
    budget: &Budget,
) -> Result<Vec<Codeword>> {
    check_len(spec, z)?;
    if spec.enumerable(budget).is_ok() {
        return list_decode_exhaustive(spec, z, radius, budget);
    }
    if spec.kind() == CodeKind::GrsFolded && radius <= spec.unique_radius(budget)? {
        return Ok(berlekamp_welch(spec, z, radius)?.into_iter().collect());
    }
    Err(Error::budget("list decoding beyond the unique radius", spec.log2_size().exp2(), budget.enumeration as f64))
}

fn check_len(spec: &CodeSpec, z: &[u32]) -> Result<()> {
    if z.len() != spec.len() {
        return Err(Error::LengthMismatch { expected: spec.len(), got: z.len() });
    }
    Ok(())
}

/// Berlekamp-Welch decoding of a GRS code with error budget `radius`.
///
/// Returns the codeword within distance `radius` of `z` if one exists.
/// Requires `radius <= floor((N - k - 1) / 2)`.
pub fn berlekamp_welch(spec: &CodeSpec, z: &[u32], radius: usize) -> Result<Option<Codeword>> {
    check_len(spec, z)?;
    let gamma = spec
        .gamma()
        .filter(|_| spec.kind() == CodeKind::GrsFolded)
        .ok_or_else(|| Error::InvalidParams("Berlekamp-Welch needs a GRS code".into()))?;
    let f = spec.field();
    let (n, k) = (spec.len(), spec.k());
    if 2 * radius + k + 1 > n {
        return Err(Error::InvalidParams(format!(
            "radius {radius} exceeds the unique-decoding radius {}",
            (n - k - 1) / 2
        )));
    }
    let points: Vec<u32> = (0..n).map(|i| f.pow(gamma.value(), i as u64)).collect();
    let y: Vec<u32> = z
        .iter()
        .zip(spec.multipliers())
        .map(|(&zi, &vi)| f.div(zi, vi))
        .collect::<Result<_>>()?;

    // Unknowns: Q_0..Q_{k+e}, then E_0..E_{e-1} (E monic of degree e).
    // Equation i: Q(a_i) + y_i E_<e(a_i) = y_i a_i^e.
    let e = radius;
    let nq = k + e + 1;
    let mut a = Matrix::zeros(n, nq + e);
    let mut rhs = vec![0u32; n];
    for i in 0..n {
        let mut pw = 1u32;
        for j in 0..nq {
            a.set(i, j, pw);
            if j < e {
                a.set(i, nq + j, f.mul(y[i], pw));
            }
            pw = f.mul(pw, points[i]);
        }
        rhs[i] = f.mul(y[i], f.pow(points[i], e as u64));
    }
    let Some(sol) = a.solve(f, &rhs) else { return Ok(None) };
    let q_poly = &sol[..nq];
    let mut e_poly = sol[nq..].to_vec();
    e_poly.push(1);
    let Some(msg) = poly_div_exact(f, q_poly, &e_poly) else { return Ok(None) };
    if msg.len() > k + 1 && msg[k + 1..].iter().any(|&c| c != 0) {
        return Ok(None);
    }
    let c = spec.encode(&msg[..msg.len().min(k + 1)])?;
    Ok((hamming_distance(&c, z) <= radius).then_some(c))
}

/// `num / den` when the division is exact (coefficients low degree first).
fn poly_div_exact(f: &FieldCtx, num: &[u32], den: &[u32]) -> Option<Vec<u32>> {
    let dd = den.iter().rposition(|&c| c != 0)?;
    let lead_inv = f.inv(den[dd]).ok()?;
    let mut rem = num.to_vec();
    let qlen = rem.len().saturating_sub(dd).max(1);
    let mut quot = vec![0u32; qlen];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        let factor = f.mul(c, lead_inv);
        quot[i - dd] = factor;
        for j in 0..=dd {
            rem[i - dd + j] ^= f.mul(factor, den[j]);
        }
    }
    rem.iter().all(|&c| c == 0).then_some(quot)
}

/// Bias `p`, slack `ε`, and the unfolded radius `floor((p + ε) N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub p: f64,
    pub epsilon: f64,
    pub radius_unfolded: usize,
}

impl DecoderParams {
    pub fn new(p: f64, epsilon: f64, len: usize) -> Self {
        // guard against 0.99999.. from binary fractions
        let radius = ((p + epsilon) * len as f64 + 1e-9).floor() as usize;
        DecoderParams { p, epsilon, radius_unfolded: radius }
    }
}

enum Strategy {
    BerlekampWelch,
    Exhaustive(Vec<Codeword>),
}

/// Decoder for the dual of a code: unfold, decode in the dual, keep the
/// unique candidate within `(p + ε) N`, otherwise `None` (⊥).
pub struct DualDecoder {
    dual: CodeSpec,
    params: DecoderParams,
    unique_radius: usize,
    strategy: Strategy,
}

impl DualDecoder {
    pub fn new(primal: &CodeSpec, p: f64, epsilon: f64, budget: &Budget) -> Result<Self> {
        Self::for_dual(primal.dual()?, p, epsilon, budget)
    }

    pub fn for_dual(dual: CodeSpec, p: f64, epsilon: f64, budget: &Budget) -> Result<Self> {
        if !(0.0..1.0).contains(&p) || epsilon < 0.0 {
            return Err(Error::InvalidParams(format!("bad decoder parameters p={p}, ε={epsilon}")));
        }
        let params = DecoderParams::new(p, epsilon, dual.len());
        let unique_radius = dual.unique_radius(budget)?;
        let fraction = unique_radius as f64 / dual.len() as f64;
        if p + epsilon >= fraction || params.radius_unfolded > unique_radius {
            return Err(Error::InvalidParams(format!(
                "p + ε = {} is not below the unique-decoding fraction {fraction:.4} of the dual",
                p + epsilon
            )));
        }
        let strategy = if dual.kind() == CodeKind::GrsFolded && dual.enumerable(budget).is_err() {
            Strategy::BerlekampWelch
        } else {
            Strategy::Exhaustive(dual.codewords(budget)?)
        };
        Ok(DualDecoder { dual, params, unique_radius, strategy })
    }

    pub fn params(&self) -> DecoderParams {
        self.params
    }

    pub fn dual(&self) -> &CodeSpec {
        &self.dual
    }

    pub fn unique_radius(&self) -> usize {
        self.unique_radius
    }

    /// Decode an unfolded word; `None` is ⊥.
    pub fn decode(&self, z: &[u32]) -> Option<Codeword> {
        if z.len() != self.dual.len() {
            return None;
        }
        let r = self.params.radius_unfolded;
        match &self.strategy {
            Strategy::BerlekampWelch => berlekamp_welch(&self.dual, z, r).ok().flatten(),
            Strategy::Exhaustive(words) => {
                let mut hits = words.iter().filter(|c| hamming_distance(c, z) <= r);
                match (hits.next(), hits.next()) {
                    (Some(c), None) => Some(c.clone()),
                    _ => None,
                }
            }
        }
    }

    /// Total map used inside the simulated unitary: ⊥ becomes the zero word.
    pub fn decode_or_zero(&self, z: &[u32]) -> Codeword {
        self.decode(z).unwrap_or_else(|| vec![0; self.dual.len()])
    }
}
