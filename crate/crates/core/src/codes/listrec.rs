use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::CodeSpec;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// Smallest integer agreement count that is `>= zeta * n`.
pub(crate) fn agreement_threshold(zeta: f64, n: usize) -> usize {
    (zeta * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Exact number of codewords agreeing with the candidate sets on at least
/// `zeta * n` folded coordinates. Sets hold symbol ranks.
pub fn list_recover_count(
    spec: &CodeSpec,
    sets: &[BTreeSet<u64>],
    zeta: f64,
    budget: &Budget,
) -> Result<u64> {
    if sets.len() != spec.n() {
        return Err(Error::LengthMismatch { expected: spec.n(), got: sets.len() });
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::InvalidParams(format!("zeta must lie in (0, 1], got {zeta}")));
    }
    let size = spec.enumerable(budget)?;
    let need = agreement_threshold(zeta, spec.n());
    Ok((0..size)
        .into_par_iter()
        .filter(|&i| {
            let c = spec.codeword_at(i);
            let hits = spec
                .symbol_ranks(&c)
                .iter()
                .zip(sets)
                .filter(|(r, s)| s.contains(r))
                .count();
            hits >= need
        })
        .count() as u64)
}

/// Both sides of the two list-recoverability inequalities for folded RS codes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LrCheck {
    pub ineq1: bool,
    pub ineq2: bool,
    /// Guaranteed list bound `q^s`.
    pub list_bound: f64,
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
}

/// Evaluates `ζN/m >= (1 + s/r) (N ℓ k^s)^(1/(s+1)) / (m - s + 1)` and
/// `(r + s) (N ℓ / k)^(1/(s+1)) < q`.
#[allow(clippy::too_many_arguments)]
pub fn lr_param_check(
    big_n: f64,
    m: f64,
    k: f64,
    ell: f64,
    s: f64,
    r: f64,
    zeta: f64,
    q: f64,
) -> Result<LrCheck> {
    if m - s + 1.0 == 0.0 {
        return Err(Error::DivisionByZero("m - s + 1"));
    }
    if k == 0.0 {
        return Err(Error::DivisionByZero("k"));
    }
    if s > m {
        return Err(Error::InvalidParams(format!("s = {s} exceeds m = {m}")));
    }
    let root = 1.0 / (s + 1.0);
    let lhs1 = zeta * big_n / m;
    let rhs1 = (1.0 + s / r) * (big_n * ell * k.powf(s)).powf(root) / (m - s + 1.0);
    let lhs2 = (r + s) * (big_n * ell / k).powf(root);
    Ok(LrCheck { ineq1: lhs1 >= rhs1, ineq2: lhs2 < q, list_bound: q.powf(s), lhs1, rhs1, lhs2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::paper_preset;

    #[test]
    fn trivial_sets() {
        let c = paper_preset(2).unwrap();
        let b = Budget::default();
        let sigma = c.sigma_size().unwrap();
        let everything: Vec<BTreeSet<u64>> = (0..3).map(|_| (0..sigma).collect()).collect();
        assert_eq!(list_recover_count(&c, &everything, 1.0, &b).unwrap(), 256);
        let nothing = vec![BTreeSet::new(); 3];
        assert_eq!(list_recover_count(&c, &nothing, 0.1, &b).unwrap(), 0);
    }

    #[test]
    fn zero_budget_passes_both() {
        let r = lr_param_check(63.0, 9.0, 6.0, 0.0, 2.0, 8.0, 0.4, 64.0).unwrap();
        assert!(r.ineq1 && r.ineq2);
        assert_eq!(r.list_bound, 4096.0);
    }

    #[test]
    fn huge_budget_breaks_second() {
        let q: f64 = 64.0;
        let r = lr_param_check(63.0, 9.0, 6.0, q.powi(3), 2.0, 8.0, 0.4, q).unwrap();
        assert!(!r.ineq2);
    }

    #[test]
    fn division_guards() {
        assert_eq!(
            lr_param_check(63.0, 9.0, 0.0, 1.0, 2.0, 8.0, 0.4, 64.0),
            Err(Error::DivisionByZero("k"))
        );
        assert!(matches!(
            lr_param_check(63.0, 2.0, 6.0, 1.0, 3.0, 8.0, 0.4, 64.0),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn threshold_rounding() {
        assert_eq!(agreement_threshold(0.4, 3), 2);
        assert_eq!(agreement_threshold(0.4, 5), 2);
        assert_eq!(agreement_threshold(0.5, 4), 2);
    }
}
