//! Small configurations that fit exact simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::CodeSpec;
use crate::error::Result;
use crate::gf::FieldCtx;

/// Extended Hamming `[8,4,4]` code over F_2 (self-dual), folded with
/// `m = 2` into `Σ = F_2^2`, `n = 4`.
pub fn self_dual_8_4() -> CodeSpec {
    let rows = vec![
        vec![1, 1, 1, 1, 0, 0, 0, 0],
        vec![0, 0, 1, 1, 1, 1, 0, 0],
        vec![0, 0, 0, 0, 1, 1, 1, 1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
    ];
    let f2 = FieldCtx::with_default_modulus(1).expect("GF(2)");
    CodeSpec::generic(f2, &rows, 8, 2).expect("valid toy code")
}

/// Random binary code of length `n` and (at most) dimension `dim`, unfolded
/// (`m = 1`, `Σ = F_2`).
pub fn random_binary_code(n: usize, dim: usize, seed: u64) -> Result<CodeSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<u32>> =
        (0..dim).map(|_| (0..n).map(|_| rng.random_range(0..2u32)).collect()).collect();
    let f2 = FieldCtx::with_default_modulus(1)?;
    CodeSpec::generic(f2, &rows, n, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;

    #[test]
    fn toy_is_self_dual() {
        let c = self_dual_8_4();
        assert_eq!(c.dimension(), 4);
        assert_eq!((c.n(), c.m(), c.sigma_size()), (4, 2, Some(4)));
        assert!(c.dual().unwrap().same_subspace(&c));
        assert_eq!(c.min_distance(&Budget::default()).unwrap(), 4);
    }
}
