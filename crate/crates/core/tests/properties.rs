use proptest::prelude::*;

use nullcode::codes::{add_words, hamming_distance, paper_preset, DualDecoder};
use nullcode::gf::FieldCtx;
use nullcode::hashing::HashFamily;
use nullcode::instances::Bias;
use nullcode::proto::{entropy, expected_length, huffman};
use nullcode::Budget;

fn field_and_elems() -> impl Strategy<Value = (u32, u32, u32, u32)> {
    (1u32..=10).prop_flat_map(|s| {
        let q = 1u32 << s;
        (Just(s), 0..q, 0..q, 0..q)
    })
}

proptest! {
    #[test]
    fn field_axioms((s, a, b, c) in field_and_elems()) {
        let f = FieldCtx::with_default_modulus(s).unwrap();
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.trace(f.add(a, b)), f.trace(a) ^ f.trace(b));
        prop_assert_eq!(f.trace(a), f.trace_direct(a));
        if a != 0 {
            prop_assert_eq!(f.pow(a, f.order() - 1), 1);
            prop_assert_eq!(f.mul(f.div(b, a).unwrap(), a), b);
        }
    }

    #[test]
    fn preset_code_is_linear(seed_a in prop::collection::vec(0u32..16, 2), seed_b in prop::collection::vec(0u32..16, 2)) {
        let spec = paper_preset(2).unwrap();
        let a = spec.encode(&seed_a).unwrap();
        let b = spec.encode(&seed_b).unwrap();
        prop_assert!(spec.contains(&a));
        prop_assert!(spec.contains(&add_words(&a, &b)));
        let dual = spec.dual().unwrap();
        for row in dual.genmat().to_rows() {
            prop_assert_eq!(spec.inner(&a, &row), 0);
        }
        let folded = spec.fold(&a).unwrap();
        prop_assert_eq!(spec.unfold(&folded).unwrap(), a.clone());
        prop_assert_eq!(spec.from_symbol_ranks(&spec.symbol_ranks(&a)), a);
    }

    #[test]
    fn dual_decoder_corrects_within_radius(
        msg in prop::collection::vec(0u32..64, 56),
        pos in 0usize..63,
        val in 1u32..64,
    ) {
        let spec = paper_preset(3).unwrap();
        let dec = DualDecoder::new(&spec, 1.0 / 64.0, 0.01, &Budget::default()).unwrap();
        prop_assert_eq!(dec.params().radius_unfolded, 1);
        let dual = dec.dual();
        let x = dual.encode(&msg[..dual.message_len()]).unwrap();
        let mut z = x.clone();
        z[pos] ^= val;
        prop_assert_eq!(hamming_distance(&x, &z), 1);
        prop_assert_eq!(dec.decode(&z), Some(x));
    }

    #[test]
    fn hash_is_linear_in_key(k1 in prop::collection::vec(0u32..16, 3), k2 in prop::collection::vec(0u32..16, 3), rank in 0u64..4, i in 0usize..4) {
        let fam = HashFamily::new(4, 3, 4, 4).unwrap();
        let sum: Vec<u32> = k1.iter().zip(&k2).map(|(a, b)| a ^ b).collect();
        let h = |k: &[u32]| fam.eval(k, rank, i).unwrap();
        prop_assert_eq!(h(&sum), h(&k1) ^ h(&k2));
    }

    #[test]
    fn huffman_within_one_bit(weights in prop::collection::vec(1u32..1000, 1..40)) {
        let total: u32 = weights.iter().sum();
        let dist: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
        let code = huffman(&dist).unwrap();
        let h = entropy(&dist);
        let l = expected_length(&code, &dist);
        prop_assert!(l >= h - 1e-9 && l <= h + 1.0 + 1e-9);
        for (i, a) in code.iter().enumerate() {
            for b in &code[i + 1..] {
                prop_assert!(!a.starts_with(b.as_str()) && !b.starts_with(a.as_str()));
            }
        }
    }

    #[test]
    fn bias_text_round_trip(num in 1u64..100, extra in 0u64..100) {
        let b = Bias::new(num, num + extra).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: Bias = serde_json::from_str(&text).unwrap();
        prop_assert!((back.value() - b.value()).abs() < 1e-15);
    }
}
