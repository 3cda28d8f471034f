//! Arithmetic in GF(2^s) for 1 <= s <= 32.
//!
//! Elements are polynomial-basis integers: bit `j` of the value is the
//! coefficient of `x^j`. The modulus is an irreducible polynomial of degree
//! exactly `s` encoded the same way (so bit `s` is always set).
//!
//! Fields with `s <= 16` carry log/exp tables built from the smallest
//! generator; larger fields fall back to carry-less multiplication.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped moduli. Every other degree uses the smallest irreducible polynomial.
const DEFAULT_MODULI: &[(u32, u64)] = &[
    (1, 0b11),
    (2, 0b111),
    (4, 0x13),
    (6, 0x43),
    (8, 0x11d),
    (12, 0x1053),
];

const TABLE_MAX_S: u32 = 16;

/// A field element, checked against a [`FieldCtx`] when used through
/// [`FieldCtx::field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(pub u32);

/// A multiplicative generator of `GF(q)^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub gamma: FieldElem,
}

impl Generator {
    pub fn value(self) -> u32 {
        self.gamma.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow,
}

/// Second operand of [`FieldCtx::field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Elem(FieldElem),
    Exponent(u64),
    None,
}

/// On-disk description of a field: `{"s": int, "modulus": int}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDesc {
    pub s: u32,
    pub modulus: u64,
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Immutable arithmetic context for GF(2^s).
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "FieldDesc", into = "FieldDesc")]
pub struct FieldCtx {
    s: u32,
    modulus: u64,
    trace_mask: u32,
    generator: u32,
    tables: Option<Arc<Tables>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}, modulus={:#x})", self.s, self.modulus)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl TryFrom<FieldDesc> for FieldCtx {
    type Error = Error;
    fn try_from(d: FieldDesc) -> Result<Self> {
        FieldCtx::new(d.s, d.modulus)
    }
}

impl From<FieldCtx> for FieldDesc {
    fn from(ctx: FieldCtx) -> Self {
        ctx.desc()
    }
}

impl FieldCtx {
    pub fn new(s: u32, modulus: u64) -> Result<Self> {
        if s == 0 || s > 32 {
            return Err(Error::InvalidModulus { s, modulus, reason: "degree must be in 1..=32" });
        }
        if poly_degree(modulus) != Some(s) {
            return Err(Error::InvalidModulus { s, modulus, reason: "degree differs from s" });
        }
        if !is_irreducible(modulus) {
            return Err(Error::InvalidModulus { s, modulus, reason: "not irreducible" });
        }
        let mut ctx = FieldCtx { s, modulus, trace_mask: 0, generator: 1, tables: None };
        ctx.trace_mask = (0..s).fold(0u32, |mask, j| mask | (ctx.trace_direct(1 << j) << j));
        ctx.generator = ctx.search_generator();
        if s <= TABLE_MAX_S {
            ctx.tables = Some(Arc::new(ctx.build_tables()));
        }
        Ok(ctx)
    }

    /// Field of degree `s` with the shipped modulus, or the smallest
    /// irreducible polynomial of that degree when none is shipped.
    pub fn with_default_modulus(s: u32) -> Result<Self> {
        let modulus = DEFAULT_MODULI
            .iter()
            .find(|(d, _)| *d == s)
            .map(|&(_, m)| m)
            .or_else(|| smallest_irreducible(s))
            .ok_or(Error::InvalidModulus { s, modulus: 0, reason: "degree must be in 1..=32" })?;
        Self::new(s, modulus)
    }

    pub fn desc(&self) -> FieldDesc {
        FieldDesc { s: self.s, modulus: self.modulus }
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Field order `q = 2^s`.
    pub fn order(&self) -> u64 {
        1u64 << self.s
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as u64) < self.order()
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        poly_mulmod(a as u64, b as u64, self.modulus) as u32
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::InvOfZero);
        }
        Ok(match &self.tables {
            Some(t) => {
                let n = self.order() as u32 - 1;
                t.exp[((n - t.log[a as usize]) % n) as usize]
            }
            None => self.pow(a, self.order() - 2),
        })
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace to F_2 via the precomputed linear mask.
    #[inline]
    pub fn trace(&self, x: u32) -> u32 {
        (x & self.trace_mask).count_ones() & 1
    }

    /// `x + x^2 + x^4 + ... + x^(2^(s-1))`, evaluated by repeated squaring.
    pub fn trace_direct(&self, x: u32) -> u32 {
        let mut acc = 0u32;
        let mut y = x;
        for _ in 0..self.s {
            acc ^= y;
            y = self.mul_slow(y, y);
        }
        debug_assert!(acc <= 1, "trace must land in F_2");
        acc
    }

    /// Smallest element of multiplicative order `q - 1`.
    pub fn find_generator(&self) -> Generator {
        Generator { gamma: FieldElem(self.generator) }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: u32) -> Result<u64> {
        if a == 0 {
            return Err(Error::InvOfZero);
        }
        let n = self.order() - 1;
        let mut ord = n;
        for p in prime_factors(n) {
            while ord.is_multiple_of(p) && self.pow_slow(a, ord / p) == 1 {
                ord /= p;
            }
        }
        Ok(ord)
    }

    /// Checked arithmetic on tagged elements.
    pub fn field_arith(&self, op: FieldOp, a: FieldElem, b: Operand) -> Result<FieldElem> {
        self.check(a)?;
        let out = match (op, b) {
            (FieldOp::Add, Operand::Elem(b)) => {
                self.check(b)?;
                self.add(a.0, b.0)
            }
            (FieldOp::Mul, Operand::Elem(b)) => {
                self.check(b)?;
                self.mul(a.0, b.0)
            }
            (FieldOp::Inv, _) => self.inv(a.0)?,
            (FieldOp::Pow, Operand::Exponent(e)) => self.pow(a.0, e),
            (op, b) => {
                return Err(Error::InvalidParams(format!("operand {b:?} does not fit {op:?}")))
            }
        };
        Ok(FieldElem(out))
    }

    fn check(&self, a: FieldElem) -> Result<()> {
        if self.contains(a.0) {
            Ok(())
        } else {
            Err(Error::DomainMismatch { value: a.0 as u64, s: self.s })
        }
    }

    fn pow_slow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    fn search_generator(&self) -> u32 {
        let n = self.order() - 1;
        let primes = prime_factors(n);
        (1..self.order() as u32)
            .find(|&g| primes.iter().all(|&p| self.pow_slow(g, n / p) != 1))
            .expect("GF(q)^* is cyclic")
    }

    fn build_tables(&self) -> Tables {
        let q = self.order() as usize;
        let n = q - 1;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x;
            log[x as usize] = i as u32;
            x = self.mul_slow(x, self.generator);
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }
        Tables { exp, log }
    }
}

/// Distinct prime factors in increasing order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn poly_degree(a: u64) -> Option<u32> {
    (a != 0).then(|| 63 - a.leading_zeros())
}

fn poly_mulmod(a: u64, b: u64, m: u64) -> u64 {
    let d = poly_degree(m).expect("nonzero modulus");
    let mut prod: u128 = 0;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            prod ^= (a as u128) << i;
        }
    }
    let m = m as u128;
    for bit in (d..128).rev() {
        if (prod >> bit) & 1 == 1 {
            prod ^= m << (bit - d);
        }
    }
    prod as u64
}

fn poly_mod(mut a: u64, m: u64) -> u64 {
    let d = poly_degree(m).expect("nonzero modulus");
    while let Some(da) = poly_degree(a) {
        if da < d {
            break;
        }
        a ^= m << (da - d);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin's irreducibility test over F_2.
pub fn is_irreducible(f: u64) -> bool {
    let Some(d) = poly_degree(f) else { return false };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x = 0b10u64;
    // x^(2^i) mod f
    let frob = |i: u32| (0..i).fold(x, |acc, _| poly_mulmod(acc, acc, f));
    if frob(d) != poly_mod(x, f) {
        return false;
    }
    prime_factors(d as u64).into_iter().all(|p| {
        let h = frob(d / p as u32) ^ x;
        poly_gcd(f, poly_mod(h, f)) == 1
    })
}

pub fn smallest_irreducible(s: u32) -> Option<u64> {
    if s == 0 || s > 32 {
        return None;
    }
    let lo = 1u64 << s;
    (lo..lo << 1).find(|&f| is_irreducible(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf4() -> FieldCtx {
        FieldCtx::new(2, 0b111).unwrap()
    }

    #[test]
    fn gf4_products() {
        let f = gf4();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
        for a in 0..4 {
            assert_eq!(f.mul(a, 1), a);
        }
    }

    #[test]
    fn gf4_trace_values() {
        let f = gf4();
        assert_eq!(f.trace(0), 0);
        assert_eq!(f.trace(1), 0);
        assert_eq!(f.trace(2), 1);
        for x in 0..4 {
            assert_eq!(f.trace(x), f.trace_direct(x));
        }
    }

    #[test]
    fn generators() {
        assert_eq!(gf4().find_generator().value(), 2);
        assert_eq!(FieldCtx::new(1, 0b11).unwrap().find_generator().value(), 1);
        let f16 = FieldCtx::new(4, 0x13).unwrap();
        assert_eq!(f16.find_generator().value(), 2);
        assert_eq!(f16.order_of(2).unwrap(), 15);
    }

    #[test]
    fn generator_order_is_full() {
        for s in [2, 3, 4, 5, 6, 8, 12, 20] {
            let f = FieldCtx::with_default_modulus(s).unwrap();
            let g = f.find_generator().value();
            let n = f.order() - 1;
            assert_eq!(f.pow(g, n), 1);
            for p in prime_factors(n) {
                assert_ne!(f.pow(g, n / p), 1, "s={s}");
            }
            // smallest such element
            assert!((1..g).all(|h| f.order_of(h).unwrap() < n));
        }
    }

    #[test]
    fn shipped_moduli_are_irreducible() {
        for &(s, m) in DEFAULT_MODULI {
            assert!(FieldCtx::new(s, m).is_ok(), "s={s}");
        }
        assert!(!is_irreducible(0b101)); // x^2 + 1 = (x+1)^2
        assert!(FieldCtx::new(4, 0x11).is_err());
        assert!(FieldCtx::new(3, 0x13).is_err());
    }

    #[test]
    fn inv_of_zero_and_domain_checks() {
        let f = gf4();
        assert_eq!(f.inv(0), Err(Error::InvOfZero));
        assert_eq!(
            f.field_arith(FieldOp::Mul, FieldElem(5), Operand::Elem(FieldElem(1))),
            Err(Error::DomainMismatch { value: 5, s: 2 })
        );
        assert_eq!(
            f.field_arith(FieldOp::Pow, FieldElem(2), Operand::Exponent(3)),
            Ok(FieldElem(1))
        );
    }

    #[test]
    fn table_and_slow_paths_agree() {
        let f = FieldCtx::with_default_modulus(8).unwrap();
        for a in 0..256u32 {
            for b in (0..256u32).step_by(7) {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
        let big = FieldCtx::with_default_modulus(24).unwrap();
        let a = 0x123456;
        assert_eq!(big.mul(a, big.inv(a).unwrap()), 1);
    }

    #[test]
    fn desc_roundtrip() {
        let f = FieldCtx::with_default_modulus(6).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"s":6,"modulus":67}"#);
        let back: FieldCtx = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<FieldCtx>(r#"{"s":2,"modulus":5}"#).is_err());
    }
}
