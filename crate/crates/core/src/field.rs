//! Arithmetic in `F_q ⊂ F_{q^2}` for `q = 2^(2e+1)`.
//!
//! Elements of `F_{q^2}` are bit vectors of polynomial-basis coefficients
//! modulo a fixed irreducible polynomial of degree `4e + 2`. The subfield
//! `F_q` is not a separate type: it is the set of elements fixed by `x ↦ x^q`.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest extension degree for which a full multiplication table is built.
const MUL_TABLE_MAX_DEGREE: u32 = 12;

/// Lowest-weight irreducible polynomials of degree `4e + 2`, indexed by `e - 1`.
/// Ties are broken by smallest integer value.
const MODULI: [u32; 3] = [
    0x43,   // x^6 + x + 1
    0x409,  // x^10 + x^3 + 1
    0x4021, // x^14 + x^5 + 1
];

/// An element of `F_{q^2}` as its coefficient bit vector.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Felt(u32);

impl Felt {
    pub const ZERO: Felt = Felt(0);
    pub const ONE: Felt = Felt(1);

    #[inline]
    pub const fn new(bits: u32) -> Self {
        Felt(bits)
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for Felt {
    type Output = Felt;
    #[inline]
    fn add(self, rhs: Felt) -> Felt {
        Felt(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for Felt {
    #[inline]
    fn add_assign(&mut self, rhs: Felt) {
        self.0 ^= rhs.0;
    }
}

// Characteristic two.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Felt {
    type Output = Felt;
    #[inline]
    fn sub(self, rhs: Felt) -> Felt {
        Felt(self.0 ^ rhs.0)
    }
}

impl fmt::Debug for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Felt({:#x})", self.0)
    }
}

impl fmt::Display for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl Serialize for Felt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Carry-less multiplication of two polynomials of degree `< degree`,
/// reduced modulo `modulus`.
fn clmul_reduce(mut a: u32, mut b: u32, modulus: u32, degree: u32) -> u32 {
    let top = 1u32 << degree;
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= modulus;
        }
    }
    acc
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
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

/// Immutable arithmetic context for `F_q ⊂ F_{q^2}`, `q = 2^(2e+1)`.
pub struct FieldCtx {
    e: u32,
    degree: u32,
    q: u32,
    big_order: u32,
    modulus: u32,
    epsilon: Felt,
    delta: Felt,
    sigma_exp: u32,
    mul_table: Option<Vec<u16>>,
    exp: Vec<u32>,
    log: Vec<u32>,
    subfield: Vec<Felt>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("e", &self.e)
            .field("q", &self.q)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("epsilon", &self.epsilon)
            .field("delta", &self.delta)
            .finish()
    }
}

impl FieldCtx {
    /// Builds the context for `q = 2^(2e+1)`.
    ///
    /// `ε` is the first element in index order with `ε^q = ε + 1` whose
    /// `δ = ε² + ε` differs from 1 and has absolute trace 1.
    pub fn new(e: u32) -> Result<Self> {
        if e == 0 || e as usize > MODULI.len() {
            return Err(Error::UnsupportedExtension(e));
        }
        let modulus = MODULI[e as usize - 1];
        let degree = 4 * e + 2;
        let q = 1u32 << (2 * e + 1);
        let big_order = 1u32 << degree;

        let mul_table = (degree <= MUL_TABLE_MAX_DEGREE).then(|| {
            let mut table = vec![0u16; (big_order as usize) * (big_order as usize)];
            for x in 0..big_order {
                for y in x..big_order {
                    let p = clmul_reduce(x, y, modulus, degree) as u16;
                    table[((x << degree) | y) as usize] = p;
                    table[((y << degree) | x) as usize] = p;
                }
            }
            table
        });

        let (exp, log) = Self::log_tables(modulus, degree);

        let mut ctx = FieldCtx {
            e,
            degree,
            q,
            big_order,
            modulus,
            epsilon: Felt::ZERO,
            delta: Felt::ZERO,
            sigma_exp: 1 << (e + 1),
            mul_table,
            exp,
            log,
            subfield: Vec::new(),
        };
        ctx.subfield = ctx.elements().filter(|&x| ctx.frobenius(x, 2 * e + 1) == x).collect();
        debug_assert_eq!(ctx.subfield.len(), q as usize);

        let (epsilon, delta) = ctx
            .elements()
            .find_map(|x| {
                if ctx.frobenius(x, 2 * e + 1) != x + Felt::ONE {
                    return None;
                }
                let delta = ctx.mul(x, x) + x;
                (delta != Felt::ONE && ctx.trace_abs(delta, false).ok()? == 1).then_some((x, delta))
            })
            .ok_or(Error::NoEpsilon(e))?;
        ctx.epsilon = epsilon;
        ctx.delta = delta;
        Ok(ctx)
    }

    fn log_tables(modulus: u32, degree: u32) -> (Vec<u32>, Vec<u32>) {
        let n = (1u32 << degree) - 1;
        let factors = prime_factors(n);
        let pow = |mut base: u32, mut k: u32| {
            let mut acc = 1u32;
            while k != 0 {
                if k & 1 != 0 {
                    acc = clmul_reduce(acc, base, modulus, degree);
                }
                base = clmul_reduce(base, base, modulus, degree);
                k >>= 1;
            }
            acc
        };
        let generator = (2..=n)
            .find(|&g| factors.iter().all(|&p| pow(g, n / p) != 1))
            .expect("multiplicative group of a field is cyclic");
        let mut exp = vec![0u32; 2 * n as usize];
        let mut log = vec![0u32; n as usize + 1];
        let mut cur = 1u32;
        for i in 0..n {
            exp[i as usize] = cur;
            exp[(i + n) as usize] = cur;
            log[cur as usize] = i;
            cur = clmul_reduce(cur, generator, modulus, degree);
        }
        (exp, log)
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Extension degree of `F_{q^2}` over `F_2`, i.e. `4e + 2`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn big_order(&self) -> u32 {
        self.big_order
    }

    /// Modulus polynomial including its leading term.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn epsilon(&self) -> Felt {
        self.epsilon
    }

    pub fn delta(&self) -> Felt {
        self.delta
    }

    /// `σ = 2^(e+1)`.
    pub fn sigma_exp(&self) -> u32 {
        self.sigma_exp
    }

    pub fn has_mul_table(&self) -> bool {
        self.mul_table.is_some()
    }

    /// All elements of `F_{q^2}` in index order.
    pub fn elements(&self) -> impl Iterator<Item = Felt> + Clone + '_ {
        (0..self.big_order).map(Felt)
    }

    /// The subfield `F_q`, in index order.
    pub fn subfield(&self) -> &[Felt] {
        &self.subfield
    }

    pub fn in_subfield(&self, x: Felt) -> bool {
        self.subfield.binary_search(&x).is_ok()
    }

    fn require_subfield(&self, x: Felt) -> Result<()> {
        if self.in_subfield(x) {
            Ok(())
        } else {
            Err(Error::NotInSubfield(x))
        }
    }

    #[inline]
    pub fn add(&self, x: Felt, y: Felt) -> Felt {
        x + y
    }

    #[inline]
    pub fn mul(&self, x: Felt, y: Felt) -> Felt {
        match &self.mul_table {
            Some(t) => Felt(t[((x.0 << self.degree) | y.0) as usize] as u32),
            None => Felt(clmul_reduce(x.0, y.0, self.modulus, self.degree)),
        }
    }

    /// Product via carry-less multiplication, bypassing the table.
    pub fn mul_clmul(&self, x: Felt, y: Felt) -> Felt {
        Felt(clmul_reduce(x.0, y.0, self.modulus, self.degree))
    }

    #[inline]
    pub fn square(&self, x: Felt) -> Felt {
        self.mul(x, x)
    }

    pub fn inv(&self, x: Felt) -> Result<Felt> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.big_order - 1;
        let l = self.log[x.index()];
        Ok(Felt(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, x: Felt, y: Felt) -> Result<Felt> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// `x^n` by square-and-multiply.
    pub fn pow(&self, x: Felt, mut n: u64) -> Felt {
        let mut base = x;
        let mut acc = Felt::ONE;
        while n != 0 {
            if n & 1 != 0 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// `x^n` for a signed exponent, read modulo `q² − 1` on nonzero `x`.
    /// Zero maps to zero for every nonzero exponent.
    pub fn pow_signed(&self, x: Felt, n: i64) -> Felt {
        if x.is_zero() {
            return if n == 0 { Felt::ONE } else { Felt::ZERO };
        }
        let order = (self.big_order - 1) as i64;
        self.pow(x, n.rem_euclid(order) as u64)
    }

    /// `x^(2^k)`, with `k` reduced modulo the extension degree.
    pub fn frobenius(&self, x: Felt, k: u32) -> Felt {
        let mut y = x;
        for _ in 0..(k % self.degree) {
            y = self.mul(y, y);
        }
        y
    }

    /// The whole map `x ↦ x^(2^k)` as a lookup table indexed by element.
    pub fn frobenius_table(&self, k: u32) -> Vec<Felt> {
        self.elements().map(|x| self.frobenius(x, k)).collect()
    }

    /// `x^σ` for `x ∈ F_q`.
    pub fn sigma(&self, x: Felt) -> Result<Felt> {
        self.require_subfield(x)?;
        Ok(self.pow(x, self.sigma_exp as u64))
    }

    /// Inverse of [`FieldCtx::sigma`] on `F_q`, computed as `x^(σ/2)`.
    pub fn sigma_root(&self, x: Felt) -> Result<Felt> {
        self.require_subfield(x)?;
        Ok(self.pow(x, (self.sigma_exp / 2) as u64))
    }

    /// Absolute trace to `F_2`. With `over_big = false` the trace is taken
    /// from `F_q` and `x` must lie there.
    pub fn trace_abs(&self, x: Felt, over_big: bool) -> Result<u8> {
        let terms = if over_big {
            self.degree
        } else {
            self.require_subfield(x)?;
            2 * self.e + 1
        };
        let mut acc = Felt::ZERO;
        let mut y = x;
        for _ in 0..terms {
            acc += y;
            y = self.mul(y, y);
        }
        debug_assert!(acc == Felt::ZERO || acc == Felt::ONE);
        Ok(acc.0 as u8)
    }

    /// Relative trace `x + x^q` onto `F_q`.
    pub fn trace_rel(&self, x: Felt) -> Felt {
        x + self.frobenius(x, 2 * self.e + 1)
    }

    /// Splits `x = x1 + x2·ε` with `x1, x2 ∈ F_q`.
    #[inline]
    pub fn decompose(&self, x: Felt) -> (Felt, Felt) {
        let x2 = self.trace_rel(x);
        (x + self.mul(x2, self.epsilon), x2)
    }

    #[inline]
    pub fn recompose(&self, x1: Felt, x2: Felt) -> Felt {
        x1 + self.mul(x2, self.epsilon)
    }

    /// Exhaustively checks the exponent maps on `F_q` used throughout:
    /// `σ+1, σ+2, σ−1, σ−2` are bijections with inverses
    /// `σ−1, 1−σ/2, σ+1, −(σ/2+1)`.
    pub fn exponent_inverse_check(&self) -> ExponentReport {
        let s = self.sigma_exp as i64;
        let pairs = [(s + 1, s - 1), (s + 2, 1 - s / 2), (s - 1, s + 1), (s - 2, -(s / 2 + 1))];
        let mut report = ExponentReport::default();
        for (forward, inverse) in pairs {
            let mut images: Vec<Felt> =
                self.subfield.iter().map(|&x| self.pow_signed(x, forward)).collect();
            let round_trip = self
                .subfield
                .iter()
                .all(|&x| self.pow_signed(self.pow_signed(x, forward), inverse) == x);
            images.sort_unstable();
            images.dedup();
            let bijective = images.len() == self.subfield.len();
            if !bijective || !round_trip {
                report.violations.push(format!("x^({forward}) with inverse x^({inverse})"));
            }
            report.pairs.push(ExponentPair { forward, inverse, bijective, round_trip });
        }
        let s2 = (self.sigma_exp as u64).pow(2);
        report.sigma_squared_is_squaring_on_subfield =
            self.subfield.iter().all(|&x| self.pow(x, s2) == self.square(x));
        report.sigma_squared_is_squaring_on_big_field =
            self.elements().all(|x| self.pow(x, s2) == self.square(x));
        report
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentPair {
    pub forward: i64,
    pub inverse: i64,
    pub bijective: bool,
    pub round_trip: bool,
}

/// Result of [`FieldCtx::exponent_inverse_check`].
///
/// `x^(σ²) = x²` holds on `F_q` but not on all of `F_{q^2}`; both facts are
/// recorded rather than assumed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExponentReport {
    pub pairs: Vec<ExponentPair>,
    pub violations: Vec<String>,
    pub sigma_squared_is_squaring_on_subfield: bool,
    pub sigma_squared_is_squaring_on_big_field: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx1() -> FieldCtx {
        FieldCtx::new(1).unwrap()
    }

    /// Naive bitwise polynomial product with reduction, independent of the
    /// table and log paths.
    fn naive_mul(a: u32, b: u32, modulus: u32, degree: u32) -> u32 {
        let mut wide = 0u64;
        for i in 0..degree {
            if b >> i & 1 == 1 {
                wide ^= (a as u64) << i;
            }
        }
        for i in (degree..2 * degree).rev() {
            if wide >> i & 1 == 1 {
                wide ^= (modulus as u64) << (i - degree);
            }
        }
        wide as u32
    }

    #[test]
    fn e1_parameters() {
        let ctx = ctx1();
        assert_eq!((ctx.q(), ctx.big_order(), ctx.sigma_exp()), (8, 64, 4));
        assert_eq!(ctx.degree(), 6);
    }

    #[test]
    fn epsilon_matches_independent_scan() {
        // Frozen from a standalone scan of all elements.
        let expected = [(1, 0x22, 0x16), (2, 0xb6, 0x13b)];
        for (e, eps, delta) in expected {
            let ctx = FieldCtx::new(e).unwrap();
            assert_eq!(ctx.epsilon(), Felt::new(eps), "e={e}");
            assert_eq!(ctx.delta(), Felt::new(delta), "e={e}");
        }
    }

    #[test]
    fn epsilon_delta_invariants() {
        for e in 1..=2 {
            let ctx = FieldCtx::new(e).unwrap();
            let (eps, delta) = (ctx.epsilon(), ctx.delta());
            assert_eq!(ctx.frobenius(eps, 2 * e + 1), eps + Felt::ONE);
            assert_eq!(ctx.square(eps), eps + delta);
            assert!(ctx.in_subfield(delta));
            assert_ne!(delta, Felt::ONE);
            assert_eq!(ctx.trace_abs(delta, false).unwrap(), 1);
        }
    }

    #[test]
    fn unsupported_extension() {
        assert!(matches!(FieldCtx::new(0), Err(Error::UnsupportedExtension(0))));
        assert!(matches!(FieldCtx::new(4), Err(Error::UnsupportedExtension(4))));
    }

    #[test]
    fn moduli_are_irreducible() {
        // No factor of degree <= d/2 by trial division.
        for (i, &m) in MODULI.iter().enumerate() {
            let d = 4 * (i as u32 + 1) + 2;
            for deg in 1..=d / 2 {
                for f in (1u32 << deg)..(1u32 << (deg + 1)) {
                    let mut r = m;
                    while r != 0 && 31 - r.leading_zeros() >= deg {
                        r ^= f << (31 - r.leading_zeros() - deg);
                    }
                    assert_ne!(r, 0, "modulus {m:#x} divisible by {f:#x}");
                }
            }
        }
    }

    #[test]
    fn f4_reduction() {
        // F_4 = F_2[t]/(t^2+t+1): t*t = t+1.
        assert_eq!(clmul_reduce(0b10, 0b10, 0b111, 2), 0b11);
    }

    #[test]
    fn mul_identity_and_table_agree_with_naive() {
        let ctx = ctx1();
        for x in ctx.elements() {
            assert_eq!(ctx.mul(Felt::ONE, x), x);
            for y in ctx.elements() {
                assert_eq!(ctx.mul(x, y).bits(), naive_mul(x.bits(), y.bits(), 0x43, 6));
            }
        }
    }

    #[test]
    fn inverse_exhaustive_f64() {
        let ctx = ctx1();
        assert!(matches!(ctx.inv(Felt::ZERO), Err(Error::DivisionByZero)));
        for x in ctx.elements().skip(1) {
            assert_eq!(ctx.mul(x, ctx.inv(x).unwrap()), Felt::ONE);
        }
    }

    #[test]
    fn field_axioms_exhaustive_f64() {
        let ctx = ctx1();
        for x in ctx.elements() {
            for y in ctx.elements() {
                for z in ctx.elements() {
                    assert_eq!(ctx.mul(ctx.mul(x, y), z), ctx.mul(x, ctx.mul(y, z)));
                    assert_eq!(ctx.mul(x, y + z), ctx.mul(x, y) + ctx.mul(x, z));
                }
            }
        }
    }

    #[test]
    fn clmul_path_matches_table_e2() {
        let ctx = FieldCtx::new(2).unwrap();
        assert!(ctx.has_mul_table());
        for x in ctx.elements().step_by(7) {
            for y in ctx.elements().step_by(5) {
                assert_eq!(ctx.mul(x, y), ctx.mul_clmul(x, y));
            }
        }
    }

    #[test]
    fn e3_context_without_table() {
        let ctx = FieldCtx::new(3).unwrap();
        assert!(!ctx.has_mul_table());
        assert_eq!(ctx.epsilon(), Felt::new(0x266));
        assert_eq!(ctx.delta(), Felt::new(0x1462));
        assert_eq!(ctx.subfield().len(), 128);
    }

    #[test]
    fn frobenius_cases() {
        let ctx = ctx1();
        let eps = ctx.epsilon();
        assert_eq!(ctx.frobenius(eps, 3), eps + Felt::ONE);
        for x in ctx.elements() {
            assert_eq!(ctx.frobenius(x, 0), x);
            assert_eq!(ctx.frobenius(ctx.frobenius(x, 1), 5), x);
            assert_eq!(ctx.frobenius(x, 6), x);
        }
    }

    #[test]
    fn sigma_on_subfield() {
        let ctx = ctx1();
        assert_eq!(ctx.sigma(Felt::ZERO).unwrap(), Felt::ZERO);
        assert_eq!(ctx.sigma(Felt::ONE).unwrap(), Felt::ONE);
        for &x in ctx.subfield() {
            let s = ctx.sigma(x).unwrap();
            assert_eq!(ctx.sigma(s).unwrap(), ctx.square(x));
            assert_eq!(ctx.sigma_root(s).unwrap(), x);
        }
        assert!(matches!(ctx.sigma(ctx.epsilon()), Err(Error::NotInSubfield(_))));
    }

    #[test]
    fn exponent_pairs() {
        // (σ+2)(1−σ/2) = 6·(−1) ≡ 1 (mod 7) at e = 1.
        assert_eq!((-6i64).rem_euclid(7), 1);
        assert_eq!((6i64 * 6).rem_euclid(7), 1);
        for e in 1..=2 {
            let ctx = FieldCtx::new(e).unwrap();
            let report = ctx.exponent_inverse_check();
            assert!(report.violations.is_empty(), "{:?}", report.violations);
            assert_eq!(report.pairs.len(), 4);
            assert!(report.sigma_squared_is_squaring_on_subfield);
            assert!(!report.sigma_squared_is_squaring_on_big_field);
        }
    }

    #[test]
    fn traces() {
        let ctx = ctx1();
        assert_eq!(ctx.trace_rel(ctx.epsilon()), Felt::ONE);
        assert_eq!(ctx.trace_abs(Felt::ONE, false).unwrap(), 1);
        let half = ctx.pow(ctx.delta(), (ctx.sigma_exp() / 2) as u64);
        assert_eq!(ctx.trace_abs(half, false).unwrap(), 1);
        assert!(matches!(ctx.trace_abs(ctx.epsilon(), false), Err(Error::NotInSubfield(_))));
        for x in ctx.elements() {
            let t = ctx.trace_rel(x);
            assert!(ctx.in_subfield(t));
            assert_eq!(
                ctx.trace_abs(x, true).unwrap(),
                ctx.trace_abs(t, false).unwrap()
            );
        }
    }

    #[test]
    fn decompose_round_trips() {
        let ctx = ctx1();
        assert_eq!(ctx.decompose(Felt::ZERO), (Felt::ZERO, Felt::ZERO));
        assert_eq!(ctx.decompose(ctx.epsilon()), (Felt::ZERO, Felt::ONE));
        for &a in ctx.subfield() {
            for &b in ctx.subfield() {
                assert_eq!(ctx.decompose(ctx.recompose(a, b)), (a, b));
            }
        }
        for x in ctx.elements() {
            let (a, b) = ctx.decompose(x);
            assert!(ctx.in_subfield(a) && ctx.in_subfield(b));
            assert_eq!(ctx.recompose(a, b), x);
        }
    }

    #[test]
    fn pow_signed_reads_negative_exponents() {
        let ctx = ctx1();
        for x in ctx.elements().skip(1) {
            assert_eq!(ctx.pow_signed(x, -1), ctx.inv(x).unwrap());
        }
        assert_eq!(ctx.pow_signed(Felt::ZERO, -3), Felt::ZERO);
    }
}
