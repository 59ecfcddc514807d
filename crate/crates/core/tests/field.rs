use bt_core::{Felt, FieldCtx};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn e2_axioms_on_random_triples() {
    let ctx = FieldCtx::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let n = ctx.big_order();
    for _ in 0..1_000_000 {
        let [x, y, z] = [(); 3].map(|_| Felt::new(rng.gen_range(0..n)));
        assert_eq!(ctx.mul(ctx.mul(x, y), z), ctx.mul(x, ctx.mul(y, z)));
        assert_eq!(ctx.mul(x, y + z), ctx.mul(x, y) + ctx.mul(x, z));
        assert_eq!(ctx.mul(x, y), ctx.mul(y, x));
        assert_eq!(ctx.mul(x, y), ctx.mul_clmul(x, y));
    }
}

#[test]
fn e1_axioms_exhaustive() {
    let ctx = FieldCtx::new(1).unwrap();
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
fn e3_uses_clmul() {
    let ctx = FieldCtx::new(3).unwrap();
    assert!(!ctx.has_mul_table());
    assert_eq!(ctx.q(), 128);
    let eps = ctx.epsilon();
    assert_eq!(ctx.frobenius(eps, 7), eps + Felt::ONE);
    assert_eq!(ctx.trace_abs(ctx.delta(), false).unwrap(), 1);
}

proptest! {
    #[test]
    fn e2_inverse_and_frobenius(bits in 1u32..1024) {
        let ctx = FieldCtx::new(2).unwrap();
        let x = Felt::new(bits);
        prop_assert_eq!(ctx.mul(x, ctx.inv(x).unwrap()), Felt::ONE);
        prop_assert_eq!(ctx.frobenius(ctx.frobenius(x, 1), 9), x);
        let (a, b) = ctx.decompose(x);
        prop_assert!(ctx.in_subfield(a) && ctx.in_subfield(b));
        prop_assert_eq!(ctx.recompose(a, b), x);
    }
}
