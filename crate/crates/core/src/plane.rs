//! Points, lines and Baer sublines of `PG(2, q^2)`.
//!
//! Both points and lines are normalized triples whose leftmost nonzero
//! coordinate is 1. Each also has a dense index: affine triples `(1, y, z)`
//! first in row-major order, then `(0, 1, z)`, then `(0, 0, 1)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};

fn normalize(ctx: &FieldCtx, v: [Felt; 3]) -> Result<[Felt; 3]> {
    let lead = v
        .iter()
        .copied()
        .find(|c| !c.is_zero())
        .ok_or_else(|| Error::InvalidArgument("all-zero homogeneous triple".into()))?;
    if lead == Felt::ONE {
        return Ok(v);
    }
    let inv = ctx.inv(lead)?;
    Ok(v.map(|c| ctx.mul(c, inv)))
}

fn triple_index(ctx: &FieldCtx, v: &[Felt; 3]) -> usize {
    let n = ctx.big_order() as usize;
    if v[0] == Felt::ONE {
        v[1].index() * n + v[2].index()
    } else if v[1] == Felt::ONE {
        n * n + v[2].index()
    } else {
        n * n + n
    }
}

fn triple_from_index(ctx: &FieldCtx, i: usize) -> [Felt; 3] {
    let n = ctx.big_order() as usize;
    if i < n * n {
        [Felt::ONE, Felt::new((i / n) as u32), Felt::new((i % n) as u32)]
    } else if i < n * n + n {
        [Felt::ZERO, Felt::ONE, Felt::new((i - n * n) as u32)]
    } else {
        [Felt::ZERO, Felt::ZERO, Felt::ONE]
    }
}

/// `q^4 + q^2 + 1`, the number of points (and lines) of `PG(2, q^2)`.
pub fn plane_size(ctx: &FieldCtx) -> usize {
    let n = ctx.big_order() as usize;
    n * n + n + 1
}

fn cross(ctx: &FieldCtx, a: &[Felt; 3], b: &[Felt; 3]) -> [Felt; 3] {
    [
        ctx.mul(a[1], b[2]) + ctx.mul(a[2], b[1]),
        ctx.mul(a[2], b[0]) + ctx.mul(a[0], b[2]),
        ctx.mul(a[0], b[1]) + ctx.mul(a[1], b[0]),
    ]
}

#[inline]
fn dot(ctx: &FieldCtx, a: &[Felt; 3], b: &[Felt; 3]) -> Felt {
    ctx.mul(a[0], b[0]) + ctx.mul(a[1], b[1]) + ctx.mul(a[2], b[2])
}

/// A point of `PG(2, q^2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProjPoint {
    coords: [Felt; 3],
}

/// A line of `PG(2, q^2)` in dual coordinates `[a, b, c]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProjLine {
    coords: [Felt; 3],
}

macro_rules! triple_type {
    ($ty:ident, $open:literal, $close:literal) => {
        impl $ty {
            pub fn new(ctx: &FieldCtx, coords: [Felt; 3]) -> Result<Self> {
                Ok($ty { coords: normalize(ctx, coords)? })
            }

            /// Wraps coordinates that are already normalized.
            pub(crate) const fn from_normalized(coords: [Felt; 3]) -> Self {
                $ty { coords }
            }

            pub fn coords(&self) -> [Felt; 3] {
                self.coords
            }

            pub fn index(&self, ctx: &FieldCtx) -> usize {
                triple_index(ctx, &self.coords)
            }

            pub fn from_index(ctx: &FieldCtx, i: usize) -> Self {
                $ty { coords: triple_from_index(ctx, i) }
            }

            pub fn all(ctx: &FieldCtx) -> impl Iterator<Item = $ty> + '_ {
                (0..plane_size(ctx)).map(move |i| $ty::from_index(ctx, i))
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let [a, b, c] = self.coords;
                write!(f, concat!($open, "{:x}, {:x}, {:x}", $close), a.bits(), b.bits(), c.bits())
            }
        }
    };
}

triple_type!(ProjPoint, "(", ")");
triple_type!(ProjLine, "[", "]");

impl ProjPoint {
    /// `(1, y, z)`.
    pub const fn affine(y: Felt, z: Felt) -> Self {
        ProjPoint { coords: [Felt::ONE, y, z] }
    }

    /// `P_∞ = (0, 0, 1)`.
    pub const fn p_inf() -> Self {
        ProjPoint { coords: [Felt::ZERO, Felt::ZERO, Felt::ONE] }
    }

    pub fn is_affine(&self) -> bool {
        self.coords[0] == Felt::ONE
    }

    pub fn as_line(&self) -> ProjLine {
        ProjLine { coords: self.coords }
    }
}

impl ProjLine {
    /// `ℓ_∞ = [1, 0, 0]`, the line `x = 0`.
    pub const fn at_infinity() -> Self {
        ProjLine { coords: [Felt::ONE, Felt::ZERO, Felt::ZERO] }
    }

    pub fn as_point(&self) -> ProjPoint {
        ProjPoint { coords: self.coords }
    }
}

#[inline]
pub fn incident(ctx: &FieldCtx, p: &ProjPoint, l: &ProjLine) -> bool {
    dot(ctx, &p.coords, &l.coords).is_zero()
}

pub fn line_through(ctx: &FieldCtx, p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    if p == q {
        return Err(Error::EqualArguments);
    }
    ProjLine::new(ctx, cross(ctx, &p.coords, &q.coords))
}

pub fn meet(ctx: &FieldCtx, l: &ProjLine, m: &ProjLine) -> Result<ProjPoint> {
    if l == m {
        return Err(Error::EqualArguments);
    }
    ProjPoint::new(ctx, cross(ctx, &l.coords, &m.coords))
}

/// Calls `f` on each of the `q^2 + 1` points of a line, using a single
/// inversion per line.
pub fn for_each_point_on_line(ctx: &FieldCtx, l: &ProjLine, mut f: impl FnMut(ProjPoint)) {
    let [a, b, c] = l.coords;
    let one = Felt::ONE;
    let zero = Felt::ZERO;
    if a == one {
        if !c.is_zero() {
            // z = (1 + b·y) / c
            let cinv = ctx.inv(c).expect("nonzero");
            for y in ctx.elements() {
                f(ProjPoint::affine(y, ctx.mul(one + ctx.mul(b, y), cinv)));
            }
            f(ProjPoint::from_normalized([zero, one, ctx.mul(b, cinv)]));
        } else if !b.is_zero() {
            let y = ctx.inv(b).expect("nonzero");
            for z in ctx.elements() {
                f(ProjPoint::affine(y, z));
            }
            f(ProjPoint::p_inf());
        } else {
            for z in ctx.elements() {
                f(ProjPoint::from_normalized([zero, one, z]));
            }
            f(ProjPoint::p_inf());
        }
    } else if b == one {
        // y = c·z
        for z in ctx.elements() {
            f(ProjPoint::affine(ctx.mul(c, z), z));
        }
        if c.is_zero() {
            f(ProjPoint::p_inf());
        } else {
            f(ProjPoint::from_normalized([zero, one, ctx.inv(c).expect("nonzero")]));
        }
    } else {
        for y in ctx.elements() {
            f(ProjPoint::affine(y, zero));
        }
        f(ProjPoint::from_normalized([zero, one, zero]));
    }
}

/// The `q^2 + 1` points of a line.
pub fn points_on_line(ctx: &FieldCtx, l: &ProjLine) -> Vec<ProjPoint> {
    let mut out = Vec::with_capacity(ctx.big_order() as usize + 1);
    for_each_point_on_line(ctx, l, |p| out.push(p));
    out
}

/// The `q^2 + 1` lines through a point.
pub fn lines_through(ctx: &FieldCtx, p: &ProjPoint) -> Vec<ProjLine> {
    points_on_line(ctx, &p.as_line()).iter().map(|x| x.as_line()).collect()
}

/// Solves `target = α·a + β·b` for `a, b` independent. `None` if `target`
/// is outside their span.
fn span_coefficients(
    ctx: &FieldCtx,
    a: &[Felt; 3],
    b: &[Felt; 3],
    target: &[Felt; 3],
) -> Option<(Felt, Felt)> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let det = ctx.mul(a[i], b[j]) + ctx.mul(a[j], b[i]);
        if det.is_zero() {
            continue;
        }
        let inv = ctx.inv(det).ok()?;
        let alpha = ctx.mul(ctx.mul(target[i], b[j]) + ctx.mul(target[j], b[i]), inv);
        let beta = ctx.mul(ctx.mul(a[i], target[j]) + ctx.mul(a[j], target[i]), inv);
        let k = 3 - i - j;
        let ok = ctx.mul(alpha, a[k]) + ctx.mul(beta, b[k]) == target[k];
        return ok.then_some((alpha, beta));
    }
    None
}

/// The unique Baer subline through three distinct collinear points.
///
/// The common line is coordinatized with `p0 ↦ (1,0)`, `p1 ↦ (0,1)`,
/// `p2 ↦ (1,1)`; the subline is the preimage of `{(1,t) : t ∈ F_q} ∪ {(0,1)}`.
pub fn baer_subline(
    ctx: &FieldCtx,
    p0: &ProjPoint,
    p1: &ProjPoint,
    p2: &ProjPoint,
) -> Result<BTreeSet<ProjPoint>> {
    if p0 == p1 || p0 == p2 || p1 == p2 {
        return Err(Error::EqualArguments);
    }
    let (alpha, beta) =
        span_coefficients(ctx, &p0.coords, &p1.coords, &p2.coords).ok_or(Error::NotCollinear)?;
    let a = p0.coords.map(|c| ctx.mul(c, alpha));
    let b = p1.coords.map(|c| ctx.mul(c, beta));
    let mut out = BTreeSet::new();
    out.insert(*p1);
    for &t in ctx.subfield() {
        let w = [
            a[0] + ctx.mul(t, b[0]),
            a[1] + ctx.mul(t, b[1]),
            a[2] + ctx.mul(t, b[2]),
        ];
        out.insert(ProjPoint::new(ctx, w)?);
    }
    Ok(out)
}

/// Whether a set of `q + 1` points is a Baer subline.
pub fn is_baer_subline(ctx: &FieldCtx, set: &BTreeSet<ProjPoint>) -> Result<bool> {
    let expected = ctx.q() as usize + 1;
    if set.len() != expected {
        return Err(Error::Cardinality { expected, found: set.len() });
    }
    let mut it = set.iter();
    let (p0, p1, p2) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    match baer_subline(ctx, p0, p1, p2) {
        Ok(sub) => Ok(&sub == set),
        Err(Error::NotCollinear) => Ok(false),
        Err(e) => Err(e),
    }
}
