//! Feet of points off the unital and how they meet lines.
//!
//! For an affine `P = (1, y1 + y2ε, z1 + z2ε) ∉ U` and a line
//! `[a1 + a2ε, b1 + b2ε, 1]` the feet on the line are the `P_{r,s,t}` with
//!
//! ```text
//! s² + δt² + st + (y1 + b1)s + (y1 + y2δ + b2δ)t + z1 + a1 = 0
//! s^(σ+2) + t^σ + st = b2·s + (b1 + b2)t + a2
//! y2·s + y1·t + z2 = b2·s + (b1 + b2)t + a2
//! ```
//!
//! Lines `αx + y = 0` carry at most one foot, and `ℓ_∞` none.
//! Root counting here is always by evaluation over `F_q`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::collineation::{
    act, group_elements, orbit_representative_with_element, orbit_representatives,
    representative_point, GroupElementUV,
};
use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};
use crate::plane::{incident, line_through, lines_through, ProjLine, ProjPoint};
use crate::unital::{feet_direct, feet_formula, tits_f, UnitalSet};

/// `f(s, t)` for all `s, t ∈ F_q`, indexed by bit patterns.
pub struct TitsTable {
    n: usize,
    f: Vec<Felt>,
}

impl TitsTable {
    pub fn new(ctx: &FieldCtx) -> Self {
        let n = ctx.big_order() as usize;
        let mut f = vec![Felt::ZERO; n * n];
        for &s in ctx.subfield() {
            for &t in ctx.subfield() {
                f[s.bits() as usize * n + t.bits() as usize] = tits_f(ctx, s, t);
            }
        }
        TitsTable { n, f }
    }

    #[inline]
    pub fn get(&self, s: Felt, t: Felt) -> Felt {
        self.f[s.bits() as usize * self.n + t.bits() as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeetSystem {
    pub a1: Felt,
    pub a2: Felt,
    pub b1: Felt,
    pub b2: Felt,
    pub y1: Felt,
    pub y2: Felt,
    pub z1: Felt,
    pub z2: Felt,
}

impl FeetSystem {
    /// Splits an affine point and a line `[α, β, c]` with `c ≠ 0`.
    pub fn new(ctx: &FieldCtx, p: &ProjPoint, l: &ProjLine) -> Result<Self> {
        if !p.is_affine() {
            return Err(Error::PointAtInfinity);
        }
        let [a, b, c] = l.coords();
        if c.is_zero() {
            return Err(Error::InvalidArgument(format!("{l:?} has the form αx + y = 0")));
        }
        let (a1, a2) = ctx.decompose(ctx.div(a, c)?);
        let (b1, b2) = ctx.decompose(ctx.div(b, c)?);
        let [_, y, z] = p.coords();
        let (y1, y2) = ctx.decompose(y);
        let (z1, z2) = ctx.decompose(z);
        Ok(FeetSystem { a1, a2, b1, b2, y1, y2, z1, z2 })
    }

    fn satisfied(&self, ctx: &FieldCtx, s: Felt, t: Felt, f: Felt) -> bool {
        let delta = ctx.delta();
        let imag = ctx.mul(self.b2, s) + ctx.mul(self.b1 + self.b2, t) + self.a2;
        if f != imag || ctx.mul(self.y2, s) + ctx.mul(self.y1, t) + self.z2 != imag {
            return false;
        }
        let t_coeff = self.y1 + ctx.mul(self.y2 + self.b2, delta);
        let conic = ctx.square(s)
            + ctx.mul(delta, ctx.square(t))
            + ctx.mul(s, t)
            + ctx.mul(self.y1 + self.b1, s)
            + ctx.mul(t_coeff, t)
            + self.z1
            + self.a1;
        conic.is_zero()
    }

    /// Common solutions `(s, t) ∈ F_q²` of the three equations.
    pub fn solutions(&self, ctx: &FieldCtx) -> Vec<(Felt, Felt)> {
        self.solutions_by(ctx, |s, t| tits_f(ctx, s, t))
    }

    pub fn solutions_with(&self, ctx: &FieldCtx, table: &TitsTable) -> Vec<(Felt, Felt)> {
        self.solutions_by(ctx, |s, t| table.get(s, t))
    }

    fn solutions_by(&self, ctx: &FieldCtx, f: impl Fn(Felt, Felt) -> Felt) -> Vec<(Felt, Felt)> {
        let mut out = Vec::new();
        for &s in ctx.subfield() {
            for &t in ctx.subfield() {
                if self.satisfied(ctx, s, t, f(s, t)) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    /// `P_{r,s,t}` with `r = a1 + b1·s + b2·δ·t` read off the line.
    pub fn point(&self, ctx: &FieldCtx, s: Felt, t: Felt) -> ProjPoint {
        let r = self.a1 + ctx.mul(self.b1, s) + ctx.mul(ctx.mul(self.b2, ctx.delta()), t);
        crate::unital::bt_point(ctx, r, s, t)
    }
}

fn check_admissible(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> Result<()> {
    if !p.is_affine() {
        return Err(Error::PointAtInfinity);
    }
    if u.contains(ctx, p) {
        return Err(Error::PointOnUnital);
    }
    Ok(())
}

/// `|ℓ ∩ τ_P(U)|` from the equations.
pub fn feet_line_count(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint, l: &ProjLine) -> Result<usize> {
    check_admissible(ctx, u, p)?;
    Ok(count_with(ctx, p, l, |s, t| tits_f(ctx, s, t)))
}

fn count_with(ctx: &FieldCtx, p: &ProjPoint, l: &ProjLine, f: impl Fn(Felt, Felt) -> Felt) -> usize {
    let [a, b, c] = l.coords();
    if !c.is_zero() {
        let sys = FeetSystem::new(ctx, p, l).expect("affine point, c != 0");
        return sys.solutions_by(ctx, f).len();
    }
    if b.is_zero() {
        return 0;
    }
    // y = αx with α = a/b: the only candidate has s + tε = α.
    let (s, t) = ctx.decompose(ctx.div(a, b).expect("b != 0"));
    let [_, y, z] = p.coords();
    let (y1, y2) = ctx.decompose(y);
    let (_, z2) = ctx.decompose(z);
    (f(s, t) == ctx.mul(y2, s) + ctx.mul(y1, t) + z2) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineClass {
    Easy,
    SpecialPencil,
    ThroughP,
}

/// `(y1, z2)` of a canonical point `(1, y1, z2ε)`.
pub fn canonical_parts(ctx: &FieldCtx, p: &ProjPoint) -> Result<(Felt, Felt)> {
    let [x, y, z] = p.coords();
    let (z1, z2) = ctx.decompose(z);
    if x != Felt::ONE || !ctx.in_subfield(y) || !z1.is_zero() {
        return Err(Error::NotCanonical);
    }
    Ok((y, z2))
}

/// Special pencil: the `q` lines `[a1 + z2ε, y1, 1]`.
pub fn classify_line(ctx: &FieldCtx, p: &ProjPoint, l: &ProjLine) -> Result<LineClass> {
    let (y1, z2) = canonical_parts(ctx, p)?;
    let [a, b, c] = l.coords();
    if !c.is_zero() {
        let beta = ctx.div(b, c)?;
        let (_, a2) = ctx.decompose(ctx.div(a, c)?);
        if beta == y1 && a2 == z2 {
            return Ok(LineClass::SpecialPencil);
        }
    }
    if incident(ctx, p, l) {
        return Ok(LineClass::ThroughP);
    }
    Ok(LineClass::Easy)
}

pub fn special_pencil(ctx: &FieldCtx, y1: Felt, z2: Felt) -> Vec<ProjLine> {
    ctx.subfield()
        .iter()
        .map(|&a1| {
            ProjLine::new(ctx, [ctx.recompose(a1, z2), y1, Felt::ONE]).expect("nonzero")
        })
        .collect()
}

/// Common solutions of `s² + δt² + st = y1·t + a1` and
/// `s^(σ+2) + t^σ + st = y1·t + z2`.
pub fn simple_system_solutions(ctx: &FieldCtx, y1: Felt, a1: Felt, z2: Felt) -> BTreeSet<(Felt, Felt)> {
    let mut out = BTreeSet::new();
    for &s in ctx.subfield() {
        for &t in ctx.subfield() {
            let rhs = ctx.mul(y1, t);
            let conic = ctx.square(s) + ctx.mul(ctx.delta(), ctx.square(t)) + ctx.mul(s, t);
            if conic == rhs + a1 && tits_f(ctx, s, t) == rhs + z2 {
                out.insert((s, t));
            }
        }
    }
    out
}

/// The points of `PG(2, q)`, as subfield triples.
pub fn subplane_points(ctx: &FieldCtx) -> Vec<ProjPoint> {
    let sub = ctx.subfield();
    let (o, z) = (Felt::ONE, Felt::ZERO);
    let mut out = Vec::with_capacity(sub.len() * sub.len() + sub.len() + 1);
    for &y in sub {
        for &w in sub {
            out.push(ProjPoint::from_normalized([o, y, w]));
        }
    }
    out.extend(sub.iter().map(|&w| ProjPoint::from_normalized([z, o, w])));
    out.push(ProjPoint::from_normalized([z, z, o]));
    out
}

pub fn subplane_lines(ctx: &FieldCtx) -> Vec<ProjLine> {
    subplane_points(ctx).iter().map(|p| ProjLine::from_normalized(p.coords())).collect()
}

/// The unique point of `PG(2, q)` all of whose lines meet `oval` once.
pub fn nucleus_of(ctx: &FieldCtx, oval: &BTreeSet<ProjPoint>) -> Result<ProjPoint> {
    let expected = ctx.q() as usize + 1;
    if oval.len() != expected {
        return Err(Error::Cardinality { expected, found: oval.len() });
    }
    let lines = subplane_lines(ctx);
    let mut nuclei = subplane_points(ctx).into_iter().filter(|n| {
        lines
            .iter()
            .filter(|l| incident(ctx, n, l))
            .all(|l| oval.iter().filter(|p| incident(ctx, p, l)).count() == 1)
    });
    let n = nuclei.next().ok_or(Error::Cardinality { expected: 1, found: 0 })?;
    match nuclei.count() {
        0 => Ok(n),
        extra => Err(Error::Cardinality { expected: 1, found: 1 + extra }),
    }
}

/// Solutions `(s, t)` of `s^(σ+2) + t^σ + st = y1·t + z2`.
pub fn oval_affine(ctx: &FieldCtx, y1: Felt, z2: Felt) -> BTreeSet<(Felt, Felt)> {
    let mut out = BTreeSet::new();
    for &s in ctx.subfield() {
        for &t in ctx.subfield() {
            if tits_f(ctx, s, t) == ctx.mul(y1, t) + z2 {
                out.insert((s, t));
            }
        }
    }
    out
}

/// The same oval as points `(s, t, 1)` of `PG(2, q)`.
pub fn oval_points(ctx: &FieldCtx, y1: Felt, z2: Felt) -> BTreeSet<ProjPoint> {
    oval_affine(ctx, y1, z2)
        .into_iter()
        .map(|(s, t)| ProjPoint::new(ctx, [s, t, Felt::ONE]).expect("nonzero"))
        .collect()
}

/// Nucleus of the oval `s^(σ+2) + t^σ + st = y1·t + z2` by brute force.
pub fn oval_nucleus(ctx: &FieldCtx, y1: Felt, z2: Felt) -> Result<ProjPoint> {
    for x in [y1, z2] {
        if !ctx.in_subfield(x) {
            return Err(Error::NotInSubfield(x));
        }
    }
    nucleus_of(ctx, &oval_points(ctx, y1, z2))
}

/// `Ax² + By² + Cz² + Dxy + Exz + Fyz` over `F_q`, coefficients in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conic(pub [Felt; 6]);

impl Conic {
    /// `s² + δt² + st + y1·t·w + a1·w²`.
    pub fn feet_conic(ctx: &FieldCtx, y1: Felt, a1: Felt) -> Self {
        let z = Felt::ZERO;
        Conic([Felt::ONE, ctx.delta(), a1, Felt::ONE, z, y1])
    }

    pub fn eval(&self, ctx: &FieldCtx, p: [Felt; 3]) -> Felt {
        let [a, b, c, d, e, f] = self.0;
        let [x, y, z] = p;
        ctx.mul(a, ctx.square(x))
            + ctx.mul(b, ctx.square(y))
            + ctx.mul(c, ctx.square(z))
            + ctx.mul(d, ctx.mul(x, y))
            + ctx.mul(e, ctx.mul(x, z))
            + ctx.mul(f, ctx.mul(y, z))
    }

    pub fn points(&self, ctx: &FieldCtx) -> BTreeSet<ProjPoint> {
        subplane_points(ctx).into_iter().filter(|p| self.eval(ctx, p.coords()).is_zero()).collect()
    }
}

/// In characteristic two every tangent of a nondegenerate conic passes
/// through `(F, E, D)`.
pub fn conic_nucleus(ctx: &FieldCtx, conic: &Conic) -> Result<ProjPoint> {
    if let Some(&x) = conic.0.iter().find(|x| !ctx.in_subfield(**x)) {
        return Err(Error::NotInSubfield(x));
    }
    let [_, _, _, d, e, f] = conic.0;
    let n = ProjPoint::new(ctx, [f, e, d]).map_err(|_| Error::DegenerateConic)?;
    if conic.eval(ctx, n.coords()).is_zero() {
        return Err(Error::DegenerateConic);
    }
    Ok(n)
}

/// `D_σ = {(1, t, t^σ)} ∪ {(0, 0, 1)}`.
pub fn translation_oval(ctx: &FieldCtx) -> BTreeSet<ProjPoint> {
    let mut out: BTreeSet<ProjPoint> = ctx
        .subfield()
        .iter()
        .map(|&t| ProjPoint::new(ctx, [Felt::ONE, t, ctx.sigma(t).expect("subfield")]).unwrap())
        .collect();
    out.insert(ProjPoint::p_inf());
    out
}

/// `|D_σ ∩ C|` for `C : a1x² + a2y² + a3z² + xz = 0`.
pub fn translation_oval_conic_cap(ctx: &FieldCtx, a1: Felt, a2: Felt, a3: Felt) -> Result<usize> {
    if let Some(&x) = [a1, a2, a3].iter().find(|x| !ctx.in_subfield(**x)) {
        return Err(Error::NotInSubfield(x));
    }
    if a2.is_zero() {
        return Err(Error::InvalidArgument("a2 must be nonzero".into()));
    }
    let z = Felt::ZERO;
    let conic = Conic([a1, a2, a3, z, Felt::ONE, z]);
    Ok(translation_oval(ctx).iter().filter(|p| conic.eval(ctx, p.coords()).is_zero()).count())
}

#[derive(Debug, Clone, Serialize)]
pub struct OvalParameterisation {
    pub z2: Felt,
    /// `P_u` for `u` in subfield order, then the closing point.
    pub points: Vec<(Felt, Felt)>,
    pub denominators_nonzero: bool,
    pub distinct: bool,
    pub matches_solutions: bool,
}

/// `P_u = (z2^(1−σ/2)u^σ, z2^(σ/2)(1 + u^σ)) / (1 + u + u^σ)` and
/// `(z2^(1−σ/2), z2^(σ/2))`.
pub fn oval_parameterisation(ctx: &FieldCtx, z2: Felt) -> Result<OvalParameterisation> {
    if !ctx.in_subfield(z2) {
        return Err(Error::NotInSubfield(z2));
    }
    if z2.is_zero() {
        return Err(Error::InvalidArgument("z2 must be nonzero".into()));
    }
    let half = ctx.sigma_exp() as i64 / 2;
    let cs = ctx.pow_signed(z2, 1 - half);
    let ct = ctx.pow_signed(z2, half);
    let mut points = Vec::with_capacity(ctx.q() as usize + 1);
    let mut denominators_nonzero = true;
    for &u in ctx.subfield() {
        let us = ctx.sigma(u)?;
        let den = Felt::ONE + u + us;
        if den.is_zero() {
            denominators_nonzero = false;
            continue;
        }
        let inv = ctx.inv(den)?;
        points.push((ctx.mul(ctx.mul(cs, us), inv), ctx.mul(ctx.mul(ct, Felt::ONE + us), inv)));
    }
    points.push((cs, ct));
    let set: BTreeSet<(Felt, Felt)> = points.iter().copied().collect();
    let brute = oval_affine(ctx, Felt::ZERO, z2);
    Ok(OvalParameterisation {
        z2,
        distinct: set.len() == points.len(),
        matches_solutions: set == brute,
        points,
        denominators_nonzero,
    })
}

/// Coefficients `(c_σ, c_2, c_1, c_0)` of
/// `a1^(σ/2)u^σ + (z2^(σ−1) + δ^(σ/2)z2 + z2^(σ/2) + a1^(σ/2))u² + z2^(σ/2)u + δ^(σ/2)z2 + a1^(σ/2)`.
pub fn membership_polynomial(ctx: &FieldCtx, a1: Felt, z2: Felt) -> [Felt; 4] {
    let half = (ctx.sigma_exp() / 2) as u64;
    let a_h = ctx.pow(a1, half);
    let z_h = ctx.pow(z2, half);
    let d_z = ctx.mul(ctx.pow(ctx.delta(), half), z2);
    let z_s1 = ctx.pow(z2, ctx.sigma_exp() as u64 - 1);
    [a_h, z_s1 + d_z + z_h + a_h, z_h, d_z + a_h]
}

fn eval_sigma_poly(ctx: &FieldCtx, c: [Felt; 4], u: Felt) -> Felt {
    let us = ctx.pow(u, ctx.sigma_exp() as u64);
    ctx.mul(c[0], us) + ctx.mul(c[1], ctx.square(u)) + ctx.mul(c[2], u) + c[3]
}

/// Roots `u ∈ F_q` of the membership polynomial.
pub fn membership_polynomial_roots(ctx: &FieldCtx, a1: Felt, z2: Felt) -> Result<usize> {
    for x in [a1, z2] {
        if !ctx.in_subfield(x) {
            return Err(Error::NotInSubfield(x));
        }
    }
    let c = membership_polynomial(ctx, a1, z2);
    Ok(ctx.subfield().iter().filter(|&&u| eval_sigma_poly(ctx, c, u).is_zero()).count())
}

/// Whether `z^(σ/2) + z + c = 0` has a root in `F_q`.
pub fn menichetti_solvable(ctx: &FieldCtx, c: Felt) -> Result<bool> {
    if !ctx.in_subfield(c) {
        return Err(Error::NotInSubfield(c));
    }
    let half = (ctx.sigma_exp() / 2) as u64;
    Ok(ctx.subfield().iter().any(|&z| (ctx.pow(z, half) + z + c).is_zero()))
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    pub point: ProjPoint,
    pub line: ProjLine,
    pub expected: usize,
    pub count: usize,
    pub feet_on_line: Vec<ProjPoint>,
    pub line_class: LineClass,
    pub verified: bool,
}

fn certify(ctx: &FieldCtx, u: &UnitalSet, p: ProjPoint, l: ProjLine, expected: usize) -> Result<WitnessCertificate> {
    let feet = feet_direct(ctx, u, &p)?;
    let feet_on_line: Vec<ProjPoint> = feet.into_iter().filter(|x| incident(ctx, x, &l)).collect();
    let count = feet_on_line.len();
    Ok(WitnessCertificate {
        point: p,
        line: l,
        expected,
        count,
        feet_on_line,
        line_class: classify_line(ctx, &p, &l)?,
        verified: count == expected,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessThree {
    pub certificate: WitnessCertificate,
    /// The foot with `(s, t) = (1, 1)` lies on the line.
    pub closing_point_on_line: bool,
    /// Roots of `u(δ^(σ/2)u^(σ−1) + 1)`.
    pub root_pair: usize,
}

/// `P = (1, 0, ε)` and `ℓ : (δ + ε)x + z = 0`.
pub fn witness_three(ctx: &FieldCtx, u: &UnitalSet) -> Result<WitnessThree> {
    let eps = ctx.epsilon();
    let p = ProjPoint::affine(Felt::ZERO, eps);
    let l = ProjLine::new(ctx, [ctx.delta() + eps, Felt::ZERO, Felt::ONE])?;
    let certificate = certify(ctx, u, p, l, 3)?;
    let sys = FeetSystem::new(ctx, &p, &l)?;
    let closing = sys.point(ctx, Felt::ONE, Felt::ONE);
    let dh = ctx.pow(ctx.delta(), (ctx.sigma_exp() / 2) as u64);
    let root_pair = ctx
        .subfield()
        .iter()
        .filter(|&&x| {
            let v = ctx.mul(dh, ctx.pow(x, ctx.sigma_exp() as u64 - 1)) + Felt::ONE;
            ctx.mul(x, v).is_zero()
        })
        .count();
    Ok(WitnessThree {
        closing_point_on_line: certificate.feet_on_line.contains(&closing),
        certificate,
        root_pair,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessFour {
    /// `P = (1, 0, δ^(−σ)ε)` and `ℓ = [δ^(−1) + δ^(−2)ε, 0, 1]` as printed.
    pub literal: WitnessCertificate,
    /// The same point with `ℓ = [δ^(−1) + δ^(−σ)ε, 0, 1]`, the special-pencil
    /// line for `a1 = δ^(−1)`, `z2 = δ^(−σ)`.
    pub pencil: WitnessCertificate,
    /// Roots of `δ^(−σ/2)u^σ + (δ^(σ−2) + δ^(−1))u² + δ^(−1)u`.
    pub reduced_roots: usize,
    /// The reduced polynomial equals the membership polynomial at these parameters.
    pub reduced_matches: bool,
    /// `u = 0` and `u = a^(−(1+σ/2))` solve `(a^(σ/2)+1)u^σ + au² + u = 0`,
    /// `a = δ^(σ−1) + 1`.
    pub h1_roots_hold: bool,
}

pub fn witness_four(ctx: &FieldCtx, u: &UnitalSet) -> Result<WitnessFour> {
    let eps = ctx.epsilon();
    let delta = ctx.delta();
    let sigma = ctx.sigma_exp() as i64;
    let dinv = ctx.inv(delta)?;
    let z2 = ctx.pow_signed(delta, -sigma);
    let p = ProjPoint::affine(Felt::ZERO, ctx.mul(z2, eps));
    let literal_line = ProjLine::new(ctx, [ctx.recompose(dinv, ctx.square(dinv)), Felt::ZERO, Felt::ONE])?;
    let pencil_line = ProjLine::new(ctx, [ctx.recompose(dinv, z2), Felt::ZERO, Felt::ONE])?;

    let reduced = [
        ctx.pow_signed(delta, -sigma / 2),
        ctx.pow_signed(delta, sigma - 2) + dinv,
        dinv,
        Felt::ZERO,
    ];
    let reduced_roots =
        ctx.subfield().iter().filter(|&&x| eval_sigma_poly(ctx, reduced, x).is_zero()).count();
    let reduced_matches = membership_polynomial(ctx, dinv, z2) == reduced;

    let a = ctx.pow(delta, sigma as u64 - 1) + Felt::ONE;
    let h1 = [ctx.pow(a, sigma as u64 / 2) + Felt::ONE, a, Felt::ONE, Felt::ZERO];
    let h1_roots_hold = !a.is_zero()
        && eval_sigma_poly(ctx, h1, Felt::ZERO).is_zero()
        && eval_sigma_poly(ctx, h1, ctx.pow_signed(a, -(1 + sigma / 2))).is_zero();

    Ok(WitnessFour {
        literal: certify(ctx, u, p, literal_line, 4)?,
        pencil: certify(ctx, u, p, pencil_line, 4)?,
        reduced_roots,
        reduced_matches,
        h1_roots_hold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Representatives,
    AllPoints,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub k: usize,
    pub point: ProjPoint,
    pub line: ProjLine,
    pub feet_on_line: Vec<ProjPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepresentativeHistogram {
    pub a: Felt,
    pub b: Felt,
    pub points: usize,
    /// Counts per point, `counts[k]` lines meeting the feet in `k` points.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub e: u32,
    pub scope: Scope,
    pub points_scanned: usize,
    pub lines_per_point: usize,
    pub histogram: Vec<u64>,
    pub per_representative: Vec<RepresentativeHistogram>,
    pub witnesses: Vec<Witness>,
    pub max_count: usize,
    pub realized: Vec<usize>,
    pub all_k_realized: bool,
    pub high_counts_on_special_pencil: bool,
    pub easy_bound_holds: bool,
    pub special_pencil_size: usize,
    pub points_with_collinear_feet: usize,
    pub g_invariant: bool,
    pub g_invariance_checks: usize,
}

struct PointScan {
    hist: Vec<u64>,
    witnesses: BTreeMap<usize, Witness>,
    high_on_pencil: bool,
    easy_ok: bool,
}

/// Line-by-line feet counts for `p`, indexed by line index.
fn line_counts(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> (BTreeSet<ProjPoint>, Vec<u8>) {
    let feet = feet_direct(ctx, u, p).expect("admissible");
    let mut counts = vec![0u8; crate::plane::plane_size(ctx)];
    for x in &feet {
        for l in lines_through(ctx, x) {
            counts[l.index(ctx)] += 1;
        }
    }
    (feet, counts)
}

fn histogram_of(counts: &[u8], len: usize) -> Vec<u64> {
    let mut hist = vec![0u64; len];
    for &c in counts {
        hist[c as usize] += 1;
    }
    hist
}

fn scan_point(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> PointScan {
    let (feet, counts) = line_counts(ctx, u, p);
    let hist = histogram_of(&counts, ctx.q() as usize + 2);
    let ((a, b), g) = orbit_representative_with_element(ctx, u, p).expect("admissible");
    let rep = representative_point(ctx, (a, b));
    let to_rep = g.to_collineation(ctx).expect("subfield");
    let mut witnesses = BTreeMap::new();
    let mut high_on_pencil = true;
    let mut easy_ok = true;
    for (i, &c) in counts.iter().enumerate() {
        let c = c as usize;
        let needs_witness = !witnesses.contains_key(&c);
        if c < 3 && !needs_witness {
            continue;
        }
        let line = ProjLine::from_index(ctx, i);
        let on: Vec<ProjPoint> = feet.iter().copied().filter(|x| incident(ctx, x, &line)).collect();
        if c >= 2 {
            // Move the line to the frame of the representative.
            let image = line_through(ctx, &act(ctx, &to_rep, &on[0]), &act(ctx, &to_rep, &on[1]))
                .expect("distinct feet");
            let class = classify_line(ctx, &rep, &image).expect("canonical");
            if c >= 3 && class != LineClass::SpecialPencil {
                high_on_pencil = false;
            }
            if c > 2 && class == LineClass::Easy {
                easy_ok = false;
            }
        }
        if needs_witness {
            witnesses.insert(c, Witness { k: c, point: *p, line, feet_on_line: on });
        }
    }
    PointScan { hist, witnesses, high_on_pencil, easy_ok }
}

/// `|ℓ ∩ τ_P(U)|` over every line and every admissible point in scope.
pub fn full_spectrum_scan(ctx: &FieldCtx, u: &UnitalSet, scope: Scope) -> SpectrumReport {
    let reps = orbit_representatives(ctx);
    let points: Vec<ProjPoint> = match scope {
        Scope::Representatives => reps.iter().map(|&r| representative_point(ctx, r)).collect(),
        Scope::AllPoints => ProjPoint::all(ctx).filter(|p| p.is_affine() && !u.contains(ctx, p)).collect(),
    };
    let scans: Vec<PointScan> = points.par_iter().map(|p| scan_point(ctx, u, p)).collect();
    let width = ctx.q() as usize + 2;

    let mut histogram = vec![0u64; width];
    let mut witnesses: BTreeMap<usize, Witness> = BTreeMap::new();
    let mut high_counts_on_special_pencil = true;
    let mut easy_bound_holds = true;
    let mut by_rep: BTreeMap<(Felt, Felt), (usize, Vec<u64>)> = BTreeMap::new();
    let mut g_invariant = true;
    let mut g_invariance_checks = 0;
    for (p, scan) in points.iter().zip(&scans) {
        for (acc, x) in histogram.iter_mut().zip(&scan.hist) {
            *acc += x;
        }
        for (k, w) in &scan.witnesses {
            witnesses.entry(*k).or_insert_with(|| w.clone());
        }
        high_counts_on_special_pencil &= scan.high_on_pencil;
        easy_bound_holds &= scan.easy_ok;
        let rep = crate::collineation::orbit_representative(ctx, u, p).expect("admissible");
        let entry = by_rep.entry(rep).or_insert_with(|| (0, scan.hist.clone()));
        entry.0 += 1;
        if entry.1 != scan.hist {
            g_invariant = false;
        }
        if *p != representative_point(ctx, rep) {
            g_invariance_checks += 1;
        }
    }
    if scope == Scope::Representatives {
        // Spot check: a few group images of every representative.
        let group = group_elements(ctx);
        let spot: Vec<_> = [1usize, group.len() / 3, group.len() - 1]
            .iter()
            .map(|&i| group[i].1)
            .collect();
        let checks: Vec<bool> = points
            .par_iter()
            .zip(&scans)
            .flat_map_iter(|(p, scan)| {
                spot.iter().map(move |g| {
                    let (_, counts) = line_counts(ctx, u, &act(ctx, g, p));
                    histogram_of(&counts, width) == scan.hist
                })
            })
            .collect();
        g_invariance_checks += checks.len();
        g_invariant &= checks.iter().all(|&x| x);
    }

    let max_count = histogram.iter().rposition(|&x| x > 0).unwrap_or(0);
    let realized: Vec<usize> = (0..width).filter(|&k| histogram[k] > 0).collect();
    let trimmed = max_count.max(4) + 1;
    let per_representative = by_rep
        .into_iter()
        .map(|((a, b), (n, mut counts))| {
            counts.truncate(trimmed);
            RepresentativeHistogram { a, b, points: n, counts }
        })
        .collect();
    histogram.truncate(trimmed);
    let q1 = ctx.q() as usize + 1;
    SpectrumReport {
        e: ctx.e(),
        scope,
        points_scanned: points.len(),
        lines_per_point: crate::plane::plane_size(ctx),
        all_k_realized: (0..=4).all(|k| realized.contains(&k)),
        realized,
        max_count,
        witnesses: witnesses.into_values().collect(),
        histogram,
        per_representative,
        high_counts_on_special_pencil,
        easy_bound_holds,
        special_pencil_size: special_pencil(ctx, Felt::ZERO, Felt::ONE).len(),
        points_with_collinear_feet: scans.iter().filter(|s| s.hist[q1] > 0).count(),
        g_invariant,
        g_invariance_checks,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub points: usize,
    pub formula_mismatches: usize,
    pub pairs: u64,
    pub count_mismatches: u64,
}

/// Feet formula against tangent lines, and equation counts against
/// geometric counts, for every admissible point and every line.
pub fn oracle_coherence(ctx: &FieldCtx, u: &UnitalSet) -> CoherenceReport {
    let table = TitsTable::new(ctx);
    let points: Vec<ProjPoint> =
        ProjPoint::all(ctx).filter(|p| p.is_affine() && !u.contains(ctx, p)).collect();
    let (formula_mismatches, count_mismatches) = points
        .par_iter()
        .map(|p| {
            let direct = feet_direct(ctx, u, p).expect("admissible");
            let formula = feet_formula(ctx, u, p).expect("admissible");
            let (_, counts) = line_counts(ctx, u, p);
            let bad = ProjLine::all(ctx)
                .zip(&counts)
                .filter(|(l, &c)| count_with(ctx, p, l, |s, t| table.get(s, t)) != c as usize)
                .count() as u64;
            ((direct != formula) as usize, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    CoherenceReport {
        points: points.len(),
        formula_mismatches,
        pairs: points.len() as u64 * crate::plane::plane_size(ctx) as u64,
        count_mismatches,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticReport {
    pub e: u32,
    /// Conics `(y1, a1)` checked, and how many are degenerate.
    pub conics: usize,
    pub degenerate_conics: usize,
    pub degenerate_iff_a1_is_y1_squared: bool,
    pub conic_nucleus_holds: bool,
    /// Admissible ovals `(y1, z2)`, `z2 ≠ y1^(σ+2)`.
    pub ovals: usize,
    pub oval_sizes_ok: bool,
    pub oval_nucleus_holds: bool,
    pub translation_oval_nucleus: ProjPoint,
    pub cap_cases: usize,
    pub cap_histogram: BTreeMap<usize, usize>,
    pub cap_max: usize,
    pub cap_max_a3_zero: usize,
    pub parameterisation_cases: usize,
    pub parameterisation_holds: bool,
    pub root_channel_cases: usize,
    pub root_channel_holds: bool,
    pub simple_system_max: usize,
    pub menichetti_holds: bool,
    pub trace_identity_holds: bool,
}

pub fn analytic_checks(ctx: &FieldCtx) -> AnalyticReport {
    let sub = ctx.subfield();
    let s = ctx.sigma_exp() as u64;
    let z = Felt::ZERO;

    let mut conics = 0;
    let mut degenerate_conics = 0;
    let mut degenerate_iff = true;
    let mut conic_nucleus_holds = true;
    for &y1 in sub {
        for &a1 in sub {
            conics += 1;
            let expected = ProjPoint::new(ctx, [y1, z, Felt::ONE]).unwrap();
            match conic_nucleus(ctx, &Conic::feet_conic(ctx, y1, a1)) {
                Ok(n) => {
                    conic_nucleus_holds &= n == expected;
                    degenerate_iff &= a1 != ctx.square(y1);
                }
                Err(_) => {
                    degenerate_conics += 1;
                    degenerate_iff &= a1 == ctx.square(y1);
                }
            }
        }
    }

    let admissible: Vec<(Felt, Felt)> = sub
        .iter()
        .flat_map(|&y1| sub.iter().map(move |&z2| (y1, z2)))
        .filter(|&(y1, z2)| z2 != ctx.pow(y1, s + 2))
        .collect();
    let oval_results: Vec<(bool, bool)> = admissible
        .par_iter()
        .map(|&(y1, z2)| {
            let size_ok = oval_points(ctx, y1, z2).len() == ctx.q() as usize + 1;
            let expected = ProjPoint::new(ctx, [y1, z, Felt::ONE]).unwrap();
            (size_ok, oval_nucleus(ctx, y1, z2).ok() == Some(expected))
        })
        .collect();

    let mut cap_histogram = BTreeMap::new();
    let mut cap_max = 0;
    let mut cap_max_a3_zero = 0;
    for &a1 in sub {
        for &a2 in &sub[1..] {
            for &a3 in sub {
                let n = translation_oval_conic_cap(ctx, a1, a2, a3).expect("a2 != 0");
                *cap_histogram.entry(n).or_insert(0) += 1;
                cap_max = cap_max.max(n);
                if a3.is_zero() {
                    cap_max_a3_zero = cap_max_a3_zero.max(n);
                }
            }
        }
    }

    let parameterisation_holds = sub[1..].iter().all(|&z2| {
        let r = oval_parameterisation(ctx, z2).expect("z2 != 0");
        r.denominators_nonzero && r.distinct && r.matches_solutions
    });

    // Roots of the membership polynomial plus the closing point account for
    // every common solution when y1 = 0.
    let half = s as i64 / 2;
    let mut root_channel_holds = true;
    let mut root_channel_cases = 0;
    for &z2 in &sub[1..] {
        let closing = (ctx.pow_signed(z2, 1 - half), ctx.pow_signed(z2, half));
        for &a1 in sub {
            root_channel_cases += 1;
            let solutions = simple_system_solutions(ctx, z, a1, z2);
            let roots = membership_polynomial_roots(ctx, a1, z2).unwrap();
            root_channel_holds &= roots + solutions.contains(&closing) as usize == solutions.len();
        }
    }
    let simple_system_max = sub
        .par_iter()
        .map(|&y1| {
            let mut m = 0;
            for &a1 in sub {
                for &z2 in sub {
                    m = m.max(simple_system_solutions(ctx, y1, a1, z2).len());
                }
            }
            m
        })
        .max()
        .unwrap_or(0);

    let menichetti_holds = sub.iter().all(|&c| {
        menichetti_solvable(ctx, c).unwrap() == (ctx.trace_abs(c, false).unwrap() == 0)
    });
    let trace_identity_holds = sub.iter().all(|&x| {
        let a = ctx.pow(x, s - 1) + Felt::ONE;
        ctx.trace_abs(x, false).unwrap() == ctx.trace_abs(ctx.pow(a, s + 1), false).unwrap() ^ 1
    });

    AnalyticReport {
        e: ctx.e(),
        conics,
        degenerate_conics,
        degenerate_iff_a1_is_y1_squared: degenerate_iff,
        conic_nucleus_holds,
        ovals: admissible.len(),
        oval_sizes_ok: oval_results.iter().all(|r| r.0),
        oval_nucleus_holds: oval_results.iter().all(|r| r.1),
        translation_oval_nucleus: nucleus_of(ctx, &translation_oval(ctx)).unwrap_or(ProjPoint::p_inf()),
        cap_cases: cap_histogram.values().sum(),
        cap_histogram,
        cap_max,
        cap_max_a3_zero,
        parameterisation_cases: sub.len() - 1,
        parameterisation_holds,
        root_channel_cases,
        root_channel_holds,
        simple_system_max,
        menichetti_holds,
        trace_identity_holds,
    }
}

/// Group element and representative for `p`, re-exported for callers that
/// report orbits.
pub fn representative_of(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> Result<((Felt, Felt), GroupElementUV)> {
    orbit_representative_with_element(ctx, u, p)
}
