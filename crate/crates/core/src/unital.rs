//! The Buekenhout-Tits unital, its tangent lines and feet.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};
use crate::plane::{
    for_each_point_on_line, is_baer_subline, line_through, lines_through, plane_size, ProjLine,
    ProjPoint,
};

/// `s^(σ+2) + t^σ + st`, the defining function of the Tits ovoid.
#[inline]
pub fn tits_f(ctx: &FieldCtx, s: Felt, t: Felt) -> Felt {
    let sigma = ctx.sigma_exp() as u64;
    ctx.pow(s, sigma + 2) + ctx.pow(t, sigma) + ctx.mul(s, t)
}

/// `P_{r,s,t} = (1, s + tε, r + f(s,t)·ε)`.
pub fn bt_point(ctx: &FieldCtx, r: Felt, s: Felt, t: Felt) -> ProjPoint {
    ProjPoint::affine(ctx.recompose(s, t), ctx.recompose(r, tits_f(ctx, s, t)))
}

/// A point set of `PG(2, q^2)` with constant-time membership.
///
/// Built for the Buekenhout-Tits unital, but any point set can be wrapped
/// (test controls, mutated copies).
pub struct UnitalSet {
    points: Vec<ProjPoint>,
    member: Vec<bool>,
    tangents: OnceLock<Vec<ProjLine>>,
}

impl UnitalSet {
    pub fn from_points(ctx: &FieldCtx, points: impl IntoIterator<Item = ProjPoint>) -> Self {
        let mut member = vec![false; plane_size(ctx)];
        let mut pts: Vec<ProjPoint> = points.into_iter().collect();
        pts.sort_by_key(|p| p.index(ctx));
        pts.dedup();
        for p in &pts {
            member[p.index(ctx)] = true;
        }
        UnitalSet { points: pts, member, tangents: OnceLock::new() }
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn contains(&self, ctx: &FieldCtx, p: &ProjPoint) -> bool {
        self.member[p.index(ctx)]
    }

    #[inline]
    pub fn contains_index(&self, index: usize) -> bool {
        self.member[index]
    }

    /// `P_∞ = (0, 0, 1)`.
    pub fn special_point(&self) -> ProjPoint {
        ProjPoint::p_inf()
    }

    pub fn to_set(&self) -> BTreeSet<ProjPoint> {
        self.points.iter().copied().collect()
    }

    /// Points of the set on a line.
    pub fn section(&self, ctx: &FieldCtx, l: &ProjLine) -> Vec<ProjPoint> {
        let mut out = Vec::new();
        for_each_point_on_line(ctx, l, |p| {
            if self.member[p.index(ctx)] {
                out.push(p);
            }
        });
        out
    }

    pub fn count_on_line(&self, ctx: &FieldCtx, l: &ProjLine) -> usize {
        let mut n = 0;
        for_each_point_on_line(ctx, l, |p| n += self.member[p.index(ctx)] as usize);
        n
    }

    /// The unique tangent at a point of the set.
    pub fn tangent_at(&self, ctx: &FieldCtx, q: &ProjPoint) -> Result<ProjLine> {
        if !self.contains(ctx, q) {
            return Err(Error::PointNotOnUnital);
        }
        let secants: HashSet<ProjLine> = self
            .points
            .iter()
            .filter(|r| *r != q)
            .map(|r| line_through(ctx, q, r).expect("distinct"))
            .collect();
        let tangents: Vec<ProjLine> =
            lines_through(ctx, q).into_iter().filter(|l| !secants.contains(l)).collect();
        match tangents.as_slice() {
            [l] => Ok(*l),
            _ => Err(Error::Cardinality { expected: 1, found: tangents.len() }),
        }
    }

    /// Tangent line at each point, aligned with [`UnitalSet::points`].
    /// Computed once on first use and then shared.
    pub fn tangent_index(&self, ctx: &FieldCtx) -> &[ProjLine] {
        self.tangents.get_or_init(|| {
            self.points
                .par_iter()
                .map(|q| self.tangent_at(ctx, q).expect("set is a unital"))
                .collect()
        })
    }
}

/// `{(0,0,1)} ∪ {P_{r,s,t} : r, s, t ∈ F_q}`.
pub fn build_bt_unital(ctx: &FieldCtx) -> UnitalSet {
    let sub = ctx.subfield();
    let mut pts = Vec::with_capacity(sub.len().pow(3) + 1);
    pts.push(ProjPoint::p_inf());
    for &s in sub {
        for &t in sub {
            let f = tits_f(ctx, s, t);
            let y = ctx.recompose(s, t);
            for &r in sub {
                pts.push(ProjPoint::affine(y, ctx.recompose(r, f)));
            }
        }
    }
    let expected = pts.len();
    let u = UnitalSet::from_points(ctx, pts);
    assert_eq!(u.len(), expected, "parametrized points must be distinct");
    u
}

#[derive(Debug, Clone, Serialize)]
pub struct LineViolation {
    pub line: ProjLine,
    pub meets: usize,
}

/// Per-line intersection histogram of a candidate unital.
#[derive(Debug, Clone, Serialize)]
pub struct UnitalReport {
    pub lines_checked: u64,
    /// Intersection size to number of lines.
    pub histogram: BTreeMap<usize, u64>,
    pub tangent_lines: u64,
    pub secant_lines: u64,
    pub violations: Vec<LineViolation>,
    pub passed: bool,
}

/// Checks that every line meets the set in 1 or `q + 1` points.
pub fn verify_unital(ctx: &FieldCtx, set: &UnitalSet) -> Result<UnitalReport> {
    let q = ctx.q() as usize;
    let expected = q * q * q + 1;
    if set.len() != expected {
        return Err(Error::Cardinality { expected, found: set.len() });
    }
    let (histogram, violations) = (0..plane_size(ctx))
        .into_par_iter()
        .fold(
            || (BTreeMap::new(), Vec::new()),
            |(mut hist, mut bad): (BTreeMap<usize, u64>, Vec<LineViolation>), i| {
                let line = ProjLine::from_index(ctx, i);
                let meets = set.count_on_line(ctx, &line);
                *hist.entry(meets).or_default() += 1;
                if meets != 1 && meets != q + 1 {
                    bad.push(LineViolation { line, meets });
                }
                (hist, bad)
            },
        )
        .reduce(
            || (BTreeMap::new(), Vec::new()),
            |(mut h1, mut b1), (h2, b2)| {
                for (k, v) in h2 {
                    *h1.entry(k).or_default() += v;
                }
                b1.extend(b2);
                (h1, b1)
            },
        );
    let mut violations = violations;
    violations.sort_by_key(|v| v.line.index(ctx));
    let tangent_lines = histogram.get(&1).copied().unwrap_or(0);
    let secant_lines = histogram.get(&(q + 1)).copied().unwrap_or(0);
    Ok(UnitalReport {
        lines_checked: plane_size(ctx) as u64,
        passed: violations.is_empty(),
        histogram,
        tangent_lines,
        secant_lines,
        violations,
    })
}

/// The `q + 1` lines through `p ∉ U` meeting `U` in one point.
pub fn tangent_lines(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> Result<Vec<ProjLine>> {
    if u.contains(ctx, p) {
        return Err(Error::PointOnUnital);
    }
    Ok(lines_through(ctx, p).into_iter().filter(|l| u.count_on_line(ctx, l) == 1).collect())
}

/// Feet of `p ∉ U`: the touch points of its tangent lines.
pub fn feet_direct(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> Result<BTreeSet<ProjPoint>> {
    Ok(tangent_lines(ctx, u, p)?
        .iter()
        .map(|l| u.section(ctx, l)[0])
        .collect())
}

/// Feet of an affine `p = (1, y1 + y2ε, z1 + z2ε) ∉ U` from the closed form:
/// the points `(1, s + tε, s² + δt² + st + y1·s + y1·t + y2·δ·t + z1 + f(s,t)·ε)`
/// over the `(s, t)` with `f(s,t) = y2·s + y1·t + z2`.
pub fn feet_formula(ctx: &FieldCtx, u: &UnitalSet, p: &ProjPoint) -> Result<BTreeSet<ProjPoint>> {
    if !p.is_affine() {
        return Err(Error::PointAtInfinity);
    }
    if u.contains(ctx, p) {
        return Err(Error::PointOnUnital);
    }
    let [_, y, z] = p.coords();
    let (y1, y2) = ctx.decompose(y);
    let (z1, z2) = ctx.decompose(z);
    let delta = ctx.delta();
    let mut out = BTreeSet::new();
    for &s in ctx.subfield() {
        for &t in ctx.subfield() {
            let f = tits_f(ctx, s, t);
            if f != ctx.mul(y2, s) + ctx.mul(y1, t) + z2 {
                continue;
            }
            let rational = ctx.square(s)
                + ctx.mul(ctx.square(t), delta)
                + ctx.mul(s, t)
                + ctx.mul(y1, s)
                + ctx.mul(y1, t)
                + ctx.mul(ctx.mul(y2, delta), t)
                + z1;
            out.insert(ProjPoint::affine(ctx.recompose(s, t), ctx.recompose(rational, f)));
        }
    }
    Ok(out)
}

/// Whether every secant through `q ∈ U` meets `U` in a Baer subline.
pub fn has_subline_property(ctx: &FieldCtx, u: &UnitalSet, q: &ProjPoint) -> Result<bool> {
    if !u.contains(ctx, q) {
        return Err(Error::PointNotOnUnital);
    }
    for l in lines_through(ctx, q) {
        let section = u.section(ctx, &l);
        if section.len() <= 1 {
            continue;
        }
        if section.len() != ctx.q() as usize + 1 {
            return Ok(false);
        }
        if !is_baer_subline(ctx, &section.into_iter().collect())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether all points of a set lie on one line.
pub fn is_collinear(ctx: &FieldCtx, pts: &BTreeSet<ProjPoint>) -> bool {
    let mut it = pts.iter();
    let (Some(a), Some(b)) = (it.next(), it.next()) else {
        return true;
    };
    let l = line_through(ctx, a, b).expect("distinct");
    it.all(|p| crate::plane::incident(ctx, p, &l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::incident;

    fn ctx() -> &'static FieldCtx {
        static CTX: OnceLock<FieldCtx> = OnceLock::new();
        CTX.get_or_init(|| FieldCtx::new(1).unwrap())
    }

    fn unital() -> &'static UnitalSet {
        static U: OnceLock<UnitalSet> = OnceLock::new();
        U.get_or_init(|| build_bt_unital(ctx()))
    }

    #[test]
    fn size_and_simple_members() {
        let c = ctx();
        let u = unital();
        assert_eq!(u.len(), 513);
        assert!(u.contains(c, &ProjPoint::affine(Felt::ZERO, Felt::ZERO)));
        assert!(u.contains(c, &ProjPoint::p_inf()));
        assert_eq!(u.section(c, &ProjLine::at_infinity()), vec![ProjPoint::p_inf()]);
    }

    #[test]
    fn bt_unital_passes_and_mutation_fails() {
        let c = ctx();
        let report = verify_unital(c, unital()).unwrap();
        assert!(report.passed);
        assert_eq!(report.lines_checked, 4161);
        // One tangent per point; q^4 - q^3 + q^2 secants.
        assert_eq!(report.tangent_lines, 513);
        assert_eq!(report.secant_lines, 4096 - 512 + 64);

        let moved = unital().points().iter().copied().skip(1).chain([ProjPoint::affine(Felt::new(1), Felt::new(1))]);
        let mutated = UnitalSet::from_points(c, moved);
        assert!(!unital().contains(c, &ProjPoint::affine(Felt::new(1), Felt::new(1))));
        let report = verify_unital(c, &mutated).unwrap();
        assert!(!report.passed);
        assert!(!report.violations.is_empty());

        let short = UnitalSet::from_points(c, unital().points()[..10].iter().copied());
        assert!(matches!(verify_unital(c, &short), Err(Error::Cardinality { .. })));
    }

    #[test]
    fn tangent_counts_for_affine_points() {
        let c = ctx();
        let u = unital();
        let mut checked = 0;
        for p in ProjPoint::all(c).filter(|p| p.is_affine() && !u.contains(c, p)) {
            if checked % 64 == 0 {
                assert_eq!(tangent_lines(c, u, &p).unwrap().len(), 9);
            }
            checked += 1;
        }
        assert_eq!(checked, 3584);
        assert!(matches!(tangent_lines(c, u, &ProjPoint::p_inf()), Err(Error::PointOnUnital)));
        assert_eq!(u.tangent_at(c, &ProjPoint::p_inf()).unwrap(), ProjLine::at_infinity());
    }

    #[test]
    fn feet_collinear_exactly_on_line_at_infinity() {
        let c = ctx();
        let u = unital();
        for p in ProjPoint::all(c).filter(|p| !p.is_affine() && *p != ProjPoint::p_inf()) {
            let feet = feet_direct(c, u, &p).unwrap();
            assert_eq!(feet.len(), 9);
            assert!(is_collinear(c, &feet));
        }
        for p in ProjPoint::all(c).filter(|p| p.is_affine() && !u.contains(c, p)).step_by(29) {
            assert!(!is_collinear(c, &feet_direct(c, u, &p).unwrap()));
        }
    }

    #[test]
    fn feet_formula_matches_oracle_sample() {
        let c = ctx();
        let u = unital();
        let p = ProjPoint::affine(Felt::ZERO, c.epsilon());
        let direct = feet_direct(c, u, &p).unwrap();
        let formula = feet_formula(c, u, &p).unwrap();
        assert_eq!(direct.len(), 9);
        assert_eq!(direct, formula);
        for foot in &direct {
            assert!(u.contains(c, foot));
            let t = u.tangent_at(c, foot).unwrap();
            assert!(incident(c, &p, &t));
        }
        assert!(matches!(feet_formula(c, u, &ProjPoint::p_inf()), Err(Error::PointAtInfinity)));
    }

    #[test]
    fn tangent_index_agrees_with_feet() {
        let c = ctx();
        let u = unital();
        let index = u.tangent_index(c);
        assert_eq!(index.len(), 513);
        let p = ProjPoint::affine(Felt::new(3), Felt::new(5));
        let via_index: BTreeSet<ProjPoint> = u
            .points()
            .iter()
            .zip(index)
            .filter(|(_, l)| incident(c, &p, l))
            .map(|(q, _)| *q)
            .collect();
        assert_eq!(via_index, feet_direct(c, u, &p).unwrap());
    }

    #[test]
    fn subline_property_at_p_inf_only_sample() {
        let c = ctx();
        let u = unital();
        assert!(has_subline_property(c, u, &ProjPoint::p_inf()).unwrap());
        for q in u.points().iter().skip(1).step_by(41) {
            assert!(!has_subline_property(c, u, q).unwrap());
        }
        assert!(matches!(
            has_subline_property(c, u, &ProjPoint::affine(Felt::ONE, Felt::ONE)),
            Err(Error::PointNotOnUnital)
        ));
    }
}
