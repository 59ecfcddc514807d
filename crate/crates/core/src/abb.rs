//! The André/Bruck-Bose model of `PG(2, q^2)` inside `PG(4, q)`.
//!
//! The hyperplane at infinity is `Σ : x0 = 0` with the field-reduction
//! spread for the basis `{1, ε}`. The canonical Tits ovoid sits in the solid
//! `x3 = 0` and the cone over it has vertex `(0,0,0,1,0)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};
use crate::plane::ProjPoint;
use crate::unital::{build_bt_unital, tits_f, UnitalSet};

/// Coordinate fixed to zero on the solid containing the canonical ovoid.
const BASE_SOLID_COORD: usize = 3;

/// A point of `PG(4, q)`, coordinates in `F_q`, leftmost nonzero equal to 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PG4Point {
    coords: [Felt; 5],
}

impl fmt::Debug for PG4Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coords.map(|x| x.bits());
        write!(f, "({:x}, {:x}, {:x}, {:x}, {:x})", c[0], c[1], c[2], c[3], c[4])
    }
}

impl PG4Point {
    pub fn new(ctx: &FieldCtx, coords: [Felt; 5]) -> Result<Self> {
        if let Some(&bad) = coords.iter().find(|c| !ctx.in_subfield(**c)) {
            return Err(Error::NotInSubfield(bad));
        }
        let lead = coords
            .iter()
            .copied()
            .find(|c| !c.is_zero())
            .ok_or_else(|| Error::InvalidArgument("all-zero PG(4,q) vector".into()))?;
        let inv = ctx.inv(lead)?;
        Ok(PG4Point { coords: coords.map(|c| ctx.mul(c, inv)) })
    }

    pub fn coords(&self) -> [Felt; 5] {
        self.coords
    }

    pub fn in_sigma(&self) -> bool {
        self.coords[0].is_zero()
    }
}

/// Points of the line through two distinct points.
pub fn pg4_line(ctx: &FieldCtx, a: &PG4Point, b: &PG4Point) -> Vec<PG4Point> {
    let mut out = vec![*b];
    for &t in ctx.subfield() {
        let v: [Felt; 5] = std::array::from_fn(|i| a.coords[i] + ctx.mul(t, b.coords[i]));
        out.push(PG4Point::new(ctx, v).expect("distinct points span a line"));
    }
    out
}

/// All normalized points of `PG(4, q)` whose coordinates at `zero_at` vanish.
fn pg4_points_with_zeros(ctx: &FieldCtx, zero_at: &[usize]) -> Vec<PG4Point> {
    let sub = ctx.subfield();
    let mut out = Vec::new();
    for lead in 0..5 {
        if zero_at.contains(&lead) {
            continue;
        }
        let free: Vec<usize> = (lead + 1..5).filter(|i| !zero_at.contains(i)).collect();
        let total = sub.len().pow(free.len() as u32);
        for mut code in 0..total {
            let mut c = [Felt::ZERO; 5];
            c[lead] = Felt::ONE;
            for &i in &free {
                c[i] = sub[code % sub.len()];
                code /= sub.len();
            }
            out.push(PG4Point { coords: c });
        }
    }
    out.sort();
    out
}

/// The Σ-point `(0, d(y), d(z))`.
fn sigma_point(ctx: &FieldCtx, y: Felt, z: Felt) -> PG4Point {
    let (y1, y2) = ctx.decompose(y);
    let (z1, z2) = ctx.decompose(z);
    PG4Point::new(ctx, [Felt::ZERO, y1, y2, z1, z2]).expect("nonzero")
}

/// The spread element (as a point of `PG(1, q^2)`) containing a Σ-point.
pub fn spread_key(ctx: &FieldCtx, p: &PG4Point) -> Result<(Felt, Felt)> {
    if !p.in_sigma() {
        return Err(Error::InvalidArgument("point is not in the hyperplane at infinity".into()));
    }
    let [_, a1, a2, a3, a4] = p.coords;
    let y = ctx.recompose(a1, a2);
    let z = ctx.recompose(a3, a4);
    let n = ProjPoint::new(ctx, [Felt::ZERO, y, z])?.coords();
    Ok((n[1], n[2]))
}

#[derive(Debug, Clone)]
pub struct SpreadElement {
    /// The point `(y : z)` of `PG(1, q^2)` this line represents.
    pub key: (Felt, Felt),
    pub points: Vec<PG4Point>,
}

/// Desarguesian line spread of `Σ` by field reduction.
#[derive(Debug, Clone)]
pub struct Spread {
    pub elements: Vec<SpreadElement>,
    special: usize,
}

impl Spread {
    /// `p_∞`, the element for `(y : z) = (0 : 1)`.
    pub fn p_inf(&self) -> &SpreadElement {
        &self.elements[self.special]
    }

    /// Pairwise disjointness and coverage of all `q^3 + q^2 + q + 1` points of `Σ`.
    pub fn is_partition(&self, ctx: &FieldCtx) -> bool {
        let sigma = pg4_points_with_zeros(ctx, &[0]);
        let mut seen = HashSet::new();
        for el in &self.elements {
            for p in &el.points {
                if !seen.insert(*p) {
                    return false;
                }
            }
        }
        seen.len() == sigma.len() && sigma.iter().all(|p| seen.contains(p))
    }
}

pub fn build_spread(ctx: &FieldCtx) -> Spread {
    let keys = ctx
        .elements()
        .map(|z| (Felt::ONE, z))
        .chain(std::iter::once((Felt::ZERO, Felt::ONE)));
    let elements: Vec<SpreadElement> = keys
        .map(|(y, z)| {
            let mut pts: Vec<PG4Point> = ctx
                .elements()
                .skip(1)
                .map(|l| sigma_point(ctx, ctx.mul(l, y), ctx.mul(l, z)))
                .collect();
            pts.sort();
            pts.dedup();
            SpreadElement { key: (y, z), points: pts }
        })
        .collect();
    let special = elements.len() - 1;
    Spread { elements, special }
}

/// The canonical Tits ovoid `{(1, s, t, 0, f(s,t))} ∪ {(0,0,0,0,1)}`.
#[derive(Debug, Clone)]
pub struct TitsOvoid {
    points: Vec<PG4Point>,
}

impl TitsOvoid {
    /// Wraps an arbitrary point set of the solid `x3 = 0` without checks.
    pub fn from_points(points: Vec<PG4Point>) -> Self {
        TitsOvoid { points }
    }

    pub fn points(&self) -> &[PG4Point] {
        &self.points
    }

    /// No three points collinear, by scanning the line through every pair.
    pub fn no_three_collinear(&self, ctx: &FieldCtx) -> bool {
        let members: HashSet<PG4Point> = self.points.iter().copied().collect();
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let on = pg4_line(ctx, a, b).iter().filter(|p| members.contains(p)).count();
                if on != 2 {
                    return false;
                }
            }
        }
        true
    }

    /// The tangent plane at `r`: `r` together with every point `x` of the
    /// solid such that the line `rx` meets the ovoid only in `r`.
    pub fn tangent_plane_at(&self, ctx: &FieldCtx, r: &PG4Point) -> Result<Vec<PG4Point>> {
        let members: HashSet<PG4Point> = self.points.iter().copied().collect();
        if !members.contains(r) {
            return Err(Error::InvalidArgument("point is not on the ovoid".into()));
        }
        let mut plane: Vec<PG4Point> = pg4_points_with_zeros(ctx, &[BASE_SOLID_COORD])
            .into_iter()
            .filter(|x| {
                x == r || pg4_line(ctx, r, x).iter().filter(|p| members.contains(p)).count() == 1
            })
            .collect();
        plane.sort();
        Ok(plane)
    }
}

pub fn build_tits_ovoid(ctx: &FieldCtx) -> TitsOvoid {
    let sub = ctx.subfield();
    let mut points = Vec::with_capacity(sub.len() * sub.len() + 1);
    for &s in sub {
        for &t in sub {
            points.push(PG4Point {
                coords: [Felt::ONE, s, t, Felt::ZERO, tits_f(ctx, s, t)],
            });
        }
    }
    points.push(PG4Point { coords: [Felt::ZERO, Felt::ZERO, Felt::ZERO, Felt::ZERO, Felt::ONE] });
    TitsOvoid { points }
}

#[derive(Debug, Clone)]
pub struct OvoidalCone {
    pub vertex: PG4Point,
    pub base: TitsOvoid,
    pub points: BTreeSet<PG4Point>,
}

pub fn default_vertex() -> PG4Point {
    PG4Point { coords: [Felt::ZERO, Felt::ZERO, Felt::ZERO, Felt::ONE, Felt::ZERO] }
}

/// Union of the lines joining `vertex` to the base points.
pub fn build_cone(ctx: &FieldCtx, base: &TitsOvoid, vertex: PG4Point) -> Result<OvoidalCone> {
    if vertex.coords[BASE_SOLID_COORD].is_zero() {
        return Err(Error::VertexInBaseSolid);
    }
    let mut points = BTreeSet::new();
    for b in base.points() {
        points.extend(pg4_line(ctx, &vertex, b));
    }
    Ok(OvoidalCone { vertex, base: base.clone(), points })
}

impl OvoidalCone {
    pub fn section_at_infinity(&self) -> BTreeSet<PG4Point> {
        self.points.iter().filter(|p| p.in_sigma()).copied().collect()
    }
}

/// Maps a point set of `PG(4, q)` into `PG(2, q^2)`: affine points by
/// `(1, a1, a2, a3, a4) ↦ (1, a1 + a2ε, a3 + a4ε)`, and each spread element
/// fully contained in the set to its point of `ℓ_∞`.
pub fn abb_map(ctx: &FieldCtx, set: &BTreeSet<PG4Point>) -> Result<BTreeSet<ProjPoint>> {
    let mut out = BTreeSet::new();
    let mut at_infinity: BTreeMap<(Felt, Felt), usize> = BTreeMap::new();
    for p in set {
        if p.in_sigma() {
            *at_infinity.entry(spread_key(ctx, p)?).or_default() += 1;
        } else {
            let [_, a1, a2, a3, a4] = p.coords;
            out.insert(ProjPoint::affine(ctx.recompose(a1, a2), ctx.recompose(a3, a4)));
        }
    }
    for ((y, z), n) in at_infinity {
        if n != ctx.q() as usize + 1 {
            return Err(Error::PartialSpreadElement);
        }
        out.insert(ProjPoint::new(ctx, [Felt::ZERO, y, z])?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct AbbComparison {
    pub equal: bool,
    pub image_size: usize,
    pub unital_size: usize,
    pub only_in_image: Vec<ProjPoint>,
    pub only_in_unital: Vec<ProjPoint>,
}

pub fn compare_image(image: &BTreeSet<ProjPoint>, unital: &UnitalSet) -> AbbComparison {
    let target = unital.to_set();
    let only_in_image: Vec<_> = image.difference(&target).copied().collect();
    let only_in_unital: Vec<_> = target.difference(image).copied().collect();
    AbbComparison {
        equal: only_in_image.is_empty() && only_in_unital.is_empty(),
        image_size: image.len(),
        unital_size: target.len(),
        only_in_image,
        only_in_unital,
    }
}

/// Image of the cone over the canonical Tits ovoid against the parametrized
/// unital.
pub fn abb_unital_equality(ctx: &FieldCtx) -> Result<AbbComparison> {
    let cone = build_cone(ctx, &build_tits_ovoid(ctx), default_vertex())?;
    let image = abb_map(ctx, &cone.points)?;
    Ok(compare_image(&image, &build_bt_unital(ctx)))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub q: u128,
    pub checks: Vec<IdentityCheck>,
    pub all_hold: bool,
    /// The ovoid-per-plane fraction evaluated with the hyperplane count of
    /// `PG(4, q)`, `q^4 + q^3 + q^2 + q + 1`, in the denominator. It is not an
    /// integer; the count needs the plane count of `PG(3, q)`. Kept out of
    /// `all_hold`.
    pub pg4_denominator_remainder: IdentityCheck,
}

/// Integer identities behind the unital and cone counts, evaluated exactly.
pub fn counting_identities(q: u128) -> Result<CountingReport> {
    if !q.is_power_of_two() || q.trailing_zeros() % 2 != 1 {
        return Err(Error::InvalidArgument(format!("q = {q} is not 2^(2e+1)")));
    }
    let q2 = q * q;
    let q4 = q2 * q2;
    let mut checks = Vec::new();
    let mut check = |name, lhs: u128, rhs: u128| {
        checks.push(IdentityCheck { name, lhs, rhs, holds: lhs == rhs });
    };

    // Tits ovoids in PG(3,q), each with q^2+1 tangent planes, spread evenly
    // over the q^3+q^2+q+1 planes.
    let ovoids = (q + 1).pow(2) * q4 * (q - 1).pow(2) * (q2 + q + 1);
    let numerator = ovoids * (q2 + 1);
    let planes = q2 * q + q2 + q + 1;
    let pg4_hyperplanes = q4 + q2 * q + q2 + q + 1;
    let pg4_denominator_remainder = IdentityCheck {
        name: "pg4_hyperplane_denominator_remainder",
        lhs: numerator % pg4_hyperplanes,
        rhs: 0,
        holds: numerator.is_multiple_of(pg4_hyperplanes),
    };
    let per_plane = (q - 1).pow(2) * q4 * (q + 1) * (q2 + q + 1);
    check("ovoid_tangent_plane_remainder", numerator % planes, 0);
    check("ovoids_tangent_to_plane", numerator / planes, per_plane);

    let per_flag = (q - 1).pow(2) * q4 * (q + 1);
    check("ovoids_tangent_at_point_remainder", per_plane % (q2 + q + 1), 0);
    check("ovoids_tangent_at_point", per_plane / (q2 + q + 1), per_flag);

    let cones = per_flag * (q + 1);
    check("cones_through_p_inf", cones, (q2 - 1).pow(2) * q4);

    let h_order = (q2 - 1).pow(2) * q2.pow(3);
    check("flag_group_order", h_order, (q2 - 1).pow(2) * q.pow(6));
    let g_order = q2;
    check("unital_orbit_remainder", h_order % g_order, 0);
    let orbit = h_order / g_order;
    check("unital_orbit", orbit, q4 * (q2 - 1).pow(2));
    check("cones_equal_unitals", cones, orbit);

    let all_hold = checks.iter().all(|c| c.holds);
    Ok(CountingReport { q, checks, all_hold, pg4_denominator_remainder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn ctx() -> &'static FieldCtx {
        static CTX: OnceLock<FieldCtx> = OnceLock::new();
        CTX.get_or_init(|| FieldCtx::new(1).unwrap())
    }

    fn p4(c: [u32; 5]) -> PG4Point {
        PG4Point::new(ctx(), c.map(Felt::new)).unwrap()
    }

    #[test]
    fn spread_partitions_sigma() {
        let c = ctx();
        let spread = build_spread(c);
        assert_eq!(spread.elements.len(), 65);
        assert!(spread.elements.iter().all(|e| e.points.len() == 9));
        assert!(spread.is_partition(c));
        let p_inf: Vec<_> = spread.p_inf().points.clone();
        assert!(p_inf.iter().all(|p| p.coords[1].is_zero() && p.coords[2].is_zero()));
        let through_e1 = spread
            .elements
            .iter()
            .find(|e| e.points.contains(&p4([0, 1, 0, 0, 0])))
            .unwrap();
        assert_eq!(through_e1.key, (Felt::ONE, Felt::ZERO));
        assert!(through_e1.points.iter().all(|p| p.coords[3].is_zero() && p.coords[4].is_zero()));
        for el in &spread.elements {
            for p in &el.points {
                let (y, z) = spread_key(c, p).unwrap();
                let key = ProjPoint::new(c, [Felt::ZERO, el.key.0, el.key.1]).unwrap().coords();
                assert_eq!((y, z), (key[1], key[2]));
            }
        }
    }

    #[test]
    fn ovoid_basics() {
        let c = ctx();
        let o = build_tits_ovoid(c);
        assert_eq!(o.points().len(), 65);
        assert!(o.points().contains(&p4([1, 0, 0, 0, 0])));
        assert!(o.no_three_collinear(c));
        let mut bad = o.points().to_vec();
        bad[1] = p4([1, 0, 0, 0, 1]);
        assert!(!TitsOvoid::from_points(bad).no_three_collinear(c));
    }

    #[test]
    fn tangent_plane_at_infinite_point() {
        let c = ctx();
        let o = build_tits_ovoid(c);
        let r = p4([0, 0, 0, 0, 1]);
        let plane = o.tangent_plane_at(c, &r).unwrap();
        assert_eq!(plane.len(), 73);
        assert!(plane.iter().all(|p| p.coords[0].is_zero() && p.coords[3].is_zero()));
        let r = p4([1, 0, 0, 0, 0]);
        assert_eq!(o.tangent_plane_at(c, &r).unwrap().len(), 73);
    }

    #[test]
    fn cone_structure() {
        let c = ctx();
        let o = build_tits_ovoid(c);
        let cone = build_cone(c, &o, default_vertex()).unwrap();
        assert_eq!(cone.points.len(), 512 + 8 + 1);
        assert_eq!(cone.points.iter().filter(|p| !p.in_sigma()).count(), 512);
        let spread = build_spread(c);
        let expected: BTreeSet<_> = spread.p_inf().points.iter().copied().collect();
        assert_eq!(cone.section_at_infinity(), expected);
        assert!(matches!(
            build_cone(c, &o, p4([0, 0, 0, 0, 1])),
            Err(Error::VertexInBaseSolid)
        ));
    }

    #[test]
    fn abb_map_cases() {
        let c = ctx();
        let spread = build_spread(c);
        let p_inf: BTreeSet<_> = spread.p_inf().points.iter().copied().collect();
        let img = abb_map(c, &p_inf).unwrap();
        assert_eq!(img.into_iter().collect::<Vec<_>>(), vec![ProjPoint::p_inf()]);

        let partial: BTreeSet<_> = spread.p_inf().points.iter().take(3).copied().collect();
        assert!(matches!(abb_map(c, &partial), Err(Error::PartialSpreadElement)));

        let (s, t, r) = (Felt::new(1), c.subfield()[3], c.subfield()[5]);
        let f = tits_f(c, s, t);
        let single: BTreeSet<_> =
            [PG4Point::new(c, [Felt::ONE, s, t, r, f]).unwrap()].into_iter().collect();
        let img = abb_map(c, &single).unwrap();
        assert_eq!(img.into_iter().next().unwrap(), crate::unital::bt_point(c, r, s, t));
    }

    #[test]
    fn abb_equality_and_mutation() {
        let c = ctx();
        let result = abb_unital_equality(c).unwrap();
        assert!(result.equal, "{result:?}");
        assert_eq!(result.image_size, 513);

        let mut pts = build_tits_ovoid(c).points().to_vec();
        let [_, s, t, _, f] = pts[10].coords;
        pts[10] = PG4Point::new(c, [Felt::ONE, s, t, Felt::ZERO, f + Felt::ONE]).unwrap();
        let cone = build_cone(c, &TitsOvoid::from_points(pts), default_vertex()).unwrap();
        let cmp = compare_image(&abb_map(c, &cone.points).unwrap(), &build_bt_unital(c));
        assert!(!cmp.equal);
        assert_eq!(cmp.only_in_image.len(), 8);
        assert_eq!(cmp.only_in_unital.len(), 8);
    }

    #[test]
    fn counting_at_q8() {
        let report = counting_identities(8).unwrap();
        assert!(report.all_hold, "{:?}", report.checks);
        let orbit = report.checks.iter().find(|c| c.name == "unital_orbit").unwrap();
        assert_eq!(orbit.lhs, 4096 * 3969);
        assert_eq!(orbit.lhs, 16_257_024);
        assert!(!report.pg4_denominator_remainder.holds);
        assert_eq!(report.pg4_denominator_remainder.lhs, 3666);
        assert!(counting_identities(32).unwrap().all_hold);
        assert!(counting_identities(128).unwrap().all_hold);
        assert!(counting_identities(4).is_err());
        assert!(counting_identities(12).is_err());
    }
}
