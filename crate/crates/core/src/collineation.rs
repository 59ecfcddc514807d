//! Semilinear collineations of `PG(2, q^2)`.
//!
//! A collineation is a pair `(A, k)` acting on row vectors by
//! `x ↦ x^(2^k) · A`: Frobenius on each coordinate first, then
//! multiplication from the right.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};
use crate::plane::ProjPoint;
use crate::unital::UnitalSet;

pub type Matrix = [[Felt; 3]; 3];

fn mat_mul(ctx: &FieldCtx, a: &Matrix, b: &Matrix) -> Matrix {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            ctx.mul(a[i][0], b[0][j]) + ctx.mul(a[i][1], b[1][j]) + ctx.mul(a[i][2], b[2][j])
        })
    })
}

fn det(ctx: &FieldCtx, m: &Matrix) -> Felt {
    let minor = |a: usize, b: usize, c: usize, d: usize| {
        ctx.mul(m[1][a], m[2][b]) + ctx.mul(m[1][c], m[2][d])
    };
    ctx.mul(m[0][0], minor(1, 2, 2, 1))
        + ctx.mul(m[0][1], minor(0, 2, 2, 0))
        + ctx.mul(m[0][2], minor(0, 1, 1, 0))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Collineation {
    matrix: Matrix,
    frob: u32,
}

impl fmt::Debug for Collineation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |i: usize| self.matrix[i].map(|x| x.bits());
        write!(f, "x^(2^{}) {:x?}{:x?}{:x?}", self.frob, r(0), r(1), r(2))
    }
}

impl Serialize for Collineation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Collineation", 2)?;
        st.serialize_field("frob", &self.frob)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.end()
    }
}

impl Collineation {
    /// Normalizes the matrix so its first nonzero entry in reading order is 1.
    pub fn new(ctx: &FieldCtx, matrix: Matrix, frob: u32) -> Result<Self> {
        if det(ctx, &matrix).is_zero() {
            return Err(Error::InvalidArgument("singular matrix".into()));
        }
        let lead = matrix.iter().flatten().copied().find(|x| !x.is_zero()).expect("nonsingular");
        let inv = ctx.inv(lead)?;
        Ok(Collineation {
            matrix: matrix.map(|row| row.map(|x| ctx.mul(x, inv))),
            frob: frob % ctx.degree(),
        })
    }

    pub fn identity() -> Self {
        let (o, z) = (Felt::ONE, Felt::ZERO);
        Collineation { matrix: [[o, z, z], [z, o, z], [z, z, o]], frob: 0 }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn frob(&self) -> u32 {
        self.frob
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

pub fn act(ctx: &FieldCtx, c: &Collineation, p: &ProjPoint) -> ProjPoint {
    let x = p.coords().map(|v| ctx.frobenius(v, c.frob));
    let m = &c.matrix;
    let y: [Felt; 3] = std::array::from_fn(|j| {
        ctx.mul(x[0], m[0][j]) + ctx.mul(x[1], m[1][j]) + ctx.mul(x[2], m[2][j])
    });
    ProjPoint::new(ctx, y).expect("nonsingular action")
}

/// `c1` followed by `c2`: `x ↦ x^(2^(k+m)) · A^(2^m) · B`.
pub fn compose(ctx: &FieldCtx, c1: &Collineation, c2: &Collineation) -> Collineation {
    let a = c1.matrix.map(|row| row.map(|x| ctx.frobenius(x, c2.frob)));
    Collineation::new(ctx, mat_mul(ctx, &a, &c2.matrix), c1.frob + c2.frob)
        .expect("product of nonsingular matrices")
}

pub fn power(ctx: &FieldCtx, c: &Collineation, n: u64) -> Collineation {
    let mut acc = Collineation::identity();
    for _ in 0..n {
        acc = compose(ctx, &acc, c);
    }
    acc
}

/// Least `n ≥ 1` with `c^n = 1`, searching up to `bound`.
pub fn element_order(ctx: &FieldCtx, c: &Collineation, bound: u64) -> Result<u64> {
    let mut acc = *c;
    for n in 1..=bound {
        if acc.is_identity() {
            return Ok(n);
        }
        acc = compose(ctx, &acc, c);
    }
    Err(Error::OrderBoundExceeded(bound))
}

/// Parameters `(u, v)` of an element of the group `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElementUV {
    pub u: Felt,
    pub v: Felt,
}

impl GroupElementUV {
    /// The matrix `M_{u,v}` with rows `(1, uε, v + u^σ ε)`, `(0, 1, u + uε)`,
    /// `(0, 0, 1)`.
    pub fn to_collineation(&self, ctx: &FieldCtx) -> Result<Collineation> {
        let eps = ctx.epsilon();
        let (u, v) = (self.u, self.v);
        let u_sigma = ctx.sigma(u)?;
        if !ctx.in_subfield(v) {
            return Err(Error::NotInSubfield(v));
        }
        let (o, z) = (Felt::ONE, Felt::ZERO);
        let m = [
            [o, ctx.mul(u, eps), v + ctx.mul(u_sigma, eps)],
            [z, o, u + ctx.mul(u, eps)],
            [z, z, o],
        ];
        Collineation::new(ctx, m, 0)
    }

    /// Recovers `(u, v)` if `c` is some `M_{u,v}`.
    pub fn from_collineation(ctx: &FieldCtx, c: &Collineation) -> Option<Self> {
        if c.frob != 0 {
            return None;
        }
        let (_, u) = ctx.decompose(c.matrix[0][1]);
        let (v, _) = ctx.decompose(c.matrix[0][2]);
        let g = GroupElementUV { u, v };
        (g.to_collineation(ctx).ok()? == *c).then_some(g)
    }
}

/// All `q^2` elements of `G`, ordered by `(u, v)`.
pub fn group_elements(ctx: &FieldCtx) -> Vec<(GroupElementUV, Collineation)> {
    let sub = ctx.subfield();
    let mut out = Vec::with_capacity(sub.len() * sub.len());
    for &u in sub {
        for &v in sub {
            let g = GroupElementUV { u, v };
            out.push((g, g.to_collineation(ctx).expect("subfield parameters")));
        }
    }
    out
}

/// `M_{u,v} M_{s,t} = M_{u+s, t+v+suδ}` over all pairs. Returns the pairs
/// checked and any counterexamples.
pub fn group_law_check(ctx: &FieldCtx) -> (u64, Vec<(GroupElementUV, GroupElementUV)>) {
    let elems = group_elements(ctx);
    let mut failures = Vec::new();
    let mut checked = 0;
    for (g, cg) in &elems {
        for (h, ch) in &elems {
            checked += 1;
            if !law_holds(ctx, g, cg, h, ch) {
                failures.push((*g, *h));
            }
        }
    }
    (checked, failures)
}

/// One instance of the product law.
pub fn law_holds(
    ctx: &FieldCtx,
    g: &GroupElementUV,
    cg: &Collineation,
    h: &GroupElementUV,
    ch: &Collineation,
) -> bool {
    let expected = GroupElementUV {
        u: g.u + h.u,
        v: h.v + g.v + ctx.mul(ctx.mul(h.u, g.u), ctx.delta()),
    };
    compose(ctx, cg, ch) == expected.to_collineation(ctx).expect("subfield")
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCensus {
    pub order: u64,
    /// Element order to number of elements.
    pub order_histogram: BTreeMap<u64, u64>,
    pub exponent: u64,
    pub abelian: bool,
    pub closed: bool,
    pub inverses_in_group: bool,
    /// `M_{u,v}^2 = M_{0, u^2 δ}` for every element.
    pub square_law: bool,
    pub law_pairs_checked: u64,
    pub law_failures: usize,
    /// `(k, l)` with `G ≅ C4^k × C2^l`, if the counts determine it.
    pub invariants: Option<(u32, u32)>,
}

impl GroupCensus {
    pub fn invariant_type(&self) -> String {
        match self.invariants {
            Some((k, 0)) => format!("(C4)^{k}"),
            Some((k, l)) => format!("(C4)^{k} x (C2)^{l}"),
            None => "undetermined".into(),
        }
    }
}

pub fn group_census(ctx: &FieldCtx) -> GroupCensus {
    let elems = group_elements(ctx);
    let set: BTreeSet<Collineation> = elems.iter().map(|(_, c)| *c).collect();
    let mut order_histogram = BTreeMap::new();
    let mut square_law = true;
    let mut inverses_in_group = true;
    for (g, c) in &elems {
        let n = element_order(ctx, c, 64).expect("bounded order");
        *order_histogram.entry(n).or_insert(0) += 1;
        let sq = GroupElementUV { u: Felt::ZERO, v: ctx.mul(ctx.square(g.u), ctx.delta()) };
        square_law &= compose(ctx, c, c) == sq.to_collineation(ctx).expect("subfield");
        inverses_in_group &= set.contains(&power(ctx, c, n - 1));
    }
    let mut abelian = true;
    let mut closed = true;
    for (_, a) in &elems {
        for (_, b) in &elems {
            let ab = compose(ctx, a, b);
            abelian &= ab == compose(ctx, b, a);
            closed &= set.contains(&ab);
        }
    }
    let (law_pairs_checked, failures) = group_law_check(ctx);
    let order = elems.len() as u64;
    let exponent = order_histogram.keys().fold(1, |acc, &n| lcm(acc, n));
    let order_four = order_histogram.get(&4).copied().unwrap_or(0);
    let invariants = if abelian && exponent <= 4 && order.is_power_of_two() {
        solve_invariants(order.trailing_zeros(), order_four)
    } else {
        None
    };
    GroupCensus {
        order,
        order_histogram,
        exponent,
        abelian,
        closed,
        inverses_in_group,
        square_law,
        law_pairs_checked,
        law_failures: failures.len(),
        invariants,
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// Unique `(k, l)` with `2k + l = log2 |G|` and `(4^k − 2^k)·2^l` elements
/// of order four.
fn solve_invariants(log_order: u32, order_four: u64) -> Option<(u32, u32)> {
    let mut hits = (0..=log_order / 2).filter_map(|k| {
        let l = log_order - 2 * k;
        let count = (4u64.pow(k) - 2u64.pow(k)) * 2u64.pow(l);
        (count == order_four).then_some((k, l))
    });
    let first = hits.next()?;
    hits.next().is_none().then_some(first)
}

/// `ψ : x ↦ x^2 · [[1, 1, ε], [0, d(1+ε), d(1+ε)], [0, 0, δ^(σ+1)]]`
/// with `d = δ^(σ/2)`.
pub fn build_psi(ctx: &FieldCtx) -> Collineation {
    let eps = ctx.epsilon();
    let delta = ctx.delta();
    let s = ctx.sigma_exp() as u64;
    let d = ctx.mul(ctx.pow(delta, s / 2), Felt::ONE + eps);
    let (o, z) = (Felt::ONE, Felt::ZERO);
    let m = [[o, o, eps], [z, d, d], [z, z, ctx.pow(delta, s + 1)]];
    Collineation::new(ctx, m, 1).expect("nonsingular")
}

/// `μ = δ^(σ/2) ε`.
pub fn psi_mu(ctx: &FieldCtx) -> Felt {
    ctx.mul(ctx.pow(ctx.delta(), (ctx.sigma_exp() / 2) as u64), ctx.epsilon())
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiReport {
    pub mu: Felt,
    pub trace_mu: u8,
    /// `ψ(0,1,z) = (0,1,1+μz²)` for all `z ∈ F_q`.
    pub action_on_subfield_line: bool,
    /// The same identity for all `z ∈ F_{q^2}`.
    pub action_on_full_line: bool,
    pub psi_power_image: ProjPoint,
    pub expected_image: ProjPoint,
    pub image_matches: bool,
    pub image_moved: bool,
    pub order: u64,
    pub power_in_group: Option<GroupElementUV>,
    pub power_order: u64,
    pub intersection_with_group: usize,
    pub product_order: usize,
}

pub fn psi_trace_identity(ctx: &FieldCtx) -> Result<PsiReport> {
    let psi = build_psi(ctx);
    let mu = psi_mu(ctx);
    let trace_mu = ctx.trace_abs(mu, true)?;
    let on_line = |z: Felt| {
        act(ctx, &psi, &ProjPoint::new(ctx, [Felt::ZERO, Felt::ONE, z]).unwrap())
            == ProjPoint::new(ctx, [Felt::ZERO, Felt::ONE, Felt::ONE + ctx.mul(mu, ctx.square(z))])
                .unwrap()
    };
    let action_on_subfield_line = ctx.subfield().iter().all(|&z| on_line(z));
    let action_on_full_line = ctx.elements().all(on_line);

    let k = ctx.degree() as u64;
    let psi_k = power(ctx, &psi, k);
    let start = ProjPoint::new(ctx, [Felt::ZERO, Felt::ONE, Felt::ZERO])?;
    let psi_power_image = act(ctx, &psi_k, &start);
    let expected_image = ProjPoint::new(
        ctx,
        [Felt::ZERO, Felt::ONE, ctx.div(Felt::new(trace_mu as u32), mu)?],
    )?;

    let order = element_order(ctx, &psi, 16 * ctx.e() as u64 + 64)?;
    let power_in_group = GroupElementUV::from_collineation(ctx, &psi_k);
    let power_order = element_order(ctx, &psi_k, 64)?;

    let group: BTreeSet<Collineation> = group_elements(ctx).into_iter().map(|(_, c)| c).collect();
    let cyclic = cyclic_group(ctx, &psi, order);
    let intersection_with_group = cyclic.iter().filter(|c| group.contains(c)).count();
    let product_order = product_set(ctx, &group, &cyclic).len();

    Ok(PsiReport {
        mu,
        trace_mu,
        action_on_subfield_line,
        action_on_full_line,
        psi_power_image,
        expected_image,
        image_matches: psi_power_image == expected_image,
        image_moved: psi_power_image != start,
        order,
        power_in_group,
        power_order,
        intersection_with_group,
        product_order,
    })
}

pub fn cyclic_group(ctx: &FieldCtx, g: &Collineation, order: u64) -> Vec<Collineation> {
    let mut out = Vec::with_capacity(order as usize);
    let mut acc = Collineation::identity();
    for _ in 0..order {
        out.push(acc);
        acc = compose(ctx, &acc, g);
    }
    out
}

/// `{a·b : a ∈ lhs, b ∈ rhs}`.
pub fn product_set(
    ctx: &FieldCtx,
    lhs: &BTreeSet<Collineation>,
    rhs: &[Collineation],
) -> BTreeSet<Collineation> {
    lhs.iter().flat_map(|a| rhs.iter().map(move |b| compose(ctx, a, b))).collect()
}

/// The group `G·⟨ψ⟩`.
pub fn g_psi_group(ctx: &FieldCtx) -> BTreeSet<Collineation> {
    let group: BTreeSet<Collineation> = group_elements(ctx).into_iter().map(|(_, c)| c).collect();
    let psi = build_psi(ctx);
    let order = element_order(ctx, &psi, 16 * ctx.e() as u64 + 64).expect("finite order");
    product_set(ctx, &group, &cyclic_group(ctx, &psi, order))
}

/// Frozen probe sequence for early rejection: `P_{r,s,t}` with parameters
/// given as indices into the sorted subfield. The first entry, `(1,0,0)`,
/// depends only on the first matrix row.
pub const PROBE_PARAMS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 1),
    (2, 3, 0),
    (0, 2, 5),
    (3, 1, 2),
    (5, 6, 7),
];

pub fn probe_points(ctx: &FieldCtx) -> Vec<ProjPoint> {
    let sub = ctx.subfield();
    PROBE_PARAMS
        .iter()
        .map(|&(r, s, t)| crate::unital::bt_point(ctx, sub[r], sub[s], sub[t]))
        .collect()
}

/// Outcome of [`stabilizes_with_stats`]: `rejected_at` is the index of the
/// probe that failed, or `probe_budget` if rejection came in the full check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub stabilizes: bool,
    pub rejected_at: Option<usize>,
}

pub fn stabilizes_with_stats(
    ctx: &FieldCtx,
    c: &Collineation,
    u: &UnitalSet,
    probe_budget: usize,
) -> ProbeOutcome {
    let probes = probe_points(ctx);
    let budget = probe_budget.min(probes.len());
    for (i, p) in probes.iter().take(budget).enumerate() {
        if !u.contains(ctx, &act(ctx, c, p)) {
            return ProbeOutcome { stabilizes: false, rejected_at: Some(i) };
        }
    }
    let ok = u.points().iter().all(|p| u.contains(ctx, &act(ctx, c, p)));
    ProbeOutcome { stabilizes: ok, rejected_at: (!ok).then_some(budget) }
}

/// Whether `c` maps `U` onto itself. Probes first, full check for survivors.
pub fn stabilizes(ctx: &FieldCtx, c: &Collineation, u: &UnitalSet, probe_budget: usize) -> bool {
    stabilizes_with_stats(ctx, c, u, probe_budget).stabilizes
}

/// The orbit representative `(a, b)` with `p` in the `G`-orbit of
/// `(1, a, bε)`, together with the `(u, v)` such that `p·M_{u,v} = (1, a, bε)`.
pub fn orbit_representative_with_element(
    ctx: &FieldCtx,
    unital: &UnitalSet,
    p: &ProjPoint,
) -> Result<((Felt, Felt), GroupElementUV)> {
    if !p.is_affine() {
        return Err(Error::PointAtInfinity);
    }
    if unital.contains(ctx, p) {
        return Err(Error::PointOnUnital);
    }
    let [_, y, _] = p.coords();
    let (_, y2) = ctx.decompose(y);
    let partial = GroupElementUV { u: y2, v: Felt::ZERO }.to_collineation(ctx)?;
    let [_, a, z] = act(ctx, &partial, p).coords();
    let (c1, b) = ctx.decompose(z);
    let g = GroupElementUV { u: y2, v: c1 };
    debug_assert_eq!(
        act(ctx, &g.to_collineation(ctx)?, p),
        ProjPoint::affine(a, ctx.mul(b, ctx.epsilon()))
    );
    Ok(((a, b), g))
}

pub fn orbit_representative(ctx: &FieldCtx, unital: &UnitalSet, p: &ProjPoint) -> Result<(Felt, Felt)> {
    Ok(orbit_representative_with_element(ctx, unital, p)?.0)
}

/// The `q^2 − q` points `(1, a, bε)` with `b ≠ a^(σ+2)`.
pub fn orbit_representatives(ctx: &FieldCtx) -> Vec<(Felt, Felt)> {
    let s = ctx.sigma_exp() as u64;
    let mut out = Vec::new();
    for &a in ctx.subfield() {
        let forbidden = ctx.pow(a, s + 2);
        for &b in ctx.subfield() {
            if b != forbidden {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn representative_point(ctx: &FieldCtx, rep: (Felt, Felt)) -> ProjPoint {
    ProjPoint::affine(rep.0, ctx.mul(rep.1, ctx.epsilon()))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub representatives: usize,
    pub orbit_sizes: BTreeMap<usize, usize>,
    pub pairwise_disjoint: bool,
    pub points_covered: usize,
    pub admissible_points: usize,
    pub reduction_consistent: bool,
}

/// Enumerates the `G`-orbits of the representatives and checks they
/// partition the affine points off `U`.
pub fn orbit_partition(ctx: &FieldCtx, unital: &UnitalSet) -> OrbitReport {
    let group = group_elements(ctx);
    let reps = orbit_representatives(ctx);
    let mut owner: BTreeMap<ProjPoint, usize> = BTreeMap::new();
    let mut orbit_sizes = BTreeMap::new();
    let mut pairwise_disjoint = true;
    for (i, rep) in reps.iter().enumerate() {
        let p = representative_point(ctx, *rep);
        let orbit: BTreeSet<ProjPoint> = group.iter().map(|(_, c)| act(ctx, c, &p)).collect();
        *orbit_sizes.entry(orbit.len()).or_insert(0) += 1;
        for x in orbit {
            if owner.insert(x, i).is_some() {
                pairwise_disjoint = false;
            }
        }
    }
    let admissible: Vec<ProjPoint> = crate::plane::ProjPoint::all(ctx)
        .filter(|p| p.is_affine() && !unital.contains(ctx, p))
        .collect();
    let reduction_consistent = admissible.iter().all(|p| {
        let rep = orbit_representative(ctx, unital, p).expect("admissible");
        owner.get(p).map(|&i| reps[i] == rep).unwrap_or(false)
    });
    OrbitReport {
        representatives: reps.len(),
        orbit_sizes,
        pairwise_disjoint,
        points_covered: owner.len(),
        admissible_points: admissible.len(),
        reduction_consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unital::build_bt_unital;
    use std::sync::OnceLock;

    fn ctx() -> &'static FieldCtx {
        static CTX: OnceLock<FieldCtx> = OnceLock::new();
        CTX.get_or_init(|| FieldCtx::new(1).unwrap())
    }

    fn unital() -> &'static UnitalSet {
        static U: OnceLock<UnitalSet> = OnceLock::new();
        U.get_or_init(|| build_bt_unital(ctx()))
    }

    #[test]
    fn identity_fixes_everything() {
        let c = ctx();
        let id = Collineation::identity();
        assert!(ProjPoint::all(c).all(|p| act(c, &id, &p) == p));
        let psi = build_psi(c);
        assert_eq!(compose(c, &id, &psi), psi);
        assert_eq!(compose(c, &psi, &id), psi);
    }

    #[test]
    fn m_uv_moves_010() {
        let c = ctx();
        for (g, m) in group_elements(c) {
            let img = act(c, &m, &ProjPoint::new(c, [Felt::ZERO, Felt::ONE, Felt::ZERO]).unwrap());
            let expected = g.u + c.mul(g.u, c.epsilon());
            assert_eq!(img.coords(), [Felt::ZERO, Felt::ONE, expected]);
        }
    }

    #[test]
    fn orders_and_square_law() {
        let c = ctx();
        for (g, m) in group_elements(c) {
            let n = element_order(c, &m, 16).unwrap();
            let expected = if !g.u.is_zero() { 4 } else if !g.v.is_zero() { 2 } else { 1 };
            assert_eq!(n, expected, "{g:?}");
        }
        let m = GroupElementUV { u: Felt::ONE, v: Felt::ZERO }.to_collineation(c).unwrap();
        assert!(matches!(element_order(c, &m, 3), Err(Error::OrderBoundExceeded(3))));
    }

    #[test]
    fn census_e1() {
        let census = group_census(ctx());
        assert_eq!(census.order, 64);
        assert_eq!(census.order_histogram, BTreeMap::from([(1, 1), (2, 7), (4, 56)]));
        assert!(census.abelian && census.closed && census.inverses_in_group && census.square_law);
        assert_eq!(census.law_pairs_checked, 4096);
        assert_eq!(census.law_failures, 0);
        assert_eq!(census.invariants, Some((3, 0)));
        assert_eq!(census.invariant_type(), "(C4)^3");
    }

    #[test]
    fn invariant_solver() {
        assert_eq!(solve_invariants(6, 56), Some((3, 0)));
        // C4 x C2^2: 2*4 = 8 elements of order four.
        assert_eq!(solve_invariants(4, 8), Some((1, 2)));
        assert_eq!(solve_invariants(6, 0), Some((0, 6)));
    }

    #[test]
    fn from_collineation_round_trip() {
        let c = ctx();
        for (g, m) in group_elements(c) {
            assert_eq!(GroupElementUV::from_collineation(c, &m), Some(g));
        }
        assert_eq!(GroupElementUV::from_collineation(c, &build_psi(c)), None);
    }

    #[test]
    fn psi_suite() {
        let c = ctx();
        let psi = build_psi(c);
        assert!(stabilizes(c, &psi, unital(), 8));
        let report = psi_trace_identity(c).unwrap();
        assert_eq!(report.trace_mu, 1);
        assert!(report.action_on_subfield_line);
        assert!(report.action_on_full_line);
        assert!(report.image_matches, "{report:?}");
        assert!(report.image_moved);
        assert_eq!(report.order, 24);
        assert_eq!(report.power_order, 4);
        assert!(report.power_in_group.is_some_and(|g| !g.u.is_zero()));
        assert_eq!(report.intersection_with_group, 4);
        assert_eq!(report.product_order, 384);
        assert_eq!(power(c, &psi, 24), Collineation::identity());
        for k in 0..24 {
            assert!(stabilizes(c, &power(c, &psi, k), unital(), 8));
        }
    }

    #[test]
    fn compose_respects_action() {
        let c = ctx();
        let psi = build_psi(c);
        let m = GroupElementUV { u: c.subfield()[3], v: c.subfield()[5] }.to_collineation(c).unwrap();
        let other = Collineation::new(
            c,
            [[Felt::new(3), Felt::new(9), Felt::ZERO], [Felt::ONE, Felt::new(17), Felt::new(2)], [Felt::ZERO, Felt::new(40), Felt::new(1)]],
            4,
        )
        .unwrap();
        for (a, b) in [(psi, m), (m, psi), (other, psi), (psi, other), (other, other)] {
            let ab = compose(c, &a, &b);
            for p in ProjPoint::all(c).step_by(13) {
                assert_eq!(act(c, &ab, &p), act(c, &b, &act(c, &a, &p)));
            }
        }
    }

    #[test]
    fn all_group_elements_stabilize() {
        let c = ctx();
        for (_, m) in group_elements(c) {
            assert!(stabilizes(c, &m, unital(), 8));
        }
    }

    #[test]
    fn non_stabilizer_rejected_early() {
        let c = ctx();
        let (o, z) = (Felt::ONE, Felt::ZERO);
        let h = Collineation::new(c, [[o, Felt::new(5), Felt::new(7)], [z, Felt::new(2), o], [z, z, Felt::new(9)]], 0).unwrap();
        let outcome = stabilizes_with_stats(c, &h, unital(), 8);
        assert!(!outcome.stabilizes);
        assert!(outcome.rejected_at.unwrap() <= 2);
    }

    #[test]
    fn orbit_representative_cases() {
        let c = ctx();
        let u = unital();
        for (a, b) in orbit_representatives(c) {
            let p = representative_point(c, (a, b));
            assert_eq!(orbit_representative(c, u, &p).unwrap(), (a, b));
        }
        assert!(matches!(orbit_representative(c, u, &ProjPoint::p_inf()), Err(Error::PointAtInfinity)));
        let on_u = ProjPoint::affine(Felt::ZERO, Felt::ZERO);
        assert!(matches!(orbit_representative(c, u, &on_u), Err(Error::PointOnUnital)));
    }

    #[test]
    fn orbit_partition_e1() {
        let report = orbit_partition(ctx(), unital());
        assert_eq!(report.representatives, 56);
        assert_eq!(report.orbit_sizes, BTreeMap::from([(64, 56)]));
        assert!(report.pairwise_disjoint);
        assert_eq!(report.points_covered, 3584);
        assert_eq!(report.admissible_points, 3584);
        assert!(report.reduction_consistent);
    }
}
