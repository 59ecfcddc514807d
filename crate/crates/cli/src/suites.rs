//! One runner per verification suite.

use std::path::PathBuf;
use std::time::Instant;

use bt_core::abb::{abb_unital_equality, build_spread, counting_identities};
use bt_core::collineation::{
    build_psi, group_census, orbit_partition, psi_trace_identity, stabilizes,
    stabilizes_with_stats, Collineation,
};
use bt_core::feet::{
    analytic_checks, full_spectrum_scan, oracle_coherence, witness_four, witness_three, Scope,
    SpectrumReport,
};
use bt_core::stabilizer::{exhaustive_flag_stabilizer, ScanOptions, StabilizerReport};
use bt_core::unital::{has_subline_property, verify_unital};
use bt_core::{Error, Felt, FieldCtx, ProjLine, ProjPoint, UnitalSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{Status, SuiteResult};

pub const SUITES: [&str; 10] = [
    "context",
    "build",
    "verify-unital",
    "verify-abb",
    "group",
    "stabilizer",
    "feet",
    "spectrum",
    "witnesses",
    "identities",
];

pub const SAMPLING_SEED: u64 = 0x5eed;
const SAMPLES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Options {
    pub budget: u128,
    pub scope: Scope,
    /// `None` runs both scans.
    pub semilinear: Option<bool>,
    pub checkpoint: Option<PathBuf>,
}

/// Output of a suite before timing is attached.
pub struct Outcome {
    pub status: Status,
    pub note: Option<String>,
    pub payload: Value,
    pub witnesses: Value,
}

fn outcome(pass: bool, payload: Value) -> Outcome {
    Outcome { status: status(pass), note: None, payload, witnesses: json!([]) }
}

fn status(pass: bool) -> Status {
    if pass { Status::Pass } else { Status::Fail }
}

pub fn timed(
    name: &'static str,
    run: impl FnOnce() -> Result<Outcome, Error>,
) -> Result<SuiteResult, Error> {
    let start = Instant::now();
    let out = run()?;
    Ok(SuiteResult {
        name,
        status: out.status,
        runtime_ms: start.elapsed().as_millis() as u64,
        note: out.note,
        payload: out.payload,
        witnesses: out.witnesses,
    })
}

pub fn context(ctx: &FieldCtx) -> Result<Outcome, Error> {
    let eps = ctx.epsilon();
    let delta = ctx.delta();
    let exponents = ctx.exponent_inverse_check();
    let eps_ok = ctx.frobenius(eps, 2 * ctx.e() + 1) == eps + Felt::ONE
        && ctx.square(eps) == eps + delta;
    let delta_ok =
        ctx.in_subfield(delta) && delta != Felt::ONE && ctx.trace_abs(delta, false)? == 1;
    let pass = eps_ok
        && delta_ok
        && exponents.violations.is_empty()
        && exponents.sigma_squared_is_squaring_on_subfield;
    let mut out = outcome(
        pass,
        json!({
            "epsilon_invariants": eps_ok,
            "delta_invariants": delta_ok,
            "trace_rel_epsilon": ctx.trace_rel(eps),
            "exponent_pairs": exponents.pairs,
            "violations": exponents.violations,
            "sigma_squared_is_squaring_on_subfield": exponents.sigma_squared_is_squaring_on_subfield,
            "sigma_squared_is_squaring_on_big_field": exponents.sigma_squared_is_squaring_on_big_field,
        }),
    );
    if !exponents.sigma_squared_is_squaring_on_big_field {
        out.note = Some("x^(sigma^2) = x^2 holds on F_q only; sigma is restricted to F_q".into());
    }
    Ok(out)
}

pub fn build(ctx: &FieldCtx, u: &UnitalSet) -> Result<Outcome, Error> {
    let q = ctx.q() as usize;
    let section = u.section(ctx, &ProjLine::at_infinity());
    let pass = u.len() == q * q * q + 1
        && u.contains(ctx, &ProjPoint::p_inf())
        && section == vec![ProjPoint::p_inf()];
    Ok(outcome(
        pass,
        json!({
            "size": u.len(),
            "expected_size": q * q * q + 1,
            "special_point": u.special_point(),
            "line_at_infinity_section": section,
        }),
    ))
}

pub fn verify(ctx: &FieldCtx, u: &UnitalSet) -> Result<Outcome, Error> {
    let report = verify_unital(ctx, u)?;
    let (scope, checked, with_property): (&str, usize, Vec<ProjPoint>) = if ctx.e() == 1 {
        let with = u
            .points()
            .iter()
            .copied()
            .filter(|p| has_subline_property(ctx, u, p).unwrap_or(false))
            .collect();
        ("all", u.len(), with)
    } else {
        // P_inf and an evenly spaced sample of 64 affine points.
        let step = (u.len() - 1) / 64;
        let mut sample: Vec<ProjPoint> = u.points().iter().copied().step_by(step).take(64).collect();
        sample.retain(|p| *p != ProjPoint::p_inf());
        sample.push(ProjPoint::p_inf());
        let with = sample
            .iter()
            .copied()
            .filter(|p| has_subline_property(ctx, u, p).unwrap_or(false))
            .collect();
        ("sample", sample.len(), with)
    };
    let unique = with_property == vec![ProjPoint::p_inf()];
    Ok(outcome(
        report.passed && unique,
        json!({
            "lines_checked": report.lines_checked,
            "histogram": report.histogram,
            "tangent_lines": report.tangent_lines,
            "secant_lines": report.secant_lines,
            "violations": report.violations.len(),
            "subline_property": {
                "scope": scope,
                "points_checked": checked,
                "points_with_property": with_property,
                "unique_at_p_inf": unique,
            },
        }),
    ))
}

pub fn abb(ctx: &FieldCtx) -> Result<Outcome, Error> {
    let cmp = abb_unital_equality(ctx)?;
    let spread = build_spread(ctx);
    let partition = spread.is_partition(ctx);
    Ok(outcome(
        cmp.equal && partition,
        json!({
            "equal": cmp.equal,
            "image_size": cmp.image_size,
            "unital_size": cmp.unital_size,
            "only_in_image": cmp.only_in_image,
            "only_in_unital": cmp.only_in_unital,
            "spread_elements": spread.elements.len(),
            "spread_is_partition": partition,
        }),
    ))
}

/// Random flag-group elements: how early the probes reject them.
fn probe_sampling(ctx: &FieldCtx, u: &UnitalSet) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
    let n = ctx.big_order();
    let mut histogram = vec![0u64; 10];
    let mut stabilising = 0;
    for _ in 0..SAMPLES {
        let x = |rng: &mut ChaCha8Rng| Felt::new(rng.gen_range(0..n));
        let nz = |rng: &mut ChaCha8Rng| Felt::new(rng.gen_range(1..n));
        let (o, z) = (Felt::ONE, Felt::ZERO);
        let m = [[o, x(&mut rng), x(&mut rng)], [z, nz(&mut rng), x(&mut rng)], [z, z, nz(&mut rng)]];
        let c = Collineation::new(ctx, m, 0).expect("triangular, nonzero diagonal");
        let r = stabilizes_with_stats(ctx, &c, u, 8);
        match r.rejected_at {
            Some(i) => histogram[i] += 1,
            None => stabilising += 1,
        }
    }
    let within_two = histogram[..2].iter().sum::<u64>();
    json!({
        "seed": SAMPLING_SEED,
        "samples": SAMPLES,
        "rejected_at_probe": histogram,
        "stabilising": stabilising,
        "rejected_within_two_probes": within_two,
    })
}

pub fn group(ctx: &FieldCtx, u: &UnitalSet) -> Result<Outcome, Error> {
    let census = group_census(ctx);
    let psi = psi_trace_identity(ctx)?;
    let psi_stabilizes = stabilizes(ctx, &build_psi(ctx), u, 8);
    let orbits = orbit_partition(ctx, u);
    let q2 = ctx.big_order() as u64;
    let degree = ctx.degree() as u64;
    let odd = 2 * ctx.e() + 1;
    let census_ok = census.order == q2
        && census.abelian
        && census.closed
        && census.inverses_in_group
        && census.square_law
        && census.law_failures == 0
        && census.invariants == Some((odd, 0));
    let psi_ok = psi_stabilizes
        && psi.trace_mu == 1
        && psi.action_on_subfield_line
        && psi.image_matches
        && psi.order == 4 * degree
        && psi.intersection_with_group == 4
        && psi.product_order as u64 == q2 * degree;
    let q = ctx.q() as usize;
    let orbits_ok = orbits.representatives == q * q - q
        && orbits.orbit_sizes.len() == 1
        && orbits.orbit_sizes.contains_key(&(q * q))
        && orbits.pairwise_disjoint
        && orbits.points_covered == orbits.admissible_points
        && orbits.reduction_consistent;
    Ok(outcome(
        census_ok && psi_ok && orbits_ok,
        json!({
            "census": census,
            "invariant_type": census.invariant_type(),
            "psi": {
                "stabilizes": psi_stabilizes,
                "report": psi,
            },
            "orbit_representatives": orbits,
            "probe_sampling": probe_sampling(ctx, u),
        }),
    ))
}

fn stabilizer_payload(r: &StabilizerReport) -> Value {
    json!({
        "semilinear": r.semilinear,
        "count": r.count,
        "candidate_space": r.candidate_space,
        "candidates_scanned": r.candidates_scanned,
        "shards": r.shards,
        "resumed_shards": r.resumed_shards,
        "rejections": r.rejections,
        "all_of_form_m_uv": r.all_of_form_m_uv,
        "equals_g_psi": r.equals_g_psi,
        "orbit_size": r.orbit_size,
        "description": r.description,
        "reduction": r.reduction,
    })
}

fn stabilizer_ok(ctx: &FieldCtx, r: &StabilizerReport) -> bool {
    let q2 = ctx.big_order() as usize;
    if r.semilinear {
        r.count == q2 * ctx.degree() as usize && r.equals_g_psi == Some(true)
    } else {
        r.count == q2 && r.all_of_form_m_uv
    }
}

pub fn checkpoint_for(base: &Option<PathBuf>, semilinear: bool, both: bool) -> Option<PathBuf> {
    base.as_ref().map(|p| {
        if both {
            let mut s = p.clone().into_os_string();
            s.push(if semilinear { ".semilinear" } else { ".linear" });
            PathBuf::from(s)
        } else {
            p.clone()
        }
    })
}

pub fn run_stabilizer(
    ctx: &FieldCtx,
    u: &UnitalSet,
    opts: &Options,
) -> Result<(Outcome, Vec<StabilizerReport>), Error> {
    let modes: Vec<bool> = match opts.semilinear {
        Some(s) => vec![s],
        None => vec![false, true],
    };
    let mut reports = Vec::new();
    for &semilinear in &modes {
        let scan = ScanOptions {
            budget: opts.budget,
            checkpoint: checkpoint_for(&opts.checkpoint, semilinear, modes.len() > 1),
        };
        reports.push(exhaustive_flag_stabilizer(ctx, u, semilinear, &scan)?);
    }
    let pass = reports.iter().all(|r| stabilizer_ok(ctx, r));
    let payload = Value::Array(reports.iter().map(stabilizer_payload).collect());
    let witnesses = json!(reports
        .iter()
        .map(|r| json!({ "semilinear": r.semilinear, "elements": r.elements }))
        .collect::<Vec<_>>());
    Ok((Outcome { status: status(pass), note: None, payload, witnesses }, reports))
}

pub fn feet(ctx: &FieldCtx, u: &UnitalSet) -> Result<Outcome, Error> {
    let a = analytic_checks(ctx);
    let analytic_ok = a.degenerate_iff_a1_is_y1_squared
        && a.conic_nucleus_holds
        && a.oval_sizes_ok
        && a.oval_nucleus_holds
        && a.translation_oval_nucleus == ProjPoint::new(ctx, [Felt::ZERO, Felt::ONE, Felt::ZERO])?
        && a.cap_max <= 4
        && a.cap_max_a3_zero <= 3
        && a.parameterisation_holds
        && a.root_channel_holds
        && a.simple_system_max <= 4
        && a.menichetti_holds
        && a.trace_identity_holds;
    let (coherence, coherence_ok, note) = if ctx.e() == 1 {
        let c = oracle_coherence(ctx, u);
        let ok = c.formula_mismatches == 0 && c.count_mismatches == 0;
        (json!(c), ok, None)
    } else {
        (Value::Null, true, Some("oracle coherence scan runs at e = 1 only".to_string()))
    };
    let mut out = outcome(analytic_ok && coherence_ok, json!({ "analytic": a, "coherence": coherence }));
    out.note = note;
    Ok(out)
}

pub fn spectrum(ctx: &FieldCtx, u: &UnitalSet, scope: Scope) -> (Outcome, SpectrumReport) {
    let r = full_spectrum_scan(ctx, u, scope);
    let pass = r.max_count == 4
        && r.all_k_realized
        && r.high_counts_on_special_pencil
        && r.easy_bound_holds
        && r.points_with_collinear_feet == 0
        && r.g_invariant;
    let out = Outcome {
        status: status(pass),
        note: None,
        payload: json!({
            "scope": r.scope,
            "points_scanned": r.points_scanned,
            "lines_per_point": r.lines_per_point,
            "histogram": r.histogram,
            "max_count": r.max_count,
            "realized": r.realized,
            "all_k_realized": r.all_k_realized,
            "high_counts_on_special_pencil": r.high_counts_on_special_pencil,
            "easy_bound_holds": r.easy_bound_holds,
            "special_pencil_size": r.special_pencil_size,
            "points_with_collinear_feet": r.points_with_collinear_feet,
            "g_invariant": r.g_invariant,
            "g_invariance_checks": r.g_invariance_checks,
            "per_representative": r.per_representative,
        }),
        witnesses: json!(r.witnesses),
    };
    (out, r)
}

pub fn witnesses(ctx: &FieldCtx, u: &UnitalSet) -> Result<Outcome, Error> {
    let three = witness_three(ctx, u)?;
    let four = witness_four(ctx, u)?;
    let pass = three.certificate.verified
        && three.closing_point_on_line
        && three.root_pair == 2
        && four.pencil.verified
        && four.reduced_roots == 4
        && four.reduced_matches
        && four.h1_roots_hold;
    let note = (!four.literal.verified).then(|| {
        format!(
            "line {:?} with a2 = delta^-2 meets the feet of {:?} in {} point(s); \
             the four-point witness uses a2 = delta^-sigma, line {:?}",
            four.literal.line, four.literal.point, four.literal.count, four.pencil.line
        )
    });
    Ok(Outcome {
        status: status(pass),
        note,
        payload: json!({
            "three": { "count": three.certificate.count, "closing_point_on_line": three.closing_point_on_line, "root_pair": three.root_pair },
            "four": {
                "count": four.pencil.count,
                "printed_line_count": four.literal.count,
                "printed_line_class": four.literal.line_class,
                "reduced_roots": four.reduced_roots,
                "reduced_matches": four.reduced_matches,
                "h1_roots_hold": four.h1_roots_hold,
            },
        }),
        witnesses: json!([three.certificate, four.pencil, four.literal]),
    })
}

pub fn identities() -> Result<Outcome, Error> {
    let reports = [8u128, 32, 128].map(counting_identities);
    let reports: Vec<_> = reports.into_iter().collect::<Result<_, _>>()?;
    let pass = reports.iter().all(|r| r.all_hold);
    Ok(outcome(pass, json!(reports)))
}
