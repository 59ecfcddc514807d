//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion may be listed in `KNOWN_DEVIATIONS`. It still prints FAIL, but
//! the run only errors if its observed behaviour differs from the recorded one.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use bt_core::abb::{abb_unital_equality, counting_identities};
use bt_core::collineation::{
    build_psi, group_census, orbit_partition, psi_trace_identity, stabilizes,
};
use bt_core::feet::{
    analytic_checks, full_spectrum_scan, oracle_coherence, witness_four, witness_three, LineClass,
    Scope,
};
use bt_core::stabilizer::{exhaustive_flag_stabilizer, ScanOptions};
use bt_core::unital::{has_subline_property, verify_unital};
use bt_core::{build_bt_unital, FieldCtx, ProjPoint};

struct Verdict {
    pass: bool,
    detail: String,
    /// For a known deviation: whether the observation matches the recorded one.
    deviation_as_recorded: Option<bool>,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into(), deviation_as_recorded: None }
}

fn unital_axiom() -> Verdict {
    let c1 = FieldCtx::new(1).unwrap();
    let r1 = verify_unital(&c1, &build_bt_unital(&c1)).unwrap();
    let c2 = FieldCtx::new(2).unwrap();
    let r2 = verify_unital(&c2, &build_bt_unital(&c2)).unwrap();
    let hist1: BTreeMap<usize, u64> = BTreeMap::from([(1, 513), (9, 3648)]);
    verdict(
        r1.passed && r1.histogram == hist1 && r2.passed && r2.lines_checked == 1_049_601,
        format!(
            "e=1 {} lines {:?}; e=2 {} lines {:?}",
            r1.lines_checked, r1.histogram, r2.lines_checked, r2.histogram
        ),
    )
}

fn abb_equality() -> Verdict {
    let r1 = abb_unital_equality(&FieldCtx::new(1).unwrap()).unwrap();
    let r2 = abb_unital_equality(&FieldCtx::new(2).unwrap()).unwrap();
    verdict(
        r1.equal && r2.equal,
        format!("e=1 {}={}, e=2 {}={}", r1.image_size, r1.unital_size, r2.image_size, r2.unital_size),
    )
}

fn subline_uniqueness() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let u = build_bt_unital(&ctx);
    let with: Vec<ProjPoint> =
        u.points().iter().copied().filter(|p| has_subline_property(&ctx, &u, p).unwrap()).collect();
    verdict(with == vec![ProjPoint::p_inf()], format!("points with the property: {with:?}"))
}

fn group_law() -> Verdict {
    let census = group_census(&FieldCtx::new(1).unwrap());
    let orders = BTreeMap::from([(1, 1), (2, 7), (4, 56)]);
    verdict(
        census.law_pairs_checked == 4096
            && census.law_failures == 0
            && census.order_histogram == orders
            && census.abelian
            && census.invariants == Some((3, 0)),
        format!(
            "{} pairs, {} failures, orders {:?}, {}",
            census.law_pairs_checked,
            census.law_failures,
            census.order_histogram,
            census.invariant_type()
        ),
    )
}

fn psi_suite() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let u = build_bt_unital(&ctx);
    let stab = stabilizes(&ctx, &build_psi(&ctx), &u, 8);
    let r = psi_trace_identity(&ctx).unwrap();
    verdict(
        stab && r.order == 24
            && r.action_on_subfield_line
            && r.trace_mu == 1
            && r.intersection_with_group == 4
            && r.image_matches,
        format!(
            "stabilises {stab}, order {}, psi(0,1,z) rule {}, trace(mu) {}, |<psi> n G| {}, |G<psi>| {}",
            r.order, r.action_on_subfield_line, r.trace_mu, r.intersection_with_group, r.product_order
        ),
    )
}

fn stabiliser_scan() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let u = build_bt_unital(&ctx);
    let dir = tempfile::tempdir().unwrap();
    let opts = |name: &str| ScanOptions {
        checkpoint: Some(dir.path().join(name)),
        ..ScanOptions::default()
    };
    let lin = exhaustive_flag_stabilizer(&ctx, &u, false, &opts("linear.bin")).unwrap();
    let semi = exhaustive_flag_stabilizer(&ctx, &u, true, &opts("semilinear.bin")).unwrap();
    verdict(
        lin.count == 64
            && lin.all_of_form_m_uv
            && semi.count == 384
            && semi.equals_g_psi == Some(true)
            && lin.orbit_size == 16_257_024
            && semi.orbit_size == 16_257_024,
        format!(
            "linear {} of {}, semilinear {} of {}, orbit {}",
            lin.count, lin.candidate_space, semi.count, semi.candidate_space, lin.orbit_size
        ),
    )
}

fn counting() -> Verdict {
    let reports: Vec<_> = [8u128, 32, 128].map(|q| counting_identities(q).unwrap()).into();
    let orbit = reports[0].checks.iter().find(|c| c.name == "unital_orbit").unwrap().lhs;
    verdict(
        reports.iter().all(|r| r.all_hold),
        format!("q = 8, 32, 128 all hold: {}; orbit at q=8 {orbit}", reports.iter().all(|r| r.all_hold)),
    )
}

fn coherence() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let r = oracle_coherence(&ctx, &build_bt_unital(&ctx));
    verdict(
        r.points == 3584 && r.formula_mismatches == 0 && r.count_mismatches == 0,
        format!(
            "{} points, {} formula mismatches, {} pairs, {} count mismatches",
            r.points, r.formula_mismatches, r.pairs, r.count_mismatches
        ),
    )
}

fn spectrum() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let r = full_spectrum_scan(&ctx, &build_bt_unital(&ctx), Scope::AllPoints);
    verdict(
        r.max_count == 4
            && r.all_k_realized
            && r.high_counts_on_special_pencil
            && r.easy_bound_holds
            && r.points_with_collinear_feet == 0,
        format!(
            "{} points, histogram {:?}, max {}, high on pencil {}, easy <= 2 {}",
            r.points_scanned, r.histogram, r.max_count, r.high_counts_on_special_pencil, r.easy_bound_holds
        ),
    )
}

fn witnesses() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let u = build_bt_unital(&ctx);
    let three = witness_three(&ctx, &u).unwrap();
    let four = witness_four(&ctx, &u).unwrap();
    let pass = three.certificate.count == 3 && four.literal.count == 4;
    // Recorded behaviour: the printed line is an easy line (a2 = δ^-2 ≠ δ^-σ)
    // and the special-pencil line with a2 = δ^-σ carries four feet.
    let as_recorded = three.certificate.count == 3
        && four.literal.line_class == LineClass::Easy
        && four.literal.count <= 2
        && four.pencil.count == 4
        && four.reduced_roots == 4;
    Verdict {
        pass,
        detail: format!(
            "(1,0,eps) on [delta+eps,0,1]: {}; {:?} on printed line {:?}: {} ({:?}); on {:?}: {}",
            three.certificate.count,
            four.literal.point,
            four.literal.line,
            four.literal.count,
            four.literal.line_class,
            four.pencil.line,
            four.pencil.count
        ),
        deviation_as_recorded: Some(as_recorded),
    }
}

fn analytic() -> Verdict {
    let a1 = analytic_checks(&FieldCtx::new(1).unwrap());
    let a2 = analytic_checks(&FieldCtx::new(2).unwrap());
    let pass = a1.conic_nucleus_holds
        && a1.oval_nucleus_holds
        && a1.cap_cases == 448
        && a1.cap_max <= 4
        && a1.cap_max_a3_zero <= 3
        && a1.parameterisation_cases == 7
        && a1.parameterisation_holds
        && a1.menichetti_holds
        && a1.trace_identity_holds
        && a2.menichetti_holds
        && a2.trace_identity_holds;
    verdict(
        pass,
        format!(
            "nuclei {}/{}, cap max {} (a3=0: {}) over {}, parameterisation {}, menichetti {}/{}, trace identity {}/{}",
            a1.conic_nucleus_holds,
            a1.oval_nucleus_holds,
            a1.cap_max,
            a1.cap_max_a3_zero,
            a1.cap_cases,
            a1.parameterisation_holds,
            a1.menichetti_holds,
            a2.menichetti_holds,
            a1.trace_identity_holds,
            a2.trace_identity_holds
        ),
    )
}

fn orbit_reps() -> Verdict {
    let ctx = FieldCtx::new(1).unwrap();
    let r = orbit_partition(&ctx, &build_bt_unital(&ctx));
    verdict(
        r.representatives == 56
            && r.orbit_sizes == BTreeMap::from([(64, 56)])
            && r.pairwise_disjoint
            && r.points_covered == 3584,
        format!(
            "{} representatives, orbit sizes {:?}, disjoint {}, covered {}",
            r.representatives, r.orbit_sizes, r.pairwise_disjoint, r.points_covered
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

const KNOWN_DEVIATIONS: [usize; 1] = [10];

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("unital axiom", unital_axiom),
        ("ABB equality", abb_equality),
        ("subline property uniqueness", subline_uniqueness),
        ("group law and census", group_law),
        ("psi suite", psi_suite),
        ("exhaustive stabiliser", stabiliser_scan),
        ("counting identities", counting),
        ("feet oracle coherence", coherence),
        ("feet spectrum", spectrum),
        ("witnesses", witnesses),
        ("analytic lemmas", analytic),
        ("orbit representatives", orbit_reps),
    ];
    let mut unexpected = 0;
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {n:>2} {name} [{secs:.2}s]: {}", v.detail);
        if !v.pass {
            failed += 1;
        }
        let known = KNOWN_DEVIATIONS.contains(&n);
        match (v.pass, known, v.deviation_as_recorded) {
            (true, false, _) => {}
            (false, true, Some(true)) => println!("     known deviation, behaviour as recorded"),
            (true, true, _) => {
                println!("     listed as a known deviation but passed");
                unexpected += 1;
            }
            _ => unexpected += 1,
        }
    }
    println!("acceptance: {} passed, {failed} failed, {unexpected} unexpected", 12 - failed);
    if unexpected == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
