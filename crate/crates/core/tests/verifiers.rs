use lfk_core::verify::{applicable_claims, Claim, Outcome, Verifier, VerifyOptions};
use lfk_core::{AdaptedBasis, Error, Field, FpSubspace, Line, LocalElement, PairingContext, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn field(s: &str) -> Field {
    Field::parse(s).unwrap()
}

fn verifier(d: &str, window: Option<i64>) -> Verifier {
    Verifier::new(
        &field(d),
        VerifyOptions {
            window,
            ..VerifyOptions::default()
        },
    )
    .unwrap()
}

fn assert_all_pass(d: &str, window: Option<i64>, expected_ids: &[&str]) {
    let v = verifier(d, window);
    let reports = v.run_all().unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.claim_id.as_str()).collect();
    assert_eq!(ids, expected_ids);
    for r in &reports {
        assert_eq!(
            r.status,
            Outcome::Pass,
            "{d} {}: {:?}",
            r.claim_id,
            r.counterexample
        );
        assert!(r.counterexample.is_none());
        assert!(!r.witnesses.is_empty());
    }
}

#[test]
fn q2_suite() {
    assert_all_pass(
        "Qp p=2 f=1",
        None,
        &["S2.12", "S2.15", "S5.27", "S6.29", "S7.32", "S8.33"],
    );
}

#[test]
fn q3_zeta3_suite() {
    assert_all_pass(
        "Qp p=3 f=1 eis=3,3,1",
        None,
        &["S2.12", "S2.15", "S5.27", "S6.29", "S7.32", "S8.33"],
    );
}

#[test]
fn unramified_q4_suite() {
    assert_all_pass(
        "Qp p=2 f=2",
        None,
        &["S2.12", "S2.15", "S5.27", "S6.29", "S7.32", "S8.33"],
    );
}

#[test]
fn f2t_suite() {
    assert_all_pass(
        "Fq((t)) p=2 f=1",
        Some(9),
        &["S2.10", "S3.16", "S5.28", "S6.29", "S7.32", "S8.34"],
    );
}

#[test]
fn f3t_suite() {
    assert_all_pass(
        "Fq((t)) p=3 f=1",
        Some(8),
        &["S2.10", "S3.16", "S5.28", "S6.29", "S7.32", "S8.34"],
    );
}

#[test]
fn without_roots_of_unity_only_filtration_applies() {
    let k = field("Qp p=3 f=1");
    assert_eq!(applicable_claims(&k), vec![Claim::Filtration]);
    let v = verifier("Qp p=3 f=1", None);
    let r = v.run(Claim::Filtration).unwrap();
    assert_eq!((r.claim_id.as_str(), r.status), ("S2.11", Outcome::Pass));
    assert!(matches!(v.run(Claim::Breaks), Err(Error::Unsupported(_))));
}

#[test]
fn claim_aliases_dispatch_by_field() {
    let q2 = field("Qp p=2 f=1");
    let f2 = field("Fq((t)) p=2 f=1");
    for id in ["S2.10", "S2.11", "S2.12"] {
        assert_eq!(Claim::parse(id).unwrap(), Claim::Filtration);
    }
    assert_eq!(Claim::Filtration.id(&q2), "S2.12");
    assert_eq!(Claim::Filtration.id(&f2), "S2.10");
    assert_eq!(Claim::Orthogonality.id(&f2), "S8.34");
    assert!(Claim::parse("S4.1").is_err());
}

#[test]
fn low_precision_is_a_precision_error() {
    let k = Field::parse("Qp p=2 f=1 prec=4").unwrap();
    let e = Verifier::new(&k, VerifyOptions::default()).err().unwrap();
    assert!(matches!(e, Error::Precision(_)));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn reports_are_deterministic() {
    for (d, w) in [("Qp p=2 f=1", None), ("Fq((t)) p=2 f=1", Some(9))] {
        let a = serde_json::to_string(&verifier(d, w).run_all().unwrap()).unwrap();
        let b = serde_json::to_string(&verifier(d, w).run_all().unwrap()).unwrap();
        assert_eq!(a, b, "{d}");
    }
}

#[test]
fn report_schema_keys() {
    let r = verifier("Fq((t)) p=2 f=1", Some(5))
        .run(Claim::Breaks)
        .unwrap();
    let v = serde_json::to_value(&r).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    for k in [
        "claim_id",
        "field",
        "window",
        "seed",
        "statement",
        "status",
        "witnesses",
        "runtime_ms",
    ] {
        assert!(keys.iter().any(|x| *x == k), "missing {k}");
    }
    assert_eq!(v["status"], Value::from("pass"));
    assert_eq!(v["window"], Value::from(5));
    let summary = r.witnesses.last().unwrap();
    assert_eq!(summary["observed"], serde_json::json!([1, 3, 5]));
}

#[test]
fn q2_filtration_pattern() {
    let k = field("Qp p=2 f=1");
    let basis = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
    let dims = basis
        .filtration_dims(1..=4, &mut ChaCha8Rng::seed_from_u64(3))
        .unwrap();
    assert_eq!(dims, vec![(1, 1), (2, 1), (3, 0), (4, 0)]);
    assert_eq!(basis.dim(), 3);
}

#[test]
fn f3_additive_jumps_avoid_multiples_of_three() {
    let k = field("Fq((t)) p=3 f=1");
    let basis = AdaptedBasis::new(&k, Space::Add, Some(8)).unwrap();
    let dims = basis
        .filtration_dims(-8..=-1, &mut ChaCha8Rng::seed_from_u64(4))
        .unwrap();
    let jumps: Vec<i64> = dims
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(i, _)| *i)
        .collect();
    assert_eq!(jumps, vec![-8, -7, -5, -4, -2, -1]);
}

#[test]
fn q2_orthogonals() {
    let v = verifier("Qp p=2 f=1", None);
    let report = v.pairing_report(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(report.gram.len(), 3);
    assert!(report.gram.iter().all(|r| r.len() == 3));
    let mult = &v.context().mult;
    for e in &report.claimed_orthogonals {
        assert!(e.pass, "i = {}", e.i);
        let expected = if 3 - e.i > 2 {
            FpSubspace::zero(2, 3)
        } else {
            mult.filtration_subspace(3 - e.i)
        };
        assert_eq!(e.computed_basis.len(), expected.dim(), "i = {}", e.i);
    }
    assert_eq!(report.claimed_orthogonals.len(), 4);
}

#[test]
fn q3_zeta3_orthogonals() {
    let v = verifier("Qp p=3 f=1 eis=3,3,1", None);
    let report = v.pairing_report(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(report.claimed_orthogonals.len(), 5);
    assert!(report.claimed_orthogonals.iter().all(|e| e.pass));
}

#[test]
fn f3_orthogonals_window_7() {
    let v = verifier("Fq((t)) p=3 f=1", Some(7));
    let r = v.run(Claim::Orthogonality).unwrap();
    assert_eq!(r.status, Outcome::Pass, "{:?}", r.counterexample);
}

#[test]
fn q2_norm_group_intersection_at_2() {
    let k = field("Qp p=2 f=1");
    let ctx = PairingContext::new(&k, None).unwrap();
    let el = |n| LocalElement::from_int(&k, n);
    let mut meet = FpSubspace::full(2, 3);
    for a in [-1, -5, 5] {
        let line = Line::through(&ctx.mult, &el(a)).unwrap();
        meet = meet.intersect(&ctx.norm_group(&line).unwrap()).unwrap();
    }
    let five = FpSubspace::span(2, 3, &[ctx.mult.coordinates(&el(5)).unwrap()]).unwrap();
    assert_eq!(meet, five);
    assert_eq!(meet, ctx.mult.filtration_subspace(2));
}

#[test]
fn q2_reciprocity_examples() {
    let k = field("Qp p=2 f=1");
    let ctx = PairingContext::new(&k, None).unwrap();
    let el = |n| LocalElement::from_int(&k, n);
    let unram = Line::through(&ctx.mult, &el(5)).unwrap();
    let n1 = ctx.norm_group(&unram).unwrap();
    for u in [2, 6, 10] {
        assert!(!n1.contains(&ctx.mult.coordinates(&el(u)).unwrap()).unwrap());
    }
    assert_eq!(
        ctx.mult.coordinates(&el(2)).unwrap(),
        ctx.mult.coordinates(&el(18)).unwrap()
    );
    for a in [3, 5, 7, 2, 6, 10, 14] {
        let line = Line::through(&ctx.mult, &el(a)).unwrap();
        assert_eq!(
            ctx.pairs_trivially(&line, &el(-1)).unwrap(),
            ctx.pairs_trivially(&line, &el(-17)).unwrap()
        );
    }
}

#[test]
fn f2_schmid_witness() {
    let k = field("Fq((t)) p=2 f=1");
    let t = LocalElement::uniformizer(&k);
    let one_plus_t = &LocalElement::one(&k) + &t;
    let x = LocalElement::uniformizer_pow(&k, -1).unwrap();
    assert_eq!(
        lfk_core::series_residue_and_dlog(&x, &one_plus_t).unwrap(),
        1
    );
    assert_eq!(
        lfk_core::series_residue_and_dlog(&LocalElement::one(&k), &t).unwrap(),
        1
    );
}
