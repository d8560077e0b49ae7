use std::collections::BTreeMap;

use troprank_core::constructions::library_case;
use troprank_core::independence::{
    check_dependence_detail, replay, CertOutcome, DependenceCheck, SearchOutcome, TraceStep,
};
use troprank_core::series::standard_tableau;
use troprank_core::{
    certify_independence, check_dependence, search_dependence, verdict, CaseContext, CaseSpec,
    DependenceWitness, Error, MultiSetIndex, ParameterQuadruple, RuleSet, Verdict, Q,
};

fn ctx_of(c: &CaseSpec) -> CaseContext {
    CaseContext::new(c.params, c.tableau.clone(), c.long_bridges.as_ref(), 0).unwrap()
}

fn oversize(r: u32, m: u32) -> (CaseContext, Vec<MultiSetIndex>) {
    let p = ParameterQuadruple::from_rsrho(r, 1, 0, m).unwrap();
    let ctx = CaseContext::new(p, standard_tableau(&p).unwrap(), None, 0).unwrap();
    (ctx, MultiSetIndex::all(r, m))
}

fn zero_witness(a: &[MultiSetIndex]) -> DependenceWitness {
    DependenceWitness {
        shifts: a
            .iter()
            .map(|i| (i.clone(), Q::from_integer(0.into())))
            .collect(),
        verified: false,
    }
}

#[test]
fn duplicate_encodings_are_rejected() {
    let c = library_case("canonical-m3").unwrap();
    let ctx = ctx_of(&c);
    let i = MultiSetIndex::parse("012").unwrap();
    let a = vec![i.clone(), MultiSetIndex::parse("0,1,2").unwrap()];
    assert!(matches!(
        check_dependence(&a, &zero_witness(&[i]), &ctx),
        Err(Error::DuplicateIndex(_))
    ));
}

#[test]
fn canonical_family_has_a_unique_point_for_any_shift() {
    let c = library_case("canonical-m3").unwrap();
    let ctx = ctx_of(&c);
    for k in 0..5i64 {
        let mut w = zero_witness(&c.family);
        for (n, b) in w.shifts.values_mut().enumerate() {
            *b = Q::new((k * n as i64 * 7919 % 101).into(), 3.into());
        }
        match check_dependence_detail(&c.family, &w, &ctx).unwrap() {
            DependenceCheck::UniqueAt(p, i) => {
                assert!(ctx.graph.contains_point(&p));
                assert!(c.family.contains(&i));
            }
            DependenceCheck::Dependent => panic!("canonical family reported dependent"),
        }
    }
}

#[test]
fn search_finds_no_witness_for_certified_families() {
    for name in ["canonical-m2", "canonical-m3", "rank3-rho1"] {
        let c = library_case(name).unwrap();
        let ctx = ctx_of(&c);
        assert!(certify_independence(&c.family, &ctx, &RuleSet::all())
            .unwrap()
            .is_independent());
        assert!(
            matches!(
                search_dependence(&c.family, &ctx, 40).unwrap(),
                SearchOutcome::Exhausted { .. }
            ),
            "{name}"
        );
    }
}

#[test]
fn oversize_families_are_dependent() {
    // ten quadrics in a nine-dimensional space of sections
    let (ctx, a) = oversize(3, 2);
    assert_eq!(ctx.params.classify_range().target_size, 9);
    let Verdict::Dependent(w) = verdict(&a, &ctx, &RuleSet::all(), 100).unwrap() else {
        panic!("expected dependent")
    };
    assert!(w.verified);
    assert!(check_dependence(&a, &w, &ctx).unwrap());
    let back: DependenceWitness =
        serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
    assert_eq!(back, w);
    // dropping a shift breaks the witness
    let mut broken = w.clone();
    let first = broken.shifts.keys().next().unwrap().clone();
    broken.shifts.remove(&first);
    assert!(check_dependence(&a, &broken, &ctx).is_err());
}

#[test]
fn dependence_survives_a_perturbed_start() {
    let (ctx, a) = oversize(3, 2);
    let SearchOutcome::Found {
        witness,
        iterations,
    } = search_dependence(&a, &ctx, 100).unwrap()
    else {
        panic!()
    };
    assert!(iterations < 100);
    // adding a common constant keeps a witness valid
    let mut shifted = witness.clone();
    for b in shifted.shifts.values_mut() {
        *b += Q::new(5.into(), 3.into());
    }
    assert!(check_dependence(&a, &shifted, &ctx).unwrap());
}

#[test]
fn rank3_rho2_is_independent() {
    let c = library_case("rank3-rho2").unwrap();
    assert_eq!(c.family.len(), 19);
    assert!(!c.family.contains(&MultiSetIndex::parse("003").unwrap()));
    let v = verdict(&c.family, &ctx_of(&c), &RuleSet::all(), 10).unwrap();
    assert_eq!(v.name(), "independent");
}

#[test]
fn single_function_is_trivially_independent() {
    let c = library_case("canonical-m3").unwrap();
    let cert = certify_independence(&c.family[..1], &ctx_of(&c), &RuleSet::all()).unwrap();
    assert!(cert.is_independent());
    assert_eq!(cert.trace, vec![TraceStep::Trivial { size: 1 }]);
}

#[test]
fn dropping_rules_leaves_a_profile() {
    let c = library_case("canonical-m3").unwrap();
    let ctx = ctx_of(&c);
    let cert = certify_independence(&c.family, &ctx, &RuleSet::none()).unwrap();
    let CertOutcome::Inconclusive(p) = &cert.outcome else {
        panic!("no rules cannot certify")
    };
    assert_eq!(p.sigma.len(), ctx.graph.genus() + 1);
    assert_eq!(
        p.delta.iter().sum::<i64>(),
        (c.params.m * c.params.d) as i64
    );
    match verdict(&c.family, &ctx, &RuleSet::none(), 5).unwrap() {
        Verdict::Unknown { profile, .. } => assert_eq!(&profile, p),
        v => panic!("expected unknown, got {}", v.name()),
    }
    // C4 alone already settles the canonical case
    assert!(certify_independence(
        &c.family,
        &ctx,
        &RuleSet::none()
            .with("C4".parse().unwrap())
            .with("C5".parse().unwrap())
    )
    .unwrap()
    .is_independent());
}

#[test]
fn certificates_replay_and_are_deterministic() {
    for name in ["canonical-m4", "rank3-rho0", "rank3-rho3", "thm1.3.2-r3"] {
        let c = library_case(name).unwrap();
        let ctx = ctx_of(&c);
        let a = certify_independence(&c.family, &ctx, &RuleSet::all()).unwrap();
        replay(&a, &c.family, &ctx).unwrap();
        let b = certify_independence(&c.family, &ctx_of(&c), &RuleSet::all()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn tampered_certificates_fail_replay() {
    let c = library_case("canonical-m3").unwrap();
    let ctx = ctx_of(&c);
    let mut cert = certify_independence(&c.family, &ctx, &RuleSet::all()).unwrap();
    for s in cert.trace.iter_mut() {
        if let TraceStep::Domain { lower, .. } = s {
            *lower = lower.map(|v| v + 1);
        }
    }
    assert!(replay(&cert, &c.family, &ctx).is_err());
}

#[test]
fn witnesses_list_exactly_the_family() {
    let c = library_case("canonical-m2").unwrap();
    let ctx = ctx_of(&c);
    let mut w = zero_witness(&c.family);
    w.shifts.insert(
        MultiSetIndex::parse("00").unwrap(),
        Q::from_integer(1.into()),
    );
    let extra: BTreeMap<_, _> = [(
        MultiSetIndex::parse("000").unwrap(),
        Q::from_integer(0.into()),
    )]
    .into_iter()
    .collect();
    w.shifts.extend(extra);
    assert!(matches!(
        check_dependence(&c.family, &w, &ctx),
        Err(Error::Mismatch(_))
    ));
}
