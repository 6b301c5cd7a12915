use proptest::prelude::*;

use super::*;
use crate::lattice::rational::rat;

fn parse_set(s: &str) -> SetDescriptor {
    set(&read_one(s).unwrap()).unwrap()
}

fn err_pos(r: Result<impl std::fmt::Debug>) -> (usize, usize) {
    match r {
        Err(Error::Parse { line, col, .. }) => (line, col),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn reads_nested_lists() {
    let xs = read("(a (b c) \"d e\") ; note\nx").unwrap();
    assert_eq!(xs.len(), 2);
    let Sexp::List(items, p) = &xs[0] else { panic!() };
    assert_eq!((p.line, p.col), (1, 1));
    assert_eq!(items.len(), 3);
    assert!(matches!(&items[2], Sexp::Str(s, _) if s == "d e"));
    assert_eq!(xs[1].pos(), Pos { line: 2, col: 1 });
}

#[test]
fn reports_locations() {
    assert_eq!(err_pos(read("(a\n  (b")), (2, 3));
    assert_eq!(err_pos(read("a)")), (1, 2));
    assert_eq!(err_pos(read_one("(arith 1 0)").and_then(|e| set(&e))), (1, 10));
    assert_eq!(err_pos(read_one("(finite 1\n  x)").and_then(|e| set(&e))), (2, 3));
    assert_eq!(err_pos(read_one("(geometric (1) 2)").and_then(|e| regulator(&e))), (1, 1));
    let src = "(scenario s\n  (theorem kyber)\n  (filter dyadic)\n  (family (point-mass (1))))";
    assert_eq!(err_pos(parse_scenario(src)), (2, 12));
}

#[test]
fn named_sets() {
    assert_eq!(parse_set("evens"), SetDescriptor::evens());
    assert_eq!(parse_set("(tail 3)"), SetDescriptor::tail_from(3));
    assert!(parse_set("(pred primes)").contains(7));
    assert_eq!(parse_set("(blocks dyadic (finite 0 2))").members_up_to(8), vec![1, 3, 4, 5, 7]);
}

#[test]
fn scenario_defaults_and_clauses() {
    let src = r#"
        ; finale construction
        (scenario "dyadic"
          (theorem finale)
          (filter dyadic)
          (family (switch odds
                          (constant (charge countable 1 (geometric all (5) 1/2)))
                          (perturbed (charge countable 1) (charge countable 1 (geometric all (1) 1/2)) (rate 1/2))))
          (regulator b (geometric (1) 1/2))
          (regulator q (geometric (10) 1/2))
          (samples evens odds (prefix 8))
          (ideal-samples odds)
          (depth 20))
    "#;
    let s = parse_scenario(src).unwrap();
    assert_eq!(s.theorem, TheoremId::Finale);
    assert_eq!(s.depth, 20);
    assert_eq!(s.seed, 0);
    assert_eq!(s.regulators.len(), 2);
    assert_eq!(s.sample_sets[2], SetDescriptor::prefix(8));
    let again = parse_scenario(&print_scenario(&s)).unwrap();
    assert_eq!(print_scenario(&again), print_scenario(&s));
    assert_eq!(again.family, s.family);
    assert_eq!(again.regulators, s.regulators);
}

#[test]
fn duplicate_regulator_is_rejected() {
    let src = "(scenario s (theorem main) (filter singletons) (family (point-mass (1)))
               (regulator b (harmonic (1))) (regulator b (harmonic (2))))";
    assert_eq!(err_pos(parse_scenario(src)), (2, 45));
}

fn arb_filter() -> impl Strategy<Value = PartitionFilter> {
    prop_oneof![
        Just(PartitionFilter::Singletons),
        Just(PartitionFilter::DyadicValuationBlocks),
        (0u64..3, 1u64..4).prop_map(|(s, o)| PartitionFilter::Ranges(LengthRule { slope: s, offset: o })),
        Just(PartitionFilter::TableWithTailRule(vec![1, 2, 1, 3])),
    ]
}

fn arb_set() -> impl Strategy<Value = SetDescriptor> {
    let leaf = prop_oneof![
        prop::collection::btree_set(1u64..40, 0..5).prop_map(SetDescriptor::Finite),
        (0u64..6, 1u64..6).prop_map(|(a, d)| SetDescriptor::arith(a, d)),
        (0u32..5).prop_map(SetDescriptor::DyadicValuation),
        Just(SetDescriptor::Predicate(NamedPredicate::builtin("squares").unwrap())),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SetDescriptor::complement),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.union(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.intersect(b)),
            (arb_filter(), inner.clone()).prop_map(|(f, a)| SetDescriptor::block_union(f, a)),
            (arb_filter(), inner).prop_map(|(f, a)| SetDescriptor::first_in_blocks(f, a)),
        ]
    })
}

fn arb_element() -> impl Strategy<Value = LatticeElement> {
    prop::collection::vec((-9i64..10, 1i64..5), 2).prop_map(|v| LatticeElement::new(v.into_iter().map(|(p, q)| rat(p, q)).collect()).unwrap())
}

fn arb_nonneg() -> impl Strategy<Value = LatticeElement> {
    prop::collection::vec((0i64..10, 1i64..5), 2).prop_map(|v| LatticeElement::new(v.into_iter().map(|(p, q)| rat(p, q)).collect()).unwrap())
}

fn arb_regulator() -> impl Strategy<Value = Regulator> {
    let leaf = prop_oneof![
        arb_nonneg().prop_map(|c| Regulator::Harmonic { coef: c }),
        (arb_nonneg(), 1i64..4).prop_map(|(c, q)| Regulator::Geometric { coef: c, ratio: rat(1, q + 1) }),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), 1i64..5).prop_map(|(r, k)| Regulator::Scaled { base: Box::new(r), factor: rat(k, 2) }),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Regulator::Sum(Box::new(a), Box::new(b))),
            (inner.clone(), 0u64..5).prop_map(|(r, o)| Regulator::Shifted { base: Box::new(r), offset: o }),
            (inner, arb_nonneg()).prop_map(|(r, c)| Regulator::Capped { base: Box::new(r), cap: c }),
        ]
    })
}

fn arb_charge() -> impl Strategy<Value = Charge> {
    (
        prop::collection::vec((1u64..30, arb_element()), 0..3),
        prop::option::of((arb_set(), arb_element(), 2i64..5)),
        prop::option::of((0u32..3, arb_element())),
        prop::option::of((arb_element(), arb_filter())),
    )
        .prop_map(|(points, geo, dens, at_inf)| {
            let mut m = Charge::zero(AtomicSpace::CountableAtoms, 2);
            for (k, w) in points {
                m = m.with_point(k, w).unwrap();
            }
            if let Some((s, c, q)) = geo {
                m = m.with_geometric(s, c, rat(1, q)).unwrap();
            }
            if let Some((l, d)) = dens {
                m = m.with_diffuse(DyadicInterval::new(l, 0).unwrap(), d).unwrap();
            }
            if let Some((v, f)) = at_inf {
                m = m.with_charge(v, f).unwrap();
            }
            m
        })
}

fn arb_family() -> impl Strategy<Value = Family> {
    let leaf = prop_oneof![
        arb_charge().prop_map(Family::Constant),
        (arb_charge(), arb_charge(), prop_oneof![Just(Rate::Harmonic), (2i64..5).prop_map(|q| Rate::Geometric(rat(1, q)))])
            .prop_map(|(base, direction, rate)| Family::Perturbed { base, direction, rate }),
        (arb_set(), arb_element(), 2i64..5).prop_map(|(support, coef, q)| Family::ScaledPrefix { support, coef, ratio: rat(1, q) }),
        arb_element().prop_map(|coef| Family::PointMass { coef }),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (arb_set(), inner.clone(), inner.clone()).prop_map(|(s, a, b)| Family::switch(s, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Family::Sum(Box::new(a), Box::new(b))),
            (inner, -3i64..4).prop_map(|(a, k)| Family::Scaled(Box::new(a), rat(k, 2))),
        ]
    })
}

proptest! {
    #[test]
    fn sets_round_trip(s in arb_set()) {
        let back = parse_set(&s.to_string());
        prop_assert_eq!(back.to_string(), s.to_string());
        prop_assert_eq!(back.members_up_to(80), s.members_up_to(80));
    }

    #[test]
    fn regulators_round_trip(r in arb_regulator()) {
        let back = regulator(&read_one(&r.to_string()).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn charges_round_trip(m in arb_charge()) {
        let back = charge(&read_one(&m.to_string()).unwrap()).unwrap();
        prop_assert_eq!(back.to_string(), m.to_string());
        for k in 1..20 {
            prop_assert_eq!(back.weight(k), m.weight(k));
        }
    }

    #[test]
    fn families_round_trip(f in arb_family()) {
        prop_assume!(f.validate().is_ok());
        let back = family(&read_one(&f.to_string()).unwrap()).unwrap();
        prop_assert_eq!(back.to_string(), f.to_string());
    }

    #[test]
    fn reader_never_panics(src in "[()a-z0-9 \n;\"/-]{0,40}") {
        let _ = read(&src);
    }
}
