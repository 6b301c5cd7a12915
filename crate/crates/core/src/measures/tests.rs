use proptest::prelude::*;

use super::*;
use crate::filters::{PartitionFilter, SetDescriptor};
use crate::lattice::rational::{int, pow, rat, Rational};
use crate::lattice::{LatticeElement, Regulator, Witness};

fn e(xs: &[i64]) -> LatticeElement {
    LatticeElement::from_ints(xs)
}

fn halves_weights() -> Charge {
    Charge::geometric(SetDescriptor::all(), e(&[1]), rat(1, 2)).unwrap()
}

fn dy(level: u32, index: u64) -> DyadicInterval {
    DyadicInterval::new(level, index).unwrap()
}

/// Every subset of `1..=n` as a bitmask-indexed list of atom sets.
fn subsets(n: u64) -> Vec<SetDescriptor> {
    (0u64..1 << n).map(|mask| SetDescriptor::finite((1..=n).filter(|k| mask >> (k - 1) & 1 == 1))).collect()
}

#[test]
fn evaluate_examples() {
    let m = halves_weights();
    let v = m.eval_set(&SetDescriptor::all(), 20).unwrap();
    assert!(v.contains(&e(&[1])));
    let partial: Rational = (1..=20).map(|k| pow(&rat(1, 2), k)).sum();
    assert!(v.lower.coord(0) >= &partial);
    let v = m.eval_set(&SetDescriptor::empty(), 20).unwrap();
    assert_eq!(v.as_exact(), Some(&e(&[0])));
    let c = Charge::charge_only(e(&[1]), PartitionFilter::Singletons);
    assert!(matches!(c.eval_set(&SetDescriptor::evens(), 20), Err(crate::Error::NotMeasurable { .. })));
    assert_eq!(c.eval_set(&SetDescriptor::tail_from(5), 20).unwrap().as_exact(), Some(&e(&[1])));
}

#[test]
fn truncated_sum_encloses_series() {
    let m = Charge::geometric(SetDescriptor::Predicate(crate::filters::NamedPredicate::builtin("squares").unwrap()), e(&[1]), rat(1, 2)).unwrap();
    let v = m.eval_set(&SetDescriptor::all(), 10).unwrap();
    // 1/2 + 1/16 + 1/512 + 2^-16 + …
    let partial = &(&rat(1, 2) + &rat(1, 16)) + &rat(1, 512);
    assert!(v.lower.coord(0) <= &partial && v.upper.coord(0) > &partial);
    let deeper = m.eval_set(&SetDescriptor::all(), 40).unwrap();
    assert!(v.contains_interval(&deeper));
}

#[test]
fn variation_examples() {
    let m = Charge::finite(vec![e(&[1]), e(&[-2]), e(&[3])]).unwrap();
    let v = m.variation(&Region::points(SetDescriptor::all()), 10).unwrap();
    // brute force: v⁺ = sup m(A), v⁻ = sup −m(A)
    let values: Vec<Rational> =
        subsets(3).iter().map(|a| m.eval_set(a, 10).unwrap().lower.coord(0).clone()).collect();
    let sup = values.iter().max().unwrap().clone();
    let inf = values.iter().min().unwrap().clone();
    assert_eq!(v.positive.as_exact(), Some(&LatticeElement::scalar(sup.clone())));
    assert_eq!(v.negative.as_exact(), Some(&LatticeElement::scalar(-inf.clone())));
    assert_eq!(v.total.as_exact(), Some(&LatticeElement::scalar(&sup - &inf)));
    assert_eq!(v.total.as_exact(), Some(&e(&[6])));

    let z = Charge::zero(AtomicSpace::CountableAtoms, 1);
    assert!(z.variation(&Region::whole(), 5).unwrap().total.as_exact().unwrap().is_zero());

    let c = Charge::charge_only(e(&[1, 2]), PartitionFilter::Singletons);
    let v = c.variation(&Region::points(SetDescriptor::all()), 5).unwrap();
    assert_eq!(v.total.as_exact(), Some(&e(&[1, 2])));
}

#[test]
fn s_boundedness_examples() {
    let m = halves_weights();
    let cert = m.s_boundedness_certificate();
    assert!(cert.charge.is_none());
    for n in 1..=30u64 {
        assert_eq!(cert.regulator.eval(n), LatticeElement::scalar(pow(&rat(1, 2), n - 1)));
        // disjoint family of singletons: sup of the tail from n is the weight at n
        let sup = (n..n + 50).map(|k| m.weight(k)).fold(e(&[0]), |a, b| a.sup(&b.abs()));
        assert!(sup.le(&cert.regulator.eval(n)));
    }
    let f = Charge::finite(vec![e(&[1]), e(&[-2]), e(&[3])]).unwrap();
    let cert = f.s_boundedness_certificate();
    for n in 1..=3u64 {
        assert!(f.points_tail(n).le(&cert.regulator.eval(n)));
    }
    let c = Charge::charge_only(e(&[2]), PartitionFilter::Singletons);
    let cert = c.s_boundedness_certificate();
    assert!(cert.regulator.is_zero());
    assert_eq!(cert.charge, Some(e(&[2])));
}

#[test]
fn absolutely_continuous_examples() {
    let nu = Charge::finite(vec![e(&[1]), e(&[0]), e(&[2])]).unwrap();
    let m = Charge::finite(vec![e(&[1, 1]), e(&[0, 0]), e(&[0, 3])]).unwrap();
    assert!(check_absolutely_continuous(&m, &nu, 10).unwrap().is_holds());
    let m = Charge::finite(vec![e(&[1, 1]), e(&[2, 0]), e(&[0, 3])]).unwrap();
    let v = check_absolutely_continuous(&m, &nu, 10).unwrap();
    assert!(v.is_fails());
    assert_eq!(v.witness, Some(Witness::labeled("atom", Witness::Index(2))));
}

/// Independent oracle: loop over bitmasks, evaluate both measures, keep the sup.
fn moduli_oracle(m: &Charge, nu: &Charge, n: u64, count: u64) -> Vec<LatticeElement> {
    (1..=count)
        .map(|j| {
            let mut best = LatticeElement::zero(m.dim());
            for mask in 0u64..1 << n {
                let mut size = int(0);
                let mut mass = LatticeElement::zero(m.dim());
                for k in 1..=n {
                    if mask >> (k - 1) & 1 == 1 {
                        size += nu.weight(k).coord(0);
                        mass = &mass + &m.weight(k);
                    }
                }
                if size <= rat(1, j as i64) {
                    best = best.sup(&mass.abs());
                }
            }
            best
        })
        .collect()
}

#[test]
fn moduli_match_oracle() {
    let nu = Charge::finite(vec![e(&[1]), e(&[0]), rat_el(1, 3), rat_el(1, 5)]).unwrap();
    let m = Charge::finite(vec![e(&[2, -1]), e(&[1, 1]), e(&[-1, 4]), e(&[3, 0])]).unwrap();
    assert_eq!(brute_force_ac_moduli(&m, &nu, 8).unwrap(), moduli_oracle(&m, &nu, 4, 8));
}

fn rat_el(p: i64, q: i64) -> LatticeElement {
    LatticeElement::scalar(rat(p, q))
}

#[test]
fn singular_examples() {
    let nu = Charge::finite(vec![e(&[1]), e(&[0]), e(&[0])]).unwrap();
    let m = Charge::finite(vec![e(&[0]), e(&[1]), e(&[1])]).unwrap();
    let v = check_singular(&m, &nu, 10).unwrap();
    assert!(v.is_holds());
    assert_eq!(v.witness.unwrap().to_string(), "F: (finite 2 3)");
    let m = Charge::finite(vec![e(&[1]), e(&[0]), e(&[0])]).unwrap();
    let v = check_singular(&m, &nu, 10).unwrap();
    assert_eq!(v.witness, Some(Witness::labeled("atom", Witness::Index(1))));

    let c = Charge::charge_only(e(&[1]), PartitionFilter::Singletons);
    let nu = halves_weights();
    assert!(check_singular(&c, &nu, 20).unwrap().is_holds());
    for k in 1..=20u64 {
        let a_k = SetDescriptor::tail_from(k);
        let tail = nu.eval_set(&a_k, 20).unwrap();
        assert_eq!(tail.as_exact(), Some(&LatticeElement::scalar(pow(&rat(1, 2), k - 1))));
        for measured in [SetDescriptor::finite([1, 4, 30]), SetDescriptor::tail_from(3), SetDescriptor::all()] {
            let off = measured.minus(a_k.clone());
            assert!(c.eval_set(&off, 20).unwrap().as_exact().unwrap().is_zero());
        }
    }
}

#[test]
fn continuity_examples() {
    let m = Charge::diffuse(AtomicSpace::CountableAtoms, 1, [(DyadicInterval::unit(), e(&[1]))]).unwrap();
    assert!(check_continuous(&m, 30).unwrap().is_holds());
    for (n, p) in continuity_moduli(&m, 20).iter().enumerate() {
        assert_eq!(p, &LatticeElement::scalar(pow(&rat(1, 2), n as u64 + 1)));
    }
    let a = Charge::atoms(AtomicSpace::CountableAtoms, 1, [(4, e(&[1]))]).unwrap();
    assert_eq!(check_continuous(&a, 10).unwrap().witness, Some(Witness::labeled("atom", Witness::Index(4))));
    assert!(check_continuous(&Charge::zero(AtomicSpace::CountableAtoms, 1), 10).unwrap().is_holds());
}

#[test]
fn purely_finitely_additive_examples() {
    let c = Charge::charge_only(e(&[1]), PartitionFilter::Singletons);
    assert!(check_purely_finitely_additive(&c, 50).unwrap().is_holds());
    let v = check_purely_finitely_additive(&halves_weights(), 50).unwrap();
    assert_eq!(v.witness, Some(Witness::labeled("atom", Witness::Index(1))));
    let mixed = c.with_point(3, e(&[1])).unwrap();
    assert!(check_purely_finitely_additive(&mixed, 50).unwrap().is_fails());
}

#[test]
fn sigma_subsequence_examples() {
    let q = Regulator::geometric(e(&[1]), rat(1, 2)).unwrap();
    let ids = extract_sigma_subsequence(&[halves_weights()], &DisjointFamily::Singletons, &q, 12).unwrap();
    assert_eq!(ids, (1..=12).collect::<Vec<_>>());
    let z = Charge::zero(AtomicSpace::CountableAtoms, 1);
    assert_eq!(extract_sigma_subsequence(&[z], &DisjointFamily::Singletons, &q, 5).unwrap().len(), 5);

    let big_even = Charge::atoms(AtomicSpace::CountableAtoms, 1, (1..=10).map(|k| (2 * k, e(&[1])))).unwrap();
    let big_odd = Charge::atoms(AtomicSpace::CountableAtoms, 1, (0..10).map(|k| (2 * k + 1, e(&[1])))).unwrap();
    let ms = [big_even.add(&halves_weights().scale(&rat(1, 1 << 20))).unwrap(), big_odd];
    let ids = extract_sigma_subsequence(&ms, &DisjointFamily::Singletons, &q, 10).unwrap();
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
    for m in &ms {
        for k in 1..=ids.len() {
            let tail = ids[k - 1..]
                .iter()
                .map(|&n| m.variation(&Region::points(SetDescriptor::singleton(n)), 30).unwrap().total.upper)
                .fold(e(&[0]), |a, b| a.sup(&b));
            assert!(tail.le(&q.eval(k as u64)));
        }
    }
    let stuck = Charge::atoms(AtomicSpace::CountableAtoms, 1, (1..=5000).map(|k| (k, e(&[1])))).unwrap();
    assert!(matches!(
        extract_sigma_subsequence(&[stuck], &DisjointFamily::Singletons, &q, 3),
        Err(crate::Error::SelectionBlocked { index: 1 })
    ));
}

#[test]
fn diffuse_arithmetic_refines() {
    let a = Charge::diffuse(AtomicSpace::CountableAtoms, 1, [(dy(1, 0), e(&[2]))]).unwrap();
    let b = Charge::diffuse(AtomicSpace::CountableAtoms, 1, [(dy(3, 1), e(&[1]))]).unwrap();
    let s = a.add(&b).unwrap();
    let whole = Region::diffuse(Segment::full());
    assert_eq!(s.evaluate(&whole, 1).unwrap().as_exact(), Some(&LatticeElement::scalar(rat(9, 8))));
    assert!(s.sub(&b).unwrap().sub(&a).unwrap().is_zero());
}

fn arb_finite(n: u64, dim: usize) -> impl Strategy<Value = Charge> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, dim), n as usize)
        .prop_map(|ws| Charge::finite(ws.iter().map(|w| LatticeElement::from_ints(w)).collect()).unwrap())
}

fn arb_nu(n: u64) -> impl Strategy<Value = Charge> {
    prop::collection::vec(prop_oneof![Just(0i64), 1i64..=3], n as usize)
        .prop_map(|ws| Charge::finite(ws.iter().map(|&w| LatticeElement::from_ints(&[w])).collect()).unwrap())
}

fn arb_countable() -> impl Strategy<Value = Charge> {
    (
        prop::collection::vec((1u64..40, -3i64..=3), 0..5),
        prop::option::of((0u64..3, 2u64..4, -2i64..=2)),
        prop::option::of((0u32..3, -2i64..=2)),
        prop::option::of(-2i64..=2),
    )
        .prop_map(|(pts, geo, dif, ch)| {
            let mut m = Charge::atoms(AtomicSpace::CountableAtoms, 1, pts.into_iter().map(|(k, w)| (k, e(&[w])))).unwrap();
            if let Some((a, d, c)) = geo {
                m = m.with_geometric(SetDescriptor::arith(a, d), e(&[c]), rat(1, 3)).unwrap();
            }
            if let Some((level, d)) = dif {
                m = m.with_diffuse(DyadicInterval::new(level, 0).unwrap(), e(&[d])).unwrap();
            }
            if let Some(c) = ch {
                m = m.with_charge(e(&[c]), PartitionFilter::Singletons).unwrap();
            }
            m
        })
}

fn arb_measured() -> impl Strategy<Value = SetDescriptor> {
    prop_oneof![
        prop::collection::btree_set(1u64..50, 0..6).prop_map(SetDescriptor::Finite),
        (1u64..30).prop_map(SetDescriptor::tail_from),
        prop::collection::btree_set(1u64..50, 0..6).prop_map(|s| SetDescriptor::Finite(s).complement()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_additivity(m in arb_countable(), a in arb_measured(), b in arb_measured(), lvl in 0u32..3) {
        let b = b.minus(a.clone());
        let sa = Segment::from_intervals([DyadicInterval::new(lvl, 0).unwrap()]);
        let ra = Region::new(a.clone(), sa.clone());
        let rb = Region::new(b.clone(), sa.complement());
        let whole = m.evaluate(&ra.union(&rb), 25).unwrap();
        let parts = m.evaluate(&ra, 25).unwrap().add(&m.evaluate(&rb, 25).unwrap());
        prop_assert!(parts.contains_interval(&whole));
        if whole.is_exact() && parts.is_exact() {
            prop_assert_eq!(whole, parts);
        }
    }

    #[test]
    fn evaluate_monotone_in_depth(m in arb_countable(), a in arb_measured(), d in 1u64..30) {
        let coarse = m.eval_set(&a, d).unwrap();
        let fine = m.eval_set(&a, d + 1).unwrap();
        prop_assert!(coarse.contains_interval(&fine));
    }

    #[test]
    fn envelope_is_sound(m in arb_countable()) {
        let env = m.envelope();
        for k in 1..=1000u64 {
            prop_assert!(m.weight(k).abs().le(&env.eval(k)));
        }
    }

    #[test]
    fn variation_matches_brute_force(m in (1u64..=8).prop_flat_map(|n| arb_finite(n, 2)), mask in 0u64..256) {
        let AtomicSpace::FiniteAtoms(n) = m.space() else { unreachable!() };
        let h = SetDescriptor::finite((1..=n).filter(|k| mask >> (k - 1) & 1 == 1));
        let v = m.variation(&Region::points(h.clone()), 10).unwrap();
        let mut pos = LatticeElement::zero(2);
        let mut neg = LatticeElement::zero(2);
        for a in subsets(n) {
            let x = m.eval_set(&a.intersect(h.clone()), 10).unwrap().lower;
            pos = pos.sup(&x);
            neg = neg.sup(&-&x);
        }
        prop_assert_eq!(v.positive.as_exact(), Some(&pos));
        prop_assert_eq!(v.negative.as_exact(), Some(&neg));
        prop_assert_eq!(v.total.as_exact(), Some(&(&pos + &neg)));
    }

    #[test]
    fn ac_and_singular_exclusive((m, nu) in (1u64..=8).prop_flat_map(|n| (arb_finite(n, 1), arb_nu(n)))) {
        let ac = check_absolutely_continuous(&m, &nu, 10).unwrap().is_holds();
        let sg = check_singular(&m, &nu, 10).unwrap().is_holds();
        prop_assert!(!(ac && sg) || m.is_zero());
    }
}


