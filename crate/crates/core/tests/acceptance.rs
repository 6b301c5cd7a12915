//! End-to-end acceptance checks, one line per criterion on stderr.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lmeas::decompose::{lebesgue_decompose, lebesgue_set, yosida_hewett_decompose};
use lmeas::filters::{filter_o_convergence, select_sparse_stationary, PartitionFilter, SetDescriptor};
use lmeas::harness::{self, Scenario, TheoremId};
use lmeas::lattice::rational::{int, pow, rat};
use lmeas::lattice::{o_convergence_check, LatticeElement, Rational, Regulator, Sequence, Witness};
use lmeas::measures::{
    check_absolutely_continuous, check_continuous, check_singular, continuity_moduli, AtomicSpace, Charge, DisjointFamily,
    DyadicInterval, Family, PartKind, Region,
};
use lmeas::regulators::{self, finale_regulator, find_w, nuovoschur_regulator, schur_regulator};
use lmeas::suite::{self, Format};

/// Wall-clock limits.
const SCHUR_LIMIT: Duration = Duration::from_secs(5);
const LEBESGUE_LIMIT: Duration = Duration::from_secs(60);
/// Seeded instances per randomized criterion.
const LEBESGUE_INSTANCES: u64 = 200;
const LEBESGUE_MAX_ATOMS: u64 = 12;
const FILTER_FAMILIES: u64 = 100;
const YH_SINGLETONS: u64 = 200;
const YH_DESCRIPTORS: usize = 50;
const SH_LEVELS: u64 = 20;
const SPARSE_BLOCKS: u64 = 64;
/// Members of each block scanned for the sparse selection.
const SPARSE_SCAN: u64 = 256;
const SEED: u64 = 20240611;

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond { Ok(()) } else { Err(msg()) }
}

fn e(xs: &[i64]) -> LatticeElement {
    LatticeElement::from_ints(xs)
}

fn geometric(c: i64, p: i64, q: i64) -> Regulator {
    Regulator::geometric(e(&[c]), rat(p, q)).unwrap()
}

fn sample() -> Vec<SetDescriptor> {
    vec![SetDescriptor::evens(), SetDescriptor::odds(), SetDescriptor::arith(1, 4), SetDescriptor::prefix(8), SetDescriptor::all()]
}

/// `m_n({k}) = 2⁻ⁿ` for `k <= n`, cofinite filter, depth 40.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let fam = Family::ScaledPrefix { support: SetDescriptor::all(), coef: e(&[1]), ratio: rat(1, 2) };
    let b = geometric(2, 1, 2);
    let v = regulators::schur_verify(&fam, &PartitionFilter::Singletons, &b, &b, &sample(), 40).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(v.is_holds(), || format!("verdict {v}"))?;
    let Some(Witness::Table(rows)) = &v.witness else { return Err(format!("no table in {v}")) };
    let p = schur_regulator(&b, &b).map_err(|e| e.to_string())?;
    for (j, fj) in rows {
        for n in fj.members_up_to(40) {
            // variation of m_n is n·2⁻ⁿ, summed atom by atom
            let mut total = int(0);
            for _ in 1..=n {
                total += pow(&rat(1, 2), n);
            }
            ensure(LatticeElement::scalar(total.clone()).le(&p.eval(*j)), || format!("j = {j}, n = {n}: {total} > p_j"))?;
        }
    }
    ensure(elapsed < SCHUR_LIMIT, || format!("took {elapsed:?}"))
}

/// `(δ_n)`, cofinite filter: the evens refute pointwise convergence.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let fam = Family::PointMass { coef: e(&[1]) };
    let b = geometric(1, 1, 2);
    let v = regulators::schur_verify(&fam, &PartitionFilter::Singletons, &b, &b, &[], 64).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(v.is_fails(), || format!("verdict {v}"))?;
    let w = v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
    ensure(w == format!("hypothesis: {}", SetDescriptor::evens()), || format!("witness {w}"))?;
    // δ_n(evens) alternates between 0 and 1
    for n in 1..=64u64 {
        let x = fam.member(n).unwrap().eval_set(&SetDescriptor::evens(), 64).unwrap();
        ensure(x.as_exact() == Some(&e(&[(n % 2 == 0) as i64])), || format!("δ_{n}(evens) = {x}"))?;
    }
    ensure(elapsed < SCHUR_LIMIT, || format!("took {elapsed:?}"))
}

fn random_weights(rng: &mut ChaCha8Rng, n: u64, dim: usize, signed: bool, zero_odds: u32) -> Vec<LatticeElement> {
    (0..n)
        .map(|_| {
            if rng.gen_ratio(zero_odds, 8) {
                return LatticeElement::zero(dim);
            }
            let coords = (0..dim)
                .map(|_| {
                    let p: i64 = if signed { rng.gen_range(-6..=6) } else { rng.gen_range(1..=6) };
                    rat(p, rng.gen_range(1..=4))
                })
                .collect();
            LatticeElement::new(coords).unwrap()
        })
        .collect()
}

/// Seeded instances on at most 12 atoms against bitmask enumeration.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..LEBESGUE_INSTANCES {
        let n = rng.gen_range(1..=LEBESGUE_MAX_ATOMS);
        let dim = rng.gen_range(1..=2);
        let wm = random_weights(&mut rng, n, dim, true, 2);
        let wnu: Vec<LatticeElement> =
            random_weights(&mut rng, n, 1, false, 3).into_iter().map(|w| if w.is_zero() { e(&[0]) } else { w }).collect();
        let m = Charge::finite(wm.clone()).unwrap();
        let nu = Charge::finite(wnu.clone()).unwrap();
        let d = lebesgue_decompose(&m, &nu, 64).map_err(|e| format!("instance {i}: {e}"))?;
        let wa: Vec<LatticeElement> = (1..=n).map(|k| d.part_a.weight(k)).collect();
        let wb: Vec<LatticeElement> = (1..=n).map(|k| d.part_b.weight(k)).collect();
        // every subset: parts re-sum, and the definitional suprema
        let mut ac_modulus = LatticeElement::zero(dim);
        let min_nu = wnu.iter().map(|w| w.coord(0).clone()).filter(|w| *w > int(0)).min();
        let small = min_nu.map(|w| w / int(2)).unwrap_or(int(1));
        let mut singular_set = None;
        for mask in 0u64..1 << n {
            let (mut sm, mut sa, mut sb, mut snu) = (LatticeElement::zero(dim), LatticeElement::zero(dim), LatticeElement::zero(dim), int(0));
            let (mut b_off, mut nu_on) = (LatticeElement::zero(dim), int(0));
            for k in 0..n as usize {
                if mask >> k & 1 == 1 {
                    sm = &sm + &wm[k];
                    sa = &sa + &wa[k];
                    sb = &sb + &wb[k];
                    snu += wnu[k].coord(0);
                    nu_on += wnu[k].coord(0);
                } else {
                    b_off = &b_off + &wb[k].abs();
                }
            }
            ensure(&sa + &sb == sm, || format!("instance {i}: parts do not re-sum on mask {mask:b}"))?;
            if snu <= small {
                ac_modulus = ac_modulus.sup(&sa.abs());
            }
            if singular_set.is_none() && b_off.is_zero() && nu_on == int(0) {
                singular_set = Some(mask);
            }
        }
        ensure(ac_modulus.is_zero(), || format!("instance {i}: sup{{|m<(A)| : ν(A) small}} = {ac_modulus}"))?;
        ensure(singular_set.is_some(), || format!("instance {i}: no set carries m⊥ and is ν-null"))?;
        let ac = check_absolutely_continuous(&d.part_a, &nu, 64).map_err(|e| e.to_string())?;
        let sg = check_singular(&d.part_b, &nu, 64).map_err(|e| e.to_string())?;
        ensure(ac.is_holds() && sg.is_holds(), || format!("instance {i}: {ac} / {sg}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < LEBESGUE_LIMIT, || format!("took {elapsed:?}"))
}

fn random_filter(rng: &mut ChaCha8Rng) -> PartitionFilter {
    let all = PartitionFilter::builtins();
    all[rng.gen_range(0..all.len())].1.clone()
}

fn random_countable(rng: &mut ChaCha8Rng, dim: usize) -> Charge {
    let mut m = Charge::zero(AtomicSpace::CountableAtoms, dim);
    for _ in 0..rng.gen_range(0..4) {
        let w = random_weights(rng, 1, dim, true, 0).pop().unwrap();
        m = m.with_point(rng.gen_range(1..60), w).unwrap();
    }
    let supports = [SetDescriptor::all(), SetDescriptor::evens(), SetDescriptor::odds(), SetDescriptor::arith(2, 3)];
    for _ in 0..rng.gen_range(0..3) {
        let w = random_weights(rng, 1, dim, true, 0).pop().unwrap();
        let s = supports[rng.gen_range(0..supports.len())].clone();
        m = m.with_geometric(s, w, rat(1, rng.gen_range(2..=4))).unwrap();
    }
    if rng.gen_bool(0.5) {
        let w = random_weights(rng, 1, dim, true, 0).pop().unwrap();
        let level = rng.gen_range(0..4u32);
        m = m.with_diffuse(DyadicInterval::new(level, rng.gen_range(0..1u64 << level)).unwrap(), w).unwrap();
    }
    m
}

/// Charges with a charge at infinity: the charge part is null on singletons
/// and the rest is the singleton series plus the density.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    for i in 0..40 {
        let dim = rng.gen_range(1..=2);
        let f = random_filter(&mut rng);
        let value = random_weights(&mut rng, 1, dim, true, 0).pop().unwrap();
        let m = random_countable(&mut rng, dim).with_charge(value, f.clone()).unwrap();
        let d = yosida_hewett_decompose(&m, 64).map_err(|e| e.to_string())?;
        for k in 1..=YH_SINGLETONS {
            let v = d.part_b.eval_set(&SetDescriptor::singleton(k), 64).map_err(|e| e.to_string())?;
            ensure(v.as_exact().is_some_and(LatticeElement::is_zero), || format!("instance {i}: m_0({{{k}}}) = {v}"))?;
        }
        let sigma = m.sub(&d.part_b).map_err(|e| e.to_string())?;
        // tail of the singleton series past the summation cutoff
        let cutoff = YH_SINGLETONS;
        let mut tail = m.points_tail(cutoff);
        for t in m.geometric_terms() {
            let one = int(1);
            let r = &t.ratio;
            tail = &tail + &t.coef.abs().scale(&(pow(r, cutoff + 1) / (&one - r)));
        }
        let grammar = regulators::witness_grammar(&f);
        let picks: Vec<SetDescriptor> = (0..YH_DESCRIPTORS).map(|_| grammar[rng.gen_range(0..grammar.len())].clone()).collect();
        for a in picks {
            let mut partial = sigma.diffuse_pieces().iter().fold(LatticeElement::zero(dim), |acc, p| &acc + &p.density.scale(&p.interval.length()));
            for k in a.members_up_to(cutoff) {
                partial = &partial + &m.weight(k);
            }
            let v = sigma.evaluate(&Region::new(a.clone(), lmeas::measures::Segment::full()), 64).map_err(|e| e.to_string())?;
            ensure(v.widen(&tail).contains(&partial), || format!("instance {i}: (m − m_0)({a}) = {v}, series {partial}"))?;
        }
    }
    Ok(())
}

/// Disjoint pieces at levels <= 5; level-`n` cells are summed by hand up to
/// level 10 and lie inside one piece beyond.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    for i in 0..60 {
        let dim = rng.gen_range(1..=2);
        let mut pieces: Vec<(DyadicInterval, LatticeElement)> = vec![];
        for c in 0..8u64 {
            match rng.gen_range(0..3) {
                0 => {}
                1 => pieces.push((DyadicInterval::new(3, c).unwrap(), random_weights(&mut rng, 1, dim, true, 0).pop().unwrap())),
                _ => {
                    for s in 0..4u64 {
                        if rng.gen_bool(0.5) {
                            let w = random_weights(&mut rng, 1, dim, true, 0).pop().unwrap();
                            pieces.push((DyadicInterval::new(5, 4 * c + s).unwrap(), w));
                        }
                    }
                }
            }
        }
        let m = Charge::diffuse(AtomicSpace::CountableAtoms, dim, pieces.clone()).map_err(|e| e.to_string())?;
        let max = pieces.iter().fold(LatticeElement::zero(dim), |acc, (_, d)| acc.sup(&d.abs()));
        let moduli = continuity_moduli(&m, SH_LEVELS);
        for n in 1..=SH_LEVELS {
            let cell_len = pow(&rat(1, 2), n);
            let oracle = if n <= 10 {
                let mut best = LatticeElement::zero(dim);
                for c in 0..1u64 << n {
                    let (lo, hi) = (&cell_len * int(c as i64), &cell_len * int(c as i64 + 1));
                    let mut mass = LatticeElement::zero(dim);
                    for (iv, d) in &pieces {
                        let plo = iv.length() * int(iv.index as i64);
                        let phi = &plo + iv.length();
                        let lo2 = if plo > lo { plo.clone() } else { lo.clone() };
                        let hi2 = if phi < hi { phi.clone() } else { hi.clone() };
                        if lo2 < hi2 {
                            mass = &mass + &d.abs().scale(&(hi2 - lo2));
                        }
                    }
                    best = best.sup(&mass);
                }
                best
            } else {
                max.scale(&cell_len)
            };
            ensure(moduli[n as usize - 1] == oracle, || format!("instance {i}, level {n}: {} vs {oracle}", moduli[n as usize - 1]))?;
            ensure(oracle.le(&max.scale(&cell_len)), || format!("instance {i}, level {n}: above max·2^-n"))?;
        }
        let v = check_continuous(&m, SH_LEVELS).map_err(|e| e.to_string())?;
        ensure(v.is_holds(), || format!("instance {i}: {v}"))?;
        let k = rng.gen_range(1..100);
        let w = random_weights(&mut rng, 1, dim, false, 0).pop().unwrap();
        let with_atom = m.with_point(k, w).map_err(|e| e.to_string())?;
        let v = check_continuous(&with_atom, SH_LEVELS).map_err(|e| e.to_string())?;
        ensure(v.is_fails() && v.witness == Some(Witness::labeled("atom", Witness::Index(k))), || format!("instance {i}: {v}"))?;
    }
    Ok(())
}

/// `m_n = m + 2⁻ⁿ·d` at depth 30, with the restriction identity against
/// hand-summed values of `d`.
fn criterion_6() -> Outcome {
    let s = text_scenario("teokyber-perturbation", 30)?;
    let report = harness::run(&s).map_err(|e| e.to_string())?;
    ensure(report.hypothesis_audit.iter().all(|(_, v)| v.is_holds()), || format!("{:?}", report.hypothesis_audit))?;
    ensure(report.conclusion.is_holds(), || format!("conclusion {}", report.conclusion))?;
    ensure(!report.violation_flag, || "violation flag".into())?;
    ensure(report.decomposition_traces.iter().all(|t| t.certified), || "uncertified trace".into())?;
    // d = −3·(1/3)ᵏ on the evens; ν lives on the evens, so U ∩ A = A ∩ evens
    let u = lebesgue_set(&s.nu);
    let ac = s.family.part(&PartKind::Sigma, 30).and_then(|f| f.part(&PartKind::Restrict(u.clone()), 30)).map_err(|e| e.to_string())?;
    let limit_ac = s.limit.sigma_part().restrict(&u, 30).map_err(|e| e.to_string())?;
    // d(A) summed over the evens of A up to a cutoff; the rest is below the tail
    const CUTOFF: u64 = 200;
    let third = rat(1, 3);
    let tail = pow(&third, CUTOFF) * rat(3, 2);
    let d_on = |a: &SetDescriptor| -> Rational {
        a.members_up_to(CUTOFF).into_iter().filter(|k| k % 2 == 0).map(|k| int(-3) * pow(&third, k)).sum()
    };
    ensure(d_on(&SetDescriptor::prefix(8)) == [2u64, 4, 6, 8].iter().map(|&k| int(-3) * pow(&third, k)).sum::<Rational>(), || "prefix".into())?;
    for a in s.samples() {
        let expected = d_on(&a);
        for n in 1..=30 {
            let scale = pow(&rat(1, 2), n);
            let m = ac.member(n).map_err(|e| e.to_string())?;
            let diff = m.sub(&limit_ac).unwrap().evaluate(&Region::points(a.clone()), 30).unwrap();
            let direct = s.family.member(n).unwrap().sub(&s.limit).unwrap().evaluate(&Region::points(a.clone()).intersect(&u), 30).unwrap();
            let want = LatticeElement::scalar(&expected * &scale);
            let slack = LatticeElement::scalar(&tail * &scale);
            ensure(diff.widen(&slack).contains(&want), || format!("{a}, n = {n}: {diff} vs {want}"))?;
            ensure(direct.widen(&slack).contains(&want), || format!("{a} ∩ U, n = {n}: {direct} vs {want}"))?;
            if a == SetDescriptor::evens() {
                // −3·(1/9)/(1 − 1/9)
                let exact = LatticeElement::scalar(rat(-3, 8) * &scale);
                ensure(diff.as_exact() == Some(&exact), || format!("evens, n = {n}: {diff}"))?;
            }
        }
    }
    Ok(())
}

fn text_scenario(name: &str, depth: u64) -> Result<Scenario, String> {
    let mut s = lmeas::text::parse_scenario(suite::builtin_source(name).ok_or("missing builtin")?).map_err(|e| e.to_string())?;
    s.depth = depth;
    Ok(s)
}

/// The dyadic constructions, both derived regulators, and the whole suite.
fn criterion_7() -> Outcome {
    let (b, q, u) = (geometric(1, 1, 2), geometric(10, 1, 2), e(&[5]));
    let finale = harness::run(&text_scenario("finale-dyadic", 20)?).map_err(|e| e.to_string())?;
    ensure(finale.conclusion.is_holds(), || format!("finale {}", finale.conclusion))?;
    let r = finale_regulator(&q, &b).unwrap();
    for j in 1..=40 {
        // 2(10 + 2)·2⁻ʲ + 10·2⁻ʲ
        let want = e(&[34]).scale(&pow(&rat(1, 2), j));
        ensure(r.eval(j) == want && finale.derived_regulator.eval(j) == want, || format!("r_{j}"))?;
    }
    let s = text_scenario("finale-dyadic", 20)?;
    let rep = regulators::uniform_sbounded_check(&s.family, &DisjointFamily::Singletons, &r, 20).map_err(|e| e.to_string())?;
    for t in &rep.thresholds {
        for n in 1..=30 {
            let m = s.family.member(n).unwrap();
            for j in t.index..t.index + 30 {
                let x = m.eval_set(&SetDescriptor::singleton(j), 20).unwrap().abs_upper();
                ensure(x.le(&r.eval(t.level)), || format!("|m_{n}({{{j}}})| = {x} > r_{}", t.level))?;
            }
        }
    }
    let nuovo = harness::run(&text_scenario("nuovoschur-dyadic", 20)?).map_err(|e| e.to_string())?;
    ensure(nuovo.conclusion.is_holds(), || format!("nuovoschur {}", nuovo.conclusion))?;
    let w_q = find_w(&q, &u, 24).unwrap();
    let w_b = find_w(&b, &u, 24).unwrap();
    let p = nuovoschur_regulator(&q, &b, &u).unwrap();
    for n in 1..=16u64 {
        // Σ_{j >= n} q(w(j)) summed over a window, with the rest below u·2⁻²⁴
        let sum = |w: &[u64], reg: &Regulator| w[n as usize - 1..].iter().fold(LatticeElement::zero(1), |acc, &k| &acc + &reg.eval(k));
        let cap = u.scale(&(pow(&rat(1, 2), n) * int(2))).inf(&u);
        let slack = u.scale(&pow(&rat(1, 2), 24));
        ensure(sum(&w_q, &q).le(&(&cap + &slack)) && sum(&w_b, &b).le(&(&cap + &slack)), || format!("tail at {n}"))?;
        let want = (&(&b.eval(n) + &cap) + &cap).scale(&int(2));
        ensure(p.eval(n) == want && nuovo.derived_regulator.eval(n) == want, || format!("r_{n} = {} vs {want}", p.eval(n)))?;
    }
    let all = suite::run_builtins(0).map_err(|e| e.to_string())?;
    for (r, (name, _)) in all.iter().zip(suite::BUILTINS) {
        let r = r.as_ref().map_err(|e| format!("{name}: {e}"))?;
        ensure(!r.violation_flag, || format!("THEOREM-VIOLATION in {name}"))?;
    }
    Ok(())
}

/// Block-supported point masses on the dyadic filter.
fn criterion_8() -> Outcome {
    let f = PartitionFilter::DyadicValuationBlocks;
    let space = harness::block_point_mass_grammar(&f, 4);
    let (b, r) = (geometric(1, 1, 2), geometric(1, 1, 2));
    let budget = space.len();
    let sets = sample();
    let found = harness::counterexample_search(&space, harness::converges_without_uniformity(&f, &b, &r, &sets, 16), budget, SEED)
        .map_err(|e| e.to_string())?;
    let (_, fam) = found.ok_or("no witness within budget")?;
    // convergence on the full sample grammar
    let grammar = regulators::witness_grammar(&f);
    let v = regulators::pointwise_audit(&fam, &f, &b, &grammar, 16).map_err(|e| e.to_string())?;
    ensure(v.is_holds(), || format!("{fam}: convergence on the grammar {v}"))?;
    let rep = regulators::uniform_sbounded_check(&fam, &DisjointFamily::Singletons, &r, 16).map_err(|e| e.to_string())?;
    let Some(Witness::Triple(k, n, j)) = rep.verdict.witness.clone() else { return Err(format!("{}", rep.verdict)) };
    let x = fam.member(n).unwrap().eval_set(&SetDescriptor::singleton(j), 16).unwrap().abs_lower();
    ensure(!x.le(&r.eval(k)), || format!("witness ({k} {n} {j}) does not exceed r_k"))?;
    let sets = sample();
    let cofinite = harness::converges_without_uniformity(&PartitionFilter::Singletons, &b, &r, &sets, 16);
    ensure(!cofinite(&fam).map_err(|e| e.to_string())?, || "also a gap along the cofinite filter".into())
}

/// Sequences dominated by the regulator termwise, or bounded away from the
/// limit on a stationary set.
fn filter_family(rng: &mut ChaCha8Rng) -> (Sequence, Regulator) {
    let c = random_weights(rng, 1, 1, true, 0).pop().unwrap();
    let bound = c.abs();
    match rng.gen_range(0..4) {
        0 => {
            let ratio = rat(1, rng.gen_range(2..=5));
            (Sequence::geometric(c, ratio).unwrap(), Regulator::geometric(bound, rat(1, 2)).unwrap())
        }
        1 => (Sequence::harmonic(c).unwrap(), Regulator::harmonic(bound.scale(&int(rng.gen_range(1..=3)))).unwrap()),
        2 => {
            let off = random_weights(rng, 1, 1, false, 0).pop().unwrap();
            let s = Sequence::constant(off).plus(&Sequence::geometric(c, rat(1, 2)).unwrap()).unwrap();
            (s, Regulator::geometric(bound, rat(1, 2)).unwrap())
        }
        _ => {
            let off = random_weights(rng, 1, 1, false, 0).pop().unwrap();
            let region = [SetDescriptor::evens(), SetDescriptor::odds(), SetDescriptor::arith(1, 3)][rng.gen_range(0..3)].clone();
            let s = Sequence::switch(region, Sequence::constant(off), Sequence::geometric(c, rat(1, 3)).unwrap());
            (s, Regulator::geometric(bound, rat(1, 2)).unwrap())
        }
    }
}

/// Sparse selection on every built-in filter, and agreement of the two
/// convergence checks along the singletons.
fn criterion_9() -> Outcome {
    let js = [SetDescriptor::all(), SetDescriptor::evens(), SetDescriptor::arith(1, 3), SetDescriptor::tail_from(5)];
    for (name, f) in PartitionFilter::builtins() {
        for j in &js {
            let sel = select_sparse_stationary(&f, j, 64).map_err(|e| format!("{name} {j}: {e}"))?;
            for k in f.first_block()..f.first_block() + SPARSE_BLOCKS {
                let members = block_prefix(&f, k, SPARSE_SCAN);
                let hits = members.iter().filter(|&&n| sel.contains(n)).count();
                ensure(hits <= 1, || format!("{name}, J = {j}: block {k} meets J' {hits} times"))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    for i in 0..FILTER_FAMILIES {
        let (x, r) = filter_family(&mut rng);
        let zero = LatticeElement::zero(1);
        let a = filter_o_convergence(&PartitionFilter::Singletons, &x, &zero, &r, 40).map_err(|e| e.to_string())?;
        let b = o_convergence_check(&x, &zero, &r, 40).map_err(|e| e.to_string())?;
        ensure(a.outcome == b.outcome, || format!("family {i}: {a} vs {b}"))?;
    }
    Ok(())
}

/// The first `count` members of block `k`.
fn block_prefix(f: &PartitionFilter, k: u64, count: u64) -> Vec<u64> {
    match f {
        PartitionFilter::DyadicValuationBlocks => {
            let s = 1u64 << k;
            (0..count).map_while(|j| s.checked_mul(2 * j + 1)).collect()
        }
        _ => {
            let start = f.block_start(k).unwrap_or(1);
            f.block_members(k, start.saturating_add(count * 4)).into_iter().take(count as usize).collect()
        }
    }
}

/// The suite rendered twice, and on one and eight threads.
fn criterion_10() -> Outcome {
    let scenarios = suite::builtin_scenarios().map_err(|e| e.to_string())?;
    let render = |jobs: usize| -> Result<Vec<String>, String> {
        let results = suite::run_all(&scenarios, jobs, harness::run).map_err(|e| e.to_string())?;
        let mut out = vec![];
        for format in [Format::Json, Format::Csv, Format::Md] {
            let mut entries = vec![];
            for (s, r) in scenarios.iter().zip(&results) {
                let name = format!("{}.{}", s.name, format.extension());
                if let Ok(rep) = r {
                    out.push(suite::render(rep, format));
                }
                entries.push(suite::IndexEntry::new(&s.name, s.theorem.as_str(), r, &name));
            }
            out.push(suite::render_index(&entries, format));
        }
        Ok(out)
    };
    let one = render(1)?;
    ensure(one == render(1)?, || "two runs differ".into())?;
    ensure(one == render(8)?, || "--jobs 1 and --jobs 8 differ".into())?;
    ensure(scenarios.iter().any(|s| s.theorem == TheoremId::Nuovocorfinale), || "suite incomplete".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("schur positive case", criterion_1),
        ("schur hypothesis failure", criterion_2),
        ("lebesgue oracle equivalence", criterion_3),
        ("yosida-hewett law", criterion_4),
        ("sobczyk-hammer certificates", criterion_5),
        ("teokyber end-to-end", criterion_6),
        ("finale and nuovoschur derivations", criterion_7),
        ("gap exhibit", criterion_8),
        ("filters", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = vec![];
    let mut err = std::io::stderr();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => {
                let _ = writeln!(err, "criterion {:>2} PASS  {name} ({secs:.2}s)", i + 1);
            }
            Err(msg) => {
                let _ = writeln!(err, "criterion {:>2} FAIL  {name} ({secs:.2}s): {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
