//! Regulators built from the Schur-type arguments, and checks of the three
//! uniform s-boundedness notions.

use std::fmt;

use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{self, exceptional_set_at, filter_o_convergence, PartitionFilter, SetDescriptor};
use crate::lattice::rational;
use crate::lattice::{LatticeElement, Regulator, Verdict, Witness};
use crate::measures::{DisjointFamily, Family, Functional, Region};

/// `j ↦ 2(a_j + 2b_j)`
pub fn schur_regulator(a: &Regulator, b: &Regulator) -> Result<Regulator> {
    same_dim(a, b)?;
    a.clone().plus(b.clone().scaled(rational::int(2))?)?.scaled(rational::int(2))
}

/// `j ↦ 2(q_j + 2b_j) + q_j`
pub fn finale_regulator(q: &Regulator, b: &Regulator) -> Result<Regulator> {
    schur_regulator(q, b)?.plus(q.clone())
}

fn same_dim(a: &Regulator, b: &Regulator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `w(1), …, w(count)` for the least increasing `w` with `q(w(j)) <= u·2⁻ʲ`.
pub fn find_w(q: &Regulator, u: &LatticeElement, count: u64) -> Result<Vec<u64>> {
    u.check_dim(&q.eval(1))?;
    if !u.is_nonneg() {
        return Err(Error::InvalidValue(format!("bound {u} is not nonnegative")));
    }
    let half = rational::rat(1, 2);
    let mut out = Vec::with_capacity(count as usize);
    let mut prev = 0u64;
    for j in 1..=count {
        let target = u.scale(&rational::pow(&half, j));
        let least = q.least_index_below(&target)?;
        let next = prev.checked_add(1).ok_or_else(|| Error::Overflow("increasing map".into()))?;
        prev = least.max(next);
        out.push(prev);
    }
    Ok(out)
}

/// `N ↦ u ∧ u·2⁻ᴺ⁺¹`, the tail bound `Σ_{j >= N} q(w(j))` capped by `u`;
/// zero in the components where `q` vanishes.
fn capped_tail(q: &Regulator, u: &LatticeElement) -> Result<Regulator> {
    let coords = (0..u.dim())
        .map(|i| if q.is_component_zero(i) { rational::int(0) } else { u.coord(i).clone() })
        .collect();
    let u = LatticeElement::new(coords)?;
    Regulator::geometric(u.scale(&rational::int(2)), rational::rat(1, 2))?.capped(u)
}

/// `p ↦ 2(b_p + B_p + Q_p)`
pub fn nuovoschur_regulator(q: &Regulator, b: &Regulator, u: &LatticeElement) -> Result<Regulator> {
    same_dim(q, b)?;
    find_w(q, u, W_CHECK)?;
    find_w(b, u, W_CHECK)?;
    let tails = capped_tail(b, u)?.plus(capped_tail(q, u)?)?;
    b.clone().plus(tails)?.scaled(rational::int(2))
}

/// Prefix of `w` computed to confirm that the map exists.
const W_CHECK: u64 = 16;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Mode {
    Plain,
    Ideal,
    FilterUniform,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Ideal => "ideal",
            Mode::FilterUniform => "filter-uniform",
        })
    }
}

/// `index` works for regulator level `level`, over the indices `over` (all
/// of ℕ when absent).
#[derive(Clone, PartialEq, Debug)]
pub struct Threshold {
    pub level: u64,
    pub index: u64,
    pub over: Option<SetDescriptor>,
}

#[derive(Clone, Debug)]
pub struct UniformSBoundednessReport {
    pub mode: Mode,
    pub regulator: Regulator,
    pub verdict: Verdict,
    pub thresholds: Vec<Threshold>,
}

impl UniformSBoundednessReport {
    /// Re-evaluates the bound at every stored threshold.
    pub fn reverify(&self, family: &Family, h: &DisjointFamily, depth: u64) -> Result<bool> {
        for t in &self.thresholds {
            let over = t.over.clone().unwrap_or_else(SetDescriptor::all);
            if !family.tail_sup_bound(h, t.index, &over, depth)?.le(&self.regulator.eval(t.level)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_shape(family: &Family, r: &Regulator) -> Result<()> {
    family.validate()?;
    if family.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), found: r.dim() });
    }
    Ok(())
}

/// Thresholds are searched up to this multiple of the depth.
const HORIZON: u64 = 2;

/// Least `J <= HORIZON·depth` with `sup_{n ∈ over} sup_{j >= J} |m_n(H_j)| <= bound`.
fn least_threshold(family: &Family, h: &DisjointFamily, over: &SetDescriptor, bound: &LatticeElement, depth: u64) -> Result<Option<u64>> {
    let ok = |j: u64| -> Result<bool> { Ok(family.tail_sup_bound(h, j, over, depth)?.le(bound)) };
    let mut hi = HORIZON * depth;
    if !ok(hi)? {
        return Ok(None);
    }
    let mut lo = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Certain lower bounds `|m_n(H_j)|` for `n` in `over` up to
/// `(HORIZON + 1)·depth` and `j` from `HORIZON·depth` on.
fn late_values(family: &Family, h: &DisjointFamily, over: &SetDescriptor, depth: u64) -> Result<Vec<(u64, u64, LatticeElement)>> {
    let (from, to) = (HORIZON * depth, (HORIZON + 1) * depth);
    let mut out = vec![];
    for n in over.members_up_to(to) {
        let m = family.member(n)?;
        for j in from..=to {
            let v = m.eval_set(&h.member(j), depth)?.abs_lower();
            if !v.is_zero() {
                out.push((n, j, v));
            }
        }
    }
    Ok(out)
}

/// `sup_n sup_{j >= j(k)} |m_n(H_j)| <= r_k` for every level `k <= depth`.
///
/// Holds with the table `k ↦ j(k)`; Fails with `(k, n, j)` when the bound
/// is certainly broken beyond every candidate threshold.
pub fn uniform_sbounded_check(family: &Family, h: &DisjointFamily, r: &Regulator, depth: u64) -> Result<UniformSBoundednessReport> {
    check_shape(family, r)?;
    let depth = depth.max(1);
    let all = SetDescriptor::all();
    let mut thresholds = vec![];
    let mut late = None;
    let mut verdict = None;
    for k in 1..=depth {
        let bound = r.eval(k);
        match least_threshold(family, h, &all, &bound, depth)? {
            Some(j) => thresholds.push(Threshold { level: k, index: j, over: None }),
            None => {
                let values = match &late {
                    Some(v) => v,
                    None => late.insert(late_values(family, h, &all, depth)?),
                };
                if let Some((n, j, _)) = values.iter().find(|(_, _, v)| !v.le(&bound)) {
                    verdict = Some(Verdict::fails(Witness::Triple(k, *n, *j), depth));
                    break;
                }
                verdict.get_or_insert(Verdict::unknown(depth));
            }
        }
    }
    let verdict = verdict.unwrap_or_else(|| Verdict::holds(threshold_table(&thresholds), depth));
    Ok(UniformSBoundednessReport { mode: Mode::Plain, regulator: r.clone(), verdict, thresholds })
}

fn threshold_table(ts: &[Threshold]) -> Witness {
    Witness::Indices(ts.iter().map(|t| t.index).collect())
}

/// `sup_{j ∈ I} sup_{l >= l(k)} |m_j(H_l)| <= r_k` for every sampled ideal
/// member `I` and level `k <= depth`.
pub fn ideal_uniform_sbounded_check(
    family: &Family,
    f: &PartitionFilter,
    h: &DisjointFamily,
    r: &Regulator,
    ideal_sample: &[SetDescriptor],
    depth: u64,
) -> Result<UniformSBoundednessReport> {
    check_shape(family, r)?;
    let depth = depth.max(1);
    for i in ideal_sample {
        if !filters::in_ideal(f, i, depth).is_holds() {
            return Err(Error::Precondition(format!("{i} is not in the dual ideal of {f}")));
        }
    }
    let mut thresholds = vec![];
    let mut verdict = None;
    'sets: for i in ideal_sample {
        let mut late = None;
        for k in 1..=depth {
            let bound = r.eval(k);
            match least_threshold(family, h, i, &bound, depth)? {
                Some(l) => thresholds.push(Threshold { level: k, index: l, over: Some(i.clone()) }),
                None => {
                    let values = match &late {
                        Some(v) => v,
                        None => late.insert(late_values(family, h, i, depth)?),
                    };
                    if let Some((j, l, _)) = values.iter().find(|(_, _, v)| !v.le(&bound)) {
                        let w = Witness::labeled(format!("level {k} over {i}"), Witness::Pair(*j, *l));
                        verdict = Some(Verdict::fails(w, depth));
                        break 'sets;
                    }
                    verdict.get_or_insert(Verdict::unknown(depth));
                }
            }
        }
    }
    let verdict = verdict.unwrap_or_else(|| Verdict::holds(threshold_table(&thresholds), depth));
    Ok(UniformSBoundednessReport { mode: Mode::Ideal, regulator: r.clone(), verdict, thresholds })
}

/// For every level `p <= depth` some `F(p)` in the filter and `k(p)` with
/// `|m_n(H_k)| <= r_p` for `k >= k(p)` and `n ∈ F(p)`.
///
/// Candidates for `F(p)` are ℕ and the complements of the family's switch
/// regions lying in the ideal. Fails when point masses larger than `r_p`
/// sit on a stationary set and the `H_k` are finite.
pub fn f_uniform_sbounded_check(
    family: &Family,
    f: &PartitionFilter,
    h: &DisjointFamily,
    r: &Regulator,
    depth: u64,
) -> Result<UniformSBoundednessReport> {
    check_shape(family, r)?;
    let depth = depth.max(1);
    let mut candidates = vec![SetDescriptor::all()];
    for s in family.switch_regions() {
        if filters::in_ideal(f, &s, depth).is_holds() {
            let c = s.complement().simplified();
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let masses = escaping_masses(family);
    let finite_members = match h {
        DisjointFamily::Singletons => true,
        DisjointFamily::Blocks(g) => g.has_finite_blocks(),
        DisjointFamily::Explicit(_) => false,
    };
    let mut thresholds = vec![];
    let mut verdict = None;
    'levels: for p in 1..=depth {
        let bound = r.eval(p);
        for c in &candidates {
            if let Some(k) = least_threshold(family, h, c, &bound, depth)? {
                thresholds.push(Threshold { level: p, index: k, over: Some(c.clone()) });
                continue 'levels;
            }
        }
        if finite_members {
            for (s, c) in &masses {
                if !c.le(&bound) && filters::is_stationary(f, s, depth).is_holds() {
                    verdict = Some(Verdict::fails(Witness::labeled(format!("level {p}"), Witness::Set(s.clone())), depth));
                    break 'levels;
                }
            }
        }
        verdict.get_or_insert(Verdict::unknown(depth));
    }
    let verdict = verdict.unwrap_or_else(|| Verdict::holds(threshold_table(&thresholds), depth));
    Ok(UniformSBoundednessReport { mode: Mode::FilterUniform, regulator: r.clone(), verdict, thresholds })
}

/// Index sets on which the family is exactly `c·δ_n`, with `|c|`.
fn escaping_masses(family: &Family) -> Vec<(SetDescriptor, LatticeElement)> {
    match family {
        Family::PointMass { coef } => vec![(SetDescriptor::all(), coef.abs())],
        Family::Switch { region, inside, outside } => {
            let mut v: Vec<_> = escaping_masses(inside)
                .into_iter()
                .map(|(s, c)| (s.intersect(region.clone()).simplified(), c))
                .collect();
            v.extend(escaping_masses(outside).into_iter().map(|(s, c)| (s.minus(region.clone()).simplified(), c)));
            v
        }
        Family::Scaled(a, k) => escaping_masses(a).into_iter().map(|(s, c)| (s, c.scale(&k.abs()))).collect(),
        _ => vec![],
    }
}

/// The fixed witness grammar: short prefixes, proper arithmetic
/// progressions with step and offset below 64, tails, and block unions of
/// the filter's blocks over small progressions.
pub fn witness_grammar(f: &PartitionFilter) -> Vec<SetDescriptor> {
    let mut out: Vec<SetDescriptor> = [1, 2, 4, 8].into_iter().map(SetDescriptor::prefix).collect();
    for d in 2..=GRAMMAR_STEP {
        for a in 0..d {
            out.push(SetDescriptor::arith(a, d));
        }
    }
    out.extend((1..=4).map(SetDescriptor::tail_from));
    if !matches!(f, PartitionFilter::Singletons) {
        for d in 1..=4 {
            for a in 0..d {
                let idx = SetDescriptor::arith(f.first_block() + a, d);
                out.push(SetDescriptor::block_union(f.clone(), idx));
            }
        }
    }
    out
}

const GRAMMAR_STEP: u64 = 64;

/// Pointwise convergence to zero along the filter on every sampled set.
/// Stops at the first set that certainly fails.
pub fn pointwise_audit(family: &Family, f: &PartitionFilter, b: &Regulator, sample: &[SetDescriptor], depth: u64) -> Result<Verdict> {
    let regions: Vec<Region> = sample.iter().cloned().map(Region::points).collect();
    pointwise_audit_regions(family, f, b, &regions, depth)
}

/// As `pointwise_audit`, on regions of the hybrid space.
pub fn pointwise_audit_regions(family: &Family, f: &PartitionFilter, b: &Regulator, sample: &[Region], depth: u64) -> Result<Verdict> {
    let zero = LatticeElement::zero(family.dim());
    let mut all_hold = true;
    for a in sample {
        let x = family.sequence(&Functional::Value(a.clone()), depth)?;
        let v = filter_o_convergence(f, &x, &zero, b, depth)?;
        if v.is_fails() {
            let w = if a.segment.is_empty() { Witness::Set(a.atoms.clone()) } else { Witness::Note(a.to_string()) };
            return Ok(Verdict::fails(w, depth));
        }
        all_hold &= v.is_holds();
    }
    Ok(if all_hold {
        Verdict::holds(Witness::labeled("sets", Witness::Index(sample.len() as u64)), depth)
    } else {
        Verdict::unknown(depth)
    })
}

/// Every member's s-boundedness certificate lies below `a` up to `depth`.
pub fn certificate_audit(family: &Family, a: &Regulator, depth: u64) -> Result<Verdict> {
    for n in 1..=depth {
        let m = family.member(n)?;
        let cert = m.s_boundedness_certificate();
        if cert.charge.is_some() {
            return Ok(Verdict::fails(Witness::labeled("charge at", Witness::Index(n)), depth));
        }
        if let Some(k) = (1..=depth).find(|&k| !cert.regulator.eval(k).le(&a.eval(k))) {
            return Ok(Verdict::fails(Witness::labeled(format!("member {n} at"), Witness::Index(k)), depth));
        }
    }
    Ok(Verdict::holds(Witness::labeled("members", Witness::Index(depth)), depth))
}

/// Theorem check for families of σ-additive measures on the atoms: if
/// `m_n(A) → 0` along the filter for every set, then `v(m_n)(ℕ) → 0`.
///
/// The hypotheses are audited on `sample` (the witness grammar when
/// empty); a failure gives Fails labeled "hypothesis". The conclusion
/// searches, per level `j`, a filter element `F_j` on which
/// `v(m_n)(ℕ) <= p_j` with `p = schur_regulator(a, b)`.
pub fn schur_verify(
    family: &Family,
    f: &PartitionFilter,
    b: &Regulator,
    a: &Regulator,
    sample: &[SetDescriptor],
    depth: u64,
) -> Result<Verdict> {
    check_shape(family, b)?;
    same_dim(a, b)?;
    if !family.is_chargeless() || family.space() != crate::measures::AtomicSpace::CountableAtoms {
        return Err(Error::Precondition("expected chargeless measures on countably many atoms".into()));
    }
    let depth = depth.max(1);
    let grammar;
    let sample = if sample.is_empty() {
        grammar = witness_grammar(f);
        &grammar[..]
    } else {
        sample
    };
    let convergence = pointwise_audit(family, f, b, sample, depth)?;
    if let Some(w) = convergence.witness.clone().filter(|_| convergence.is_fails()) {
        return Ok(Verdict::fails(Witness::labeled("hypothesis", w), depth));
    }
    let regulated = certificate_audit(family, a, depth)?;
    if let Some(w) = regulated.witness.clone().filter(|_| regulated.is_fails()) {
        return Ok(Verdict::fails(Witness::labeled("hypothesis", w), depth));
    }
    let p = schur_regulator(a, b)?;
    let x = family.sequence(&Functional::Variation(Region::points(SetDescriptor::all())), depth)?;
    let zero = LatticeElement::zero(family.dim());
    let mut table = vec![];
    for j in 1..=depth {
        let e = exceptional_set_at(&x, &zero, &p.eval(j), j, depth)?;
        let fj = e.possibly.complement().simplified();
        if filters::in_filter(f, &fj, depth).is_holds() {
            table.push((j, fj));
        } else if convergence.is_holds() && filters::is_stationary(f, &e.surely, depth).is_holds() {
            return Ok(Verdict::fails(Witness::labeled(format!("level {j}"), Witness::Set(e.surely)), depth));
        } else {
            return Ok(Verdict::unknown(depth));
        }
    }
    if !convergence.is_holds() {
        return Ok(Verdict::unknown(depth));
    }
    Ok(Verdict::holds(Witness::Table(table), depth))
}

/// Outcome of a theorem check: audited hypotheses, the regulator used and
/// the conclusion. A violation is a failed conclusion under hypotheses that
/// all hold.
#[derive(Clone, Debug)]
pub struct TheoremCheck {
    pub hypotheses: Vec<(String, Verdict)>,
    pub regulator: Regulator,
    pub conclusion: Verdict,
    pub report: Option<UniformSBoundednessReport>,
}

impl TheoremCheck {
    pub fn violation(&self) -> bool {
        self.hypotheses.iter().all(|(_, v)| v.is_holds()) && self.conclusion.is_fails()
    }
}

fn require(name: &str, v: Verdict) -> Result<(String, Verdict)> {
    if v.is_fails() {
        let detail = v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
        return Err(Error::Hypothesis { name: name.to_string(), detail });
    }
    Ok((name.to_string(), v))
}

/// Filter convergence plus ideal uniform s-boundedness give uniform
/// s-boundedness with `r = finale_regulator(q, b)`, checked on
/// `m_n − limit`.
#[allow(clippy::too_many_arguments)]
pub fn finale_verify(
    family: &Family,
    limit: &crate::measures::Charge,
    f: &PartitionFilter,
    b: &Regulator,
    q: &Regulator,
    h: &DisjointFamily,
    ideal_sample: &[SetDescriptor],
    sample: &[SetDescriptor],
    depth: u64,
) -> Result<TheoremCheck> {
    let g = family.clone().minus(limit);
    check_shape(&g, b)?;
    same_dim(q, b)?;
    let depth = depth.max(1);
    let mut hypotheses = vec![require("pointwise convergence", pointwise_audit(&g, f, b, sample, depth)?)?];
    let bound = g.variation_sup_bound(&Region::whole(), depth)?;
    hypotheses.push(("equibounded".into(), Verdict::holds(Witness::Element(bound), depth)));
    let ideal = ideal_uniform_sbounded_check(&g, f, h, q, ideal_sample, depth)?;
    hypotheses.push(require("ideal uniform s-boundedness", ideal.verdict)?);
    let r = finale_regulator(q, b)?;
    let report = uniform_sbounded_check(&g, h, &r, depth)?;
    Ok(TheoremCheck { hypotheses, regulator: r, conclusion: report.verdict.clone(), report: Some(report) })
}

/// With members bounded by `u` and s-bounded along `q`, filter convergence
/// gives: for every level `p` the indices `j` with `⋁_k |m_j(H_k)| > r_p`
/// form an ideal set, `r = nuovoschur_regulator(q, b, u)`.
#[allow(clippy::too_many_arguments)]
pub fn nuovoschur_verify(
    family: &Family,
    f: &PartitionFilter,
    b: &Regulator,
    q: &Regulator,
    u: &LatticeElement,
    h: &DisjointFamily,
    sample: &[SetDescriptor],
    depth: u64,
) -> Result<TheoremCheck> {
    check_shape(family, b)?;
    let depth = depth.max(1);
    let bound = family.variation_sup_bound(&Region::whole(), depth)?;
    let bounded = if bound.le(u) {
        Verdict::holds(Witness::Element(bound), depth)
    } else {
        Verdict::fails(Witness::Element(bound), depth)
    };
    let mut hypotheses = vec![require("bounded by u", bounded)?];
    hypotheses.push(require("common s-boundedness certificate", certificate_audit(family, q, depth)?)?);
    hypotheses.push(require("pointwise convergence", pointwise_audit(family, f, b, sample, depth)?)?);
    let r = nuovoschur_regulator(q, b, u)?;
    let x = family.sequence(&Functional::Sup(h.clone()), depth)?;
    let zero = LatticeElement::zero(family.dim());
    let mut table = vec![];
    let mut conclusion = None;
    for p in 1..=depth {
        let e = exceptional_set_at(&x, &zero, &r.eval(p), p, depth)?;
        if filters::in_ideal(f, &e.possibly, depth).is_holds() {
            table.push((p, e.possibly));
        } else if filters::is_stationary(f, &e.surely, depth).is_holds() {
            conclusion = Some(Verdict::fails(Witness::labeled(format!("level {p}"), Witness::Set(e.surely)), depth));
            break;
        } else {
            conclusion.get_or_insert(Verdict::unknown(depth));
        }
    }
    let conclusion = conclusion.unwrap_or_else(|| Verdict::holds(Witness::Table(table), depth));
    Ok(TheoremCheck { hypotheses, regulator: r, conclusion, report: None })
}

/// `Q_N` of the nuovoschur regulator, exposed for reports.
pub fn nuovoschur_tail(u: &LatticeElement, n: u64) -> LatticeElement {
    let t = u.scale(&(rational::pow(&rational::rat(1, 2), n.max(1)) * rational::int(2)));
    t.inf(u)
}
