//! Scenarios and end-to-end theorem checks with reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::{lebesgue_set, lebesgue_with_set, sobczyk_hammer_with_set, yosida_hewett_decompose, DecompositionKind};
use crate::error::{Error, Result};
use crate::filters::{PartitionFilter, SetDescriptor};
use crate::lattice::{LatticeElement, Regulator, Verdict, Witness};
use crate::measures::{AtomicSpace, Charge, DisjointFamily, Family, PartKind, Region, Segment};
use crate::regulators::{self, TheoremCheck};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    Teokyber,
    Main,
    Schur,
    Finale,
    Nuovoschur,
    Corofinale,
    Nuovocorfinale,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Teokyber,
        TheoremId::Main,
        TheoremId::Schur,
        TheoremId::Finale,
        TheoremId::Nuovoschur,
        TheoremId::Corofinale,
        TheoremId::Nuovocorfinale,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Teokyber => "teokyber",
            TheoremId::Main => "main",
            TheoremId::Schur => "schur",
            TheoremId::Finale => "finale",
            TheoremId::Nuovoschur => "nuovoschur",
            TheoremId::Corofinale => "corofinale",
            TheoremId::Nuovocorfinale => "nuovocorfinale",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

/// One verification problem: a family of measures along a filter, with the
/// regulators and sample sets its hypotheses are audited on.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub theorem: TheoremId,
    pub filter: PartitionFilter,
    pub nu: Charge,
    pub family: Family,
    pub limit: Charge,
    pub regulators: BTreeMap<String, Regulator>,
    /// Uniform bound on the members, when the theorem needs one.
    pub bound: Option<LatticeElement>,
    pub disjoint: DisjointFamily,
    pub sample_sets: Vec<SetDescriptor>,
    pub ideal_sample: Vec<SetDescriptor>,
    /// Extra sample sets drawn from the witness grammar with the seed.
    pub random_sets: u64,
    pub depth: u64,
    pub seed: u64,
}

impl Scenario {
    /// A scenario with empty samples, `ν = 0` and limit `0` on countable atoms.
    pub fn new(name: impl Into<String>, theorem: TheoremId, filter: PartitionFilter, family: Family) -> Self {
        let dim = family.dim();
        let space = family.space();
        Self {
            name: name.into(),
            theorem,
            filter,
            nu: Charge::zero(space, 1),
            limit: Charge::zero(space, dim),
            family,
            regulators: BTreeMap::new(),
            bound: None,
            disjoint: DisjointFamily::Singletons,
            sample_sets: vec![],
            ideal_sample: vec![],
            random_sets: 0,
            depth: 16,
            seed: 0,
        }
    }

    pub fn with_regulator(mut self, name: &str, r: Regulator) -> Self {
        self.regulators.insert(name.to_string(), r);
        self
    }

    pub fn regulator(&self, name: &str) -> Result<&Regulator> {
        self.regulators.get(name).ok_or_else(|| Error::MissingCertificate(format!("regulator {name}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.limit.space() != self.family.space() {
            return Err(Error::UnsupportedCombination(format!("spaces {} and {}", self.limit.space(), self.family.space())));
        }
        if self.limit.dim() != self.family.dim() {
            return Err(Error::DimensionMismatch { expected: self.family.dim(), found: self.limit.dim() });
        }
        if self.nu.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.nu.dim() });
        }
        for r in self.regulators.values() {
            r.validate()?;
            if r.dim() != self.family.dim() {
                return Err(Error::DimensionMismatch { expected: self.family.dim(), found: r.dim() });
            }
        }
        if self.depth == 0 {
            return Err(Error::InvalidValue("depth must be positive".into()));
        }
        Ok(())
    }

    /// Listed sample sets followed by the seeded draws.
    pub fn samples(&self) -> Vec<SetDescriptor> {
        let mut out = self.sample_sets.clone();
        if self.random_sets > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let grammar = regulators::witness_grammar(&self.filter);
            out.extend(grammar.choose_multiple(&mut rng, self.random_sets as usize).cloned());
        }
        out
    }

    /// Sample regions: the sample sets as atoms, and the whole segment when
    /// some member carries density.
    pub fn sample_regions(&self) -> Vec<Region> {
        let mut out: Vec<Region> = self.samples().into_iter().map(Region::points).collect();
        if !self.family.diffuse_support().is_empty() || !self.limit.diffuse_support().is_empty() {
            out.push(Region::diffuse(Segment::full()));
        }
        out
    }
}

/// One decomposition of a member (`index` 0 is the limit).
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionTrace {
    pub index: u64,
    pub kind: DecompositionKind,
    pub certified: bool,
    pub witness_set: Option<String>,
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub scenario: String,
    pub theorem_id: TheoremId,
    pub hypothesis_audit: Vec<(String, Verdict)>,
    pub conclusion: Verdict,
    pub derived_regulator: Regulator,
    pub regulator_note: String,
    pub decomposition_traces: Vec<DecompositionTrace>,
    pub violation_flag: bool,
    /// The sets the audits ran on, and the depth.
    pub samples: Vec<String>,
    pub depth: u64,
}

impl TheoremReport {
    fn new(s: &Scenario, hypotheses: Vec<(String, Verdict)>, conclusion: Verdict, regulator: Regulator, note: &str) -> Self {
        let violation_flag = hypotheses.iter().all(|(_, v)| v.is_holds()) && conclusion.is_fails();
        Self {
            scenario: s.name.clone(),
            theorem_id: s.theorem,
            hypothesis_audit: hypotheses,
            conclusion,
            derived_regulator: regulator,
            regulator_note: note.to_string(),
            decomposition_traces: vec![],
            violation_flag,
            samples: s.samples().iter().map(|a| a.to_string()).collect(),
            depth: s.depth,
        }
    }
}

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Regulator values listed in a report.
const REGULATOR_TERMS: u64 = 8;

#[derive(Serialize)]
struct HypothesisRow<'a> {
    name: &'a str,
    verdict: &'a Verdict,
}

#[derive(Serialize)]
struct RegulatorView<'a> {
    expr: String,
    note: &'a str,
    first_terms: Vec<LatticeElement>,
}

#[derive(Serialize)]
struct ReportView<'a> {
    schema_version: u32,
    scenario: &'a str,
    theorem_id: TheoremId,
    depth: u64,
    samples: &'a [String],
    hypothesis_audit: Vec<HypothesisRow<'a>>,
    conclusion: &'a Verdict,
    derived_regulator: RegulatorView<'a>,
    decomposition_traces: &'a [DecompositionTrace],
    violation_flag: bool,
}

impl Serialize for TheoremReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportView {
            schema_version: SCHEMA_VERSION,
            scenario: &self.scenario,
            theorem_id: self.theorem_id,
            depth: self.depth,
            samples: &self.samples,
            hypothesis_audit: self.hypothesis_audit.iter().map(|(name, verdict)| HypothesisRow { name, verdict }).collect(),
            conclusion: &self.conclusion,
            derived_regulator: RegulatorView {
                expr: self.derived_regulator.to_string(),
                note: &self.regulator_note,
                first_terms: (1..=REGULATOR_TERMS).map(|j| self.derived_regulator.eval(j)).collect(),
            },
            decomposition_traces: &self.decomposition_traces,
            violation_flag: self.violation_flag,
        }
        .serialize(s)
    }
}

/// Members decomposed for the traces.
const TRACE_MEMBERS: u64 = 6;

/// Runs the check named by the scenario.
pub fn run(s: &Scenario) -> Result<TheoremReport> {
    s.validate()?;
    match s.theorem {
        TheoremId::Teokyber => verify_teokyber(s),
        TheoremId::Main => verify_main(s),
        TheoremId::Schur => verify_schur(s),
        TheoremId::Finale => verify_finale(s),
        TheoremId::Nuovoschur => verify_nuovoschur(s),
        TheoremId::Corofinale => verify_corollaries(s, CorollaryMode::Finale),
        TheoremId::Nuovocorfinale => verify_corollaries(s, CorollaryMode::Nuovoschur),
    }
}

/// A named sequence of parts with the matching part of the limit.
struct PartSequence {
    name: &'static str,
    family: Family,
    limit: Charge,
}

fn lebesgue_parts(s: &Scenario, u: &Region) -> Result<[PartSequence; 2]> {
    let d = s.depth;
    let sigma = s.family.part(&PartKind::Sigma, d)?;
    let mut ac = sigma.part(&PartKind::Restrict(u.clone()), d)?;
    let mut sing = sigma.part(&PartKind::Restrict(u.complement()), d)?;
    let charge = s.family.part(&PartKind::ChargeOnly, d)?;
    let dec = lebesgue_with_set(&s.limit, &s.nu, u, d)?;
    if s.nu.charge().is_some() {
        ac = ac.plus(charge);
    } else {
        sing = sing.plus(charge);
    }
    Ok([
        PartSequence { name: "absolutely continuous", family: ac, limit: dec.part_a },
        PartSequence { name: "singular", family: sing, limit: dec.part_b },
    ])
}

fn sobczyk_hammer_parts(s: &Scenario, v: &Region) -> Result<[PartSequence; 2]> {
    let d = s.depth;
    let dec = sobczyk_hammer_with_set(&s.limit, v, d)?;
    let atomic = s.family.part(&PartKind::Atomic, d)?.plus(s.family.part(&PartKind::ChargeOnly, d)?);
    Ok([
        PartSequence { name: "continuous", family: s.family.part(&PartKind::Diffuse, d)?, limit: dec.part_a },
        PartSequence { name: "atomic", family: atomic, limit: dec.part_b },
    ])
}

fn yosida_hewett_parts(s: &Scenario) -> Result<[PartSequence; 2]> {
    let d = s.depth;
    let dec = yosida_hewett_decompose(&s.limit, d)?;
    Ok([
        PartSequence { name: "countably additive", family: s.family.part(&PartKind::Sigma, d)?, limit: dec.part_a },
        PartSequence { name: "purely finitely additive", family: s.family.part(&PartKind::ChargeOnly, d)?, limit: dec.part_b },
    ])
}

/// `U` for the Lebesgue splits: the union of the members' witness sets,
/// each of which is where `ν` is positive.
fn common_lebesgue_set(s: &Scenario) -> Region {
    lebesgue_set(&s.nu)
}

/// `V` for the Sobczyk–Hammer splits: where any member or the limit
/// carries density.
fn common_diffuse_set(s: &Scenario) -> Region {
    Region::diffuse(s.family.diffuse_support().union(&s.limit.diffuse_support()))
}

fn traces(s: &Scenario, u: &Region, v: &Region, with_yh: bool) -> Result<Vec<DecompositionTrace>> {
    let mut out = vec![];
    let members = std::iter::once((0, s.limit.clone()))
        .chain((1..=TRACE_MEMBERS.min(s.depth)).map(|n| s.family.member(n).map(|m| (n, m))).collect::<Result<Vec<_>>>()?);
    for (index, m) in members {
        let mut decs = vec![lebesgue_with_set(&m, &s.nu, u, s.depth)?, sobczyk_hammer_with_set(&m, v, s.depth)?];
        if with_yh {
            decs.push(yosida_hewett_decompose(&m, s.depth)?);
        }
        out.extend(decs.into_iter().map(|d| DecompositionTrace {
            index,
            kind: d.kind,
            certified: d.certified(),
            witness_set: d.witness_set.as_ref().map(|w| w.to_string()),
        }));
    }
    Ok(out)
}

/// Convergence of every part sequence to the matching part of the limit
/// on the sample regions, with regulator `r`.
fn parts_converge(s: &Scenario, parts: &[PartSequence], r: &Regulator) -> Result<Verdict> {
    let regions = s.sample_regions();
    let mut unknown = false;
    for p in parts {
        let diff = p.family.clone().minus(&p.limit);
        let v = regulators::pointwise_audit_regions(&diff, &s.filter, r, &regions, s.depth)?;
        if v.is_fails() {
            let w = v.witness.expect("fails carries a witness");
            return Ok(Verdict::fails(Witness::labeled(p.name, w), s.depth));
        }
        unknown |= v.is_unknown();
    }
    Ok(if unknown {
        Verdict::unknown(s.depth)
    } else {
        Verdict::holds(Witness::labeled("part sequences", Witness::Index(parts.len() as u64)), s.depth)
    })
}

/// `(m_n^< − m^<)(A) = (m_n − m)(A ∩ U)` on the sample regions for
/// `n <= depth`, compared as exact intervals.
fn restriction_identity(s: &Scenario, u: &Region, ac: &PartSequence) -> Result<Verdict> {
    for a in s.sample_regions() {
        let inside = a.intersect(u);
        for n in 1..=s.depth {
            let lhs = ac.family.member(n)?.sub(&ac.limit)?.evaluate(&a, s.depth)?;
            let diff = s.family.member(n)?.sub(&s.limit)?.sigma_part();
            let rhs = diff.evaluate(&inside, s.depth)?;
            let charge_shift = if s.nu.charge().is_some() {
                s.family.member(n)?.sub(&s.limit)?.charge_part().evaluate(&a, s.depth)?
            } else {
                crate::lattice::ValueInterval::zero(s.family.dim())
            };
            if lhs != rhs.add(&charge_shift) {
                return Ok(Verdict::fails(Witness::labeled(format!("{a}"), Witness::Index(n)), s.depth));
            }
        }
    }
    Ok(Verdict::holds(Witness::labeled("members", Witness::Index(s.depth)), s.depth))
}

fn conjunction(vs: &[Verdict], depth: u64, label: &str) -> Verdict {
    if let Some(v) = vs.iter().find(|v| v.is_fails()) {
        return v.clone();
    }
    if vs.iter().any(Verdict::is_unknown) {
        return Verdict::unknown(depth);
    }
    Verdict::holds(Witness::labeled(label, Witness::Index(vs.len() as u64)), depth)
}

/// σ-additive families converging along the filter: the Lebesgue and
/// Sobczyk–Hammer parts, taken along common sets `U` and `V`, converge to
/// the parts of the limit with the same regulator `b`.
pub fn verify_teokyber(s: &Scenario) -> Result<TheoremReport> {
    if !s.family.is_chargeless() || s.limit.charge().is_some() {
        return Err(Error::Precondition("every measure must be σ-additive".into()));
    }
    let b = s.regulator("b")?.clone();
    let d = s.depth;
    let g = s.family.clone().minus(&s.limit);
    let audit = regulators::pointwise_audit_regions(&g, &s.filter, &b, &s.sample_regions(), d)?;
    let hypotheses = vec![("pointwise convergence".to_string(), audit.clone())];
    let note = "the hypothesis regulator b, unchanged";
    if !audit.is_holds() {
        return Ok(TheoremReport::new(s, hypotheses, Verdict::unknown(d), b, note));
    }
    let (u, v) = (common_lebesgue_set(s), common_diffuse_set(s));
    let [ac, sing] = lebesgue_parts(s, &u)?;
    let identity = restriction_identity(s, &u, &ac)?;
    let [cont, atomic] = sobczyk_hammer_parts(s, &v)?;
    let parts = parts_converge(s, &[ac, sing, cont, atomic], &b)?;
    let conclusion = conjunction(&[parts, identity], d, "parts and restriction identity");
    let mut report = TheoremReport::new(s, hypotheses, conclusion, b, note);
    report.decomposition_traces = traces(s, &u, &v, false)?;
    Ok(report)
}

fn require(name: &str, v: Verdict) -> Result<(String, Verdict)> {
    if v.is_fails() {
        let detail = v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
        return Err(Error::Hypothesis { name: name.to_string(), detail });
    }
    Ok((name.to_string(), v))
}

/// Uniformly s-bounded families converging along the filter: all six part
/// sequences (Lebesgue, Sobczyk–Hammer, Yosida–Hewett) converge with the
/// regulator `2r + b`, `r` the uniformity regulator.
pub fn verify_main(s: &Scenario) -> Result<TheoremReport> {
    let r = s.regulator("r")?.clone();
    main_with(s, &r, vec![])
}

fn main_with(s: &Scenario, r: &Regulator, mut hypotheses: Vec<(String, Verdict)>) -> Result<TheoremReport> {
    let b = s.regulator("b")?.clone();
    let d = s.depth;
    let uniform = regulators::uniform_sbounded_check(&s.family, &s.disjoint, r, d)?;
    hypotheses.push(require("uniform s-boundedness", uniform.verdict)?);
    let g = s.family.clone().minus(&s.limit);
    hypotheses.push(require("pointwise convergence", regulators::pointwise_audit_regions(&g, &s.filter, &b, &s.sample_regions(), d)?)?);
    let derived = r.clone().scaled(crate::lattice::rational::int(2))?.plus(b)?;
    let (u, v) = (common_lebesgue_set(s), common_diffuse_set(s));
    let [ac, sing] = lebesgue_parts(s, &u)?;
    let identity = restriction_identity(s, &u, &ac)?;
    let [cont, atomic] = sobczyk_hammer_parts(s, &v)?;
    let [ca, pfa] = yosida_hewett_parts(s)?;
    let parts = parts_converge(s, &[ac, sing, cont, atomic, ca, pfa], &derived)?;
    let conclusion = conjunction(&[parts, identity], d, "parts and restriction identity");
    let note = "2·r + b, r the uniformity regulator and b the convergence regulator";
    let mut report = TheoremReport::new(s, hypotheses, conclusion, derived, note);
    report.decomposition_traces = traces(s, &u, &v, true)?;
    Ok(report)
}

fn check_report(s: &Scenario, check: TheoremCheck, note: &str) -> TheoremReport {
    TheoremReport::new(s, check.hypotheses, check.conclusion, check.regulator, note)
}

pub fn verify_schur(s: &Scenario) -> Result<TheoremReport> {
    let (a, b) = (s.regulator("a")?, s.regulator("b")?);
    let v = regulators::schur_verify(&s.family, &s.filter, b, a, &s.samples(), s.depth)?;
    let p = regulators::schur_regulator(a, b)?;
    let note = "2(a + 2b)";
    let hypothesis = match &v.witness {
        Some(Witness::Labeled(l, w)) if l == "hypothesis" && v.is_fails() => Some(Verdict::fails((**w).clone(), s.depth)),
        _ => None,
    };
    Ok(match hypothesis {
        Some(h) => TheoremReport::new(s, vec![("hypotheses".into(), h)], Verdict::unknown(s.depth), p, note),
        None => {
            let h = Verdict::holds(Witness::labeled("sets", Witness::Index(s.samples().len() as u64)), s.depth);
            TheoremReport::new(s, vec![("hypotheses".into(), h)], v, p, note)
        }
    })
}

pub fn verify_finale(s: &Scenario) -> Result<TheoremReport> {
    let check = finale_check(s)?;
    Ok(check_report(s, check, "2(q + 2b) + q"))
}

fn finale_check(s: &Scenario) -> Result<TheoremCheck> {
    let (b, q) = (s.regulator("b")?, s.regulator("q")?);
    regulators::finale_verify(&s.family, &s.limit, &s.filter, b, q, &s.disjoint, &s.ideal_sample, &s.samples(), s.depth)
}

pub fn verify_nuovoschur(s: &Scenario) -> Result<TheoremReport> {
    let check = nuovoschur_check(s)?;
    Ok(check_report(s, check, "2(b + B + Q)"))
}

fn nuovoschur_check(s: &Scenario) -> Result<TheoremCheck> {
    let (b, q) = (s.regulator("b")?, s.regulator("q")?);
    let u = s.bound.as_ref().ok_or_else(|| Error::MissingCertificate("bound u".into()))?;
    let g = s.family.clone().minus(&s.limit);
    regulators::nuovoschur_verify(&g, &s.filter, b, q, u, &s.disjoint, &s.samples(), s.depth)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CorollaryMode {
    Finale,
    Nuovoschur,
}

/// Stage 1 establishes uniform s-boundedness, stage 2 runs the
/// decomposition check with the stage-1 regulator.
pub fn verify_corollaries(s: &Scenario, mode: CorollaryMode) -> Result<TheoremReport> {
    let check = match mode {
        CorollaryMode::Finale => finale_check(s)?,
        CorollaryMode::Nuovoschur => nuovoschur_check(s)?,
    };
    let mut hypotheses: Vec<(String, Verdict)> =
        check.hypotheses.iter().map(|(n, v)| (format!("stage 1: {n}"), v.clone())).collect();
    if !check.conclusion.is_holds() {
        return Ok(TheoremReport::new(s, hypotheses, check.conclusion, check.regulator, "stage 1"));
    }
    hypotheses.push(("stage 1: conclusion".into(), check.conclusion.clone()));
    main_with(s, &check.regulator, hypotheses)
}

/// Enumerates `space` in a seeded order and returns the first family on
/// which `violates` holds, within `budget` evaluations.
pub fn counterexample_search(
    space: &[Family],
    violates: impl Fn(&Family) -> Result<bool>,
    budget: usize,
    seed: u64,
) -> Result<Option<(usize, Family)>> {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for &i in order.iter().take(budget) {
        if violates(&space[i])? {
            return Ok(Some((i, space[i].clone())));
        }
    }
    Ok(None)
}

/// Point masses `c·δ_n` for `n` in one block of the filter, zero elsewhere,
/// next to uniformly s-bounded perturbations of a geometric measure.
pub fn block_point_mass_grammar(f: &PartitionFilter, blocks: u64) -> Vec<Family> {
    let zero = || Family::zero(AtomicSpace::CountableAtoms, 1);
    let mu = Charge::geometric(SetDescriptor::all(), LatticeElement::from_ints(&[1]), crate::lattice::rational::rat(1, 2))
        .expect("valid ratio");
    let mut out = vec![];
    for k in 0..blocks {
        let block = SetDescriptor::block_union(f.clone(), SetDescriptor::singleton(f.first_block() + k));
        for c in 1..=2 {
            out.push(Family::Perturbed {
                base: Charge::zero(AtomicSpace::CountableAtoms, 1),
                direction: mu.scale(&crate::lattice::rational::int(c)),
                rate: crate::measures::Rate::Geometric(crate::lattice::rational::rat(1, k as i64 + 2)),
            });
            out.push(Family::switch(block.clone(), Family::PointMass { coef: LatticeElement::from_ints(&[c]) }, zero()));
        }
    }
    out
}

/// The gap property: convergent to zero along `f` on `sample` with `b`,
/// yet not uniformly s-bounded with `r`.
pub fn converges_without_uniformity<'a>(
    f: &'a PartitionFilter,
    b: &'a Regulator,
    r: &'a Regulator,
    sample: &'a [SetDescriptor],
    depth: u64,
) -> impl Fn(&Family) -> Result<bool> + 'a {
    move |fam| {
        if !regulators::pointwise_audit(fam, f, b, sample, depth)?.is_holds() {
            return Ok(false);
        }
        Ok(regulators::uniform_sbounded_check(fam, &DisjointFamily::Singletons, r, depth)?.verdict.is_fails())
    }
}
