//! S-expression reader and printer for scenarios and their parts.
//!
//! Every value prints in the form it is read back from; the printers are
//! the `Display` impls of the types.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::filters::{LengthRule, NamedPredicate, PartitionFilter, SetDescriptor};
use crate::harness::{Scenario, TheoremId};
use crate::lattice::rational::{self, Rational};
use crate::lattice::{LatticeElement, Regulator};
use crate::measures::{AtomicSpace, Charge, DisjointFamily, DyadicInterval, Family, Rate, Region, Segment};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Sexp {
    Atom(String, Pos),
    Str(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let p = self.pos();
        Err(Error::Parse { line: p.line, col: p.col, msg: msg.into() })
    }

    fn atom(&self) -> Result<&str> {
        match self {
            Sexp::Atom(a, _) => Ok(a),
            _ => self.err("expected an atom"),
        }
    }

    fn list(&self) -> Result<&[Sexp]> {
        match self {
            Sexp::List(xs, _) => Ok(xs),
            _ => self.err("expected a list"),
        }
    }

    /// `(head args...)`
    fn form(&self) -> Result<(&str, &[Sexp])> {
        let xs = self.list()?;
        match xs.split_first() {
            Some((h, rest)) => Ok((h.atom()?, rest)),
            None => self.err("empty form"),
        }
    }
}

/// Reads every top-level expression; `;` starts a comment.
pub fn read(src: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = vec![(vec![], Pos { line: 1, col: 1 })];
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(c) = chars.next() {
        let here = Pos { line, col };
        let advance = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        advance(c, &mut line, &mut col);
        match c {
            ';' => {
                while let Some(&d) = chars.peek() {
                    if d == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => stack.push((vec![], here)),
            ')' => {
                let (xs, p) = stack.pop().expect("stack holds the top level");
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(Sexp::List(xs, p)),
                    None => return Err(Error::Parse { line: here.line, col: here.col, msg: "unbalanced `)`".into() }),
                }
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some(d) => {
                            advance(d, &mut line, &mut col);
                            s.push(d);
                        }
                        None => return Err(Error::Parse { line: here.line, col: here.col, msg: "unterminated string".into() }),
                    }
                }
                stack.last_mut().expect("stack holds the top level").0.push(Sexp::Str(s, here));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || matches!(d, '(' | ')' | '"' | ';') {
                        break;
                    }
                    s.push(d);
                    chars.next();
                    col += 1;
                }
                stack.last_mut().expect("stack holds the top level").0.push(Sexp::Atom(s, here));
            }
        }
    }
    if stack.len() > 1 {
        let (_, p) = stack.pop().expect("checked");
        return Err(Error::Parse { line: p.line, col: p.col, msg: "unclosed `(`".into() });
    }
    Ok(stack.pop().expect("checked").0)
}

/// Reads exactly one expression.
pub fn read_one(src: &str) -> Result<Sexp> {
    let mut xs = read(src)?;
    match xs.len() {
        1 => Ok(xs.pop().expect("checked")),
        0 => Err(Error::Parse { line: 1, col: 1, msg: "no expression".into() }),
        _ => xs[1].err("expected a single expression"),
    }
}

fn arity(e: &Sexp, args: &[Sexp], n: usize) -> Result<()> {
    if args.len() != n {
        return e.err(format!("expected {n} arguments, found {}", args.len()));
    }
    Ok(())
}

fn located<T>(e: &Sexp, r: Result<T>) -> Result<T> {
    r.or_else(|err| match err {
        Error::Parse { .. } => Err(err),
        other => e.err(other.to_string()),
    })
}

pub fn uint(e: &Sexp) -> Result<u64> {
    let a = e.atom()?;
    a.parse().or_else(|_| e.err(format!("expected a nonnegative integer, found `{a}`")))
}

pub fn rational(e: &Sexp) -> Result<Rational> {
    let a = e.atom()?;
    rational::parse(a).map_or_else(|| e.err(format!("expected a rational, found `{a}`")), Ok)
}

/// `(c1 c2 ...)`
pub fn element(e: &Sexp) -> Result<LatticeElement> {
    let xs = e.list()?;
    let coords = xs.iter().map(rational).collect::<Result<Vec<_>>>()?;
    located(e, LatticeElement::new(coords))
}

pub fn filter(e: &Sexp) -> Result<PartitionFilter> {
    if let Sexp::Atom(a, _) = e {
        return match a.as_str() {
            "singletons" => Ok(PartitionFilter::Singletons),
            "dyadic" => Ok(PartitionFilter::DyadicValuationBlocks),
            _ => e.err(format!("unknown filter `{a}`")),
        };
    }
    let (head, args) = e.form()?;
    match head {
        "ranges" => {
            arity(e, args, 2)?;
            located(e, LengthRule::linear(uint(&args[0])?, uint(&args[1])?).map(PartitionFilter::Ranges))
        }
        "table" => located(e, PartitionFilter::table(args.iter().map(uint).collect::<Result<_>>()?)),
        _ => e.err(format!("unknown filter `{head}`")),
    }
}

pub fn set(e: &Sexp) -> Result<SetDescriptor> {
    if let Sexp::Atom(a, _) = e {
        return match a.as_str() {
            "all" => Ok(SetDescriptor::all()),
            "empty" => Ok(SetDescriptor::empty()),
            "evens" => Ok(SetDescriptor::evens()),
            "odds" => Ok(SetDescriptor::odds()),
            _ => e.err(format!("unknown set `{a}`")),
        };
    }
    let (head, args) = e.form()?;
    let one = |i: usize| set(&args[i]);
    Ok(match head {
        "finite" => SetDescriptor::finite(args.iter().map(uint).collect::<Result<Vec<_>>>()?),
        "prefix" => {
            arity(e, args, 1)?;
            SetDescriptor::prefix(uint(&args[0])?)
        }
        "tail" => {
            arity(e, args, 1)?;
            SetDescriptor::tail_from(uint(&args[0])?)
        }
        "arith" => {
            arity(e, args, 2)?;
            let step = uint(&args[1])?;
            if step == 0 {
                return args[1].err("progression step must be positive");
            }
            SetDescriptor::arith(uint(&args[0])?, step)
        }
        "valuation" => {
            arity(e, args, 1)?;
            let v = uint(&args[0])?;
            SetDescriptor::DyadicValuation(u32::try_from(v).or_else(|_| args[0].err("valuation too large"))?)
        }
        "blocks" => {
            arity(e, args, 2)?;
            SetDescriptor::block_union(filter(&args[0])?, one(1)?)
        }
        "first-in" => {
            arity(e, args, 2)?;
            SetDescriptor::first_in_blocks(filter(&args[0])?, one(1)?)
        }
        "not" => {
            arity(e, args, 1)?;
            one(0)?.complement()
        }
        "or" | "and" => {
            arity(e, args, 2)?;
            if head == "or" { one(0)?.union(one(1)?) } else { one(0)?.intersect(one(1)?) }
        }
        "pred" => {
            arity(e, args, 1)?;
            let name = args[0].atom()?;
            SetDescriptor::Predicate(NamedPredicate::builtin(name).map_or_else(|| args[0].err(format!("unknown predicate `{name}`")), Ok)?)
        }
        _ => return e.err(format!("unknown set form `{head}`")),
    })
}

pub fn interval(e: &Sexp) -> Result<DyadicInterval> {
    let (head, args) = e.form()?;
    if head != "dy" {
        return e.err("expected (dy LEVEL INDEX)");
    }
    arity(e, args, 2)?;
    let level = u32::try_from(uint(&args[0])?).or_else(|_| args[0].err("level too large"))?;
    located(e, DyadicInterval::new(level, uint(&args[1])?))
}

pub fn segment(e: &Sexp) -> Result<Segment> {
    let (head, args) = e.form()?;
    if head != "segment" {
        return e.err("expected (segment INTERVAL...)");
    }
    Ok(Segment::from_intervals(args.iter().map(interval).collect::<Result<Vec<_>>>()?))
}

pub fn region(e: &Sexp) -> Result<Region> {
    if let Ok(("region", args)) = e.form() {
        arity(e, args, 2)?;
        return Ok(Region::new(set(&args[0])?, segment(&args[1])?));
    }
    if let Ok(("segment", _)) = e.form() {
        return Ok(Region::diffuse(segment(e)?));
    }
    Ok(Region::points(set(e)?))
}

pub fn space(e: &Sexp) -> Result<AtomicSpace> {
    if let Sexp::Atom(a, _) = e {
        if a == "countable" {
            return Ok(AtomicSpace::CountableAtoms);
        }
        return e.err(format!("unknown space `{a}`"));
    }
    let (head, args) = e.form()?;
    if head != "atoms" {
        return e.err("expected countable or (atoms N)");
    }
    arity(e, args, 1)?;
    Ok(AtomicSpace::FiniteAtoms(uint(&args[0])?))
}

/// `(charge SPACE DIM TERM...)` with terms `(point k w)`,
/// `(geometric S w ratio)`, `(density I w)` and `(at-infinity w F)`.
pub fn charge(e: &Sexp) -> Result<Charge> {
    let (head, args) = e.form()?;
    if head != "charge" || args.len() < 2 {
        return e.err("expected (charge SPACE DIM TERM...)");
    }
    let dim = usize::try_from(uint(&args[1])?).or_else(|_| args[1].err("dimension too large"))?;
    let mut m = Charge::zero(space(&args[0])?, dim);
    for t in &args[2..] {
        let (kind, xs) = t.form()?;
        m = match kind {
            "point" => {
                arity(t, xs, 2)?;
                located(t, m.with_point(uint(&xs[0])?, element(&xs[1])?))?
            }
            "geometric" => {
                arity(t, xs, 3)?;
                located(t, m.with_geometric(set(&xs[0])?, element(&xs[1])?, rational(&xs[2])?))?
            }
            "density" => {
                arity(t, xs, 2)?;
                located(t, m.with_diffuse(interval(&xs[0])?, element(&xs[1])?))?
            }
            "at-infinity" => {
                arity(t, xs, 2)?;
                located(t, m.with_charge(element(&xs[0])?, filter(&xs[1])?))?
            }
            _ => return t.err(format!("unknown charge term `{kind}`")),
        };
    }
    Ok(m)
}

pub fn regulator(e: &Sexp) -> Result<Regulator> {
    let (head, args) = e.form()?;
    let r = match head {
        "harmonic" => {
            arity(e, args, 1)?;
            Regulator::Harmonic { coef: element(&args[0])? }
        }
        "geometric" => {
            arity(e, args, 2)?;
            Regulator::Geometric { coef: element(&args[0])?, ratio: rational(&args[1])? }
        }
        "scaled" => {
            arity(e, args, 2)?;
            Regulator::Scaled { base: Box::new(regulator(&args[0])?), factor: rational(&args[1])? }
        }
        "sum" => {
            arity(e, args, 2)?;
            Regulator::Sum(Box::new(regulator(&args[0])?), Box::new(regulator(&args[1])?))
        }
        "shifted" => {
            arity(e, args, 2)?;
            Regulator::Shifted { base: Box::new(regulator(&args[0])?), offset: uint(&args[1])? }
        }
        "capped" => {
            arity(e, args, 2)?;
            Regulator::Capped { base: Box::new(regulator(&args[0])?), cap: element(&args[1])? }
        }
        _ => return e.err(format!("unknown regulator `{head}`")),
    };
    located(e, r.validate())?;
    Ok(r)
}

pub fn rate(e: &Sexp) -> Result<Rate> {
    if let Sexp::Atom(a, _) = e {
        return if a == "harmonic" { Ok(Rate::Harmonic) } else { e.err(format!("unknown rate `{a}`")) };
    }
    let (head, args) = e.form()?;
    if head != "rate" {
        return e.err("expected harmonic or (rate RATIO)");
    }
    arity(e, args, 1)?;
    Ok(Rate::Geometric(rational(&args[0])?))
}

pub fn family(e: &Sexp) -> Result<Family> {
    let (head, args) = e.form()?;
    let f = match head {
        "constant" => {
            arity(e, args, 1)?;
            Family::Constant(charge(&args[0])?)
        }
        "perturbed" => {
            arity(e, args, 3)?;
            Family::Perturbed { base: charge(&args[0])?, direction: charge(&args[1])?, rate: rate(&args[2])? }
        }
        "scaled-prefix" => {
            arity(e, args, 3)?;
            Family::ScaledPrefix { support: set(&args[0])?, coef: element(&args[1])?, ratio: rational(&args[2])? }
        }
        "point-mass" => {
            arity(e, args, 1)?;
            Family::PointMass { coef: element(&args[0])? }
        }
        "switch" => {
            arity(e, args, 3)?;
            Family::switch(set(&args[0])?, family(&args[1])?, family(&args[2])?)
        }
        "sum" => {
            arity(e, args, 2)?;
            Family::Sum(Box::new(family(&args[0])?), Box::new(family(&args[1])?))
        }
        "scaled" => {
            arity(e, args, 2)?;
            Family::Scaled(Box::new(family(&args[0])?), rational(&args[1])?)
        }
        _ => return e.err(format!("unknown family `{head}`")),
    };
    located(e, f.validate())?;
    Ok(f)
}

pub fn disjoint(e: &Sexp) -> Result<DisjointFamily> {
    if let Sexp::Atom(a, _) = e {
        return if a == "singletons" { Ok(DisjointFamily::Singletons) } else { e.err(format!("unknown disjoint family `{a}`")) };
    }
    let (head, args) = e.form()?;
    match head {
        "blocks-of" => {
            arity(e, args, 1)?;
            Ok(DisjointFamily::Blocks(filter(&args[0])?))
        }
        "sets" => Ok(DisjointFamily::Explicit(args.iter().map(set).collect::<Result<_>>()?)),
        _ => e.err(format!("unknown disjoint family `{head}`")),
    }
}

fn name(e: &Sexp) -> Result<String> {
    match e {
        Sexp::Str(s, _) | Sexp::Atom(s, _) => Ok(s.clone()),
        _ => e.err("expected a name"),
    }
}

/// Reads `(scenario NAME (theorem ID) (filter F) (family FAM) ...)`.
///
/// Optional clauses: `nu`, `limit`, `(regulator NAME R)`, `bound`,
/// `disjoint`, `samples`, `ideal-samples`, `random-samples`, `depth`, `seed`.
pub fn scenario(e: &Sexp) -> Result<Scenario> {
    let (head, args) = e.form()?;
    if head != "scenario" || args.is_empty() {
        return e.err("expected (scenario NAME CLAUSE...)");
    }
    let title = name(&args[0])?;
    let mut theorem = None;
    let mut filt = None;
    let mut fam = None;
    let mut rest = vec![];
    for c in &args[1..] {
        let (key, xs) = c.form()?;
        match key {
            "theorem" => {
                arity(c, xs, 1)?;
                theorem = Some(located(&xs[0], xs[0].atom()?.parse::<TheoremId>())?);
            }
            "filter" => {
                arity(c, xs, 1)?;
                filt = Some(filter(&xs[0])?);
            }
            "family" => {
                arity(c, xs, 1)?;
                fam = Some(family(&xs[0])?);
            }
            _ => rest.push(c),
        }
    }
    let (Some(theorem), Some(filt), Some(fam)) = (theorem, filt, fam) else {
        return e.err("a scenario needs theorem, filter and family clauses");
    };
    let mut s = Scenario::new(title, theorem, filt, fam);
    for c in rest {
        let (key, xs) = c.form()?;
        let single = || arity(c, xs, 1);
        match key {
            "nu" => {
                single()?;
                s.nu = charge(&xs[0])?;
            }
            "limit" => {
                single()?;
                s.limit = charge(&xs[0])?;
            }
            "regulator" => {
                arity(c, xs, 2)?;
                let id = name(&xs[0])?;
                if s.regulators.insert(id.clone(), regulator(&xs[1])?).is_some() {
                    return c.err(format!("regulator `{id}` given twice"));
                }
            }
            "bound" => {
                single()?;
                s.bound = Some(element(&xs[0])?);
            }
            "disjoint" => {
                single()?;
                s.disjoint = disjoint(&xs[0])?;
            }
            "samples" => s.sample_sets = xs.iter().map(set).collect::<Result<_>>()?,
            "ideal-samples" => s.ideal_sample = xs.iter().map(set).collect::<Result<_>>()?,
            "random-samples" => {
                single()?;
                s.random_sets = uint(&xs[0])?;
            }
            "depth" => {
                single()?;
                s.depth = uint(&xs[0])?;
            }
            "seed" => {
                single()?;
                s.seed = uint(&xs[0])?;
            }
            _ => return c.err(format!("unknown clause `{key}`")),
        }
    }
    located(e, s.validate())?;
    Ok(s)
}

pub fn parse_scenario(src: &str) -> Result<Scenario> {
    scenario(&read_one(src)?)
}

/// Canonical text of a scenario; [`parse_scenario`] reads it back.
pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let quoted = s.name.replace('"', "'");
    let _ = writeln!(out, "(scenario \"{quoted}\"");
    let _ = writeln!(out, "  (theorem {})", s.theorem);
    let _ = writeln!(out, "  (filter {})", s.filter);
    let _ = writeln!(out, "  (family {})", s.family);
    let _ = writeln!(out, "  (nu {})", s.nu);
    let _ = writeln!(out, "  (limit {})", s.limit);
    for (k, r) in &s.regulators {
        let _ = writeln!(out, "  (regulator {k} {r})");
    }
    if let Some(u) = &s.bound {
        let _ = writeln!(out, "  (bound {u})");
    }
    let _ = writeln!(out, "  (disjoint {})", s.disjoint);
    let list = |xs: &[SetDescriptor]| xs.iter().map(|x| format!(" {x}")).collect::<String>();
    let _ = writeln!(out, "  (samples{})", list(&s.sample_sets));
    let _ = writeln!(out, "  (ideal-samples{})", list(&s.ideal_sample));
    let _ = writeln!(out, "  (random-samples {})", s.random_sets);
    let _ = writeln!(out, "  (depth {})", s.depth);
    let _ = write!(out, "  (seed {}))", s.seed);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests;
