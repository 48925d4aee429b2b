//! The standard translation into first-order logic over one binary relation `r` and unary
//! predicates `P_k`, where `k` is the atom rank (`p_i ↦ P_{2i}`, `c_i ↦ P_{2i+1}`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::semantics::{AtomValuation, Frame, KripkeModel};
use crate::syntax::{Atom, Formula};
use crate::weakmodel::{build_weak_model, WeakModelError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A name for an element of the domain.
    World(usize),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::World(w) => write!(f, "w{w}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FolFormula {
    Pred(u32, Term),
    Rel(Term, Term),
    Eq(Term, Term),
    Bot,
    Implies(Box<FolFormula>, Box<FolFormula>),
    Not(Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Forall(String, Box<FolFormula>),
    Exists(String, Box<FolFormula>),
}

impl FolFormula {
    pub fn implies(a: FolFormula, b: FolFormula) -> FolFormula {
        FolFormula::Implies(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: FolFormula) -> FolFormula {
        FolFormula::Not(Box::new(a))
    }

    pub fn and(a: FolFormula, b: FolFormula) -> FolFormula {
        FolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, body: FolFormula) -> FolFormula {
        FolFormula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: FolFormula) -> FolFormula {
        FolFormula::Exists(v.to_string(), Box::new(body))
    }

    pub fn rel(a: &str, b: &str) -> FolFormula {
        FolFormula::Rel(Term::var(a), Term::var(b))
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            FolFormula::Pred(_, t) => term(t, bound),
            FolFormula::Rel(a, b) | FolFormula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            FolFormula::Bot => {}
            FolFormula::Implies(a, b) | FolFormula::And(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FolFormula::Not(a) => a.collect_free(bound, out),
            FolFormula::Forall(v, a) | FolFormula::Exists(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }
}

impl fmt::Display for FolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FolFormula::Pred(i, t) => write!(f, "P{i}({t})"),
            FolFormula::Rel(a, b) => write!(f, "r({a}, {b})"),
            FolFormula::Eq(a, b) => write!(f, "{a} = {b}"),
            FolFormula::Bot => f.write_str("⊥"),
            FolFormula::Implies(a, b) => write!(f, "({a} → {b})"),
            FolFormula::Not(a) => write!(f, "¬{a}"),
            FolFormula::And(a, b) => write!(f, "({a} ∧ {b})"),
            FolFormula::Forall(v, a) => write!(f, "∀{v} {a}"),
            FolFormula::Exists(v, a) => write!(f, "∃{v} {a}"),
        }
    }
}

/// A first-order derivation as a bare line list. No checker is provided.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FolProof {
    pub lines: Vec<FolFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("L has no first-order frame condition")]
    NoCondition,
    #[error("variable {0} is unbound")]
    Unbound(String),
    #[error("predicate P{0} is not interpreted")]
    Uninterpreted(u32),
    #[error("world {0} is outside the domain")]
    NoSuchElement(usize),
    #[error("the premises entail the conclusion in {0}, so no countermodel exists")]
    Provable(String),
    #[error(transparent)]
    WeakModel(#[from] WeakModelError),
}

/// `A(ψ)`: the first-order condition on `r` matching axiom `ψ`.
pub fn frame_condition(axiom: SigmaAxiom) -> Result<FolFormula, FolError> {
    use FolFormula as F;
    let r = F::rel;
    let imp = F::implies;
    let and = F::and;
    Ok(match axiom {
        SigmaAxiom::T => F::forall("x", r("x", "x")),
        SigmaAxiom::B => F::forall("x", F::forall("y", imp(r("x", "y"), r("y", "x")))),
        SigmaAxiom::Four => F::forall(
            "x",
            F::forall("y", F::forall("z", imp(and(r("x", "y"), r("y", "z")), r("x", "z")))),
        ),
        SigmaAxiom::D => F::forall("x", F::exists("y", r("x", "y"))),
        SigmaAxiom::Five => F::forall(
            "x",
            F::forall("y", F::forall("z", imp(and(r("x", "y"), r("x", "z")), r("y", "z")))),
        ),
        SigmaAxiom::Dot2 => F::forall(
            "x",
            F::forall(
                "y",
                F::forall(
                    "z",
                    imp(
                        and(r("x", "y"), r("x", "z")),
                        F::exists("w", and(r("y", "w"), r("z", "w"))),
                    ),
                ),
            ),
        ),
        SigmaAxiom::L => return Err(FolError::NoCondition),
    })
}

/// `ST_x(φ)` for a variable named `x`.
pub fn standard_translation(f: &Formula, x: &str) -> FolFormula {
    st_at(f, &Term::var(x))
}

/// `ST_t(φ)` for any term; bound variables are `y0, y1, …` by box depth, or `z0, z1, …` when
/// the term is itself a variable starting with `y`.
pub fn st_at(f: &Formula, t: &Term) -> FolFormula {
    let prefix = match t {
        Term::Var(v) if v.starts_with('y') => "z",
        _ => "y",
    };
    st_rec(f, t, prefix, 0)
}

fn st_rec(f: &Formula, t: &Term, prefix: &str, depth: usize) -> FolFormula {
    match f {
        Formula::Atom(Atom::Bottom) => FolFormula::Bot,
        Formula::Atom(a) => FolFormula::Pred(a.rank().expect("proper atom"), t.clone()),
        Formula::Implies(a, b) => FolFormula::implies(st_rec(a, t, prefix, depth), st_rec(b, t, prefix, depth)),
        Formula::Box(a) => {
            let y = format!("{prefix}{depth}");
            let yt = Term::Var(y.clone());
            FolFormula::Forall(
                y,
                Box::new(FolFormula::implies(
                    FolFormula::Rel(t.clone(), yt.clone()),
                    st_rec(a, &yt, prefix, depth + 1),
                )),
            )
        }
    }
}

/// `∀x ST_x(φ)`.
pub fn universal_translation(f: &Formula) -> FolFormula {
    FolFormula::forall("x", standard_translation(f, "x"))
}

/// A finite structure with domain `0..size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolStructure {
    pub size: usize,
    pub preds: BTreeMap<u32, Vec<bool>>,
    pub rel: BTreeSet<(usize, usize)>,
}

/// Evaluates a sentence.
pub fn eval_fol(s: &FolStructure, sentence: &FolFormula) -> Result<bool, FolError> {
    eval_env(s, sentence, &mut HashMap::new())
}

fn eval_env(s: &FolStructure, f: &FolFormula, env: &mut HashMap<String, Vec<usize>>) -> Result<bool, FolError> {
    let value = |t: &Term, env: &HashMap<String, Vec<usize>>| -> Result<usize, FolError> {
        match t {
            Term::Var(v) => env
                .get(v)
                .and_then(|stack| stack.last().copied())
                .ok_or_else(|| FolError::Unbound(v.clone())),
            Term::World(w) if *w < s.size => Ok(*w),
            Term::World(w) => Err(FolError::NoSuchElement(*w)),
        }
    };
    match f {
        FolFormula::Pred(i, t) => {
            let table = s.preds.get(i).ok_or(FolError::Uninterpreted(*i))?;
            Ok(table[value(t, env)?])
        }
        FolFormula::Rel(a, b) => Ok(s.rel.contains(&(value(a, env)?, value(b, env)?))),
        FolFormula::Eq(a, b) => Ok(value(a, env)? == value(b, env)?),
        FolFormula::Bot => Ok(false),
        FolFormula::Implies(a, b) => Ok(!eval_env(s, a, env)? || eval_env(s, b, env)?),
        FolFormula::Not(a) => Ok(!eval_env(s, a, env)?),
        FolFormula::And(a, b) => Ok(eval_env(s, a, env)? && eval_env(s, b, env)?),
        FolFormula::Forall(v, body) | FolFormula::Exists(v, body) => {
            let universal = matches!(f, FolFormula::Forall(..));
            let mut result = universal;
            for e in 0..s.size {
                env.entry(v.clone()).or_default().push(e);
                let r = eval_env(s, body, env);
                env.get_mut(v).expect("pushed above").pop();
                if r? != universal {
                    result = !universal;
                    break;
                }
            }
            Ok(result)
        }
    }
}

/// `W⋆ = M`, `R⋆ = r`, and one predicate per valued atom.
pub fn kripke_to_fol(model: &KripkeModel) -> FolStructure {
    structure_of(&model.frame, &model.atom_val)
}

pub fn structure_of(frame: &Frame, val: &AtomValuation) -> FolStructure {
    let mut preds: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
    for (w, row) in val.iter().enumerate() {
        for (a, b) in row {
            if let Some(k) = a.rank() {
                preds.entry(k).or_insert_with(|| vec![false; frame.size()])[w] = *b;
            }
        }
    }
    FolStructure {
        size: frame.size(),
        preds,
        rel: frame.edges().into_iter().collect(),
    }
}

/// The Kripke model read back from a structure, valuing the given atoms.
pub fn fol_to_kripke(s: &FolStructure, atoms: &[Atom]) -> Result<KripkeModel, FolError> {
    let frame = Frame::new(s.size, s.rel.iter().copied()).map_err(|_| FolError::NoSuchElement(s.size))?;
    let mut val: AtomValuation = vec![BTreeMap::new(); s.size];
    for a in atoms {
        let k = a.rank().ok_or(FolError::Uninterpreted(u32::MAX))?;
        let table = s.preds.get(&k).ok_or(FolError::Uninterpreted(k))?;
        for (w, row) in val.iter_mut().enumerate() {
            row.insert(*a, table[w]);
        }
    }
    Ok(KripkeModel::for_formulas(&frame, &val, std::iter::empty()).expect("empty closure"))
}

/// Outcome of the countermodel check for `Γ0 ⊬ φ`.
#[derive(Clone, Debug)]
pub struct SrightfReport {
    pub structure: FolStructure,
    pub root: usize,
    /// `ST_root(θ)` for each `θ ∈ Γ0`, in order.
    pub premises: Vec<bool>,
    /// `A(ψ)` for each `ψ ∈ Σ`.
    pub conditions: Vec<(SigmaAxiom, bool)>,
    /// `¬∀x ST_x(φ)`.
    pub refutes: bool,
}

impl SrightfReport {
    pub fn passes(&self) -> bool {
        self.refutes && self.premises.iter().all(|b| *b) && self.conditions.iter().all(|(_, b)| *b)
    }
}

/// Builds the weak model of `⋀Γ0 ∧ ¬φ`, reads it as a first-order structure, and checks
/// the premises at its root, every frame condition of `Σ`, and the failure of `∀x ST_x(φ)`.
pub fn srightf_witness(gamma0: &[Formula], phi: &Formula, sigma: &SigmaSpec) -> Result<SrightfReport, FolError> {
    let target = Formula::and(Formula::conj(gamma0.iter().cloned()), Formula::not(phi.clone()));
    let model = match build_weak_model(&target, sigma) {
        Err(WeakModelError::Inconsistent { .. }) => return Err(FolError::Provable(sigma.to_string())),
        other => other?,
    };
    let structure = structure_of(&model.frame, &model.atom_val);
    let root = model.roots[0];
    let premises = gamma0
        .iter()
        .map(|theta| eval_fol(&structure, &st_at(theta, &Term::World(root))))
        .collect::<Result<_, _>>()?;
    let conditions = sigma
        .axioms
        .iter()
        .map(|&a| Ok((a, eval_fol(&structure, &frame_condition(a)?)?)))
        .collect::<Result<_, FolError>>()?;
    let refutes = !eval_fol(&structure, &universal_translation(phi))?;
    Ok(SrightfReport {
        structure,
        root,
        premises,
        conditions,
        refutes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{eval, has_property};
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn conditions() {
        assert_eq!(frame_condition(SigmaAxiom::T).unwrap().to_string(), "∀x r(x, x)");
        assert_eq!(
            frame_condition(SigmaAxiom::Five).unwrap().to_string(),
            "∀x ∀y ∀z ((r(x, y) ∧ r(x, z)) → r(y, z))"
        );
        assert_eq!(frame_condition(SigmaAxiom::L), Err(FolError::NoCondition));
        for a in SigmaAxiom::ALL.into_iter().filter(|a| *a != SigmaAxiom::L) {
            assert!(frame_condition(a).unwrap().is_sentence());
        }
    }

    #[test]
    fn translations() {
        assert_eq!(standard_translation(&p("p1"), "x"), FolFormula::Pred(2, Term::var("x")));
        assert_eq!(standard_translation(&p("bot"), "x"), FolFormula::Bot);
        assert_eq!(standard_translation(&p("[]p0"), "x").to_string(), "∀y0 (r(x, y0) → P0(y0))");
        assert_eq!(standard_translation(&p("[]p0"), "y0").to_string(), "∀z0 (r(y0, z0) → P0(z0))");
        let f = p("[](p0 -> []c0)");
        assert_eq!(standard_translation(&f, "x"), standard_translation(&f, "x"));
        assert!(universal_translation(&f).is_sentence());
    }

    #[test]
    fn evaluation() {
        let loop1 = FolStructure { size: 1, preds: BTreeMap::new(), rel: [(0, 0)].into_iter().collect() };
        assert_eq!(eval_fol(&loop1, &frame_condition(SigmaAxiom::T).unwrap()), Ok(true));
        let line = FolStructure { size: 2, preds: BTreeMap::new(), rel: [(0, 1)].into_iter().collect() };
        assert_eq!(eval_fol(&line, &frame_condition(SigmaAxiom::D).unwrap()), Ok(false));
        assert_eq!(
            eval_fol(&line, &FolFormula::Pred(0, Term::World(0))),
            Err(FolError::Uninterpreted(0))
        );
        assert_eq!(eval_fol(&line, &FolFormula::rel("x", "x")), Err(FolError::Unbound("x".into())));
        assert_eq!(
            eval_fol(&line, &FolFormula::forall("x", FolFormula::Eq(Term::var("x"), Term::var("x")))),
            Ok(true)
        );
    }

    #[test]
    fn round_trip_on_two_worlds() {
        let frame = Frame::new(2, [(0, 1)]).unwrap();
        let val: AtomValuation = vec![
            [(Atom::Var(0), false)].into_iter().collect(),
            [(Atom::Var(0), true)].into_iter().collect(),
        ];
        let m = KripkeModel::for_formulas(&frame, &val, [&p("<>p0")]).unwrap();
        let s = kripke_to_fol(&m);
        assert_eq!(eval_fol(&s, &st_at(&p("<>p0"), &Term::World(0))), Ok(true));
        let back = fol_to_kripke(&s, &[Atom::Var(0)]).unwrap();
        assert_eq!(back.frame, frame);
        assert_eq!(back.atom_val, val);
        let back = back.with_formula(&p("<>p0")).unwrap();
        assert_eq!(eval(&back, 0, &p("<>p0")), Ok(true));
    }

    #[test]
    fn conditions_match_frame_properties() {
        for n in 1..=3usize {
            for code in 0u64..(1 << (n * n)) {
                let masks: Vec<u64> = (0..n).map(|u| (code >> (u * n)) & ((1 << n) - 1)).collect();
                let frame = Frame::from_masks(&masks);
                let s = structure_of(&frame, &vec![BTreeMap::new(); n]);
                for a in SigmaAxiom::ALL.into_iter().filter(|a| *a != SigmaAxiom::L) {
                    assert_eq!(eval_fol(&s, &frame_condition(a).unwrap()), Ok(has_property(&frame, a)));
                }
            }
        }
    }

    #[test]
    fn srightf_examples() {
        let report = srightf_witness(&[p("p0")], &p("[]p0"), &SigmaSpec::k()).unwrap();
        assert!(report.passes());
        let t = SigmaSpec::parse_list("T").unwrap();
        assert!(matches!(srightf_witness(&[], &p("[]p0 -> p0"), &t), Err(FolError::Provable(_))));
        let d = SigmaSpec::parse_list("D").unwrap();
        assert!(matches!(srightf_witness(&[p("[]p0")], &p("<>p0"), &d), Err(FolError::Provable(_))));
        let report = srightf_witness(&[p("[]p0")], &p("<>p0"), &SigmaSpec::k()).unwrap();
        assert!(report.passes());
        assert!(matches!(
            srightf_witness(&[], &p("[]p0 -> [][]p0"), &SigmaSpec::k()),
            Err(FolError::WeakModel(_))
        ));
    }
}
