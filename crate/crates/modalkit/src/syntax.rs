//! Modal formulas over the core connectives `⊥`, `→`, `□`.
//!
//! Every other connective is an abbreviation that expands into the core:
//! `¬φ = φ→⊥`, `⊤ = ¬⊥`, `φ∧ψ = ¬(φ→¬ψ)`, `φ∨ψ = ¬φ→ψ`, `◇φ = ¬□¬φ`,
//! `φ↔ψ = (φ→ψ)∧(ψ→φ)`. Structural equality on [`Formula`] is therefore
//! syntactic identity of core trees.
//!
//! # Concrete syntax
//!
//! ```text
//! formula  := impl
//! impl     := disj ["->" impl]
//! disj     := conj {"|" conj}
//! conj     := neg {"&" neg}
//! neg      := {"!" | "[]" | "<>"} atomexpr
//! atomexpr := "bot" | "p" digits | "c" digits | "(" formula ")"
//! ```
//!
//! # Rendering rule
//!
//! [`render`] tries the sugar patterns in this fixed order and falls back to
//! `a -> b`:
//!
//! 1. `(a→(b→⊥))→⊥` prints as `a & b`
//! 2. `(□(a→⊥))→⊥` prints as `<>a`
//! 3. `a→⊥` prints as `!a` (so `⊤` prints as `!bot`)
//! 4. `(a→⊥)→b` prints as `a | b`

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An atomic formula: a propositional variable, a propositional constant, or `⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Var(u32),
    Const(u32),
    Bottom,
}

impl Atom {
    /// Position in the atom enumeration: `p_i ↦ 2i`, `c_i ↦ 2i+1`; `⊥` has no rank.
    pub fn rank(self) -> Option<u32> {
        match self {
            Atom::Var(i) => Some(2 * i),
            Atom::Const(i) => Some(2 * i + 1),
            Atom::Bottom => None,
        }
    }

    /// Inverse of [`Atom::rank`].
    pub fn from_rank(k: u32) -> Atom {
        if k.is_multiple_of(2) {
            Atom::Var(k / 2)
        } else {
            Atom::Const(k / 2)
        }
    }

    pub fn name(self) -> String {
        match self {
            Atom::Var(i) => format!("p{i}"),
            Atom::Const(i) => format!("c{i}"),
            Atom::Bottom => "bot".to_string(),
        }
    }

    /// Parses `p3`, `c0` or `bot`.
    pub fn from_name(s: &str) -> Option<Atom> {
        if s == "bot" {
            return Some(Atom::Bottom);
        }
        let index = |digits: &str| -> Option<u32> {
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.parse().ok()
        };
        if let Some(d) = s.strip_prefix('p') {
            index(d).map(Atom::Var)
        } else if let Some(d) = s.strip_prefix('c') {
            index(d).map(Atom::Const)
        } else {
            None
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A modal formula in core form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Implies(Arc<Formula>, Arc<Formula>),
    Box(Arc<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn var(i: u32) -> Formula {
        Formula::Atom(Atom::Var(i))
    }

    pub fn constant(i: u32) -> Formula {
        Formula::Atom(Atom::Const(i))
    }

    pub fn bot() -> Formula {
        Formula::Atom(Atom::Bottom)
    }

    pub fn top() -> Formula {
        Formula::not(Formula::bot())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Arc::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, Formula::bot())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    pub fn diamond(a: Formula) -> Formula {
        Formula::not(Formula::boxed(Formula::not(a)))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// Left fold of `∧`; the empty conjunction is `⊤`.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::top(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left fold of `∨`; the empty disjunction is `⊥`.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::bot(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Formula::Atom(Atom::Bottom))
    }

    /// `Some(a)` when the formula is `a→⊥`.
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if b.is_bot() => Some(a),
            _ => None,
        }
    }

    /// `Some((a, b))` when the formula is the expansion of `a∧b`.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        let inner = self.as_negation()?;
        match inner {
            Formula::Implies(a, nb) => nb.as_negation().map(|b| (&**a, b)),
            _ => None,
        }
    }

    /// `Some(a)` when the formula is the expansion of `◇a`.
    pub fn as_diamond(&self) -> Option<&Formula> {
        match self.as_negation()? {
            Formula::Box(inner) => inner.as_negation(),
            _ => None,
        }
    }

    /// `Some((a, b))` when the formula is the expansion of `a∨b`.
    pub fn as_or(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Implies(na, b) => na.as_negation().map(|a| (a, &**b)),
            _ => None,
        }
    }

    /// Number of nodes in the core tree.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Implies(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Box(a) => 1 + a.node_count(),
        }
    }

    /// Atoms occurring in the formula, `⊥` included when present.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(*a);
            }
            Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Box(a) => a.collect_atoms(out),
        }
    }

    /// Atoms other than `⊥`, i.e. the ones a valuation must assign.
    pub fn proper_atoms(&self) -> Vec<Atom> {
        self.atoms()
            .into_iter()
            .filter(|a| *a != Atom::Bottom)
            .collect()
    }

    /// Indices of the propositional variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<u32> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Var(i) => Some(i),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", render(self))
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown token at position {pos}: {found:?}")]
    UnknownToken { pos: usize, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Bot,
    Var(u32),
    Const(u32),
    LParen,
    RParen,
    Arrow,
    Bar,
    Amp,
    Bang,
    BoxOp,
    DiaOp,
    End,
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Bot => "'bot'",
        Tok::Var(_) => "variable",
        Tok::Const(_) => "constant",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
        Tok::Arrow => "'->'",
        Tok::Bar => "'|'",
        Tok::Amp => "'&'",
        Tok::Bang => "'!'",
        Tok::BoxOp => "'[]'",
        Tok::DiaOp => "'<>'",
        Tok::End => "end of input",
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &str| text[i..].starts_with(s);
        let tok = if two("->") {
            i += 2;
            Tok::Arrow
        } else if two("[]") {
            i += 2;
            Tok::BoxOp
        } else if two("<>") {
            i += 2;
            Tok::DiaOp
        } else if two("bot") {
            i += 3;
            Tok::Bot
        } else {
            match c {
                b'(' => {
                    i += 1;
                    Tok::LParen
                }
                b')' => {
                    i += 1;
                    Tok::RParen
                }
                b'|' => {
                    i += 1;
                    Tok::Bar
                }
                b'&' => {
                    i += 1;
                    Tok::Amp
                }
                b'!' => {
                    i += 1;
                    Tok::Bang
                }
                b'p' | b'c' => {
                    i += 1;
                    let ds = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if ds == i {
                        return Err(ParseError::Syntax {
                            pos: ds,
                            msg: "expected digits after atom letter".into(),
                        });
                    }
                    let idx: u32 = text[ds..i].parse().map_err(|_| ParseError::Syntax {
                        pos: ds,
                        msg: "atom index out of range".into(),
                    })?;
                    if c == b'p' {
                        Tok::Var(idx)
                    } else {
                        Tok::Const(idx)
                    }
                }
                _ => {
                    let end = text[i..]
                        .char_indices()
                        .nth(1)
                        .map(|(k, _)| i + k)
                        .unwrap_or(text.len());
                    return Err(ParseError::UnknownToken {
                        pos: start,
                        found: text[start..end].to_string(),
                    });
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.negation()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.negation()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn negation(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.negation()?))
            }
            Tok::BoxOp => {
                self.bump();
                Ok(Formula::boxed(self.negation()?))
            }
            Tok::DiaOp => {
                self.bump();
                Ok(Formula::diamond(self.negation()?))
            }
            _ => self.atomic(),
        }
    }

    fn atomic(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bot => {
                self.bump();
                Ok(Formula::bot())
            }
            Tok::Var(i) => {
                self.bump();
                Ok(Formula::var(i))
            }
            Tok::Const(i) => {
                self.bump();
                Ok(Formula::constant(i))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return self.error("')'");
                }
                self.bump();
                Ok(inner)
            }
            _ => self.error("a formula"),
        }
    }
}

/// Parses ASCII concrete syntax into a core formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return p.error("end of input");
    }
    Ok(f)
}

const PREC_IMPL: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

/// Deterministic, re-parseable rendering (see the module docs for the sugar rule).
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    render_into(f, PREC_IMPL, &mut out);
    out
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) | Formula::Box(_) => PREC_UNARY,
        Formula::Implies(_, _) => {
            if f.as_and().is_some() {
                PREC_AND
            } else if f.as_diamond().is_some() || f.as_negation().is_some() {
                PREC_UNARY
            } else if f.as_or().is_some() {
                PREC_OR
            } else {
                PREC_IMPL
            }
        }
    }
}

fn render_into(f: &Formula, min: u8, out: &mut String) {
    let prec = precedence(f);
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom(a) => out.push_str(&a.name()),
        Formula::Box(a) => {
            out.push_str("[]");
            render_into(a, PREC_UNARY, out);
        }
        Formula::Implies(a, b) => {
            if let Some((x, y)) = f.as_and() {
                render_into(x, PREC_AND, out);
                out.push_str(" & ");
                render_into(y, PREC_UNARY, out);
            } else if let Some(x) = f.as_diamond() {
                out.push_str("<>");
                render_into(x, PREC_UNARY, out);
            } else if let Some(x) = f.as_negation() {
                out.push('!');
                render_into(x, PREC_UNARY, out);
            } else if let Some((x, y)) = f.as_or() {
                render_into(x, PREC_OR, out);
                out.push_str(" | ");
                render_into(y, PREC_AND, out);
            } else {
                render_into(a, PREC_OR, out);
                out.push_str(" -> ");
                render_into(b, PREC_IMPL, out);
            }
        }
    }
    if paren {
        out.push(')');
    }
}

/// A uniform substitution: a finite map from variable indices to formulas.
///
/// Serialized as an object keyed by variable name, e.g. `{"p0": "[]p1"}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    pub map: BTreeMap<u32, Formula>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn with(mut self, var: u32, f: Formula) -> Substitution {
        self.map.insert(var, f);
        self
    }

    pub fn get(&self, var: u32) -> Option<&Formula> {
        self.map.get(&var)
    }

    pub fn domain(&self) -> BTreeSet<u32> {
        self.map.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl Serialize for Substitution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let named: BTreeMap<String, &Formula> = self.map.iter().map(|(v, f)| (format!("p{v}"), f)).collect();
        named.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Substitution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Substitution, D::Error> {
        let named = BTreeMap::<String, Formula>::deserialize(d)?;
        named
            .into_iter()
            .map(|(name, f)| match Atom::from_name(&name) {
                Some(Atom::Var(i)) => Ok((i, f)),
                _ => Err(serde::de::Error::custom(format!("{name:?} is not a variable"))),
            })
            .collect()
    }
}

impl FromIterator<(u32, Formula)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (u32, Formula)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Simultaneous substitution; constants, `⊥` and variables outside the domain stay fixed.
pub fn substitute(sigma: &Substitution, f: &Formula) -> Formula {
    match f {
        Formula::Atom(Atom::Var(i)) => sigma.get(*i).cloned().unwrap_or_else(|| f.clone()),
        Formula::Atom(_) => f.clone(),
        Formula::Implies(a, b) => Formula::implies(substitute(sigma, a), substitute(sigma, b)),
        Formula::Box(a) => Formula::boxed(substitute(sigma, a)),
    }
}

/// Finds `σ` with `substitute(σ, pattern) == target`, binding exactly the variables of `pattern`.
pub fn match_substitution(pattern: &Formula, target: &Formula) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, target, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

fn match_into(pattern: &Formula, target: &Formula, sigma: &mut Substitution) -> bool {
    match (pattern, target) {
        (Formula::Atom(Atom::Var(i)), _) => match sigma.map.get(i) {
            Some(bound) => bound == target,
            None => {
                sigma.map.insert(*i, target.clone());
                true
            }
        },
        (Formula::Atom(a), Formula::Atom(b)) => a == b,
        (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => {
            match_into(a1, a2, sigma) && match_into(b1, b2, sigma)
        }
        (Formula::Box(a1), Formula::Box(a2)) => match_into(a1, a2, sigma),
        _ => false,
    }
}

/// Modal nesting depth.
pub fn height(f: &Formula) -> u32 {
    match f {
        Formula::Atom(_) => 0,
        Formula::Implies(a, b) => height(a).max(height(b)),
        Formula::Box(a) => 1 + height(a),
    }
}

/// Maximum atom rank; `ord(⊥) = 0`.
pub fn order(f: &Formula) -> u32 {
    match f {
        Formula::Atom(a) => a.rank().unwrap_or(0),
        Formula::Implies(a, b) => order(a).max(order(b)),
        Formula::Box(a) => order(a),
    }
}

/// All subtrees of the core form, the formula itself included.
pub fn sub_formulas(f: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    collect_subs(f, &mut out);
    out
}

fn collect_subs(f: &Formula, out: &mut BTreeSet<Formula>) {
    if !out.insert(f.clone()) {
        return;
    }
    match f {
        Formula::Atom(_) => {}
        Formula::Implies(a, b) => {
            collect_subs(a, out);
            collect_subs(b, out);
        }
        Formula::Box(a) => collect_subs(a, out),
    }
}

/// Subformulas ordered so that every formula comes after its proper subformulas.
pub fn sub_formulas_bottom_up(f: &Formula) -> Vec<Formula> {
    let mut subs: Vec<Formula> = sub_formulas(f).into_iter().collect();
    subs.sort_by(|a, b| a.node_count().cmp(&b.node_count()).then_with(|| a.cmp(b)));
    subs
}

/// Membership in `L_{h,n}`.
pub fn in_language(f: &Formula, h: u32, n: u32) -> bool {
    height(f) <= h && order(f) <= n
}

/// Draws a random core formula of at most `max_height` boxes deep whose atoms have rank at most
/// `max_order`. `size` bounds the number of connectives along any branch.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, max_height: u32, max_order: u32, size: u32) -> Formula {
    if size == 0 || rng.gen_ratio(1, 4) {
        return random_atom(rng, max_order);
    }
    let roll = rng.gen_range(0..10);
    if max_height > 0 && roll < 3 {
        Formula::boxed(random_formula(rng, max_height - 1, max_order, size - 1))
    } else if roll < 5 {
        Formula::not(random_formula(rng, max_height, max_order, size - 1))
    } else {
        Formula::implies(
            random_formula(rng, max_height, max_order, size - 1),
            random_formula(rng, max_height, max_order, size - 1),
        )
    }
}

fn random_atom<R: Rng + ?Sized>(rng: &mut R, max_order: u32) -> Formula {
    if rng.gen_ratio(1, 6) {
        Formula::bot()
    } else {
        Formula::atom(Atom::from_rank(rng.gen_range(0..=max_order)))
    }
}

/// Every core formula with at most `max_nodes` nodes, built from `atoms`, whose height is at
/// most `max_height`. Output is sorted by node count and then by the derived order.
pub fn enumerate_formulas(atoms: &[Atom], max_height: u32, max_nodes: usize) -> Vec<Formula> {
    // by_size[s][h] holds formulas with exactly s nodes and height exactly h
    let hmax = max_height as usize;
    let mut by_size: Vec<Vec<Vec<Formula>>> = vec![vec![Vec::new(); hmax + 1]; max_nodes + 1];
    if max_nodes >= 1 {
        by_size[1][0] = atoms.iter().map(|a| Formula::atom(*a)).collect();
    }
    for s in 2..=max_nodes {
        let mut layer: Vec<Vec<Formula>> = vec![Vec::new(); hmax + 1];
        for h in 0..hmax {
            for inner in &by_size[s - 1][h] {
                layer[h + 1].push(Formula::boxed(inner.clone()));
            }
        }
        for ls in 1..s - 1 {
            let rs = s - 1 - ls;
            for lh in 0..=hmax {
                for rh in 0..=hmax {
                    for l in &by_size[ls][lh] {
                        for r in &by_size[rs][rh] {
                            layer[lh.max(rh)].push(Formula::implies(l.clone(), r.clone()));
                        }
                    }
                }
            }
        }
        by_size[s] = layer;
    }
    let mut out = Vec::new();
    for layer in by_size {
        let mut flat: Vec<Formula> = layer.into_iter().flatten().collect();
        flat.sort();
        out.extend(flat);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn parses_k_axiom() {
        let k = p("[](p0 -> p1) -> ([]p0 -> []p1)");
        let expected = Formula::implies(
            Formula::boxed(Formula::implies(Formula::var(0), Formula::var(1))),
            Formula::implies(Formula::boxed(Formula::var(0)), Formula::boxed(Formula::var(1))),
        );
        assert_eq!(k, expected);
    }

    #[test]
    fn parses_literals_and_sugar() {
        assert_eq!(p("bot"), Formula::bot());
        assert_eq!(p("<>p0"), Formula::not(Formula::boxed(Formula::not(Formula::var(0)))));
        assert_eq!(p("p0 & c1"), Formula::and(Formula::var(0), Formula::constant(1)));
        assert_eq!(p("p0 | p1 | p2"), Formula::or(Formula::or(Formula::var(0), Formula::var(1)), Formula::var(2)));
        assert_eq!(p("p0 -> p1 -> p2"), Formula::implies(Formula::var(0), Formula::implies(Formula::var(1), Formula::var(2))));
    }

    #[test]
    fn precedence_binds_unary_tightest() {
        assert_eq!(p("!p0 & p1"), Formula::and(Formula::not(Formula::var(0)), Formula::var(1)));
        assert_eq!(p("p0 & p1 | p2"), Formula::or(Formula::and(Formula::var(0), Formula::var(1)), Formula::var(2)));
        assert_eq!(p("[]p0 -> p0"), Formula::implies(Formula::boxed(Formula::var(0)), Formula::var(0)));
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse("p0 -> "),
            Err(ParseError::Syntax { pos: 6, msg: "expected a formula, found end of input".into() })
        );
        assert!(matches!(parse("p0 ? p1"), Err(ParseError::UnknownToken { pos: 3, .. })));
        assert!(matches!(parse("(p0"), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("p"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("p0 p1"), Err(ParseError::Syntax { pos: 3, .. })));
    }

    #[test]
    fn renders_with_sugar() {
        assert_eq!(render(&Formula::boxed(Formula::var(0))), "[]p0");
        assert_eq!(render(&Formula::implies(Formula::bot(), Formula::bot())), "!bot");
        assert_eq!(render(&p("<>p0")), "<>p0");
        assert_eq!(render(&p("p0 & !c0")), "p0 & !c0");
        assert_eq!(render(&p("(p0 -> p1) -> p2")), "(p0 -> p1) -> p2");
        assert_eq!(render(&p("p0 | p1 & p2")), "p0 | p1 & p2");
        assert_eq!(render(&p("[](p0 -> p1) -> []p0 -> []p1")), "[](p0 -> p1) -> []p0 -> []p1");
    }

    #[test]
    fn substitution_clauses() {
        let sigma = Substitution::new().with(0, p("[]p1"));
        assert_eq!(substitute(&sigma, &p("[]p0 -> c0")), p("[][]p1 -> c0"));
        assert_eq!(substitute(&Substitution::new(), &p("[]p0 -> c0")), p("[]p0 -> c0"));
        let taut = Substitution::new().with(0, p("p1 -> p1"));
        assert_eq!(substitute(&taut, &p("c0")), p("c0"));
        assert_eq!(substitute(&taut, &Formula::bot()), Formula::bot());
    }

    #[test]
    fn matching() {
        let s = match_substitution(&p("[]p0 -> p0"), &p("[](p1 -> p1) -> (p1 -> p1)")).unwrap();
        assert_eq!(s, Substitution::new().with(0, p("p1 -> p1")));
        assert_eq!(match_substitution(&p("p0 -> p0"), &p("p0 -> p1")), None);
        assert_eq!(match_substitution(&p("c0"), &p("p0")), None);
        assert!(match_substitution(&p("c0 -> p0"), &p("c0 -> []p3")).is_some());
    }

    #[test]
    fn metrics() {
        assert_eq!(height(&p("p0")), 0);
        assert_eq!(height(&p("[]p0")), 1);
        assert_eq!(height(&p("[](p0 -> []p1)")), 2);
        assert_eq!(order(&p("p0")), 0);
        assert_eq!(order(&p("c0")), 1);
        assert_eq!(order(&p("[]p1 -> p0")), 2);
        assert_eq!(order(&Formula::bot()), 0);
        assert!(in_language(&p("[]p0"), 1, 0));
        assert!(!in_language(&p("[]p0"), 0, 0));
        assert!(!in_language(&p("p1"), 2, 0));
    }

    #[test]
    fn subformulas() {
        let s: Vec<Formula> = sub_formulas(&p("[]p0")).into_iter().collect();
        assert_eq!(s.len(), 2);
        assert!(s.contains(&p("[]p0")) && s.contains(&p("p0")));
        let n = sub_formulas(&p("p0 -> bot"));
        assert_eq!(n.len(), 3);
        assert!(n.contains(&Formula::bot()));
        assert_eq!(sub_formulas(&p("[](p0 -> p1) -> ([]p0 -> []p1)")).len(), 8);
    }

    #[test]
    fn atom_enumeration_is_a_bijection() {
        for k in 0..200 {
            assert_eq!(Atom::from_rank(k).rank(), Some(k));
        }
        assert_eq!(Atom::from_rank(1), Atom::Const(0));
        assert_eq!(Atom::Bottom.rank(), None);
    }

    #[test]
    fn enumeration_counts() {
        let atoms = [Atom::Var(0), Atom::Const(0), Atom::Bottom];
        let fs = enumerate_formulas(&atoms, 0, 5);
        assert_eq!(fs.len(), 3 + 9 + 54);
        let boxed = enumerate_formulas(&[Atom::Var(0)], 1, 3);
        assert!(boxed.contains(&p("[]p0")));
        assert!(!boxed.contains(&p("[][]p0")));
        assert!(boxed.iter().all(|f| height(f) <= 1));
    }

    #[test]
    fn corpus_round_trip() {
        let atoms = [Atom::Var(0), Atom::Const(0), Atom::Bottom];
        for f in enumerate_formulas(&atoms, 2, 7) {
            assert_eq!(parse(&render(&f)).unwrap(), f, "{}", render(&f));
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            (0u32..3).prop_map(Formula::var),
            (0u32..2).prop_map(Formula::constant),
            Just(Formula::bot()),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                inner.clone().prop_map(Formula::boxed),
                inner.clone().prop_map(Formula::diamond),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
            ]
        })
    }

    fn arb_atomic_sub() -> impl Strategy<Value = Substitution> {
        proptest::collection::btree_map(0u32..3, (0u32..4).prop_map(Formula::var), 0..3)
            .prop_map(|map| Substitution { map })
    }

    fn arb_sub() -> impl Strategy<Value = Substitution> {
        proptest::collection::btree_map(0u32..3, arb_formula(), 0..3).prop_map(|map| Substitution { map })
    }

    proptest! {
        #[test]
        fn parse_render_identity(f in arb_formula()) {
            prop_assert_eq!(parse(&render(&f)).unwrap(), f);
        }

        #[test]
        fn substitution_never_lowers_height(f in arb_formula(), s in arb_sub()) {
            prop_assert!(height(&substitute(&s, &f)) >= height(&f));
        }

        #[test]
        fn atomic_substitution_keeps_height(f in arb_formula(), s in arb_atomic_sub()) {
            prop_assert_eq!(height(&substitute(&s, &f)), height(&f));
        }

        #[test]
        fn subformula_count_bounded_by_nodes(f in arb_formula()) {
            prop_assert!(sub_formulas(&f).len() <= f.node_count());
        }

        #[test]
        fn matching_recovers_substitution(f in arb_formula(), s in arb_sub()) {
            let target = substitute(&s, &f);
            let found = match_substitution(&f, &target).expect("instance must match");
            prop_assert_eq!(substitute(&found, &f), target);
            for v in f.vars() {
                let expected = s.get(v).cloned().unwrap_or_else(|| Formula::var(v));
                prop_assert_eq!(found.get(v), Some(&expected));
            }
        }
    }
}
