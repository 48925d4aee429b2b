//! Finite Kripke frames and models.
//!
//! Worlds are always the integers `0..n`. A [`KripkeModel`] carries a table of truth values for
//! every formula of a subformula-closed closure, computed bottom-up by the three clauses
//! `V(w,⊥)=0`, `V(w,φ→ψ)=1−V(w,φ)(1−V(w,ψ))` and `V(w,□φ)=1 ⟺ ∀v(wRv→V(v,φ)=1)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{enumerate_frames, OracleConfig};
use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::syntax::{sub_formulas, sub_formulas_bottom_up, Atom, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("a frame needs at least one world")]
    NoWorlds,
    #[error("edge ({0}, {1}) mentions a world outside the frame")]
    EdgeOutOfRange(usize, usize),
    #[error("valuation covers {found} worlds but the frame has {expected}")]
    ValuationSize { expected: usize, found: usize },
    #[error("closure is not closed under subformulas: {0} is missing")]
    NotSubformulaClosed(String),
    #[error("atom {atom} has no value at world {world}")]
    MissingAtom { world: usize, atom: String },
    #[error("formula {0} is outside the model's closure")]
    OutsideClosure(String),
    #[error("world {0} is not in the model")]
    NoSuchWorld(usize),
    #[error("model text: {0}")]
    Format(String),
}

/// A finite frame over worlds `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    succ: Vec<Vec<usize>>,
}

impl Frame {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(size: usize, edges: I) -> Result<Frame, SemanticsError> {
        if size == 0 {
            return Err(SemanticsError::NoWorlds);
        }
        let mut succ = vec![BTreeSet::new(); size];
        for (u, v) in edges {
            if u >= size || v >= size {
                return Err(SemanticsError::EdgeOutOfRange(u, v));
            }
            succ[u].insert(v);
        }
        Ok(Frame {
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Builds a frame from successor bitmasks, bit `v` of `masks[u]` meaning `uRv`.
    pub fn from_masks(masks: &[u64]) -> Frame {
        assert!(!masks.is_empty() && masks.len() <= 64);
        let succ = masks
            .iter()
            .map(|m| (0..masks.len()).filter(|v| m & (1u64 << v) != 0).collect())
            .collect();
        Frame { succ }
    }

    pub fn size(&self) -> usize {
        self.succ.len()
    }

    pub fn worlds(&self) -> std::ops::Range<usize> {
        0..self.succ.len()
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.worlds()
            .flat_map(|u| self.succ[u].iter().map(move |&v| (u, v)))
            .collect()
    }

    /// Successor bitmasks; only available for frames of at most 64 worlds.
    pub fn masks(&self) -> Option<Vec<u64>> {
        if self.size() > 64 {
            return None;
        }
        Some(
            self.succ
                .iter()
                .map(|s| s.iter().fold(0u64, |m, &v| m | (1u64 << v)))
                .collect(),
        )
    }
}

pub fn reflexive(f: &Frame) -> bool {
    f.worlds().all(|w| f.has_edge(w, w))
}

pub fn irreflexive(f: &Frame) -> bool {
    f.worlds().all(|w| !f.has_edge(w, w))
}

pub fn symmetric(f: &Frame) -> bool {
    f.edges().into_iter().all(|(u, v)| f.has_edge(v, u))
}

pub fn transitive(f: &Frame) -> bool {
    f.worlds().all(|w| {
        f.successors(w)
            .iter()
            .all(|&u| f.successors(u).iter().all(|&v| f.has_edge(w, v)))
    })
}

pub fn euclidean(f: &Frame) -> bool {
    f.worlds().all(|w| {
        let s = f.successors(w);
        s.iter().all(|&u| s.iter().all(|&v| f.has_edge(u, v)))
    })
}

pub fn serial(f: &Frame) -> bool {
    f.worlds().all(|w| !f.successors(w).is_empty())
}

pub fn directed(f: &Frame) -> bool {
    f.worlds().all(|w| {
        let s = f.successors(w);
        s.iter().all(|&u| {
            s.iter()
                .all(|&v| f.successors(u).iter().any(|&x| f.has_edge(v, x)))
        })
    })
}

/// No cycle, self-loops included.
pub fn acyclic(f: &Frame) -> bool {
    // Kahn's algorithm: every world gets removed iff there is no cycle
    let mut indegree = vec![0usize; f.size()];
    for (_, v) in f.edges() {
        indegree[v] += 1;
    }
    let mut ready: Vec<usize> = f.worlds().filter(|&w| indegree[w] == 0).collect();
    let mut removed = 0;
    while let Some(w) = ready.pop() {
        removed += 1;
        for &v in f.successors(w) {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.push(v);
            }
        }
    }
    removed == f.size()
}

/// Conversely well-founded on a finite frame: transitive with no reachable cycle.
pub fn cwf(f: &Frame) -> bool {
    transitive(f) && acyclic(f)
}

pub fn has_property(f: &Frame, axiom: SigmaAxiom) -> bool {
    match axiom {
        SigmaAxiom::T => reflexive(f),
        SigmaAxiom::B => symmetric(f),
        SigmaAxiom::Four => transitive(f),
        SigmaAxiom::Five => euclidean(f),
        SigmaAxiom::D => serial(f),
        SigmaAxiom::Dot2 => directed(f),
        SigmaAxiom::L => cwf(f),
    }
}

/// The conjunction over `Σ` of the matching frame properties.
pub fn check_appropriate(f: &Frame, sigma: &SigmaSpec) -> bool {
    sigma.axioms.iter().all(|&a| has_property(f, a))
}

/// Truth values of atoms, one map per world.
pub type AtomValuation = Vec<BTreeMap<Atom, bool>>;

/// Independent recursive evaluator; atoms absent from the valuation read as false.
pub fn holds(frame: &Frame, val: &AtomValuation, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Atom(Atom::Bottom) => false,
        Formula::Atom(a) => val.get(w).and_then(|m| m.get(a)).copied().unwrap_or(false),
        Formula::Implies(a, b) => !holds(frame, val, w, a) || holds(frame, val, w, b),
        Formula::Box(a) => frame.successors(w).iter().all(|&v| holds(frame, val, v, a)),
    }
}

/// A frame, an atom valuation and the truth table of a subformula-closed closure.
#[derive(Clone, Debug)]
pub struct KripkeModel {
    pub frame: Frame,
    pub atom_val: AtomValuation,
    closure: BTreeSet<Formula>,
    table: HashMap<Formula, Vec<bool>>,
}

/// Computes the truth table of `closure` bottom-up.
pub fn extend_valuation(
    frame: &Frame,
    atom_val: &AtomValuation,
    closure: &BTreeSet<Formula>,
) -> Result<KripkeModel, SemanticsError> {
    if atom_val.len() != frame.size() {
        return Err(SemanticsError::ValuationSize {
            expected: frame.size(),
            found: atom_val.len(),
        });
    }
    for f in closure {
        let children: Vec<&Formula> = match f {
            Formula::Atom(_) => vec![],
            Formula::Implies(a, b) => vec![a, b],
            Formula::Box(a) => vec![a],
        };
        if let Some(missing) = children.into_iter().find(|c| !closure.contains(*c)) {
            return Err(SemanticsError::NotSubformulaClosed(missing.to_string()));
        }
    }
    let mut ordered: Vec<&Formula> = closure.iter().collect();
    ordered.sort_by_key(|f| f.node_count());
    let mut table: HashMap<Formula, Vec<bool>> = HashMap::with_capacity(ordered.len());
    for f in ordered {
        let column: Vec<bool> = match f {
            Formula::Atom(Atom::Bottom) => vec![false; frame.size()],
            Formula::Atom(a) => frame
                .worlds()
                .map(|w| {
                    atom_val[w].get(a).copied().ok_or_else(|| SemanticsError::MissingAtom {
                        world: w,
                        atom: a.name(),
                    })
                })
                .collect::<Result<_, _>>()?,
            Formula::Implies(a, b) => {
                let (ta, tb) = (&table[&**a], &table[&**b]);
                ta.iter().zip(tb).map(|(x, y)| !x || *y).collect()
            }
            Formula::Box(a) => {
                let ta = &table[&**a];
                frame
                    .worlds()
                    .map(|w| frame.successors(w).iter().all(|&v| ta[v]))
                    .collect()
            }
        };
        table.insert(f.clone(), column);
    }
    Ok(KripkeModel {
        frame: frame.clone(),
        atom_val: atom_val.clone(),
        closure: closure.clone(),
        table,
    })
}

impl KripkeModel {
    /// The model whose closure is the union of the subformulas of `formulas`.
    pub fn for_formulas<'a, I: IntoIterator<Item = &'a Formula>>(
        frame: &Frame,
        atom_val: &AtomValuation,
        formulas: I,
    ) -> Result<KripkeModel, SemanticsError> {
        let mut closure = BTreeSet::new();
        for f in formulas {
            closure.extend(sub_formulas(f));
        }
        extend_valuation(frame, atom_val, &closure)
    }

    pub fn closure(&self) -> &BTreeSet<Formula> {
        &self.closure
    }

    pub fn size(&self) -> usize {
        self.frame.size()
    }

    /// The same frame and valuation with `f`'s subformulas added to the closure.
    pub fn with_formula(&self, f: &Formula) -> Result<KripkeModel, SemanticsError> {
        let mut closure = self.closure.clone();
        closure.extend(sub_formulas(f));
        extend_valuation(&self.frame, &self.atom_val, &closure)
    }

    pub fn true_atoms(&self, w: usize) -> Vec<Atom> {
        self.atom_val[w].iter().filter(|(_, v)| **v).map(|(a, _)| *a).collect()
    }
}

/// Table lookup of `M, w ⊩ φ`.
pub fn eval(model: &KripkeModel, w: usize, f: &Formula) -> Result<bool, SemanticsError> {
    if w >= model.size() {
        return Err(SemanticsError::NoSuchWorld(w));
    }
    model
        .table
        .get(f)
        .map(|col| col[w])
        .ok_or_else(|| SemanticsError::OutsideClosure(f.to_string()))
}

/// A formula compiled to a node list for evaluation over world bitmasks.
///
/// Bit `w` of a mask stands for world `w`, so frames of up to 64 worlds are supported.
#[derive(Clone, Debug)]
pub struct Compiled {
    nodes: Vec<Node>,
    atoms: Vec<Atom>,
    roots: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Atom(usize),
    Bot,
    Imp(usize, usize),
    Box(usize),
}

impl Compiled {
    pub fn new(f: &Formula) -> Compiled {
        Compiled::many(std::slice::from_ref(f))
    }

    /// Compiles several formulas into one shared node list.
    pub fn many(fs: &[Formula]) -> Compiled {
        let mut index: HashMap<Formula, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut atoms: Vec<Atom> = Vec::new();
        let mut all: BTreeSet<Formula> = BTreeSet::new();
        for f in fs {
            all.extend(sub_formulas_bottom_up(f));
        }
        let mut ordered: Vec<Formula> = all.into_iter().collect();
        ordered.sort_by_key(|f| f.node_count());
        for f in ordered {
            let node = match &f {
                Formula::Atom(Atom::Bottom) => Node::Bot,
                Formula::Atom(a) => {
                    let i = atoms.iter().position(|x| x == a).unwrap_or_else(|| {
                        atoms.push(*a);
                        atoms.len() - 1
                    });
                    Node::Atom(i)
                }
                Formula::Implies(a, b) => Node::Imp(index[&**a], index[&**b]),
                Formula::Box(a) => Node::Box(index[&**a]),
            };
            index.insert(f, nodes.len());
            nodes.push(node);
        }
        let roots = fs.iter().map(|f| index[f]).collect();
        Compiled { nodes, atoms, roots }
    }

    /// The proper atoms, in the order their masks are expected by [`Compiled::eval`].
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    /// Evaluates every node; `buf` receives one world mask per node.
    pub fn eval_into(&self, succ: &[u64], atom_masks: &[u64], buf: &mut Vec<u64>) {
        let n = succ.len();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        buf.clear();
        for node in &self.nodes {
            let m = match *node {
                Node::Atom(i) => atom_masks[i] & all,
                Node::Bot => 0,
                Node::Imp(a, b) => (!buf[a] | buf[b]) & all,
                Node::Box(a) => {
                    let body = buf[a];
                    let mut out = 0u64;
                    for (w, s) in succ.iter().enumerate() {
                        if s & !body == 0 {
                            out |= 1u64 << w;
                        }
                    }
                    out
                }
            };
            buf.push(m);
        }
    }

    /// The world mask of root `k` after [`Compiled::eval_into`].
    pub fn root(&self, buf: &[u64], k: usize) -> u64 {
        buf[self.roots[k]]
    }

    /// Convenience wrapper returning the mask of the first root.
    pub fn eval(&self, succ: &[u64], atom_masks: &[u64]) -> u64 {
        let mut buf = Vec::with_capacity(self.nodes.len());
        self.eval_into(succ, atom_masks, &mut buf);
        self.root(&buf, 0)
    }
}

/// Unpacks assignment `code` into per-atom world masks: bits `a·n .. a·n+n` belong to atom `a`.
pub fn assignment_masks(code: u64, atoms: usize, worlds: usize) -> Vec<u64> {
    let world_mask = if worlds == 64 { u64::MAX } else { (1u64 << worlds) - 1 };
    (0..atoms).map(|a| (code >> (a * worlds)) & world_mask).collect()
}

/// The valuation table matching [`assignment_masks`].
pub fn valuation_from_masks(atoms: &[Atom], masks: &[u64], worlds: usize) -> AtomValuation {
    (0..worlds)
        .map(|w| {
            atoms
                .iter()
                .zip(masks)
                .map(|(a, m)| (*a, m & (1u64 << w) != 0))
                .collect()
        })
        .collect()
}

/// `F ⊩ φ`: `φ` holds at every world under every assignment to the atoms occurring in `φ`.
pub fn frame_forces(frame: &Frame, f: &Formula) -> bool {
    frame_forces_all(frame, std::slice::from_ref(f))
}

/// `F ⊩ Γ`.
pub fn gamma_forces(frame: &Frame, gamma: &[Formula]) -> bool {
    frame_forces_all(frame, gamma)
}

fn frame_forces_all(frame: &Frame, fs: &[Formula]) -> bool {
    if fs.is_empty() {
        return true;
    }
    let succ = frame.masks().expect("frame_forces supports at most 64 worlds");
    let n = succ.len();
    let compiled = Compiled::many(fs);
    let bits = compiled.atoms().len() * n;
    assert!(bits < 64, "too many assignments to enumerate");
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut buf = Vec::new();
    (0..(1u64 << bits)).all(|code| {
        let masks = assignment_masks(code, compiled.atoms().len(), n);
        compiled.eval_into(&succ, &masks, &mut buf);
        (0..compiled.root_count()).all(|k| compiled.root(&buf, k) == all)
    })
}

/// `Γ ⊩_{F_Σ} φ` over every `Σ`-appropriate frame with at most `bound` worlds.
pub fn consequence_holds(gamma: &[Formula], f: &Formula, sigma: &SigmaSpec, bound: usize) -> bool {
    let cfg = OracleConfig::new(bound, sigma.clone());
    enumerate_frames(&cfg)
        .iter()
        .all(|frame| !gamma_forces(frame, gamma) || frame_forces(frame, f))
}

/// The model text format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub worlds: Vec<u64>,
    pub rel: Vec<[u64; 2]>,
    pub val: BTreeMap<String, BTreeMap<String, bool>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
}

impl ModelDocument {
    pub fn from_model(frame: &Frame, val: &AtomValuation, labels: Option<&[String]>) -> ModelDocument {
        ModelDocument {
            worlds: frame.worlds().map(|w| w as u64).collect(),
            rel: frame.edges().into_iter().map(|(u, v)| [u as u64, v as u64]).collect(),
            val: frame
                .worlds()
                .map(|w| {
                    let row = val[w].iter().map(|(a, b)| (a.name(), *b)).collect();
                    (w.to_string(), row)
                })
                .collect(),
            labels: labels
                .map(|ls| ls.iter().enumerate().map(|(w, l)| (w.to_string(), l.clone())).collect())
                .unwrap_or_default(),
        }
    }

    /// Worlds are renumbered `0..n` in ascending id order.
    pub fn to_frame_and_valuation(&self) -> Result<(Frame, AtomValuation), SemanticsError> {
        let ids: BTreeSet<u64> = self.worlds.iter().copied().collect();
        let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let lookup = |id: u64| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| SemanticsError::Format(format!("unknown world {id}")))
        };
        let edges = self
            .rel
            .iter()
            .map(|[u, v]| Ok((lookup(*u)?, lookup(*v)?)))
            .collect::<Result<Vec<_>, SemanticsError>>()?;
        let frame = Frame::new(ids.len(), edges)?;
        let mut val: AtomValuation = vec![BTreeMap::new(); ids.len()];
        for (key, row) in &self.val {
            let id: u64 = key
                .parse()
                .map_err(|_| SemanticsError::Format(format!("bad world key {key:?}")))?;
            let w = lookup(id)?;
            for (name, b) in row {
                let atom = Atom::from_name(name)
                    .filter(|a| *a != Atom::Bottom)
                    .ok_or_else(|| SemanticsError::Format(format!("bad atom {name:?}")))?;
                val[w].insert(atom, *b);
            }
        }
        Ok((frame, val))
    }

    pub fn from_json(text: &str) -> Result<ModelDocument, SemanticsError> {
        serde_json::from_str(text).map_err(|e| SemanticsError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }
}

/// Graphviz text: one node per world labeled with its true atoms, one edge per pair.
pub fn to_dot(frame: &Frame, val: &AtomValuation, labels: Option<&[String]>) -> String {
    let mut out = String::from("digraph kripke {\n");
    for w in frame.worlds() {
        let atoms: Vec<String> = val[w].iter().filter(|(_, b)| **b).map(|(a, _)| a.name()).collect();
        let mut label = format!("{w}: {{{}}}", atoms.join(", "));
        if let Some(extra) = labels.and_then(|ls| ls.get(w)) {
            label.push_str("\\n");
            label.push_str(&extra.replace('"', "\\\""));
        }
        let _ = writeln!(out, "  w{w} [label=\"{label}\"];");
    }
    for (u, v) in frame.edges() {
        let _ = writeln!(out, "  w{u} -> w{v};");
    }
    out.push_str("}\n");
    out
}
