//! Finite models whose worlds are consistent canonical formulas.
//!
//! For a target `φ` with `h = ht(φ)` and `n = ord(φ)`, every builder works over the consistent
//! members of `C_{h+1,n}`. The roots are the members entailing `φ`; the world set is everything
//! reachable from a root along the chosen relation. A world's value for `ψ ∈ sub(φ)` is
//! [`Universe::decides`], so the truth lemma is the statement that these values coincide with
//! ordinary Kripke evaluation, which [`verify_weak_model`] checks.
//!
//! The relations, with `◇`-sets read off by the decision procedure:
//!
//! * `c`: `α ∧ ◇β` is consistent.
//! * `m`: `α` entails `◇β′` and every `◇ξ` entailed by `β` is entailed by `α`.
//! * `mm`: `m` in both directions.
//! * `d`: `m`, plus some `γ` with `α` entailing `◇γ` and `β` entailing `□¬γ`.
//! * `s`: `m`, plus every `◇ξ` entailed by `α` is entailed by `β`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::canonical::{sigma_types, CanonicalError, SigmaTypes, Universe};
use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::semantics::{check_appropriate, extend_valuation, AtomValuation, Frame, ModelDocument};
use crate::syntax::{height, order, sub_formulas, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    C,
    M,
    MM,
    D,
    S,
}

impl RelationKind {
    pub fn name(self) -> &'static str {
        match self {
            RelationKind::C => "c",
            RelationKind::M => "m",
            RelationKind::MM => "mm",
            RelationKind::D => "d",
            RelationKind::S => "s",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeakModelError {
    #[error("{formula} is {sigma}-inconsistent")]
    Inconsistent { formula: String, sigma: String },
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("system {0} is outside the weak-model constructions; use the oracle")]
    Unsupported(String),
}

/// A weak Kripke model of a target formula.
#[derive(Clone, Debug)]
pub struct WeakModel {
    pub target: Formula,
    pub sigma: SigmaSpec,
    pub kind: RelationKind,
    /// Level of the canonical formulas serving as worlds, `ht(φ)+1`.
    pub level: u32,
    pub n: u32,
    /// Canonical ids of the worlds; world `i` of the frame is `ids[i]`.
    pub ids: Vec<u32>,
    pub roots: Vec<usize>,
    pub frame: Frame,
    pub atom_val: AtomValuation,
    /// `val[ψ][i]` for `ψ ∈ sub(φ)`.
    pub val: BTreeMap<Formula, Vec<bool>>,
    universe: Arc<Universe>,
}

impl WeakModel {
    pub fn size(&self) -> usize {
        self.ids.len()
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn render_world(&self, w: usize) -> Formula {
        self.universe.render(self.level, self.ids[w])
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.size())
            .map(|w| format!("#{} {}", self.ids[w], self.render_world(w)))
            .collect()
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from_model(&self.frame, &self.atom_val, Some(&self.labels()))
    }

    /// Pairs of canonical ids related in this model.
    pub fn id_edges(&self) -> BTreeSet<(u32, u32)> {
        self.frame
            .edges()
            .into_iter()
            .map(|(u, v)| (self.ids[u], self.ids[v]))
            .collect()
    }
}

/// Successor lists over all consistent members of a level, indexed by canonical id.
/// `table[a]` lists the ids related to `a`, over every consistent member of the level.
pub type RelationTable = Arc<Vec<Vec<u32>>>;

type RelationCache = Mutex<HashMap<(SigmaSpec, RelationKind, u32, u32), RelationTable>>;

/// The relation of the given kind over all consistent members, cached per system and level.
pub fn relation_table(types: &SigmaTypes, kind: RelationKind) -> RelationTable {
    static CACHE: OnceLock<RelationCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let u = types.universe();
    let key = (types.sigma().clone(), kind, types.level(), u.n());
    if let Some(hit) = cache.lock().expect("relation cache").get(&key) {
        return hit.clone();
    }
    let table = Arc::new(compute_relation(types, kind));
    cache.lock().expect("relation cache").insert(key, table.clone());
    table
}

fn compute_relation(types: &SigmaTypes, kind: RelationKind) -> Vec<Vec<u32>> {
    let u = types.universe();
    let l = types.level();
    let ids = types.consistent_ids();
    let mut out = vec![Vec::new(); u.level_size(l)];
    if kind == RelationKind::C {
        for &a in &ids {
            out[a as usize] = ids.iter().copied().filter(|&b| types.diamond_consistent(a, b)).collect();
        }
        return out;
    }
    let dia = u.diamond_table(l);
    let below = u.level_size(l - 1) as u32;
    let box_not: Vec<u64> = if kind == RelationKind::D {
        let mut masks = vec![0u64; u.level_size(l)];
        for g in 0..below {
            let f = Formula::boxed(Formula::not(u.render(l - 1, g)));
            let col = u.column(l, &f).expect("rendered members stay in the language");
            for (id, hit) in col.iter().enumerate() {
                if *hit {
                    masks[id] |= 1u64 << g;
                }
            }
        }
        masks
    } else {
        Vec::new()
    };
    let m = |a: u32, b: u32| {
        let (da, db) = (dia[a as usize], dia[b as usize]);
        da & (1u64 << u.proj(l, b)) != 0 && db & !da == 0
    };
    for &a in &ids {
        out[a as usize] = ids
            .iter()
            .copied()
            .filter(|&b| match kind {
                RelationKind::C => unreachable!(),
                RelationKind::M => m(a, b),
                RelationKind::MM => m(a, b) && m(b, a),
                RelationKind::D => m(a, b) && dia[a as usize] & box_not[b as usize] != 0,
                RelationKind::S => m(a, b) && dia[a as usize] & !dia[b as usize] == 0,
            })
            .collect();
    }
    out
}

/// Builds the model of `φ` for `Σ` with the given relation.
pub fn build_with(f: &Formula, sigma: &SigmaSpec, kind: RelationKind) -> Result<WeakModel, WeakModelError> {
    let (h, n) = (height(f), order(f));
    let level = h + 1;
    let types = sigma_types(sigma, level, n)?;
    let u = types.universe().clone();
    let entails = u.column(level, f)?;
    let roots: Vec<u32> = types
        .consistent_ids()
        .into_iter()
        .filter(|&id| entails[id as usize])
        .collect();
    if roots.is_empty() {
        return Err(WeakModelError::Inconsistent {
            formula: f.to_string(),
            sigma: sigma.to_string(),
        });
    }
    let rel = relation_table(&types, kind);
    let mut ids: Vec<u32> = Vec::new();
    let mut slot: HashMap<u32, usize> = HashMap::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &r in &roots {
        slot.insert(r, ids.len());
        ids.push(r);
        queue.push_back(r);
    }
    let mut edges = Vec::new();
    while let Some(a) = queue.pop_front() {
        for &b in &rel[a as usize] {
            let next = *slot.entry(b).or_insert_with(|| {
                ids.push(b);
                queue.push_back(b);
                ids.len() - 1
            });
            edges.push((slot[&a], next));
        }
    }
    let frame = Frame::new(ids.len(), edges).expect("edges stay within the generated worlds");
    let atom_val: AtomValuation = ids.iter().map(|&id| u.atom_row(u.member(level, id).t)).collect();
    let subs: Vec<Formula> = sub_formulas(f).into_iter().collect();
    let cols = u.columns(level, &subs)?;
    let val = subs
        .into_iter()
        .zip(cols)
        .map(|(psi, col)| {
            let row = ids.iter().map(|&id| col[id as usize]).collect();
            (psi, row)
        })
        .collect();
    Ok(WeakModel {
        target: f.clone(),
        sigma: sigma.clone(),
        kind,
        level,
        n,
        roots: (0..roots.len()).collect(),
        ids,
        frame,
        atom_val,
        val,
        universe: u,
    })
}

/// The model over `→c`.
pub fn build_c_model(f: &Formula, sigma: &SigmaSpec) -> Result<WeakModel, WeakModelError> {
    build_with(f, sigma, RelationKind::C)
}

/// The model over `→m`.
pub fn build_m_model(f: &Formula, sigma: &SigmaSpec) -> Result<WeakModel, WeakModelError> {
    build_with(f, sigma, RelationKind::M)
}

/// The model over `→mm`.
pub fn build_mm_model(f: &Formula, sigma: &SigmaSpec) -> Result<WeakModel, WeakModelError> {
    build_with(f, sigma, RelationKind::MM)
}

/// The model over `→d`, always for `GL`.
pub fn build_d_model(f: &Formula) -> Result<WeakModel, WeakModelError> {
    build_with(f, &SigmaSpec::gl(), RelationKind::D)
}

/// The experimental model over `→s`.
pub fn build_s_model(f: &Formula, sigma: &SigmaSpec) -> Result<WeakModel, WeakModelError> {
    build_with(f, sigma, RelationKind::S)
}

/// The relation the completeness argument uses for `Σ`.
pub fn relation_for(sigma: &SigmaSpec) -> Result<RelationKind, WeakModelError> {
    if sigma.is_gl() {
        return Ok(RelationKind::D);
    }
    if !sigma.within_tb4d() {
        return Err(WeakModelError::Unsupported(sigma.to_string()));
    }
    Ok(
        match (sigma.contains(SigmaAxiom::Four), sigma.contains(SigmaAxiom::B)) {
            (false, _) => RelationKind::C,
            (true, false) => RelationKind::M,
            (true, true) => RelationKind::MM,
        },
    )
}

/// Dispatches to the builder matching `Σ`.
pub fn build_weak_model(f: &Formula, sigma: &SigmaSpec) -> Result<WeakModel, WeakModelError> {
    build_with(f, sigma, relation_for(sigma)?)
}

/// Itemized outcome of [`verify_weak_model`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// `(world, ψ)` where the stored value disagrees with Kripke evaluation.
    pub clause_failures: Vec<(usize, Formula)>,
    /// Roots at which `φ` is not forced.
    pub target_failures: Vec<usize>,
    pub has_roots: bool,
    pub appropriate: bool,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.clause_failures.is_empty() && self.target_failures.is_empty() && self.has_roots && self.appropriate
    }

    pub fn truth_lemma_holds(&self) -> bool {
        self.clause_failures.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "clauses on sub(phi): {} ({} mismatches)", mark(self.clause_failures.is_empty()), self.clause_failures.len())?;
        writeln!(f, "target at roots: {}", mark(self.has_roots && self.target_failures.is_empty()))?;
        write!(f, "frame appropriate: {}", mark(self.appropriate))
    }
}

/// Recomputes `sub(φ)` by Kripke evaluation and compares it with the stored values, checks
/// that every root forces `φ`, and checks the frame against `Σ`.
pub fn verify_weak_model(model: &WeakModel, f: &Formula, sigma: &SigmaSpec) -> VerifyReport {
    let closure: BTreeSet<Formula> = sub_formulas(f);
    let kripke = extend_valuation(&model.frame, &model.atom_val, &closure).expect("atom rows cover sub(phi)");
    let mut report = VerifyReport {
        has_roots: !model.roots.is_empty(),
        appropriate: check_appropriate(&model.frame, sigma),
        ..VerifyReport::default()
    };
    for psi in &closure {
        for w in model.frame.worlds() {
            let stored = model.val.get(psi).map(|row| row[w]);
            let actual = crate::semantics::eval(&kripke, w, psi).expect("closure member");
            if stored != Some(actual) {
                report.clause_failures.push((w, psi.clone()));
            }
        }
    }
    for &r in &model.roots {
        if !crate::semantics::eval(&kripke, r, f).expect("target in closure") {
            report.target_failures.push(r);
        }
    }
    report
}
