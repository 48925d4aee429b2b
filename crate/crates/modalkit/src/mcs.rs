//! Maximal consistent sets over a finite closure, for `K`.
//!
//! A set of formulas is `K`-consistent exactly when some canonical formula of matching height
//! and order entails all of its members, so consistency is a scan over `C_{h,n}`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::canonical::{CanonicalError, Universe};
use crate::syntax::{height, order, sub_formulas, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McsError {
    #[error("the seed is inconsistent")]
    InconsistentSeed,
    #[error("{0} is not in the closure")]
    NotInClosure(String),
    #[error("[]{0} is a member, so no successor needs to refute it")]
    BoxIsMember(String),
    #[error("successor seed turned out inconsistent for {0}")]
    Internal(String),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

/// A subformula-closed set containing `ψ→⊥` for every subformula `ψ` of its generators.
#[derive(Debug)]
pub struct Closure {
    formulas: Vec<Formula>,
    set: BTreeSet<Formula>,
    universe: Arc<Universe>,
    level: u32,
    columns: Mutex<HashMap<Formula, Arc<Vec<u64>>>>,
}

/// The subformula and negation closure of `Γ ∪ {φ, ⊥}`.
pub fn make_closure(gamma: &[Formula], phi: &Formula) -> Result<Closure, McsError> {
    let mut subs = BTreeSet::new();
    for f in gamma.iter().chain(std::iter::once(phi)) {
        subs.extend(sub_formulas(f));
    }
    subs.insert(Formula::bot());
    let mut set = subs.clone();
    for s in &subs {
        set.insert(Formula::not(s.clone()));
    }
    let level = set.iter().map(height).max().unwrap_or(0);
    let n = set.iter().map(order).max().unwrap_or(0);
    let universe = Universe::shared(level, n)?;
    let mut formulas: Vec<Formula> = set.iter().cloned().collect();
    formulas.sort_by(|a, b| a.node_count().cmp(&b.node_count()).then_with(|| a.cmp(b)));
    Ok(Closure {
        formulas,
        set,
        universe,
        level,
        columns: Mutex::new(HashMap::new()),
    })
}

fn and_into(acc: &mut [u64], col: &[u64]) {
    for (a, c) in acc.iter_mut().zip(col) {
        *a &= c;
    }
}

impl Closure {
    /// Members in the fixed scan order: by size, then by the formula order.
    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.set.contains(f)
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    fn type_count(&self) -> usize {
        self.universe.level_size(self.level)
    }

    fn column(&self, f: &Formula) -> Arc<Vec<u64>> {
        if let Some(hit) = self.columns.lock().expect("column cache").get(f) {
            return hit.clone();
        }
        let bools = self
            .universe
            .column(self.level, f)
            .expect("closure formulas and their negations stay in the language");
        let mut words = vec![0u64; bools.len().div_ceil(64)];
        for (i, b) in bools.iter().enumerate() {
            if *b {
                words[i / 64] |= 1u64 << (i % 64);
            }
        }
        let col = Arc::new(words);
        self.columns.lock().expect("column cache").insert(f.clone(), col.clone());
        col
    }

    fn full(&self) -> Vec<u64> {
        let n = self.type_count();
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *words.last_mut().expect("at least one word") = (1u64 << (n % 64)) - 1;
        }
        words
    }

    fn support<'a, I: IntoIterator<Item = &'a Formula>>(&self, fs: I) -> Vec<u64> {
        let mut acc = self.full();
        for f in fs {
            and_into(&mut acc, &self.column(f));
        }
        acc
    }

    /// `K`-consistency of a finite set of formulas of the closure's language.
    pub fn consistent<'a, I: IntoIterator<Item = &'a Formula>>(&self, fs: I) -> bool {
        self.support(fs).iter().any(|w| *w != 0)
    }

    /// Whether `fs ⊢_K ψ`.
    pub fn entails<'a, I: IntoIterator<Item = &'a Formula>>(&self, fs: I, psi: &Formula) -> bool {
        let mut acc = self.support(fs);
        and_into(&mut acc, &self.column(&Formula::not(psi.clone())));
        acc.iter().all(|w| *w == 0)
    }
}

/// A maximal consistent subset of a closure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteMCS {
    pub members: BTreeSet<Formula>,
}

impl FiniteMCS {
    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }

    /// `{ξ | □ξ ∈ E}`.
    pub fn boxed_bodies(&self) -> Vec<Formula> {
        self.members
            .iter()
            .filter_map(|f| match f {
                Formula::Box(x) => Some((**x).clone()),
                _ => None,
            })
            .collect()
    }
}

/// Extends a consistent seed by scanning the closure and taking each formula that keeps the
/// accumulation consistent.
pub fn finitary_lindenbaum(seed: &[Formula], closure: &Closure) -> Result<FiniteMCS, McsError> {
    if let Some(out) = seed.iter().find(|f| !closure.contains(f)) {
        return Err(McsError::NotInClosure(out.to_string()));
    }
    let mut acc = closure.support(seed);
    if acc.iter().all(|w| *w == 0) {
        return Err(McsError::InconsistentSeed);
    }
    let mut members: BTreeSet<Formula> = seed.iter().cloned().collect();
    for psi in closure.formulas() {
        if members.contains(psi) {
            continue;
        }
        let col = closure.column(psi);
        let mut next = acc.clone();
        and_into(&mut next, &col);
        if next.iter().any(|w| *w != 0) {
            members.insert(psi.clone());
            acc = next;
        }
    }
    Ok(FiniteMCS { members })
}

/// An MCS containing `¬ψ` and every `ξ` with `□ξ ∈ E`.
pub fn successor_mcs(e: &FiniteMCS, psi: &Formula, closure: &Closure) -> Result<FiniteMCS, McsError> {
    let boxed = Formula::boxed(psi.clone());
    if !closure.contains(&boxed) {
        return Err(McsError::NotInClosure(boxed.to_string()));
    }
    if e.contains(&boxed) {
        return Err(McsError::BoxIsMember(psi.to_string()));
    }
    let mut seed = vec![Formula::not(psi.clone())];
    seed.extend(e.boxed_bodies());
    finitary_lindenbaum(&seed, closure).map_err(|err| match err {
        McsError::InconsistentSeed => McsError::Internal(psi.to_string()),
        other => other,
    })
}

/// Every MCS over the closure, one per distinct canonical type trace, in type order.
pub fn enumerate_mcs(closure: &Closure) -> Vec<FiniteMCS> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let cols: Vec<Arc<Vec<u64>>> = closure.formulas().iter().map(|f| closure.column(f)).collect();
    for t in 0..closure.type_count() {
        let members: BTreeSet<Formula> = closure
            .formulas()
            .iter()
            .zip(&cols)
            .filter(|(_, c)| c[t / 64] & (1u64 << (t % 64)) != 0)
            .map(|(f, _)| f.clone())
            .collect();
        if seen.insert(members.clone()) {
            out.push(FiniteMCS { members });
        }
    }
    out
}

/// `E R Ẽ` in the closure canonical model: `□ξ ∈ E` implies `ξ ∈ Ẽ` for every `□ξ` in the closure.
pub fn canonical_related(e: &FiniteMCS, e2: &FiniteMCS) -> bool {
    e.boxed_bodies().iter().all(|x| e2.contains(x))
}

/// Which of the three defining properties fail, if any.
pub fn invariant_violations(m: &FiniteMCS, closure: &Closure) -> Vec<String> {
    let mut out = Vec::new();
    if !closure.consistent(&m.members) {
        out.push("members are inconsistent".to_string());
    }
    for psi in closure.formulas() {
        let neg = Formula::not(psi.clone());
        if closure.contains(&neg) && (m.contains(psi) == m.contains(&neg)) {
            out.push(format!("maximality fails at {psi}"));
        }
        if !m.contains(psi) && closure.entails(&m.members, psi) {
            out.push(format!("{psi} is entailed but missing"));
        }
    }
    out
}

/// Membership mirrors truth: negation flips, implication is material, conjunction splits.
pub fn esp_violations(m: &FiniteMCS, closure: &Closure) -> Vec<String> {
    let mut out = Vec::new();
    for f in closure.formulas() {
        if let Formula::Implies(a, b) = f {
            if !closure.contains(a) || !closure.contains(b) {
                continue;
            }
            if b.is_bot() && m.contains(f) == m.contains(a) {
                out.push(format!("negation {f}"));
            }
            if m.contains(f) != (!m.contains(a) || m.contains(b)) {
                out.push(format!("implication {f}"));
            }
        }
        if let Some((a, b)) = f.as_and() {
            if closure.contains(a) && closure.contains(b) && m.contains(f) != (m.contains(a) && m.contains(b)) {
                out.push(format!("conjunction {f}"));
            }
        }
    }
    out
}
