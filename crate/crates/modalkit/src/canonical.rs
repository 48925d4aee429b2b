//! Canonical formulas `α_{S,T}` and the finite universes `C_{h,n}`.
//!
//! Level 0 holds the complete atom descriptions `T̂` for `T ⊆ {a_0,…,a_n}`; level `l+1` holds
//! `(⋀_{β∈S}◇β) ∧ □⋁S ∧ T̂` for every `S ⊆ C_{l,n}`. A member is stored structurally as a
//! bitmask `t` over atom ranks and a bitmask `s` over the ids of the level below. Ids follow
//! the order of `(t, sorted ids of S)`, which keeps emitted models reproducible.
//!
//! Consistency of canonical formulas with respect to `Σ ⊆ {T,B,4,D}` and `GL` is decided
//! exactly by eliminating types that cannot be realized. Other systems fall back to the types
//! realized by the bounded oracle.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::oracle::frame_masks;
use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::semantics::{AtomValuation, Frame};
use crate::syntax::{height, in_language, order, Atom, Formula};

/// Default bound on the number of members of any `C_{h,n}` that may be enumerated.
pub const DEFAULT_CAP: usize = 4096;

/// World bound for the oracle fallback used by systems containing `5`.
pub const REALIZED_BOUND: usize = 5;

/// World bound for systems containing `.2` but not `5`, whose frames are far more numerous.
pub const DIRECTED_REALIZED_BOUND: usize = 4;

/// The world bound [`sigma_types`] uses when consistency is read off small models.
pub fn realized_bound(sigma: &SigmaSpec) -> usize {
    if sigma.contains(SigmaAxiom::Five) {
        REALIZED_BOUND
    } else {
        DIRECTED_REALIZED_BOUND
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("C_{{{h},{n}}} has {size} members, above the enumeration cap of {cap}; reduce h or n")]
    CapExceeded { h: u32, n: u32, size: String, cap: usize },
    #[error("{formula} is outside L_{{{level},{n}}}")]
    OutOfLanguage { formula: String, level: u32, n: u32 },
    #[error("projection of member {id} at level {level} matched {matches} members instead of one")]
    Projection { level: u32, id: u32, matches: usize },
    #[error("level 0 formulas have no projection")]
    NoProjection,
    #[error("system {0} is not supported by the canonical machinery")]
    Unsupported(String),
    #[error("not a member of C_{{{level},{n}}}")]
    NotAMember { level: u32, n: u32 },
}

/// `log2 |C_{l,n}|` for `l ≤ h`, or `None` once it no longer fits in a `u32`.
fn size_exponents(h: u32, n: u32) -> Vec<Option<u32>> {
    let mut out = vec![Some(n + 1)];
    for _ in 0..h {
        let next = out
            .last()
            .copied()
            .flatten()
            .and_then(|e| if e < 32 { Some(1u32 << e) } else { None })
            .and_then(|m| m.checked_add(n + 1));
        out.push(next);
    }
    out
}

/// `|C_{h,n}|`, when it fits in a `u128`.
pub fn member_count(h: u32, n: u32) -> Option<u128> {
    size_exponents(h, n)[h as usize]
        .filter(|e| *e < 128)
        .map(|e| 1u128 << e)
}

/// `|C_{h,n}|` as text: a number for level 0 and `2^|C_{h-1,n}|·2^{n+1}` above it,
/// so `C_{2,1}` reads `2^64·4`.
pub fn size_report(h: u32, n: u32) -> String {
    let t_part = 1u128 << (n + 1).min(127);
    if h == 0 {
        return t_part.to_string();
    }
    let below = match member_count(h - 1, n) {
        Some(c) => c.to_string(),
        None => format!("({})", size_report(h - 1, n)),
    };
    format!("2^{below}·{t_part}")
}

/// Checks that every level up to `h` fits within `cap`.
pub fn check_cap(h: u32, n: u32, cap: usize) -> Result<(), CanonicalError> {
    for l in 0..=h {
        let fits = member_count(l, n).is_some_and(|c| c <= cap as u128);
        if !fits {
            return Err(CanonicalError::CapExceeded {
                h: l,
                n,
                size: size_report(l, n),
                cap,
            });
        }
    }
    Ok(())
}

/// `T̂`: the atoms with rank in `t`, then the negations of the remaining atoms up to rank `n`.
pub fn hat(t: u32, n: u32) -> Formula {
    let atom = |r: u32| Formula::atom(Atom::from_rank(r));
    let positives = (0..=n).filter(|r| t & (1 << r) != 0).map(atom);
    let negatives = (0..=n).filter(|r| t & (1 << r) == 0).map(|r| Formula::not(atom(r)));
    Formula::conj(positives.chain(negatives))
}

/// `⊕X`: exactly one member of `X` holds; `⊕∅ = ⊥`.
pub fn oplus(xs: &[Formula]) -> Formula {
    Formula::disj(xs.iter().enumerate().map(|(i, a)| {
        let others = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| Formula::not(b.clone()));
        Formula::and(a.clone(), Formula::conj(others))
    }))
}

/// A canonical formula as a nested structure.
///
/// The derived order compares `t` and then the sorted `s`, which is the id order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalFormula {
    pub level: u32,
    pub n: u32,
    pub t: u32,
    pub s: Vec<CanonicalFormula>,
}

/// `(⋀_{β∈S}◇β) ∧ □⋁S ∧ T̂`, or `T̂` at level 0.
pub fn render_canonical(alpha: &CanonicalFormula) -> Formula {
    if alpha.level == 0 {
        return hat(alpha.t, alpha.n);
    }
    let rendered: Vec<Formula> = alpha.s.iter().map(render_canonical).collect();
    assemble(&rendered, alpha.t, alpha.n)
}

fn assemble(rendered: &[Formula], t: u32, n: u32) -> Formula {
    Formula::conj([
        Formula::conj(rendered.iter().cloned().map(Formula::diamond)),
        Formula::boxed(Formula::disj(rendered.iter().cloned())),
        hat(t, n),
    ])
}

/// Whether `K ⊢ α→φ`, by recursion on `φ`.
pub fn canonical_decides(alpha: &CanonicalFormula, f: &Formula) -> Result<bool, CanonicalError> {
    if !in_language(f, alpha.level, alpha.n) {
        return Err(CanonicalError::OutOfLanguage {
            formula: f.to_string(),
            level: alpha.level,
            n: alpha.n,
        });
    }
    Ok(decides_rec(alpha, f))
}

fn decides_rec(alpha: &CanonicalFormula, f: &Formula) -> bool {
    match f {
        Formula::Atom(Atom::Bottom) => false,
        Formula::Atom(a) => alpha.t & (1 << a.rank().expect("proper atom")) != 0,
        Formula::Implies(a, b) => !decides_rec(alpha, a) || decides_rec(alpha, b),
        Formula::Box(a) => alpha.s.iter().all(|beta| decides_rec(beta, a)),
    }
}

/// `C_{h,n}` in id order.
pub fn enumerate_canonical(h: u32, n: u32) -> Result<Vec<CanonicalFormula>, CanonicalError> {
    let u = Universe::shared(h, n)?;
    Ok((0..u.level_size(h) as u32).map(|id| u.structural(h, id)).collect())
}

/// The unique `α′ ∈ C_{h,n}` with `K ⊢ α→α′`, found by search.
pub fn project(alpha: &CanonicalFormula) -> Result<CanonicalFormula, CanonicalError> {
    if alpha.level == 0 {
        return Err(CanonicalError::NoProjection);
    }
    let below = enumerate_canonical(alpha.level - 1, alpha.n)?;
    let mut hits = Vec::new();
    for candidate in below {
        if decides_rec(alpha, &render_canonical(&candidate)) {
            hits.push(candidate);
        }
    }
    if hits.len() == 1 {
        Ok(hits.pop().expect("one hit"))
    } else {
        let u = Universe::shared(alpha.level, alpha.n)?;
        Err(CanonicalError::Projection {
            level: alpha.level,
            id: u.id_of(alpha).unwrap_or(u32::MAX),
            matches: hits.len(),
        })
    }
}

/// `¬Pbl_{KΣ}(α, ⊥)`.
pub fn sigma_consistent(alpha: &CanonicalFormula, sigma: &SigmaSpec) -> Result<bool, CanonicalError> {
    if sigma.axioms.is_empty() {
        return Ok(true);
    }
    let types = sigma_types(sigma, alpha.level, alpha.n)?;
    let id = types
        .universe()
        .id_of(alpha)
        .ok_or(CanonicalError::NotAMember { level: alpha.level, n: alpha.n })?;
    Ok(types.is_consistent(id))
}

/// One member of a level: atom bits and the set of level-below ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Member {
    pub t: u32,
    pub s: u64,
}

impl Member {
    pub fn s_ids(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64u32).filter(move |i| self.s & (1u64 << i) != 0)
    }

    pub fn has(&self, id: u32) -> bool {
        self.s & (1u64 << id) != 0
    }
}

#[derive(Debug)]
struct Level {
    members: Vec<Member>,
    index: HashMap<Member, u32>,
    proj: Vec<u32>,
}

/// All levels `C_{0,n} … C_{h,n}` with ids, projections and decision columns.
#[derive(Debug)]
pub struct Universe {
    n: u32,
    levels: Vec<Level>,
}

type UniverseCache = Mutex<HashMap<(u32, u32), Arc<Universe>>>;

impl Universe {
    pub fn new(h: u32, n: u32, cap: usize) -> Result<Universe, CanonicalError> {
        check_cap(h, n, cap)?;
        let t_count = 1u32 << (n + 1);
        let mut levels: Vec<Level> = Vec::new();
        let members: Vec<Member> = (0..t_count).map(|t| Member { t, s: 0 }).collect();
        levels.push(Level::from_members(members, Vec::new()));
        for _ in 1..=h {
            let below = levels.last().expect("level below").members.len() as u32;
            let mut subsets: Vec<(Vec<u32>, u64)> = (0..(1u64 << below))
                .map(|s| ((0..below).filter(|i| s & (1u64 << i) != 0).collect(), s))
                .collect();
            subsets.sort();
            let members: Vec<Member> = (0..t_count)
                .flat_map(|t| subsets.iter().map(move |(_, s)| Member { t, s: *s }))
                .collect();
            let prev = levels.last().expect("level below");
            let proj = members
                .iter()
                .map(|m| {
                    if levels.len() == 1 {
                        m.t
                    } else {
                        let mut s = 0u64;
                        for b in m.s_ids() {
                            s |= 1u64 << prev.proj[b as usize];
                        }
                        prev.index[&Member { t: m.t, s }]
                    }
                })
                .collect();
            levels.push(Level::from_members(members, proj));
        }
        Ok(Universe { n, levels })
    }

    /// A cached universe of height `h` under the default cap.
    pub fn shared(h: u32, n: u32) -> Result<Arc<Universe>, CanonicalError> {
        static CACHE: OnceLock<UniverseCache> = OnceLock::new();
        check_cap(h, n, DEFAULT_CAP)?;
        let cache = CACHE.get_or_init(Default::default);
        if let Some(u) = cache.lock().expect("universe cache").get(&(h, n)) {
            return Ok(u.clone());
        }
        let u = Arc::new(Universe::new(h, n, DEFAULT_CAP)?);
        cache.lock().expect("universe cache").insert((h, n), u.clone());
        Ok(u)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn height(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn level_size(&self, l: u32) -> usize {
        self.levels[l as usize].members.len()
    }

    pub fn member(&self, l: u32, id: u32) -> Member {
        self.levels[l as usize].members[id as usize]
    }

    pub fn lookup(&self, l: u32, m: Member) -> Option<u32> {
        self.levels[l as usize].index.get(&m).copied()
    }

    /// Structural projection to level `l−1`: `(t, S) ↦ (t, {proj β | β ∈ S})`.
    pub fn proj(&self, l: u32, id: u32) -> u32 {
        assert!(l >= 1, "level 0 has no projection");
        self.levels[l as usize].proj[id as usize]
    }

    pub fn structural(&self, l: u32, id: u32) -> CanonicalFormula {
        let m = self.member(l, id);
        CanonicalFormula {
            level: l,
            n: self.n,
            t: m.t,
            s: if l == 0 {
                Vec::new()
            } else {
                m.s_ids().map(|b| self.structural(l - 1, b)).collect()
            },
        }
    }

    pub fn id_of(&self, alpha: &CanonicalFormula) -> Option<u32> {
        if alpha.n != self.n || alpha.level > self.height() {
            return None;
        }
        let mut s = 0u64;
        if alpha.level > 0 {
            for beta in &alpha.s {
                s |= 1u64 << self.id_of(beta)?;
            }
        }
        self.lookup(alpha.level, Member { t: alpha.t, s })
    }

    pub fn render(&self, l: u32, id: u32) -> Formula {
        let m = self.member(l, id);
        if l == 0 {
            return hat(m.t, self.n);
        }
        let rendered: Vec<Formula> = m.s_ids().map(|b| self.render(l - 1, b)).collect();
        assemble(&rendered, m.t, self.n)
    }

    /// For each member of level `l`, whether it decides `f` positively.
    pub fn column(&self, l: u32, f: &Formula) -> Result<Vec<bool>, CanonicalError> {
        let mut memo = HashMap::new();
        self.column_memo(l, f, &mut memo).map(|c| (*c).clone())
    }

    /// Columns for several formulas, sharing work between common subformulas.
    pub fn columns(&self, l: u32, fs: &[Formula]) -> Result<Vec<Arc<Vec<bool>>>, CanonicalError> {
        let mut memo = HashMap::new();
        fs.iter().map(|f| self.column_memo(l, f, &mut memo)).collect()
    }

    pub fn decides(&self, l: u32, id: u32, f: &Formula) -> Result<bool, CanonicalError> {
        Ok(self.column(l, f)?[id as usize])
    }

    fn column_memo(
        &self,
        l: u32,
        f: &Formula,
        memo: &mut HashMap<(u32, Formula), Arc<Vec<bool>>>,
    ) -> Result<Arc<Vec<bool>>, CanonicalError> {
        if l > self.height() || height(f) > l || order(f) > self.n {
            return Err(CanonicalError::OutOfLanguage {
                formula: f.to_string(),
                level: l,
                n: self.n,
            });
        }
        Ok(self.column_rec(l, f, memo))
    }

    fn column_rec(&self, l: u32, f: &Formula, memo: &mut HashMap<(u32, Formula), Arc<Vec<bool>>>) -> Arc<Vec<bool>> {
        if let Some(hit) = memo.get(&(l, f.clone())) {
            return hit.clone();
        }
        let members = &self.levels[l as usize].members;
        let col: Vec<bool> = match f {
            Formula::Atom(Atom::Bottom) => vec![false; members.len()],
            Formula::Atom(a) => {
                let bit = 1u32 << a.rank().expect("proper atom");
                members.iter().map(|m| m.t & bit != 0).collect()
            }
            Formula::Implies(a, b) => {
                let ca = self.column_rec(l, a, memo);
                let cb = self.column_rec(l, b, memo);
                ca.iter().zip(cb.iter()).map(|(x, y)| !x || *y).collect()
            }
            Formula::Box(a) => {
                let below = self.column_rec(l - 1, a, memo);
                let ok = below
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v)
                    .fold(0u64, |acc, (i, _)| acc | (1u64 << i));
                members.iter().map(|m| m.s & !ok == 0).collect()
            }
        };
        let col = Arc::new(col);
        memo.insert((l, f.clone()), col.clone());
        col
    }

    /// Search-based projection: every `α′` at level `l−1` with `K ⊢ α→α′`, for each `α`.
    pub fn projection_matches(&self, l: u32) -> Vec<Vec<u32>> {
        assert!(l >= 1, "level 0 has no projection");
        let mut out = vec![Vec::new(); self.level_size(l)];
        for cand in 0..self.level_size(l - 1) as u32 {
            let col = self
                .column(l, &self.render(l - 1, cand))
                .expect("rendered members stay in the language");
            for (id, hit) in col.iter().enumerate() {
                if *hit {
                    out[id].push(cand);
                }
            }
        }
        out
    }

    /// The search-based projection of one member, failing unless exactly one candidate matches.
    pub fn project_by_search(&self, l: u32, id: u32) -> Result<u32, CanonicalError> {
        if l == 0 {
            return Err(CanonicalError::NoProjection);
        }
        let alpha = self.structural(l, id);
        let hits: Vec<u32> = (0..self.level_size(l - 1) as u32)
            .filter(|&c| decides_rec(&alpha, &self.render(l - 1, c)))
            .collect();
        match hits.as_slice() {
            [one] => Ok(*one),
            _ => Err(CanonicalError::Projection { level: l, id, matches: hits.len() }),
        }
    }

    /// `dia[α][ξ]`: whether `K ⊢ α→◇ξ` for `α` at level `l` and `ξ` at level `l−1`.
    pub fn diamond_table(&self, l: u32) -> Vec<u64> {
        let mut out = vec![0u64; self.level_size(l)];
        for xi in 0..self.level_size(l - 1) as u32 {
            let col = self
                .column(l, &Formula::diamond(self.render(l - 1, xi)))
                .expect("rendered members stay in the language");
            for (id, hit) in col.iter().enumerate() {
                if *hit {
                    out[id] |= 1u64 << xi;
                }
            }
        }
        out
    }

    /// The atom valuation row of a member's `t`.
    pub fn atom_row(&self, t: u32) -> BTreeMap<Atom, bool> {
        (0..=self.n).map(|r| (Atom::from_rank(r), t & (1 << r) != 0)).collect()
    }
}

impl Level {
    fn from_members(members: Vec<Member>, proj: Vec<u32>) -> Level {
        let index = members.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
        Level { members, index, proj }
    }
}

/// How consistency of a level's members was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsistencyMethod {
    /// Greatest set of types closed under the frame conditions; exact.
    Elimination,
    /// Types realized in oracle models with at most the given number of worlds.
    Realized { bound: usize },
}

/// `Σ`-consistency of every member of `C_{l,n}` together with `α∧◇β` consistency.
#[derive(Debug)]
pub struct SigmaTypes {
    level: u32,
    sigma: SigmaSpec,
    universe: Arc<Universe>,
    method: ConsistencyMethod,
    consistent: Vec<bool>,
    realized_edges: HashSet<(u32, u32)>,
    realized_models: Vec<Option<RealizedModel>>,
}

/// Types first seen in one frame with their models, and the type pairs joined by an edge.
type FrameFindings = (Vec<(u32, RealizedModel)>, Vec<(u32, u32)>);

#[derive(Clone, Debug)]
struct RealizedModel {
    succ: Vec<u64>,
    t: Vec<u32>,
    world: usize,
}

type TypesCache = Mutex<HashMap<(SigmaSpec, u32, u32), Arc<SigmaTypes>>>;

/// Cached consistency table for `Σ` over `C_{level,n}`.
pub fn sigma_types(sigma: &SigmaSpec, level: u32, n: u32) -> Result<Arc<SigmaTypes>, CanonicalError> {
    static CACHE: OnceLock<TypesCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (sigma.clone(), level, n);
    if let Some(hit) = cache.lock().expect("types cache").get(&key) {
        return Ok(hit.clone());
    }
    let built = Arc::new(SigmaTypes::build(sigma, level, n)?);
    cache.lock().expect("types cache").insert(key, built.clone());
    Ok(built)
}

impl SigmaTypes {
    fn build(sigma: &SigmaSpec, level: u32, n: u32) -> Result<SigmaTypes, CanonicalError> {
        if sigma.contains(SigmaAxiom::L) && !sigma.is_gl() {
            return Err(CanonicalError::Unsupported(sigma.to_string()));
        }
        let universe = Universe::shared(level, n)?;
        let size = universe.level_size(level);
        let mut out = SigmaTypes {
            level,
            sigma: sigma.clone(),
            universe,
            method: ConsistencyMethod::Elimination,
            consistent: vec![true; size],
            realized_edges: HashSet::new(),
            realized_models: Vec::new(),
        };
        if sigma.within_tb4d() || sigma.is_gl() {
            if level > 0 {
                out.eliminate();
            }
        } else {
            out.realize(realized_bound(sigma));
        }
        Ok(out)
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn sigma(&self) -> &SigmaSpec {
        &self.sigma
    }

    pub fn method(&self) -> ConsistencyMethod {
        self.method
    }

    pub fn is_consistent(&self, id: u32) -> bool {
        self.consistent[id as usize]
    }

    pub fn consistent_ids(&self) -> Vec<u32> {
        (0..self.consistent.len() as u32).filter(|&i| self.consistent[i as usize]).collect()
    }

    /// The accessibility relation between types used by elimination.
    fn related(&self, a: u32, b: u32) -> bool {
        let u = &self.universe;
        let l = self.level;
        let (ma, mb) = (u.member(l, a), u.member(l, b));
        if !ma.has(u.proj(l, b)) {
            return false;
        }
        if self.sigma.is_gl() {
            return mb.s & !ma.s == 0 && mb.s != ma.s;
        }
        let b_in = self.sigma.contains(SigmaAxiom::B);
        let four = self.sigma.contains(SigmaAxiom::Four);
        if b_in && !mb.has(u.proj(l, a)) {
            return false;
        }
        if four && mb.s & !ma.s != 0 {
            return false;
        }
        if b_in && four && ma.s != mb.s {
            return false;
        }
        true
    }

    fn eliminate(&mut self) {
        let u = self.universe.clone();
        let l = self.level;
        let size = u.level_size(l);
        let mut by_proj: Vec<Vec<u32>> = vec![Vec::new(); u.level_size(l - 1)];
        for id in 0..size as u32 {
            by_proj[u.proj(l, id) as usize].push(id);
        }
        for id in 0..size as u32 {
            let m = u.member(l, id);
            let mut ok = true;
            if self.sigma.contains(SigmaAxiom::T) && !m.has(u.proj(l, id)) {
                ok = false;
            }
            if self.sigma.contains(SigmaAxiom::D) && m.s == 0 {
                ok = false;
            }
            self.consistent[id as usize] = ok;
        }
        loop {
            let dropped: Vec<u32> = (0..size as u32)
                .into_par_iter()
                .filter(|&id| {
                    self.consistent[id as usize]
                        && !u.member(l, id).s_ids().all(|beta| {
                            by_proj[beta as usize]
                                .iter()
                                .any(|&g| self.consistent[g as usize] && self.related(id, g))
                        })
                })
                .collect();
            if dropped.is_empty() {
                break;
            }
            for id in dropped {
                self.consistent[id as usize] = false;
            }
        }
    }

    fn realize(&mut self, bound: usize) {
        self.method = ConsistencyMethod::Realized { bound };
        let u = self.universe.clone();
        let l = self.level;
        let n = u.n();
        let atoms = (n + 1) as usize;
        let per_frame: Vec<FrameFindings> = frame_masks(&self.sigma, bound)
            .iter()
            .flat_map(|list| list.iter().cloned().collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .par_iter()
            .map(|succ| {
                let k = succ.len();
                let mut seen = Vec::new();
                let mut edges = HashSet::new();
                let mut local: HashSet<u32> = HashSet::new();
                for code in 0..(1u64 << (atoms * k)) {
                    let t: Vec<u32> = (0..k)
                        .map(|w| {
                            (0..atoms).fold(0u32, |acc, r| acc | ((((code >> (r * k + w)) & 1) as u32) << r))
                        })
                        .collect();
                    let types = world_types(&u, l, succ, &t);
                    for w in 0..k {
                        if local.insert(types[w]) {
                            seen.push((types[w], RealizedModel { succ: succ.clone(), t: t.clone(), world: w }));
                        }
                        for v in (0..k).filter(|v| succ[w] & (1u64 << v) != 0) {
                            edges.insert((types[w], types[v]));
                        }
                    }
                }
                (seen, edges.into_iter().collect())
            })
            .collect();
        let size = u.level_size(l);
        self.consistent = vec![false; size];
        self.realized_models = vec![None; size];
        for (seen, edges) in per_frame {
            for (id, model) in seen {
                if !self.consistent[id as usize] {
                    self.consistent[id as usize] = true;
                    self.realized_models[id as usize] = Some(model);
                }
            }
            self.realized_edges.extend(edges);
        }
    }

    /// Whether `α ∧ ◇β` is `Σ`-consistent for members `α, β` of this level.
    pub fn diamond_consistent(&self, a: u32, b: u32) -> bool {
        if !self.is_consistent(a) || !self.is_consistent(b) {
            return false;
        }
        match self.method {
            ConsistencyMethod::Realized { .. } => self.realized_edges.contains(&(a, b)),
            ConsistencyMethod::Elimination if self.level == 0 => true,
            ConsistencyMethod::Elimination if self.sigma.is_gl() => {
                let u = &self.universe;
                let (ma, mb) = (u.member(self.level, a), u.member(self.level, b));
                ma.has(u.proj(self.level, b)) && mb.s & !ma.s == 0
            }
            ConsistencyMethod::Elimination => self.related(a, b),
        }
    }

    /// A pointed `Σ`-model of a consistent member.
    pub fn witness(&self, id: u32) -> Option<(Frame, AtomValuation, usize)> {
        if !self.is_consistent(id) {
            return None;
        }
        let u = &self.universe;
        if let ConsistencyMethod::Realized { .. } = self.method {
            let m = self.realized_models[id as usize].as_ref()?;
            let frame = Frame::from_masks(&m.succ);
            let val = m.t.iter().map(|t| u.atom_row(*t)).collect();
            return Some((frame, val, m.world));
        }
        if self.level == 0 {
            let mut edges = Vec::new();
            if !self.sigma.is_gl() && !self.sigma.axioms.is_empty() {
                edges.push((0, 0));
            }
            let frame = Frame::new(1, edges).expect("one world");
            return Some((frame, vec![u.atom_row(u.member(0, id).t)], 0));
        }
        let mut order = vec![id];
        let mut slot: HashMap<u32, usize> = HashMap::from([(id, 0)]);
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([id]);
        let candidates = self.consistent_ids();
        while let Some(a) = queue.pop_front() {
            for &b in &candidates {
                if self.related(a, b) {
                    let next = *slot.entry(b).or_insert_with(|| {
                        order.push(b);
                        queue.push_back(b);
                        order.len() - 1
                    });
                    edges.push((slot[&a], next));
                }
            }
        }
        let frame = Frame::new(order.len(), edges).expect("edges stay within the generated worlds");
        let val = order.iter().map(|&g| u.atom_row(u.member(self.level, g).t)).collect();
        Some((frame, val, 0))
    }
}

/// The level-`l` type of every world of a small frame, given each world's atom bits.
pub fn world_types(u: &Universe, l: u32, succ: &[u64], t: &[u32]) -> Vec<u32> {
    let mut types: Vec<u32> = t.to_vec();
    for level in 1..=l {
        types = (0..succ.len())
            .map(|w| {
                let s = (0..succ.len())
                    .filter(|v| succ[w] & (1u64 << v) != 0)
                    .fold(0u64, |acc, v| acc | (1u64 << types[v]));
                u.lookup(level, Member { t: t[w], s }).expect("every type is a member")
            })
            .collect();
    }
    types
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_satisfiable, oracle_valid, OracleConfig};
    use crate::semantics::{check_appropriate, holds, KripkeModel};
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn level0(t: u32, n: u32) -> CanonicalFormula {
        CanonicalFormula { level: 0, n, t, s: vec![] }
    }

    fn level1(t: u32, s: Vec<CanonicalFormula>) -> CanonicalFormula {
        CanonicalFormula { level: 1, n: 0, t, s }
    }

    #[test]
    fn hats() {
        assert_eq!(hat(0b01, 1), p("p0 & !c0"));
        assert_eq!(hat(0, 0), p("!p0"));
        assert_eq!(hat(1, 0), p("p0"));
    }

    #[test]
    fn oplus_shapes() {
        assert_eq!(oplus(&[]), Formula::bot());
        assert_eq!(oplus(&[p("p0")]), Formula::and(p("p0"), Formula::top()));
        assert_eq!(
            oplus(&[p("p0"), p("c0")]),
            Formula::or(Formula::and(p("p0"), p("!c0")), Formula::and(p("c0"), p("!p0")))
        );
        let c00: Vec<Formula> = enumerate_canonical(0, 0).unwrap().iter().map(render_canonical).collect();
        assert!(oracle_valid(&Formula::iff(oplus(&c00), p("p0 | !p0")), &OracleConfig::new(2, SigmaSpec::k())).is_valid());
    }

    #[test]
    fn sizes() {
        assert_eq!(enumerate_canonical(0, 0).unwrap().len(), 2);
        assert_eq!(enumerate_canonical(1, 0).unwrap().len(), 8);
        assert_eq!(enumerate_canonical(1, 1).unwrap().len(), 64);
        assert_eq!(Universe::shared(2, 0).unwrap().level_size(2), 512);
        assert_eq!(size_report(2, 1), "2^64·4");
        assert_eq!(size_report(1, 1), "2^4·4");
        assert!(matches!(
            enumerate_canonical(2, 1),
            Err(CanonicalError::CapExceeded { h: 2, n: 1, ref size, cap: DEFAULT_CAP }) if size == "2^64·4"
        ));
        assert!(matches!(check_cap(5, 3, DEFAULT_CAP), Err(CanonicalError::CapExceeded { h: 1, .. })));
    }

    #[test]
    fn ids_follow_the_lexicographic_order() {
        let all = enumerate_canonical(1, 0).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        let u = Universe::shared(1, 0).unwrap();
        for (i, a) in all.iter().enumerate() {
            assert_eq!(u.id_of(a), Some(i as u32));
        }
        assert_eq!(all[0], level1(0, vec![]));
        assert_eq!(all[1], level1(0, vec![level0(0, 0)]));
        assert_eq!(all[2], level1(0, vec![level0(0, 0), level0(1, 0)]));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_canonical(&level0(1, 0)), p("p0"));
        assert_eq!(render_canonical(&level1(1, vec![])), p("!bot & []bot & p0"));
        assert_eq!(render_canonical(&level1(1, vec![level0(1, 0)])), p("<>p0 & []p0 & p0"));
        let u = Universe::shared(1, 0).unwrap();
        for (i, a) in enumerate_canonical(1, 0).unwrap().iter().enumerate() {
            assert_eq!(u.render(1, i as u32), render_canonical(a));
        }
    }

    #[test]
    fn decisions() {
        let a = level1(1, vec![level0(1, 0)]);
        assert_eq!(canonical_decides(&a, &p("[]p0")), Ok(true));
        assert_eq!(canonical_decides(&level0(1, 0), &p("p0")), Ok(true));
        let dead = level1(1, vec![]);
        assert_eq!(canonical_decides(&dead, &p("<>p0")), Ok(false));
        assert_eq!(canonical_decides(&dead, &p("!<>p0")), Ok(true));
        assert!(matches!(canonical_decides(&dead, &p("[][]p0")), Err(CanonicalError::OutOfLanguage { .. })));
        assert!(matches!(canonical_decides(&dead, &p("c0")), Err(CanonicalError::OutOfLanguage { .. })));
    }

    #[test]
    fn decisions_agree_with_the_oracle() {
        let cfg = OracleConfig::new(3, SigmaSpec::k());
        let probes = ["[]p0", "<>p0", "p0 -> []p0", "[](p0 | !p0)", "<>!p0 & []p0", "[]bot", "<>p0 -> p0"];
        for alpha in enumerate_canonical(1, 0).unwrap() {
            let ra = render_canonical(&alpha);
            for s in probes {
                let f = p(s);
                let expected = oracle_valid(&Formula::implies(ra.clone(), f.clone()), &cfg).is_valid();
                assert_eq!(canonical_decides(&alpha, &f).unwrap(), expected, "{ra} -> {s}");
                assert_ne!(
                    canonical_decides(&alpha, &f).unwrap(),
                    canonical_decides(&alpha, &Formula::not(f)).unwrap()
                );
            }
        }
    }

    #[test]
    fn projections() {
        let u = Universe::shared(1, 1).unwrap();
        for id in 0..64u32 {
            assert_eq!(u.project_by_search(1, id), Ok(u.proj(1, id)));
        }
        let a = level1(1, vec![level0(0, 0), level0(1, 0)]);
        assert_eq!(project(&a), Ok(level0(1, 0)));
        assert_eq!(project(&level1(0, vec![level0(1, 0)])), Ok(level0(0, 0)));
        let u2 = Universe::shared(2, 0).unwrap();
        let matches = u2.projection_matches(2);
        for id in 0..512u32 {
            assert_eq!(matches[id as usize], vec![u2.proj(2, id)]);
        }
    }

    #[test]
    fn consistency_examples() {
        let k = SigmaSpec::k();
        for a in enumerate_canonical(1, 0).unwrap() {
            assert_eq!(sigma_consistent(&a, &k), Ok(true));
        }
        let d = SigmaSpec::parse_list("D").unwrap();
        assert_eq!(sigma_consistent(&level1(1, vec![]), &d), Ok(false));
        let t = SigmaSpec::parse_list("T").unwrap();
        assert_eq!(sigma_consistent(&level0(1, 0), &t), Ok(true));
        assert_eq!(sigma_consistent(&level1(1, vec![level0(0, 0)]), &t), Ok(false));
        assert!(matches!(
            sigma_consistent(&level0(1, 0), &SigmaSpec::parse_list("L,T").unwrap()),
            Err(CanonicalError::Unsupported(_))
        ));
    }

    fn systems() -> Vec<SigmaSpec> {
        let mut out = SigmaSpec::tb4d_subsets();
        out.push(SigmaSpec::gl());
        out
    }

    #[test]
    fn elimination_witnesses_are_genuine() {
        for sigma in systems() {
            for (l, n) in [(1, 0), (1, 1), (2, 0)] {
                let types = sigma_types(&sigma, l, n).unwrap();
                let u = types.universe().clone();
                for id in types.consistent_ids() {
                    let (frame, val, root) = types.witness(id).unwrap();
                    assert!(check_appropriate(&frame, &sigma), "{sigma} {l} {n} {id}");
                    assert!(holds(&frame, &val, root, &u.render(l, id)), "{sigma} {l} {n} {id}");
                }
            }
        }
    }

    #[test]
    fn realized_types_are_consistent() {
        for sigma in systems() {
            for (l, n, bound) in [(1, 0, 4), (1, 1, 3), (2, 0, 3)] {
                let types = sigma_types(&sigma, l, n).unwrap();
                let u = types.universe().clone();
                for list in frame_masks(&sigma, bound) {
                    for succ in list.iter() {
                        let k = succ.len();
                        let atoms = (n + 1) as usize;
                        for code in 0..(1u64 << (atoms * k)) {
                            let t: Vec<u32> = (0..k)
                                .map(|w| (0..atoms).fold(0, |acc, r| acc | ((((code >> (r * k + w)) & 1) as u32) << r)))
                                .collect();
                            let ty = world_types(&u, l, succ, &t);
                            for w in 0..k {
                                assert!(types.is_consistent(ty[w]), "{sigma} {l} {n}");
                                for v in (0..k).filter(|v| succ[w] & (1 << v) != 0) {
                                    assert!(types.diamond_consistent(ty[w], ty[v]), "{sigma} edge");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diamond_consistency_has_models() {
        for sigma in systems() {
            let types = sigma_types(&sigma, 1, 0).unwrap();
            let u = types.universe().clone();
            for a in 0..8u32 {
                for b in 0..8u32 {
                    let f = Formula::and(u.render(1, a), Formula::diamond(u.render(1, b)));
                    let sat = oracle_satisfiable(&f, &OracleConfig::new(4, sigma.clone())).is_some();
                    assert_eq!(types.diamond_consistent(a, b), sat, "{sigma} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn realized_fallback_for_euclidean_systems() {
        let five = SigmaSpec::parse_list("5").unwrap();
        let types = sigma_types(&five, 1, 0).unwrap();
        assert_eq!(types.method(), ConsistencyMethod::Realized { bound: REALIZED_BOUND });
        for id in types.consistent_ids() {
            let (frame, val, w) = types.witness(id).unwrap();
            let m = KripkeModel::for_formulas(&frame, &val, [&types.universe().render(1, id)]).unwrap();
            assert!(crate::semantics::eval(&m, w, &types.universe().render(1, id)).unwrap());
        }
    }
}
