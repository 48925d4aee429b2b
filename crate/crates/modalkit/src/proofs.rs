//! Hilbert-style proofs for the normal systems `KΣ` and `GL`.
//!
//! A proof is a sequence of formulas, each carrying a [`Justification`] that names the
//! clause licensing it. Checking is linear: substitution lines carry their `σ`
//! explicitly and the checker never searches.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse, substitute, Formula, ParseError, Substitution};

/// The extra axiom schemas a normal system may add to `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SigmaAxiom {
    T,
    B,
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "5")]
    Five,
    D,
    #[serde(rename = ".2")]
    Dot2,
    L,
}

impl SigmaAxiom {
    pub const ALL: [SigmaAxiom; 7] = [
        SigmaAxiom::T,
        SigmaAxiom::B,
        SigmaAxiom::Four,
        SigmaAxiom::Five,
        SigmaAxiom::D,
        SigmaAxiom::Dot2,
        SigmaAxiom::L,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SigmaAxiom::T => "T",
            SigmaAxiom::B => "B",
            SigmaAxiom::Four => "4",
            SigmaAxiom::Five => "5",
            SigmaAxiom::D => "D",
            SigmaAxiom::Dot2 => ".2",
            SigmaAxiom::L => "L",
        }
    }
}

impl fmt::Display for SigmaAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown axiom name {0:?}")]
pub struct UnknownAxiom(pub String);

impl FromStr for SigmaAxiom {
    type Err = UnknownAxiom;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "T" => Ok(SigmaAxiom::T),
            "B" => Ok(SigmaAxiom::B),
            "4" => Ok(SigmaAxiom::Four),
            "5" => Ok(SigmaAxiom::Five),
            "D" => Ok(SigmaAxiom::D),
            ".2" => Ok(SigmaAxiom::Dot2),
            "L" => Ok(SigmaAxiom::L),
            other => Err(UnknownAxiom(other.to_string())),
        }
    }
}

/// A set of extra schemas. The empty set is `K`; `{L}` is `GL`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SigmaSpec {
    pub axioms: BTreeSet<SigmaAxiom>,
}

impl SigmaSpec {
    pub fn k() -> SigmaSpec {
        SigmaSpec::default()
    }

    pub fn gl() -> SigmaSpec {
        SigmaSpec::from_axioms([SigmaAxiom::L])
    }

    pub fn from_axioms<I: IntoIterator<Item = SigmaAxiom>>(axioms: I) -> SigmaSpec {
        SigmaSpec {
            axioms: axioms.into_iter().collect(),
        }
    }

    pub fn contains(&self, a: SigmaAxiom) -> bool {
        self.axioms.contains(&a)
    }

    pub fn is_gl(&self) -> bool {
        self.axioms.len() == 1 && self.contains(SigmaAxiom::L)
    }

    /// True for `Σ ⊆ {T, B, 4, D}`.
    pub fn within_tb4d(&self) -> bool {
        self.axioms.iter().all(|a| {
            matches!(a, SigmaAxiom::T | SigmaAxiom::B | SigmaAxiom::Four | SigmaAxiom::D)
        })
    }

    pub fn is_subset(&self, other: &SigmaSpec) -> bool {
        self.axioms.is_subset(&other.axioms)
    }

    /// All sixteen subsets of `{T, B, 4, D}` in a fixed order.
    pub fn tb4d_subsets() -> Vec<SigmaSpec> {
        let base = [SigmaAxiom::T, SigmaAxiom::B, SigmaAxiom::Four, SigmaAxiom::D];
        (0u32..16)
            .map(|mask| {
                SigmaSpec::from_axioms(
                    base.iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, a)| *a),
                )
            })
            .collect()
    }

    /// Parses a comma list such as `T,4` or `.2`; the empty string is `K`.
    pub fn parse_list(s: &str) -> Result<SigmaSpec, UnknownAxiom> {
        let mut axioms = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            axioms.insert(part.parse()?);
        }
        Ok(SigmaSpec { axioms })
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.axioms.is_empty() {
            return f.write_str("K");
        }
        if self.is_gl() {
            return f.write_str("GL");
        }
        let names: Vec<&str> = self.axioms.iter().map(|a| a.label()).collect();
        write!(f, "K{}", names.join(""))
    }
}

/// The axioms shared by every system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseAxiom {
    PL1,
    PL2,
    PL3,
    K,
}

impl BaseAxiom {
    pub const ALL: [BaseAxiom; 4] = [BaseAxiom::PL1, BaseAxiom::PL2, BaseAxiom::PL3, BaseAxiom::K];
}

/// Either kind of axiom, for [`axiom_formula`] and [`instantiate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    Base(BaseAxiom),
    Sigma(SigmaAxiom),
}

const SCHEMAS: [(AxiomId, &str); 11] = [
    (AxiomId::Base(BaseAxiom::PL1), "p0 -> p1 -> p0"),
    (AxiomId::Base(BaseAxiom::PL2), "(p0 -> p1 -> p2) -> (p0 -> p1) -> p0 -> p2"),
    (AxiomId::Base(BaseAxiom::PL3), "(!p0 -> !p1) -> p1 -> p0"),
    (AxiomId::Base(BaseAxiom::K), "[](p0 -> p1) -> []p0 -> []p1"),
    (AxiomId::Sigma(SigmaAxiom::T), "[]p0 -> p0"),
    (AxiomId::Sigma(SigmaAxiom::B), "p0 -> []<>p0"),
    (AxiomId::Sigma(SigmaAxiom::D), "[]p0 -> <>p0"),
    (AxiomId::Sigma(SigmaAxiom::Four), "[]p0 -> [][]p0"),
    (AxiomId::Sigma(SigmaAxiom::Five), "<>p0 -> []<>p0"),
    (AxiomId::Sigma(SigmaAxiom::Dot2), "<>[]p0 -> []<>p0"),
    (AxiomId::Sigma(SigmaAxiom::L), "[]([]p0 -> p0) -> []p0"),
];

/// The schematic formula of an axiom over the fixed variables `p0, p1, p2`.
pub fn axiom_formula(which: AxiomId) -> Formula {
    let text = SCHEMAS
        .iter()
        .find(|(id, _)| *id == which)
        .map(|(_, t)| *t)
        .expect("every axiom id has a schema");
    parse(text).expect("axiom schemas are well formed")
}

/// Why a line is in the proof.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Justification {
    Premise,
    SigmaAxiom { ax: SigmaAxiom },
    BaseAxiom { ax: BaseAxiom },
    /// Line `j` must be `line_i → current`.
    ModusPonens { i: usize, j: usize },
    Necessitation { i: usize },
    UniformSub { i: usize, sigma: Substitution },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLine {
    #[serde(rename = "f")]
    pub formula: Formula,
    #[serde(rename = "j")]
    pub justification: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertProof {
    pub lines: Vec<ProofLine>,
}

impl HilbertProof {
    pub fn new() -> HilbertProof {
        HilbertProof::default()
    }

    /// Appends a line and returns its index.
    pub fn push(&mut self, formula: Formula, justification: Justification) -> usize {
        self.lines.push(ProofLine { formula, justification });
        self.lines.len() - 1
    }

    pub fn last(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Appends `other`, shifting its line references past the current end.
    pub fn append(&mut self, other: &HilbertProof) {
        let offset = self.lines.len();
        for line in &other.lines {
            let justification = match &line.justification {
                Justification::ModusPonens { i, j } => Justification::ModusPonens { i: i + offset, j: j + offset },
                Justification::Necessitation { i } => Justification::Necessitation { i: i + offset },
                Justification::UniformSub { i, sigma } => Justification::UniformSub { i: i + offset, sigma: sigma.clone() },
                other => other.clone(),
            };
            self.lines.push(ProofLine { formula: line.formula.clone(), justification });
        }
    }
}

/// The clause a failing line violated.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LineFailure {
    #[error("formula is not among the premises")]
    NotPremise,
    #[error("axiom {0} is not part of the system")]
    AxiomNotInSystem(SigmaAxiom),
    #[error("formula is not the schematic form of the cited axiom")]
    AxiomMismatch,
    #[error("cited line {0} does not strictly precede this line")]
    ForwardReference(usize),
    #[error("line {j} is not line {i} -> current formula")]
    ModusPonensShape { i: usize, j: usize },
    #[error("formula is not the necessitation of line {0}")]
    NecessitationShape(usize),
    #[error("substitution domain contains variables absent from line {0}")]
    SubstitutionDomain(usize),
    #[error("formula is not the substitution instance of line {0}")]
    SubstitutionShape(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("proof is empty")]
    Empty,
    #[error("line {line}: {failure}")]
    Line { line: usize, failure: LineFailure },
    #[error("no line of the proof has the form ψ1∧…∧ψn → φ with every ψi a premise")]
    NoMatchingLine,
    #[error("proof text: {0}")]
    Format(String),
}

fn check_line(sigma: &SigmaSpec, gamma: &[Formula], lines: &[ProofLine], k: usize) -> Result<(), LineFailure> {
    let current = &lines[k].formula;
    let earlier = |i: usize| -> Result<&Formula, LineFailure> {
        if i < k {
            Ok(&lines[i].formula)
        } else {
            Err(LineFailure::ForwardReference(i))
        }
    };
    match &lines[k].justification {
        Justification::Premise => {
            if gamma.contains(current) {
                Ok(())
            } else {
                Err(LineFailure::NotPremise)
            }
        }
        Justification::SigmaAxiom { ax } => {
            if !sigma.contains(*ax) {
                Err(LineFailure::AxiomNotInSystem(*ax))
            } else if *current != axiom_formula(AxiomId::Sigma(*ax)) {
                Err(LineFailure::AxiomMismatch)
            } else {
                Ok(())
            }
        }
        Justification::BaseAxiom { ax } => {
            if *current == axiom_formula(AxiomId::Base(*ax)) {
                Ok(())
            } else {
                Err(LineFailure::AxiomMismatch)
            }
        }
        Justification::ModusPonens { i, j } => {
            let a = earlier(*i)?;
            let ab = earlier(*j)?;
            match ab {
                Formula::Implies(x, y) if **x == *a && **y == *current => Ok(()),
                _ => Err(LineFailure::ModusPonensShape { i: *i, j: *j }),
            }
        }
        Justification::Necessitation { i } => {
            let a = earlier(*i)?;
            match current {
                Formula::Box(x) if **x == *a => Ok(()),
                _ => Err(LineFailure::NecessitationShape(*i)),
            }
        }
        Justification::UniformSub { i, sigma: s } => {
            let a = earlier(*i)?;
            if !s.domain().is_subset(&a.vars()) {
                return Err(LineFailure::SubstitutionDomain(*i));
            }
            if substitute(s, a) == *current {
                Ok(())
            } else {
                Err(LineFailure::SubstitutionShape(*i))
            }
        }
    }
}

/// Checks every line against the proof clauses; reports the first failure.
pub fn check_proof(sigma: &SigmaSpec, gamma: &[Formula], proof: &HilbertProof) -> Result<(), ProofError> {
    if proof.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    for k in 0..proof.lines.len() {
        check_line(sigma, gamma, &proof.lines, k).map_err(|failure| ProofError::Line { line: k, failure })?;
    }
    Ok(())
}

/// True when `f` is the left fold `ψ1 ∧ … ∧ ψn` (n ≥ 1) of premises.
fn is_premise_conjunction(f: &Formula, gamma: &[Formula]) -> bool {
    if gamma.contains(f) {
        return true;
    }
    match f.as_and() {
        Some((rest, last)) => gamma.contains(last) && is_premise_conjunction(rest, gamma),
        None => false,
    }
}

/// Accepts when the proof checks from no premises and some line is `ψ1∧…∧ψn → φ` with each
/// `ψi ∈ Γ`. A bare `φ` line, or `⊤ → φ`, counts as the case `n = 0`.
pub fn check_provability_certificate(
    sigma: &SigmaSpec,
    gamma: &[Formula],
    phi: &Formula,
    proof: &HilbertProof,
) -> Result<(), ProofError> {
    check_proof(sigma, &[], proof)?;
    let top = Formula::top();
    let found = proof.lines.iter().any(|line| {
        let f = &line.formula;
        if f == phi {
            return true;
        }
        match f {
            Formula::Implies(lhs, rhs) if **rhs == *phi => **lhs == top || is_premise_conjunction(lhs, gamma),
            _ => false,
        }
    });
    if found {
        Ok(())
    } else {
        Err(ProofError::NoMatchingLine)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("modus ponens needs the second proof to end in {expected}")]
    MpShape { expected: String },
    #[error("empty proof given to a builder")]
    Empty,
    #[error("substitution binds variables outside the axiom")]
    Domain,
}

/// Combines a proof of `A` and a proof of `A → B` into a proof of `B`.
pub fn mp(proof_a: &HilbertProof, proof_ab: &HilbertProof) -> Result<HilbertProof, BuildError> {
    let a = proof_a.last().ok_or(BuildError::Empty)?.clone();
    let ab = proof_ab.last().ok_or(BuildError::Empty)?.clone();
    let b = match &ab {
        Formula::Implies(x, y) if **x == a => (**y).clone(),
        _ => {
            return Err(BuildError::MpShape {
                expected: format!("{a} -> ..."),
            })
        }
    };
    let mut out = proof_a.clone();
    let i = out.len() - 1;
    out.append(proof_ab);
    let j = out.len() - 1;
    out.push(b, Justification::ModusPonens { i, j });
    Ok(out)
}

/// Extends a proof of `A` to a proof of `□A`.
pub fn nec(proof: &HilbertProof) -> Result<HilbertProof, BuildError> {
    let a = proof.last().ok_or(BuildError::Empty)?.clone();
    let mut out = proof.clone();
    let i = out.len() - 1;
    out.push(Formula::boxed(a), Justification::Necessitation { i });
    Ok(out)
}

/// The axiom line followed by its instance under `σ`.
pub fn instantiate(which: AxiomId, sigma: &Substitution) -> Result<HilbertProof, BuildError> {
    let schema = axiom_formula(which);
    if !sigma.domain().is_subset(&schema.vars()) {
        return Err(BuildError::Domain);
    }
    let mut out = HilbertProof::new();
    let justification = match which {
        AxiomId::Base(ax) => Justification::BaseAxiom { ax },
        AxiomId::Sigma(ax) => Justification::SigmaAxiom { ax },
    };
    out.push(schema.clone(), justification);
    out.push(substitute(sigma, &schema), Justification::UniformSub { i: 0, sigma: sigma.clone() });
    Ok(out)
}

/// Extends a proof whose last line is `θ` with the instance `σ(θ)`.
pub fn substitute_last(proof: &HilbertProof, sigma: &Substitution) -> Result<HilbertProof, BuildError> {
    let last = proof.last().ok_or(BuildError::Empty)?.clone();
    let mut out = proof.clone();
    let i = out.len() - 1;
    let restricted: Substitution = sigma
        .map
        .iter()
        .filter(|(v, _)| last.vars().contains(v))
        .map(|(v, f)| (*v, f.clone()))
        .collect();
    out.push(substitute(&restricted, &last), Justification::UniformSub { i, sigma: restricted });
    Ok(out)
}

/// The textual proof format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDocument {
    #[serde(default)]
    pub sigma: Vec<SigmaAxiom>,
    #[serde(default)]
    pub gamma: Vec<Formula>,
    pub lines: Vec<ProofLine>,
}

impl ProofDocument {
    pub fn from_json(text: &str) -> Result<ProofDocument, ProofError> {
        serde_json::from_str(text).map_err(|e| ProofError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof documents serialize")
    }

    pub fn sigma_spec(&self) -> SigmaSpec {
        SigmaSpec::from_axioms(self.sigma.iter().copied())
    }

    pub fn proof(&self) -> HilbertProof {
        HilbertProof { lines: self.lines.clone() }
    }

    pub fn check(&self) -> Result<(), ProofError> {
        check_proof(&self.sigma_spec(), &self.gamma, &self.proof())
    }
}

impl From<ParseError> for ProofError {
    fn from(e: ParseError) -> Self {
        ProofError::Format(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn schemas_match_the_axiom_list() {
        assert_eq!(axiom_formula(AxiomId::Base(BaseAxiom::K)), p("[](p0 -> p1) -> ([]p0 -> []p1)"));
        assert_eq!(axiom_formula(AxiomId::Sigma(SigmaAxiom::T)), p("[]p0 -> p0"));
        assert_eq!(axiom_formula(AxiomId::Sigma(SigmaAxiom::L)), p("[]([]p0 -> p0) -> []p0"));
        assert_eq!(
            axiom_formula(AxiomId::Base(BaseAxiom::PL2)),
            p("(p0 -> (p1 -> p2)) -> ((p0 -> p1) -> (p0 -> p2))")
        );
        assert_eq!(axiom_formula(AxiomId::Base(BaseAxiom::PL3)), p("(!p0 -> !p1) -> (p1 -> p0)"));
    }

    #[test]
    fn single_axiom_line() {
        let mut proof = HilbertProof::new();
        proof.push(p("[](p0 -> p1) -> ([]p0 -> []p1)"), Justification::BaseAxiom { ax: BaseAxiom::K });
        assert_eq!(check_proof(&SigmaSpec::k(), &[], &proof), Ok(()));
    }

    #[test]
    fn necessitation_of_premise() {
        let mut proof = HilbertProof::new();
        proof.push(p("p0"), Justification::Premise);
        proof.push(p("[]p0"), Justification::Necessitation { i: 0 });
        assert_eq!(check_proof(&SigmaSpec::k(), &[p("p0")], &proof), Ok(()));
        assert_eq!(
            check_proof(&SigmaSpec::k(), &[], &proof),
            Err(ProofError::Line { line: 0, failure: LineFailure::NotPremise })
        );
    }

    #[test]
    fn substitution_line() {
        let mut proof = HilbertProof::new();
        proof.push(p("[]p0 -> p0"), Justification::SigmaAxiom { ax: SigmaAxiom::T });
        proof.push(
            p("[](p1 -> p1) -> (p1 -> p1)"),
            Justification::UniformSub { i: 0, sigma: Substitution::new().with(0, p("p1 -> p1")) },
        );
        let t = SigmaSpec::from_axioms([SigmaAxiom::T]);
        assert_eq!(check_proof(&t, &[], &proof), Ok(()));
        assert_eq!(
            check_proof(&SigmaSpec::k(), &[], &proof),
            Err(ProofError::Line { line: 0, failure: LineFailure::AxiomNotInSystem(SigmaAxiom::T) })
        );
    }

    #[test]
    fn substitution_domain_must_lie_in_the_source_line() {
        let mut proof = HilbertProof::new();
        proof.push(p("[]p0 -> p0"), Justification::SigmaAxiom { ax: SigmaAxiom::T });
        proof.push(
            p("[]p0 -> p0"),
            Justification::UniformSub { i: 0, sigma: Substitution::new().with(5, p("p1")) },
        );
        let t = SigmaSpec::from_axioms([SigmaAxiom::T]);
        assert_eq!(
            check_proof(&t, &[], &proof),
            Err(ProofError::Line { line: 1, failure: LineFailure::SubstitutionDomain(0) })
        );
    }

    #[test]
    fn rejects_forward_and_malformed_references() {
        let mut proof = HilbertProof::new();
        proof.push(p("[]p0"), Justification::Necessitation { i: 0 });
        assert_eq!(
            check_proof(&SigmaSpec::k(), &[], &proof),
            Err(ProofError::Line { line: 0, failure: LineFailure::ForwardReference(0) })
        );
        let mut bad_mp = HilbertProof::new();
        bad_mp.push(p("p0 -> p1 -> p0"), Justification::BaseAxiom { ax: BaseAxiom::PL1 });
        bad_mp.push(p("p1"), Justification::ModusPonens { i: 0, j: 0 });
        assert!(matches!(
            check_proof(&SigmaSpec::k(), &[], &bad_mp),
            Err(ProofError::Line { line: 1, failure: LineFailure::ModusPonensShape { .. } })
        ));
        assert_eq!(check_proof(&SigmaSpec::k(), &[], &HilbertProof::new()), Err(ProofError::Empty));
    }

    fn identity_proof() -> HilbertProof {
        let pl2 = instantiate(
            AxiomId::Base(BaseAxiom::PL2),
            &Substitution::new().with(1, p("p0 -> p0")).with(2, p("p0")),
        )
        .unwrap();
        let pl1a = instantiate(AxiomId::Base(BaseAxiom::PL1), &Substitution::new().with(1, p("p0 -> p0"))).unwrap();
        let step = mp(&pl1a, &pl2).unwrap();
        let pl1b = instantiate(AxiomId::Base(BaseAxiom::PL1), &Substitution::new().with(1, p("p0"))).unwrap();
        mp(&pl1b, &step).unwrap()
    }

    #[test]
    fn builders_produce_checked_proofs() {
        let id = identity_proof();
        assert_eq!(id.last(), Some(&p("p0 -> p0")));
        assert_eq!(check_proof(&SigmaSpec::k(), &[], &id), Ok(()));

        let t = SigmaSpec::from_axioms([SigmaAxiom::T]);
        let inst = instantiate(AxiomId::Sigma(SigmaAxiom::T), &Substitution::new().with(0, p("[]p0"))).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.last(), Some(&p("[][]p0 -> []p0")));
        assert_eq!(check_proof(&t, &[], &inst), Ok(()));

        let boxed = nec(&instantiate(AxiomId::Sigma(SigmaAxiom::T), &Substitution::new()).unwrap()).unwrap();
        assert_eq!(boxed.last(), Some(&p("[]([]p0 -> p0)")));
        assert_eq!(check_proof(&t, &[], &boxed), Ok(()));

        let a = substitute_last(&id, &Substitution::new().with(0, p("[]p1"))).unwrap();
        let aa = substitute_last(&id, &Substitution::new().with(0, p("[]p1 -> []p1"))).unwrap();
        let back = mp(&a, &aa).unwrap();
        assert_eq!(back.last(), Some(&p("[]p1 -> []p1")));
        assert_eq!(check_proof(&SigmaSpec::k(), &[], &back), Ok(()));

        assert!(matches!(mp(&id, &id), Err(BuildError::MpShape { .. })));
        assert_eq!(
            instantiate(AxiomId::Sigma(SigmaAxiom::T), &Substitution::new().with(3, p("p0"))),
            Err(BuildError::Domain)
        );
    }

    #[test]
    fn provability_certificates() {
        let k = p("[](p0 -> p1) -> ([]p0 -> []p1)");
        let mut bare = HilbertProof::new();
        bare.push(k.clone(), Justification::BaseAxiom { ax: BaseAxiom::K });
        assert_eq!(check_provability_certificate(&SigmaSpec::k(), &[], &k, &bare), Ok(()));

        let wrapped = {
            let top_to_k = instantiate(
                AxiomId::Base(BaseAxiom::PL1),
                &Substitution::new().with(0, k.clone()).with(1, Formula::top()),
            )
            .unwrap();
            mp(&bare, &top_to_k).unwrap()
        };
        assert_eq!(wrapped.last(), Some(&Formula::implies(Formula::top(), k.clone())));
        assert_eq!(check_provability_certificate(&SigmaSpec::k(), &[], &k, &wrapped), Ok(()));

        let id = identity_proof();
        assert_eq!(check_provability_certificate(&SigmaSpec::k(), &[p("p0")], &p("p0"), &id), Ok(()));

        let mut forged = HilbertProof::new();
        forged.push(p("p0 -> []p0"), Justification::BaseAxiom { ax: BaseAxiom::K });
        assert!(matches!(
            check_provability_certificate(&SigmaSpec::k(), &[p("p0")], &p("[]p0"), &forged),
            Err(ProofError::Line { line: 0, failure: LineFailure::AxiomMismatch })
        ));
        assert_eq!(
            check_provability_certificate(&SigmaSpec::k(), &[p("p1")], &p("p0"), &id),
            Err(ProofError::NoMatchingLine)
        );
    }

    #[test]
    fn premise_conjunctions_follow_the_left_fold() {
        let gamma = [p("p0"), p("p1"), p("p2")];
        let c = Formula::conj(gamma.iter().cloned());
        assert!(is_premise_conjunction(&c, &gamma));
        assert!(!is_premise_conjunction(&Formula::and(p("p0"), p("p3")), &gamma));
    }

    #[test]
    fn monotone_in_gamma_and_sigma() {
        let mut proof = HilbertProof::new();
        proof.push(p("p0"), Justification::Premise);
        proof.push(p("[]p0"), Justification::Necessitation { i: 0 });
        proof.push(p("[]p0 -> p0"), Justification::SigmaAxiom { ax: SigmaAxiom::T });
        let t = SigmaSpec::from_axioms([SigmaAxiom::T]);
        let t4 = SigmaSpec::from_axioms([SigmaAxiom::T, SigmaAxiom::Four]);
        assert_eq!(check_proof(&t, &[p("p0")], &proof), Ok(()));
        assert_eq!(check_proof(&t4, &[p("p0"), p("p1")], &proof), Ok(()));
    }

    #[test]
    fn json_document_round_trip() {
        let text = r#"{"sigma":["T","4"],"gamma":["p0"],"lines":[
            {"f":"[]p0 -> p0","j":{"kind":"SigmaAxiom","ax":"T"}},
            {"f":"p0","j":{"kind":"Premise"}},
            {"f":"[]p0","j":{"kind":"Necessitation","i":1}},
            {"f":"[][]p1 -> []p1","j":{"kind":"UniformSub","i":0,"sigma":{"p0":"[]p1"}}}
        ]}"#;
        let doc = ProofDocument::from_json(text).unwrap();
        assert_eq!(doc.sigma_spec(), SigmaSpec::from_axioms([SigmaAxiom::T, SigmaAxiom::Four]));
        assert_eq!(doc.check(), Ok(()));
        let again = ProofDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn sigma_lists() {
        assert_eq!(SigmaSpec::parse_list("").unwrap(), SigmaSpec::k());
        assert_eq!(
            SigmaSpec::parse_list("T, 4,.2").unwrap(),
            SigmaSpec::from_axioms([SigmaAxiom::T, SigmaAxiom::Four, SigmaAxiom::Dot2])
        );
        assert!(SigmaSpec::parse_list("X").is_err());
        assert_eq!(SigmaSpec::tb4d_subsets().len(), 16);
        assert_eq!(SigmaSpec::gl().to_string(), "GL");
        assert_eq!(SigmaSpec::parse_list("4,T").unwrap().to_string(), "KT4");
    }
}
