//! Consistency and validity for `KΣ` and `GL`.
//!
//! For `Σ ⊆ {T, B, 4, D}` and for `GL`, a formula is consistent exactly when the weak model
//! over `C_{h+1,n}` has a root, and that model is the witness. Everything else, including
//! queries whose universe exceeds the enumeration cap, is answered by the bounded oracle.

use std::fmt;

use thiserror::Error;

use crate::canonical::CanonicalError;
use crate::oracle::{oracle_satisfiable, OracleConfig};
use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::semantics::{AtomValuation, Frame};
use crate::syntax::{height, order, Formula};
use crate::weakmodel::{build_weak_model, WeakModelError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Route {
    Pipeline { level: u32, n: u32 },
    /// `certified` is false when a negative answer only reflects the world bound.
    Oracle { max_worlds: usize, certified: bool },
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Pipeline { .. } => "canonical-pipeline",
            Route::Oracle { certified: true, .. } => "oracle",
            Route::Oracle { certified: false, .. } => "oracle-bounded",
        }
    }

    pub fn certified(&self) -> bool {
        !matches!(self, Route::Oracle { certified: false, .. })
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::Pipeline { level, n } => write!(f, "canonical-pipeline over C_{{{level},{n}}}"),
            Route::Oracle { max_worlds, .. } => write!(f, "{} up to {max_worlds} worlds", self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub frame: Frame,
    pub val: AtomValuation,
    pub world: usize,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub holds: bool,
    pub route: Route,
    /// A model of `φ` for consistency, a countermodel for validity.
    pub witness: Option<PointedModel>,
    /// Set when the pipeline was skipped because the universe exceeded the cap.
    pub cap_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("L cannot be combined with other axioms; use GL on its own")]
    MixedL,
    #[error(transparent)]
    WeakModel(#[from] WeakModelError),
}

/// Whether `φ` is `Σ`-consistent.
pub fn decide_consistent(f: &Formula, sigma: &SigmaSpec, max_worlds: usize) -> Result<Decision, DecideError> {
    if sigma.contains(SigmaAxiom::L) && !sigma.is_gl() {
        return Err(DecideError::MixedL);
    }
    if !(sigma.within_tb4d() || sigma.is_gl()) {
        return Ok(oracle_route(f, sigma, max_worlds, None));
    }
    match build_weak_model(f, sigma) {
        Ok(m) => Ok(Decision {
            holds: true,
            route: Route::Pipeline { level: m.level, n: m.n },
            witness: Some(PointedModel {
                world: m.roots[0],
                frame: m.frame,
                val: m.atom_val,
            }),
            cap_note: None,
        }),
        Err(WeakModelError::Inconsistent { .. }) => Ok(Decision {
            holds: false,
            route: Route::Pipeline {
                level: height(f) + 1,
                n: order(f),
            },
            witness: None,
            cap_note: None,
        }),
        Err(WeakModelError::Canonical(e @ CanonicalError::CapExceeded { .. })) => {
            Ok(oracle_route(f, sigma, max_worlds, Some(e.to_string())))
        }
        Err(e) => Err(e.into()),
    }
}

/// Whether `φ` is a theorem, decided as the inconsistency of `¬φ`.
pub fn decide_valid(f: &Formula, sigma: &SigmaSpec, max_worlds: usize) -> Result<Decision, DecideError> {
    let d = decide_consistent(&Formula::not(f.clone()), sigma, max_worlds)?;
    Ok(Decision { holds: !d.holds, ..d })
}

fn oracle_route(f: &Formula, sigma: &SigmaSpec, max_worlds: usize, cap_note: Option<String>) -> Decision {
    let found = oracle_satisfiable(f, &OracleConfig::new(max_worlds, sigma.clone()));
    Decision {
        holds: found.is_some(),
        route: Route::Oracle {
            max_worlds,
            certified: found.is_some(),
        },
        witness: found.map(|w| PointedModel {
            frame: w.model.frame.clone(),
            val: w.model.atom_val.clone(),
            world: w.world,
        }),
        cap_note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_valid;
    use crate::semantics::{check_appropriate, holds};
    use crate::syntax::{enumerate_formulas, parse, Atom};

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn textbook_theorems() {
        let cases = [
            ("[]p0 -> p0", "T", true),
            ("[]p0 -> p0", "", false),
            ("[]p0 -> [][]p0", "4", true),
            ("p0 -> []<>p0", "B", true),
            ("[]p0 -> <>p0", "D", true),
            ("[]p0 -> <>p0", "4", false),
            ("<>p0 -> []<>p0", "5", true),
            ("<>[]p0 -> []<>p0", ".2", true),
            ("[]([]p0 -> p0) -> []p0", "L", true),
            ("[]p0 -> p0", "L", false),
        ];
        for (f, s, expected) in cases {
            let d = decide_valid(&p(f), &SigmaSpec::parse_list(s).unwrap(), 3).unwrap();
            assert_eq!(d.holds, expected, "{f} in {s}");
            assert_eq!(d.witness.is_some(), !expected);
        }
    }

    #[test]
    fn routes() {
        let t = SigmaSpec::parse_list("T").unwrap();
        let d = decide_consistent(&p("<>p0 & []!p0"), &t, 2).unwrap();
        assert!(!d.holds && d.route.certified());
        assert_eq!(d.route, Route::Pipeline { level: 2, n: 0 });
        let d = decide_valid(&p("!(p0 & !p0)"), &SigmaSpec::k(), 2).unwrap();
        assert!(d.holds);
        assert_eq!(d.route.name(), "canonical-pipeline");

        let lob = p("[]([]p0 -> p0) -> []p0");
        let d = decide_valid(&lob, &SigmaSpec::k(), 3).unwrap();
        assert!(!d.holds && d.cap_note.is_some());
        assert_eq!(d.route.name(), "oracle");
        let w = d.witness.unwrap();
        assert_eq!(w.frame.edges(), vec![(0, 0)]);
        assert!(!w.val[0][&Atom::Var(0)]);
        let d = decide_valid(&lob, &SigmaSpec::gl(), 3).unwrap();
        assert!(d.holds);
        assert_eq!(d.route.name(), "oracle-bounded");

        let five = SigmaSpec::parse_list("5").unwrap();
        assert_eq!(decide_valid(&p("<>p0 -> []<>p0"), &five, 3).unwrap().route.name(), "oracle-bounded");
        let mixed = SigmaSpec::parse_list("T,L").unwrap();
        assert_eq!(decide_valid(&p("p0"), &mixed, 3).unwrap_err(), DecideError::MixedL);
    }

    #[test]
    fn witnesses_force_the_formula_and_agree_with_oracle() {
        let mut systems: Vec<SigmaSpec> = ["", "T", "B", "4", "D", "T,B,4", "5", "4,5"]
            .into_iter()
            .map(|s| SigmaSpec::parse_list(s).unwrap())
            .collect();
        systems.push(SigmaSpec::gl());
        let corpus = enumerate_formulas(&[Atom::Var(0), Atom::Bottom], 1, 5);
        for sigma in systems {
            for f in &corpus {
                let d = decide_consistent(f, &sigma, 3).unwrap();
                let o = oracle_valid(&Formula::not(f.clone()), &OracleConfig::new(3, sigma.clone()));
                assert_eq!(d.holds, !o.is_valid(), "{f} in {sigma}");
                if let Some(w) = d.witness {
                    assert!(check_appropriate(&w.frame, &sigma), "{f} in {sigma}");
                    assert!(holds(&w.frame, &w.val, w.world, f), "{f} in {sigma}");
                }
            }
        }
    }
}
