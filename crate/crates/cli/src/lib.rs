//! Command implementations behind the `modalkit` binary.
//!
//! Every command returns an [`Outcome`] holding the text to print and the exit code, so the
//! binary only parses arguments and writes output. Exit codes depend on the verdict alone:
//! `0` affirmative, `1` negative, `2` for usage or internal errors ([`CliError`]).

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use modalkit::canonical::{check_cap, sigma_types, CanonicalError, Universe, DEFAULT_CAP};
use modalkit::decide::{decide_consistent, decide_valid, DecideError, PointedModel};
use modalkit::foltrans::{frame_condition, standard_translation, FolError};
use modalkit::oracle::{oracle_satisfiable, oracle_valid, OracleConfig, OracleVerdict};
use modalkit::proofs::{check_proof, check_provability_certificate, ProofDocument, SigmaSpec};
use modalkit::semantics::{to_dot, ModelDocument};
use modalkit::syntax::{height, order, parse, render, Formula, ParseError};
use modalkit::weakmodel::{build_s_model, build_weak_model, verify_weak_model, WeakModelError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("formula: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    WeakModel(#[from] WeakModelError),
    #[error(transparent)]
    Fol(#[from] FolError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Text for standard output and the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    fn new(affirmative: bool, stdout: String) -> Outcome {
        Outcome {
            code: if affirmative { 0 } else { 1 },
            stdout,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Valid,
    Sat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Emit {
    Text,
    Json,
    Dot,
}

/// `--gl` wins over `--sigma`; an absent list is `K`.
pub fn system(sigma: Option<&str>, gl: bool) -> Result<SigmaSpec, CliError> {
    if gl {
        return Ok(SigmaSpec::gl());
    }
    SigmaSpec::parse_list(sigma.unwrap_or("")).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_parse(text: &str) -> Result<Outcome, CliError> {
    let f = parse(text)?;
    Ok(Outcome::new(
        true,
        format!("{}\nheight {} order {}\n", render(&f), height(&f), order(&f)),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub world: usize,
    pub model: ModelDocument,
}

impl From<&PointedModel> for Witness {
    fn from(w: &PointedModel) -> Witness {
        Witness {
            world: w.world,
            model: ModelDocument::from_model(&w.frame, &w.val, None),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    pub cap: usize,
    pub max_worlds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionReport {
    pub formula: String,
    pub system: String,
    pub verdict: &'static str,
    pub route: &'static str,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub bounds: Bounds,
}

impl DecisionReport {
    pub fn affirmative(&self) -> bool {
        matches!(self.verdict, "valid" | "consistent")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} is {} in {}\nroute: {}{}\n",
            self.formula,
            self.verdict,
            self.system,
            self.route,
            if self.certified { "" } else { " (not certified)" }
        );
        if let Some(note) = &self.bounds.note {
            let _ = writeln!(out, "note: {note}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness at world {}:\n{}", w.world, w.model.to_json());
        }
        out
    }
}

/// Decides validity or consistency of `φ`.
pub fn cmd_decide(phi: &Formula, sigma: &SigmaSpec, mode: Mode, max_worlds: usize) -> Result<DecisionReport, CliError> {
    let d = match mode {
        Mode::Valid => decide_valid(phi, sigma, max_worlds)?,
        Mode::Sat => decide_consistent(phi, sigma, max_worlds)?,
    };
    let verdict = match (mode, d.holds) {
        (Mode::Valid, true) => "valid",
        (Mode::Valid, false) => "invalid",
        (Mode::Sat, true) => "consistent",
        (Mode::Sat, false) => "inconsistent",
    };
    let (level, n) = match d.route {
        modalkit::decide::Route::Pipeline { level, n } => (Some(level), Some(n)),
        modalkit::decide::Route::Oracle { .. } => (None, None),
    };
    Ok(DecisionReport {
        formula: render(phi),
        system: sigma.to_string(),
        verdict,
        route: d.route.name(),
        certified: d.route.certified(),
        witness: d.witness.as_ref().map(Witness::from),
        bounds: Bounds {
            cap: DEFAULT_CAP,
            max_worlds,
            level,
            n,
            note: d.cap_note,
        },
    })
}

pub fn decide_outcome(report: &DecisionReport, emit: Emit) -> Outcome {
    let text = match emit {
        Emit::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Emit::Dot => match &report.witness {
            Some(w) => {
                let (frame, val) = w.model.to_frame_and_valuation().expect("witness documents are well formed");
                to_dot(&frame, &val, None)
            }
            None => report.to_text(),
        },
        Emit::Text => report.to_text(),
    };
    Outcome::new(report.affirmative(), text)
}

/// Builds and emits the weak model of `φ`; systems with `5` or `.2` use the `→s` relation.
pub fn cmd_model(phi: &Formula, sigma: &SigmaSpec, emit: Emit) -> Result<Outcome, CliError> {
    let built = if sigma.within_tb4d() || sigma.is_gl() {
        build_weak_model(phi, sigma)
    } else {
        build_s_model(phi, sigma)
    };
    let model = match built {
        Ok(m) => m,
        Err(e @ WeakModelError::Inconsistent { .. }) => return Ok(Outcome::new(false, format!("{e}\n"))),
        Err(e) => return Err(e.into()),
    };
    let labels = model.labels();
    let text = match emit {
        Emit::Dot => to_dot(&model.frame, &model.atom_val, Some(&labels)),
        Emit::Json => model.to_document().to_json() + "\n",
        Emit::Text => {
            let mut out = format!(
                "{}-model of {} in {}: {} worlds, roots {:?}\n",
                model.kind,
                render(phi),
                sigma,
                model.size(),
                model.roots
            );
            for (w, label) in labels.iter().enumerate() {
                let _ = writeln!(out, "w{w} -> {:?}  {label}", model.frame.successors(w));
            }
            out.push_str(&verify_weak_model(&model, phi, sigma).to_string());
            out.push('\n');
            out
        }
    };
    Ok(Outcome::new(true, text))
}

/// One line per member of `C_{h,n}`: id, `T` and `S` bitmasks, consistency in `Σ`, rendering.
pub fn cmd_canonical(h: u32, n: u32, sigma: &SigmaSpec) -> Result<Outcome, CliError> {
    check_cap(h, n, DEFAULT_CAP)?;
    let u = Universe::shared(h, n)?;
    let types = sigma_types(sigma, h, n)?;
    let mut out = String::new();
    for id in 0..u.level_size(h) as u32 {
        let m = u.member(h, id);
        let _ = writeln!(
            out,
            "{id}\tT={:0w$b}\tS={:#x}\t{}\t{}",
            m.t,
            m.s,
            if types.is_consistent(id) { "consistent" } else { "inconsistent" },
            u.render(h, id),
            w = (n + 1) as usize
        );
    }
    Ok(Outcome::new(true, out))
}

/// `ST_var(φ)` when `phi` is given, then `A(ψ)` for each axiom when `conditions` is set.
pub fn cmd_translate(phi: Option<&Formula>, var: &str, sigma: &SigmaSpec, conditions: bool) -> Result<Outcome, CliError> {
    if phi.is_none() && !conditions {
        return Err(CliError::Usage("translate needs --phi or --conditions".into()));
    }
    let mut out = String::new();
    if let Some(f) = phi {
        let _ = writeln!(out, "{}", standard_translation(f, var));
    }
    if conditions {
        for &a in &sigma.axioms {
            let _ = writeln!(out, "{}: {}", a.label(), frame_condition(a)?);
        }
    }
    Ok(Outcome::new(true, out))
}

#[derive(Clone, Debug, Serialize)]
struct OracleReport {
    mode: &'static str,
    verdict: &'static str,
    certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
}

/// Runs the brute-force oracle and reports in JSON.
pub fn cmd_oracle(phi: &Formula, sigma: &SigmaSpec, max_worlds: usize, mode: Mode) -> Result<Outcome, CliError> {
    if max_worlds == 0 {
        return Err(CliError::Usage("--max-worlds must be at least 1".into()));
    }
    let cfg = OracleConfig::new(max_worlds, sigma.clone());
    let pointed = |w: modalkit::oracle::Witness| Witness {
        world: w.world,
        model: ModelDocument::from_model(&w.model.frame, &w.model.atom_val, None),
    };
    let (affirmative, report) = match mode {
        Mode::Sat => match oracle_satisfiable(phi, &cfg) {
            Some(w) => (true, OracleReport { mode: "sat", verdict: "satisfiable", certified: true, witness: Some(pointed(w)) }),
            None => (false, OracleReport { mode: "sat", verdict: "unsatisfiable up to bound", certified: false, witness: None }),
        },
        Mode::Valid => match oracle_valid(phi, &cfg) {
            OracleVerdict::Invalid(w) => (false, OracleReport { mode: "valid", verdict: "invalid", certified: true, witness: Some(pointed(w)) }),
            v @ OracleVerdict::Valid { certified } => (true, OracleReport { mode: "valid", verdict: v.label(), certified, witness: None }),
        },
    };
    Ok(Outcome::new(
        affirmative,
        serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
    ))
}

/// Checks a proof document. `sigma` and `gamma` override the document's own fields. With `phi`
/// the proof must check without premises and contain `φ`, `⊤ → φ`, or a conjunction of
/// members of `Γ` implying `φ`.
pub fn cmd_prove_check(
    proof_json: &str,
    sigma: Option<&SigmaSpec>,
    gamma_json: Option<&str>,
    phi: Option<&Formula>,
) -> Result<Outcome, CliError> {
    let doc = ProofDocument::from_json(proof_json).map_err(|e| CliError::Usage(e.to_string()))?;
    let sigma = sigma.cloned().unwrap_or_else(|| doc.sigma_spec());
    let gamma: Vec<Formula> = match gamma_json {
        Some(text) => serde_json::from_str(text).map_err(|e| CliError::Usage(format!("gamma file: {e}")))?,
        None => doc.gamma.clone(),
    };
    let result = match phi {
        Some(f) => check_provability_certificate(&sigma, &gamma, f, &doc.proof()),
        None => check_proof(&sigma, &gamma, &doc.proof()),
    };
    Ok(match result {
        Ok(()) => Outcome::new(
            true,
            format!("ok: {} lines in {}, concluding {}\n", doc.lines.len(), sigma, doc.lines[doc.lines.len() - 1].formula),
        ),
        Err(e) => Outcome::new(false, format!("rejected: {e}\n")),
    })
}
