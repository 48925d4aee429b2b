//! Brute-force semantic ground truth.
//!
//! Frames with `1..=max_worlds` worlds are enumerated exhaustively, filtered by the frame
//! properties of `Σ`, and every assignment to the atoms of the query is tried. Frames are
//! ordered by world count and then by the code whose bit `u·k+v` records `uRv`; assignments
//! follow [`assignment_masks`]. The reported witness is always the first one in this order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::proofs::{SigmaAxiom, SigmaSpec};
use crate::semantics::{assignment_masks, valuation_from_masks, Compiled, Frame, KripkeModel};
use crate::syntax::Formula;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_worlds: usize,
    pub sigma: SigmaSpec,
    /// A world count known to suffice for the query; validity is certified when it is at most
    /// `max_worlds`.
    pub completeness_bound: Option<usize>,
}

impl OracleConfig {
    pub fn new(max_worlds: usize, sigma: SigmaSpec) -> OracleConfig {
        assert!(max_worlds >= 1, "max_worlds must be at least 1");
        OracleConfig {
            max_worlds,
            sigma,
            completeness_bound: None,
        }
    }

    pub fn with_completeness_bound(mut self, bound: usize) -> OracleConfig {
        self.completeness_bound = Some(bound);
        self
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig::new(4, SigmaSpec::k())
    }
}

fn mask_has(succ: &[u64], axiom: SigmaAxiom) -> bool {
    let k = succ.len();
    let members = |m: u64| (0..k).filter(move |v| m & (1u64 << v) != 0);
    match axiom {
        SigmaAxiom::T => (0..k).all(|w| succ[w] & (1u64 << w) != 0),
        SigmaAxiom::B => (0..k).all(|u| members(succ[u]).all(|v| succ[v] & (1u64 << u) != 0)),
        SigmaAxiom::Four => (0..k).all(|w| members(succ[w]).all(|u| succ[u] & !succ[w] == 0)),
        SigmaAxiom::Five => (0..k).all(|w| members(succ[w]).all(|u| succ[w] & !succ[u] == 0)),
        SigmaAxiom::D => succ.iter().all(|&m| m != 0),
        SigmaAxiom::Dot2 => (0..k).all(|w| {
            members(succ[w]).all(|u| members(succ[w]).all(|v| succ[u] & succ[v] != 0))
        }),
        SigmaAxiom::L => {
            mask_has(succ, SigmaAxiom::Four) && (0..k).all(|w| succ[w] & (1u64 << w) == 0)
        }
    }
}

fn decode(code: u64, k: usize) -> Vec<u64> {
    let row = (1u64 << k) - 1;
    (0..k).map(|u| (code >> (u * k)) & row).collect()
}

type FrameList = Arc<Vec<Vec<u64>>>;

fn frames_of_size(sigma: &SigmaSpec, k: usize) -> FrameList {
    static CACHE: OnceLock<Mutex<HashMap<(SigmaSpec, usize), FrameList>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("frame cache").get(&(sigma.clone(), k)) {
        return hit.clone();
    }
    assert!(k * k < 64, "frame enumeration beyond 7 worlds is out of reach");
    let total = 1u64 << (k * k);
    let keep = |code: u64| {
        let succ = decode(code, k);
        sigma.axioms.iter().all(|&a| mask_has(&succ, a)).then_some(succ)
    };
    let list: Vec<Vec<u64>> = if total > 1 << 16 {
        (0..total).into_par_iter().filter_map(keep).collect()
    } else {
        (0..total).filter_map(keep).collect()
    };
    let list = Arc::new(list);
    cache
        .lock()
        .expect("frame cache")
        .insert((sigma.clone(), k), list.clone());
    list
}

/// Successor masks of every `Σ`-appropriate frame up to `max_worlds`, in enumeration order.
pub fn frame_masks(sigma: &SigmaSpec, max_worlds: usize) -> Vec<FrameList> {
    (1..=max_worlds).map(|k| frames_of_size(sigma, k)).collect()
}

/// Every `Σ`-appropriate frame with `1..=max_worlds` worlds.
pub fn enumerate_frames(cfg: &OracleConfig) -> Vec<Frame> {
    frame_masks(&cfg.sigma, cfg.max_worlds)
        .iter()
        .flat_map(|list| list.iter().map(|m| Frame::from_masks(m)).collect::<Vec<_>>())
        .collect()
}

/// A pointed model.
#[derive(Clone, Debug)]
pub struct Witness {
    pub model: KripkeModel,
    pub world: usize,
}

fn first_hit(f: &Formula, cfg: &OracleConfig) -> Option<(Vec<u64>, Vec<u64>, usize)> {
    let compiled = Compiled::new(f);
    let atoms = compiled.atoms().len();
    for list in frame_masks(&cfg.sigma, cfg.max_worlds) {
        let hit = list.par_iter().find_map_first(|succ| {
            let k = succ.len();
            let mut buf = Vec::new();
            (0..(1u64 << (atoms * k))).find_map(|code| {
                let masks = assignment_masks(code, atoms, k);
                compiled.eval_into(succ, &masks, &mut buf);
                let m = compiled.root(&buf, 0);
                (m != 0).then(|| (succ.clone(), masks, m.trailing_zeros() as usize))
            })
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// The first pointed model in enumeration order where `φ` holds, if any within the bound.
pub fn oracle_satisfiable(f: &Formula, cfg: &OracleConfig) -> Option<Witness> {
    let (succ, masks, world) = first_hit(f, cfg)?;
    let compiled = Compiled::new(f);
    let frame = Frame::from_masks(&succ);
    let val = valuation_from_masks(compiled.atoms(), &masks, succ.len());
    let model = KripkeModel::for_formulas(&frame, &val, [f]).expect("witness valuation covers the formula");
    Some(Witness { model, world })
}

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    /// No countermodel within the bound; `certified` when the bound is known to suffice.
    Valid { certified: bool },
    Invalid(Witness),
}

impl OracleVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, OracleVerdict::Valid { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            OracleVerdict::Valid { certified: true } => "valid (certified)",
            OracleVerdict::Valid { certified: false } => "valid up to bound",
            OracleVerdict::Invalid(_) => "invalid",
        }
    }
}

/// Validity of `φ` over `Σ`-frames as unsatisfiability of `¬φ` within the bound.
pub fn oracle_valid(f: &Formula, cfg: &OracleConfig) -> OracleVerdict {
    match oracle_satisfiable(&Formula::not(f.clone()), cfg) {
        Some(w) => OracleVerdict::Invalid(w),
        None => OracleVerdict::Valid {
            certified: cfg.completeness_bound.is_some_and(|b| b <= cfg.max_worlds),
        },
    }
}
