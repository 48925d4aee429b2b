//! A toolkit for normal modal logics.
//!
//! * [`syntax`]: formulas, parsing, printing, substitution and the height/order metrics.
//! * [`proofs`]: Hilbert proofs for `KΣ` and `GL` with a linear checker.
//! * [`semantics`]: finite Kripke frames and models, frame properties, forcing.
//! * [`oracle`]: exhaustive search over small frames, the ground truth for every other verdict.
//! * [`canonical`]: canonical formulas `α_{S,T}`, the universes `C_{h,n}` and their consistency.
//! * [`weakmodel`]: finite models built from canonical formulas, with truth-lemma verification.
//! * [`mcs`]: maximal consistent sets over a finite closure.
//! * [`foltrans`]: the standard translation into first-order logic and finite structures.
//! * [`decide`]: the decision pipeline combining the pieces above.

pub mod canonical;
pub mod decide;
pub mod foltrans;
pub mod mcs;
pub mod oracle;
pub mod proofs;
pub mod semantics;
pub mod syntax;
pub mod weakmodel;
