//! A toolkit for a modal logic of stepwise point removal over finite Kripke
//! models.
//!
//! The language extends basic modal logic with a removal modality `<-f>g`
//! (delete one point, other than the current one, satisfying `f`, then
//! evaluate `g`), public announcement `<!f>g` (relativize to the `f`-points),
//! nominals, and the global existential modality `E`.
//!
//! The crate provides:
//!
//! - [`formula`]: abstract syntax, a concrete ASCII grammar with parser and
//!   printer, and expansion of derived operators;
//! - [`kripke`]: finite models with labeled relations, valuations and partial
//!   nominal denotations, plus deletion, relativization, generation and
//!   enumeration;
//! - [`checker`]: the semantic evaluator, validity on a model, and bounded
//!   countermodel search;
//! - [`fol`]: a first-order target language, a meaning-preserving translation,
//!   and an independent first-order evaluator used as a semantic oracle;
//! - [`bisim`]: deciding bisimilarity under stepwise removal and synthesizing
//!   distinguishing formulas;
//! - [`qbf`]: the reduction from quantified Boolean formulas to model
//!   checking: gadget models, traveling-game schedules, and game formulas;
//! - [`tiling`]: a tiling-problem encoder over two relations, verified on
//!   periodic (torus) tilings;
//! - [`hilbert`]: a derivation checker for the Hilbert-style proof system,
//!   with a corpus of checked derivations;
//! - [`counting`]: cardinality-threshold encodings over relation-free models
//!   and the rewrite laws they support.

pub mod bisim;
pub mod checker;
pub mod counting;
pub mod fol;
pub mod formula;
pub mod gen;
pub mod hilbert;
pub mod kripke;
pub mod qbf;
pub mod tiling;

pub use checker::{check, find_countermodel, valid_on};
pub use formula::{parse, Formula};
pub use kripke::{Model, PointedModel};
