//! A workbench for a pi-calculus with floating authorizations.
//!
//! The calculus extends name passing with a non-binding authorization scope
//! `[a]P` that grants one use of channel `a` to whichever parallel thread
//! claims it, plus explicit authorization delegation prefixes `a<b>` / `a(b)`
//! that transfer a `[b]` scope without passing the name. This crate provides:
//!
//! * [`ast`] — process terms, binding, substitution, well-formedness;
//! * [`parser`] — the textual syntax and a round-tripping printer;
//! * [`congruence`] — canonical forms deciding structural congruence
//!   (replication unfolding excluded);
//! * [`reduction`] — static contexts, the `drift` operation, reduction and
//!   authorization-error detection;
//! * [`lts`] — the labelled transition system with carried/lacking
//!   authorization annotations;
//! * [`typecheck`] — the authorization type system, implemented as
//!   demand-antichain inference, plus a brute-force derivation oracle;
//! * [`oracle`] — independent rewriting/derivation searches used to validate
//!   the canonical form and the deterministic drift.

pub mod ast;
pub mod congruence;
pub mod lts;
pub mod oracle;
pub mod parser;
pub mod reduction;
pub mod typecheck;

pub use ast::{Name, NameMultiset, Process, Symbol, SymbolTag};
pub use congruence::{canonicalize, congruent, CanonicalForm, Mode};
pub use parser::{parse, parse_process, print_process, SourceFile};
