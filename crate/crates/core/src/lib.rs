//! Symbolic machinery for proving equivalence of typed linear algebra
//! expressions by axiomatic rewriting: the expression language, the axiom
//! table, a linear-time proof checker, random dataset generation, proof
//! search, and counting of the proof space.

pub mod analysis;
pub mod axiom;
pub mod expr;
pub mod generator;
pub mod numeric;
pub mod proof;
pub mod search;
pub mod ted;

pub use axiom::{apply_category, axiom_table, legal_moves, AxiomCategory, ConcreteAxiom, Move};
pub use expr::{Dir, Expr, ExprError, Op, Path, Terminal, Token, ValueType};
pub use numeric::{evaluate, NumericEnv, Value};
pub use proof::{verify, Proof, ProofStep, VerifyOutcome, VerifyResult};
