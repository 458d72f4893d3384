//! microkb: a contextualized defeasible knowledge-representation and
//! reasoning engine.
//!
//! Assertions live in an expressive clausal logic inside microtheory
//! contexts; a budgeted backward-chaining engine collects pro and con
//! argument trees, dispatching subgoals to fast specialized reasoners first;
//! preference meta-rules adjudicate a final answer; and every answer can be
//! rendered as a step-by-step explanation that bottoms out in ground
//! assertions with provenance.

pub mod argumentation;
pub mod clause;
pub mod engine;
pub mod explain;
pub mod hl;
pub mod kb;
pub mod loader;
pub mod logic;
pub mod parser;
pub mod repl;
pub mod symbol;

pub use clause::{Clause, LitMode, Literal, Strength};
pub use kb::{Assertion, AssertionId, KnowledgeBase, Microtheory, Provenance};
pub use logic::{Atom, Formula, Substitution, Term, Var};
pub use symbol::Symbol;
