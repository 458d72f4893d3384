//! The Heuristic Level: specialized reasoners that bid on subgoals and
//! answer them without clause chaining, over redundant precomputed
//! representations. Applicable modules run cheapest-first; generic clause
//! chaining is always the last resort.

mod algebra;
mod taxonomy;
mod temporal;
mod transitivity;

pub use algebra::{format_numeral, parse_numeral, AlgebraModule};
pub use taxonomy::TaxonomyDisjointnessModule;
pub use temporal::TemporalProjectionModule;
pub use transitivity::TransitivityModule;

use std::time::Instant;

use crate::clause::Literal;
use crate::engine::InferenceStep;
use crate::kb::KnowledgeBase;
use crate::symbol::Symbol;

/// A module's cost estimate for a goal; lower costs run first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlBid {
    pub module: &'static str,
    pub cost: u32,
}

/// One result from a module: an instantiated ground conclusion plus the
/// inference step justifying it.
#[derive(Debug, Clone)]
pub struct HlAnswer {
    pub conclusion: Literal,
    pub step: InferenceStep,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    /// The module answered. When `authoritative`, its answer set is complete
    /// for this goal and neither other modules nor clause chaining run.
    Answers { answers: Vec<HlAnswer>, authoritative: bool, note: Option<String> },
    /// The module declined after inspection; the next reasoner is tried.
    Pass,
    /// The module exceeded its budget slice and was interrupted.
    Overrun,
}

/// Cooperative budget slice handed to a module.
#[derive(Debug, Clone, Copy)]
pub struct BudgetSlice {
    pub steps_remaining: u64,
    pub deadline: Instant,
}

impl BudgetSlice {
    pub fn exhausted(&self, work_done: u64) -> bool {
        work_done >= self.steps_remaining || Instant::now() >= self.deadline
    }
}

pub trait HlModule: Send + Sync {
    fn name(&self) -> &'static str;
    /// `None` when the module cannot help with this goal at all; a module
    /// that declines here is never invoked for the goal.
    fn bid(&self, goal: &Literal, mt: &Symbol, kb: &KnowledgeBase) -> Option<HlBid>;
    fn solve(
        &self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
        slice: &BudgetSlice,
    ) -> SolveOutcome;
}

pub struct Registry {
    modules: Vec<Box<dyn HlModule>>,
}

impl Registry {
    /// The standard battery: transitivity, taxonomy disjointness, algebra,
    /// temporal projection.
    pub fn standard() -> Self {
        Registry {
            modules: vec![
                Box::new(TransitivityModule),
                Box::new(TaxonomyDisjointnessModule),
                Box::new(AlgebraModule),
                Box::new(TemporalProjectionModule),
            ],
        }
    }

    pub fn empty() -> Self {
        Registry { modules: Vec::new() }
    }

    /// Applicable modules for a goal, cheapest first; cost ties break on
    /// module name.
    pub fn dispatch<'a>(
        &'a self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
    ) -> Vec<(&'a dyn HlModule, HlBid)> {
        let mut bids: Vec<(&dyn HlModule, HlBid)> = self
            .modules
            .iter()
            .filter_map(|m| m.bid(goal, mt, kb).map(|b| (m.as_ref(), b)))
            .collect();
        bids.sort_by(|(_, a), (_, b)| a.cost.cmp(&b.cost).then(a.module.cmp(b.module)));
        bids
    }

    /// Module names in dispatch order with the always-last generic chaining.
    pub fn dispatch_names(&self, goal: &Literal, mt: &Symbol, kb: &KnowledgeBase) -> Vec<String> {
        let mut names: Vec<String> =
            self.dispatch(goal, mt, kb).iter().map(|(_, b)| b.module.to_string()).collect();
        names.push("ClauseChaining".to_string());
        names
    }

    /// Whether any module claims this goal (used to allow asking about
    /// engine-served predicates that no assertion mentions).
    pub fn any_applicable(&self, goal: &Literal, mt: &Symbol, kb: &KnowledgeBase) -> bool {
        !self.dispatch(goal, mt, kb).is_empty()
    }
}
