//! Fast reasoner for declared-transitive predicates: answers reachability
//! goals by lookup over the incrementally maintained edge store instead of
//! chaining clauses, citing the edge assertions on a witness path.

use crate::clause::{LitMode, Literal};
use crate::engine::{InferenceStep, StepVia};
use crate::kb::{AssertionId, KnowledgeBase};
use crate::logic::{Atom, Substitution, Term};
use crate::symbol::Symbol;

use super::{BudgetSlice, HlAnswer, HlBid, HlModule, SolveOutcome};

pub struct TransitivityModule;

const NAME: &str = "TransitivityModule";

fn reach_answer(
    pred: &Symbol,
    from: &Symbol,
    to: &Symbol,
    path: Vec<AssertionId>,
) -> HlAnswer {
    let conclusion = Literal::pos(Atom::new(
        pred.clone(),
        vec![Term::Constant(from.clone()), Term::Constant(to.clone())],
    ));
    let note = format!("{} reaches {} through {} edge(s)", from, to, path.len());
    HlAnswer {
        step: InferenceStep {
            conclusion: conclusion.clone(),
            via: StepVia::Module(NAME),
            bindings: Substitution::new(),
            children: Vec::new(),
            cited: path,
            note: Some(note),
            qualifier: None,
            assumption: false,
        },
        conclusion,
    }
}

impl HlModule for TransitivityModule {
    fn name(&self) -> &'static str {
        NAME
    }

    fn bid(&self, goal: &Literal, _mt: &Symbol, kb: &KnowledgeBase) -> Option<HlBid> {
        if goal.mode == LitMode::Pos
            && goal.atom.args.len() == 2
            && kb.is_transitive(&goal.atom.predicate)
        {
            Some(HlBid { module: NAME, cost: 1 })
        } else {
            None
        }
    }

    fn solve(
        &self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
        slice: &BudgetSlice,
    ) -> SolveOutcome {
        let pred = &goal.atom.predicate;
        let limit = (slice.steps_remaining as usize).min(100_000).max(1);
        let mut answers = Vec::new();
        let mut work = 0u64;
        match (&goal.atom.args[0], &goal.atom.args[1]) {
            (Term::Constant(a), Term::Constant(b)) => {
                if let Some(path) = kb.transitive_path(pred, mt, a, b) {
                    answers.push(reach_answer(pred, a, b, path));
                }
            }
            (Term::Constant(a), Term::Variable(_)) => {
                for (node, path) in kb.transitive_successors(pred, mt, a, limit) {
                    work += 1 + path.len() as u64;
                    answers.push(reach_answer(pred, a, &node, path));
                    if slice.exhausted(work) {
                        return SolveOutcome::Overrun;
                    }
                }
            }
            (Term::Variable(_), Term::Constant(b)) => {
                for (node, path) in kb.transitive_predecessors(pred, mt, b, limit) {
                    work += 1 + path.len() as u64;
                    answers.push(reach_answer(pred, &node, b, path));
                    if slice.exhausted(work) {
                        return SolveOutcome::Overrun;
                    }
                }
            }
            (Term::Variable(_), Term::Variable(_)) => {
                for from in kb.edge_nodes(pred, mt) {
                    for (node, path) in kb.transitive_successors(pred, mt, &from, limit) {
                        work += 1 + path.len() as u64;
                        answers.push(reach_answer(pred, &from, &node, path));
                        if slice.exhausted(work) {
                            return SolveOutcome::Overrun;
                        }
                    }
                }
            }
            // Function terms never appear as edge endpoints (load lint).
            _ => return SolveOutcome::Pass,
        }
        SolveOutcome::Answers { answers, authoritative: true, note: None }
    }
}
