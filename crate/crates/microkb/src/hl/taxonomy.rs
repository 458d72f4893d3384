//! Taxonomy disjointness: for any two taxons, if neither is a specialization
//! of the other through sub-taxon links, assume they are disjoint. Emitted
//! arguments are always default-strength; the rule is an assumption, not a
//! premise.

use crate::clause::{LitMode, Literal};
use crate::engine::{InferenceStep, StepVia};
use crate::kb::KnowledgeBase;
use crate::logic::{Atom, Substitution, Term};
use crate::symbol::Symbol;

use super::{BudgetSlice, HlAnswer, HlBid, HlModule, SolveOutcome};

pub struct TaxonomyDisjointnessModule;

const NAME: &str = "TaxonomyDisjointnessModule";

/// The conventional disjointness goal predicate this module answers.
pub const DISJOINT_PRED: &str = "disjointWith";
/// The conventional class-membership predicate used for Not(isa ...) goals.
pub const ISA_PRED: &str = "isa";

impl TaxonomyDisjointnessModule {
    fn taxon_disjoint(
        kb: &KnowledgeBase,
        taxonomy: &Symbol,
        mt: &Symbol,
        t1: &Symbol,
        t2: &Symbol,
    ) -> Option<bool> {
        let taxons = kb.edge_nodes(taxonomy, mt);
        if !taxons.contains(t1) || !taxons.contains(t2) {
            return None; // not taxons in this context
        }
        if t1 == t2 {
            return Some(false);
        }
        let up = kb.transitive_path(taxonomy, mt, t1, t2).is_some();
        let down = kb.transitive_path(taxonomy, mt, t2, t1).is_some();
        Some(!up && !down)
    }
}

impl HlModule for TaxonomyDisjointnessModule {
    fn name(&self) -> &'static str {
        NAME
    }

    fn bid(&self, goal: &Literal, _mt: &Symbol, kb: &KnowledgeBase) -> Option<HlBid> {
        let taxonomy_declared = kb.taxonomy_pred().is_some();
        if !taxonomy_declared {
            return None;
        }
        let pred = goal.atom.predicate.as_str();
        let applicable = (goal.mode == LitMode::Pos
            && pred == DISJOINT_PRED
            && goal.atom.args.len() == 2)
            || (goal.mode == LitMode::Neg && pred == ISA_PRED && goal.atom.args.len() == 2);
        applicable.then_some(HlBid { module: NAME, cost: 2 })
    }

    fn solve(
        &self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
        _slice: &BudgetSlice,
    ) -> SolveOutcome {
        let taxonomy = match kb.taxonomy_pred() {
            Some(t) => t.clone(),
            None => return SolveOutcome::Pass,
        };
        if goal.mode == LitMode::Pos {
            // (disjointWith t1 t2)
            let (t1, t2) = match (&goal.atom.args[0], &goal.atom.args[1]) {
                (Term::Constant(a), Term::Constant(b)) => (a.clone(), b.clone()),
                _ => return SolveOutcome::Pass, // unbound: leave to asserted facts
            };
            match Self::taxon_disjoint(kb, &taxonomy, mt, &t1, &t2) {
                None => SolveOutcome::Answers {
                    answers: Vec::new(),
                    authoritative: false,
                    note: Some(format!(
                        "'{}' or '{}' is not a taxon in the {} taxonomy",
                        t1, t2, taxonomy
                    )),
                },
                Some(false) => {
                    // One specializes the other: no disjointness by default.
                    SolveOutcome::Answers { answers: Vec::new(), authoritative: false, note: None }
                }
                Some(true) => {
                    let conclusion = Literal::pos(Atom::new(
                        DISJOINT_PRED,
                        vec![Term::Constant(t1.clone()), Term::Constant(t2.clone())],
                    ));
                    let step = InferenceStep {
                        conclusion: conclusion.clone(),
                        via: StepVia::Module(NAME),
                        bindings: Substitution::new(),
                        children: Vec::new(),
                        cited: Vec::new(),
                        note: Some(format!(
                            "neither {} nor {} specializes the other through {} links; assumed disjoint",
                            t1, t2, taxonomy
                        )),
                        qualifier: None,
                        assumption: true,
                    };
                    SolveOutcome::Answers {
                        answers: vec![HlAnswer { conclusion, step }],
                        authoritative: false,
                        note: None,
                    }
                }
            }
        } else {
            // (not (isa x t)): x's asserted classes that are disjoint from t
            let (x, t) = match (&goal.atom.args[0], &goal.atom.args[1]) {
                (Term::Constant(a), Term::Constant(b)) => (a.clone(), b.clone()),
                _ => return SolveOutcome::Pass,
            };
            let mut answers = Vec::new();
            if let Ok(assertions) = kb.visible_assertions(mt, &Symbol::new(ISA_PRED)) {
                for a in assertions {
                    for clause in &a.clauses {
                        if !clause.is_fact() || clause.head.mode != LitMode::Pos {
                            continue;
                        }
                        let args = &clause.head.atom.args;
                        if args.len() != 2 || args[0] != Term::Constant(x.clone()) {
                            continue;
                        }
                        let Term::Constant(class) = &args[1] else { continue };
                        if Self::taxon_disjoint(kb, &taxonomy, mt, class, &t) == Some(true) {
                            let conclusion = Literal::neg(Atom::new(
                                ISA_PRED,
                                vec![Term::Constant(x.clone()), Term::Constant(t.clone())],
                            ));
                            let step = InferenceStep {
                                conclusion: conclusion.clone(),
                                via: StepVia::Module(NAME),
                                bindings: Substitution::new(),
                                children: Vec::new(),
                                cited: vec![a.id],
                                note: Some(format!(
                                    "{} is a {}, and {} is assumed disjoint from {}",
                                    x, class, class, t
                                )),
                                qualifier: None,
                                assumption: true,
                            };
                            answers.push(HlAnswer { conclusion, step });
                        }
                    }
                }
            }
            // Keep at most one bridge argument; further ones restate it.
            answers.truncate(1);
            SolveOutcome::Answers { answers, authoritative: false, note: None }
        }
    }
}
