//! Template-based rendering of formulas and argument trees into readable
//! text, with recursive "why is that?" drilldown that bottoms out in ground
//! assertions carrying their provenance.

use std::collections::HashMap;

use thiserror::Error;

use crate::clause::Literal;
use crate::engine::{ArgumentTree, InferenceStep, StepVia};
use crate::kb::KnowledgeBase;
use crate::logic::{Formula, Term};
use crate::parser::{print_formula, print_term};
use crate::symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplainError {
    #[error("template for {predicate}/{arity}: slot {{{slot}}} is out of range")]
    BadSlot { predicate: Symbol, arity: usize, slot: usize },
    #[error("unresolvable provenance: {0}")]
    UnresolvableProvenance(String),
    #[error("no step at index {0}")]
    BadStepIndex(usize),
}

/// Per-predicate English pattern with positional slots, for example
/// `{0} loves {1}`; `negated` renders explicit negations of the atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NLTemplate {
    pub predicate: Symbol,
    pub arity: usize,
    pub pattern: String,
    pub negated: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateStore {
    map: HashMap<(Symbol, usize), NLTemplate>,
}

fn max_slot(pattern: &str) -> Option<usize> {
    let mut max = None;
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        rest = &rest[open + 1..];
        if let Some(close) = rest.find('}') {
            if let Ok(n) = rest[..close].parse::<usize>() {
                max = Some(max.map_or(n, |m: usize| m.max(n)));
            }
            rest = &rest[close + 1..];
        } else {
            break;
        }
    }
    max
}

impl TemplateStore {
    pub fn new() -> Self {
        TemplateStore::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Insert a template; slot indices must stay below the arity.
    pub fn insert(&mut self, template: NLTemplate) -> Result<(), ExplainError> {
        for pattern in
            std::iter::once(&template.pattern).chain(template.negated.iter())
        {
            if let Some(slot) = max_slot(pattern) {
                if slot >= template.arity {
                    return Err(ExplainError::BadSlot {
                        predicate: template.predicate.clone(),
                        arity: template.arity,
                        slot,
                    });
                }
            }
        }
        self.map.insert((template.predicate.clone(), template.arity), template);
        Ok(())
    }

    pub fn get(&self, predicate: &Symbol, arity: usize) -> Option<&NLTemplate> {
        self.map.get(&(predicate.clone(), arity))
    }
}

fn fill(pattern: &str, args: &[Term]) -> String {
    let mut out = pattern.to_string();
    for (i, arg) in args.iter().enumerate() {
        out = out.replace(&format!("{{{}}}", i), &print_term(arg));
    }
    out
}

/// Render a formula: a matching template applies to atoms and explicitly
/// negated atoms; everything else falls back to the canonical printed form.
pub fn render_formula(f: &Formula, templates: &TemplateStore) -> String {
    match f {
        Formula::Atom(a) => match templates.get(&a.predicate, a.args.len()) {
            Some(t) => fill(&t.pattern, &a.args),
            None => print_formula(f),
        },
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => match templates.get(&a.predicate, a.args.len()) {
                Some(NLTemplate { negated: Some(neg), .. }) => fill(neg, &a.args),
                _ => print_formula(f),
            },
            _ => print_formula(f),
        },
        _ => print_formula(f),
    }
}

pub fn render_literal(lit: &Literal, templates: &TemplateStore) -> String {
    render_formula(&lit.to_formula(), templates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verbosity {
    Brief,
    Full,
}

/// One rendered step of an explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanationStep {
    pub text: String,
    /// What produced the step: `assertion #id` or `module Name`.
    pub via: String,
    /// Resolved provenance: source text for assertions, citations for
    /// module steps.
    pub provenance: String,
    /// Depth below the rendered root.
    pub depth: usize,
    /// Child-index path from the rendered root to this step's node; the
    /// drilldown handle.
    pub path: Vec<usize>,
    /// Steps collapsed into this one under brief verbosity.
    pub collapsed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanationDoc {
    pub summary: String,
    pub steps: Vec<ExplanationStep>,
}

fn resolve_provenance(step: &InferenceStep, kb: &KnowledgeBase) -> Result<String, ExplainError> {
    match &step.via {
        StepVia::Assertion(id) => {
            let a = kb.assertion(*id).ok_or_else(|| {
                ExplainError::UnresolvableProvenance(format!("assertion #{} not in KB", id))
            })?;
            let mut s = format!("#{}: \"{}\" ({})", a.id, a.provenance.source, a.provenance.timestamp);
            if let (Some(f), Some(l)) = (&a.provenance.file, a.provenance.line) {
                s.push_str(&format!(" [{}:{}]", f, l));
            }
            Ok(s)
        }
        StepVia::Module(name) => {
            for id in &step.cited {
                if kb.assertion(*id).is_none() {
                    return Err(ExplainError::UnresolvableProvenance(format!(
                        "module {} cites missing assertion #{}",
                        name, id
                    )));
                }
            }
            if step.cited.is_empty() {
                Ok(format!("module {}", name))
            } else {
                let ids: Vec<String> = step.cited.iter().map(|i| format!("#{}", i)).collect();
                Ok(format!("module {} citing {}", name, ids.join(" ")))
            }
        }
    }
}

fn step_text(step: &InferenceStep, templates: &TemplateStore) -> String {
    let mut text = render_literal(&step.conclusion, templates);
    if let Some(q) = step.qualifier {
        text.push_str(&format!(" (likelihood {:.4})", q));
    }
    if let Some(n) = &step.note {
        text.push_str(&format!(" — {}", n));
    }
    text
}

fn via_text(step: &InferenceStep) -> String {
    match &step.via {
        StepVia::Assertion(id) => format!("assertion #{}", id),
        StepVia::Module(m) => format!("module {}", m),
    }
}

/// Walk leaf-to-root (post-order), emitting rendered steps.
fn walk_steps(
    step: &InferenceStep,
    kb: &KnowledgeBase,
    templates: &TemplateStore,
    verbosity: Verbosity,
    depth: usize,
    path: &mut Vec<usize>,
    collapsed_below: usize,
    out: &mut Vec<ExplanationStep>,
) -> Result<(), ExplainError> {
    // Brief verbosity folds chains of single children into the parent.
    let collapse_this = verbosity == Verbosity::Brief
        && step.children.len() == 1
        && !path.is_empty(); // never collapse the rendered root itself
    let child_collapse_base = if collapse_this { collapsed_below + 1 } else { 0 };
    for (i, child) in step.children.iter().enumerate() {
        path.push(i);
        walk_steps(child, kb, templates, verbosity, depth + 1, path, child_collapse_base, out)?;
        path.pop();
    }
    if collapse_this {
        return Ok(());
    }
    out.push(ExplanationStep {
        text: step_text(step, templates),
        via: via_text(step),
        provenance: resolve_provenance(step, kb)?,
        depth,
        path: path.clone(),
        collapsed: collapsed_below,
    });
    Ok(())
}

fn doc_for_step(
    root: &InferenceStep,
    kb: &KnowledgeBase,
    templates: &TemplateStore,
    verbosity: Verbosity,
    summary_prefix: &str,
) -> Result<ExplanationDoc, ExplainError> {
    let mut steps = Vec::new();
    let mut path = Vec::new();
    walk_steps(root, kb, templates, verbosity, 0, &mut path, 0, &mut steps)?;
    let summary = format!("{}{}", summary_prefix, render_literal(&root.conclusion, templates));
    Ok(ExplanationDoc { summary, steps })
}

/// Render a whole argument tree, steps ordered leaf to root.
pub fn render_argument(
    tree: &ArgumentTree,
    kb: &KnowledgeBase,
    templates: &TemplateStore,
    verbosity: Verbosity,
) -> Result<ExplanationDoc, ExplainError> {
    let prefix = match (tree.polarity, tree.strength) {
        (crate::engine::Polarity::Pro, s) => format!("{} argument for: ", s),
        (crate::engine::Polarity::Con, s) => format!("{} argument against: ", s),
    };
    doc_for_step(&tree.root, kb, templates, verbosity, &prefix)
}

fn node_at<'t>(root: &'t InferenceStep, path: &[usize]) -> Option<&'t InferenceStep> {
    let mut cur = root;
    for &i in path {
        cur = cur.children.get(i)?;
    }
    Some(cur)
}

/// Drill into the subtree at `path` (a child-index path from the root).
/// Ground assertion leaves return their provenance record verbatim; opaque
/// module leaves expand into the assertions they cite.
pub fn why_drilldown(
    tree: &ArgumentTree,
    path: &[usize],
    kb: &KnowledgeBase,
    templates: &TemplateStore,
    verbosity: Verbosity,
) -> Result<ExplanationDoc, ExplainError> {
    let node = node_at(&tree.root, path)
        .ok_or_else(|| ExplainError::BadStepIndex(path.last().copied().unwrap_or(0)))?;
    if node.children.is_empty() {
        match &node.via {
            StepVia::Assertion(id) => {
                let a = kb.assertion(*id).ok_or_else(|| {
                    ExplainError::UnresolvableProvenance(format!("assertion #{} not in KB", id))
                })?;
                let step = ExplanationStep {
                    text: format!(
                        "given: {} — asserted in {} as {}",
                        render_literal(&node.conclusion, templates),
                        a.mt,
                        print_formula(&a.formula)
                    ),
                    via: format!("assertion #{}", a.id),
                    provenance: resolve_provenance(node, kb)?,
                    depth: 0,
                    path: path.to_vec(),
                    collapsed: 0,
                };
                return Ok(ExplanationDoc {
                    summary: format!("ground assertion #{}", a.id),
                    steps: vec![step],
                });
            }
            StepVia::Module(name) => {
                if !node.cited.is_empty() {
                    let mut steps = Vec::new();
                    for (i, id) in node.cited.iter().enumerate() {
                        let a = kb.assertion(*id).ok_or_else(|| {
                            ExplainError::UnresolvableProvenance(format!(
                                "module {} cites missing assertion #{}",
                                name, id
                            ))
                        })?;
                        steps.push(ExplanationStep {
                            text: format!(
                                "cited {}: {}",
                                i + 1,
                                render_formula(&a.formula, templates)
                            ),
                            via: format!("assertion #{}", a.id),
                            provenance: format!(
                                "#{}: \"{}\" ({})",
                                a.id, a.provenance.source, a.provenance.timestamp
                            ),
                            depth: 0,
                            path: path.to_vec(),
                            collapsed: 0,
                        });
                    }
                    return Ok(ExplanationDoc {
                        summary: format!(
                            "module {} concluded {} from {} cited assertion(s)",
                            name,
                            render_literal(&node.conclusion, templates),
                            node.cited.len()
                        ),
                        steps,
                    });
                }
                let step = ExplanationStep {
                    text: step_text(node, templates),
                    via: via_text(node),
                    provenance: resolve_provenance(node, kb)?,
                    depth: 0,
                    path: path.to_vec(),
                    collapsed: 0,
                };
                return Ok(ExplanationDoc {
                    summary: format!("{} step", name),
                    steps: vec![step],
                });
            }
        }
    }
    doc_for_step(node, kb, templates, verbosity, "why: ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Atom;

    fn store_with(pred: &str, arity: usize, pattern: &str, negated: Option<&str>) -> TemplateStore {
        let mut s = TemplateStore::new();
        s.insert(NLTemplate {
            predicate: Symbol::new(pred),
            arity,
            pattern: pattern.to_string(),
            negated: negated.map(String::from),
        })
        .unwrap();
        s
    }

    #[test]
    fn template_fills_slots() {
        let s = store_with("loves", 2, "{0} loves {1}", None);
        let f = Formula::Atom(Atom::new("loves", vec![Term::constant("P1"), Term::constant("D1")]));
        assert_eq!(render_formula(&f, &s), "P1 loves D1");
    }

    #[test]
    fn untemplated_predicate_falls_back_to_canonical_print() {
        let s = TemplateStore::new();
        let f = Formula::Atom(Atom::new(
            "expressionDuring",
            vec![Term::constant("P1"), Term::constant("E1"), Term::constant("Smiling")],
        ));
        assert_eq!(render_formula(&f, &s), "(expressionDuring P1 E1 Smiling)");
    }

    #[test]
    fn negated_pattern_applies_to_explicit_negation() {
        let s = store_with("isa", 2, "{0} is a {1}", Some("{0} is not a {1}"));
        let f = Formula::Not(Box::new(Formula::Atom(Atom::new(
            "isa",
            vec![Term::constant("Bullwinkle"), Term::constant("Mouse")],
        ))));
        assert_eq!(render_formula(&f, &s), "Bullwinkle is not a Mouse");
        // without a negated pattern the canonical form is used
        let s2 = store_with("isa", 2, "{0} is a {1}", None);
        assert_eq!(render_formula(&f, &s2), "(not (isa Bullwinkle Mouse))");
    }

    #[test]
    fn out_of_range_slot_is_rejected() {
        let mut s = TemplateStore::new();
        let err = s
            .insert(NLTemplate {
                predicate: Symbol::new("loves"),
                arity: 2,
                pattern: "{0} loves {2}".into(),
                negated: None,
            })
            .unwrap_err();
        assert!(matches!(err, ExplainError::BadSlot { slot: 2, .. }));
    }
}
