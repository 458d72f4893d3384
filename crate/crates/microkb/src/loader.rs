//! File loading: applies parsed forms to a knowledge base and template
//! store, collecting every lint error and warning with its location instead
//! of stopping at the first.

use std::path::Path;

use crate::explain::{NLTemplate, TemplateStore};
use crate::kb::{now_secs, AssertionId, KnowledgeBase, Provenance};
use crate::parser::{parse_forms, Directive, Payload};
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadIssue {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl std::fmt::Display for LoadIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub label: String,
    pub forms: usize,
    pub assertions: Vec<AssertionId>,
    pub duplicates: usize,
    pub directives: usize,
    pub templates: usize,
    pub errors: Vec<LoadIssue>,
    pub warnings: Vec<LoadIssue>,
}

impl LoadReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} forms, {} assertions ({} duplicate), {} directives, {} templates",
            self.label,
            self.forms,
            self.assertions.len(),
            self.duplicates,
            self.directives,
            self.templates
        );
        if !self.errors.is_empty() {
            s.push_str(&format!(", {} error(s)", self.errors.len()));
        }
        if !self.warnings.is_empty() {
            s.push_str(&format!(", {} warning(s)", self.warnings.len()));
        }
        s
    }
}

/// Load a stream of forms. `(in-mt M)` scopes later assertions until the
/// next `in-mt`; `(source ...)` attaches to the next assertion. Lint errors
/// (arity conflicts, unclausifiable forms, stratification) are collected and
/// loading continues with the next form.
pub fn load_str(
    kb: &mut KnowledgeBase,
    templates: &mut TemplateStore,
    text: &str,
    label: &str,
    default_mt: &Symbol,
) -> LoadReport {
    let mut report = LoadReport { label: label.to_string(), ..Default::default() };
    let parsed = match parse_forms(text) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(LoadIssue { line: e.line, col: e.col, message: e.message });
            return report;
        }
    };
    for w in parsed.warnings {
        report.warnings.push(LoadIssue { line: w.line, col: w.col, message: w.message });
    }
    report.forms = parsed.forms.len();

    let mut current_mt = default_mt.clone();
    let mut pending_source: Option<(String, Option<i64>)> = None;

    for form in parsed.forms {
        let (line, col) = (form.line, form.col);
        let err = |report: &mut LoadReport, message: String| {
            report.errors.push(LoadIssue { line, col, message });
        };
        match form.payload {
            Payload::Directive(d) => {
                report.directives += 1;
                match d {
                    Directive::InMt(m) => {
                        kb.ensure_mt(&m);
                        current_mt = m;
                    }
                    Directive::GenlMt { child, parent } => {
                        if let Err(e) = kb.add_genl_mt(&child, &parent) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::ClosedWorld(m) => {
                        kb.ensure_mt(&m);
                        if let Err(e) = kb.set_closed_world(&m) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::DeclarePredicate(p, n) => {
                        if let Err(e) = kb.declare_predicate(&p, n) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::DeclareFunction(f, n) => {
                        if let Err(e) = kb.declare_function(&f, n) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::DeclareTransitive(p) => {
                        if let Err(e) = kb.declare_transitive(&p) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::DeclareTaxonomy(p) => {
                        if let Err(e) = kb.declare_taxonomy(&p) {
                            err(&mut report, e.to_string());
                        }
                    }
                    Directive::Source { text, timestamp } => {
                        pending_source = Some((text, timestamp));
                    }
                    Directive::Template { predicate, arity, pattern, negated } => {
                        match templates.insert(NLTemplate { predicate, arity, pattern, negated }) {
                            Ok(()) => report.templates += 1,
                            Err(e) => err(&mut report, e.to_string()),
                        }
                    }
                }
            }
            Payload::Formula { formula, strength } => {
                let (source, explicit_ts) = pending_source
                    .take()
                    .unwrap_or_else(|| (format!("{}:{}", label, line), None));
                let provenance = Provenance {
                    source,
                    timestamp: explicit_ts.unwrap_or_else(now_secs),
                    file: Some(label.to_string()),
                    line: Some(line),
                };
                // Lint first so every arity conflict in the form is reported,
                // not just the first one assert_formula would stop at.
                let lints = kb.lint_formula(&formula);
                if !lints.is_empty() {
                    for e in lints {
                        err(&mut report, e.to_string());
                    }
                    continue;
                }
                match kb.assert_formula(&formula, &current_mt, strength, provenance) {
                    Ok(outcome) => {
                        if !outcome.closed_vars.is_empty() {
                            let names: Vec<String> =
                                outcome.closed_vars.iter().map(|v| format!("?{}", v)).collect();
                            report.warnings.push(LoadIssue {
                                line,
                                col,
                                message: format!(
                                    "free variable(s) {} universally closed at outermost scope",
                                    names.join(" ")
                                ),
                            });
                        }
                        if outcome.duplicate {
                            report.duplicates += 1;
                        } else {
                            report.assertions.push(outcome.id);
                        }
                    }
                    Err(e) => err(&mut report, e.to_string()),
                }
            }
        }
    }
    report
}

pub fn load_file(
    kb: &mut KnowledgeBase,
    templates: &mut TemplateStore,
    path: &Path,
    default_mt: &Symbol,
) -> std::io::Result<LoadReport> {
    let text = std::fs::read_to_string(path)?;
    let label = path.display().to_string();
    Ok(load_str(kb, templates, &text, &label, default_mt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::Strength;
    use crate::kb::BASE_MT;

    fn fresh() -> (KnowledgeBase, TemplateStore, Symbol) {
        (KnowledgeBase::new(), TemplateStore::new(), Symbol::new(BASE_MT))
    }

    #[test]
    fn loads_assertions_with_scoped_mt_and_source() {
        let (mut kb, mut templates, base) = fresh();
        let report = load_str(
            &mut kb,
            &mut templates,
            "(genl-mt GeographyMt BaseMt)\n(in-mt GeographyMt)\n(source \"factbook\" 1000)\n(isa Andorra Country)\n",
            "test.mkb",
            &base,
        );
        assert!(report.ok(), "{:?}", report.errors);
        assert_eq!(report.assertions.len(), 1);
        let a = kb.assertion(report.assertions[0]).unwrap();
        assert_eq!(a.mt.as_str(), "GeographyMt");
        assert_eq!(a.provenance.source, "factbook");
        assert_eq!(a.provenance.timestamp, 1000);
        assert_eq!(a.provenance.line, Some(4));
    }

    #[test]
    fn lint_errors_are_collected_not_fatal() {
        let (mut kb, mut templates, base) = fresh();
        let report = load_str(
            &mut kb,
            &mut templates,
            "(declare-predicate located 3)\n(located A B)\n(isa A Thing)\n(located B C)\n",
            "lint.mkb",
            &base,
        );
        assert_eq!(report.errors.len(), 2);
        assert_eq!(report.assertions.len(), 1); // the isa fact still loads
        assert_eq!(report.errors[0].line, 2);
        assert_eq!(report.errors[1].line, 4);
    }

    #[test]
    fn free_variables_warn_and_close() {
        let (mut kb, mut templates, base) = fresh();
        let report = load_str(
            &mut kb,
            &mut templates,
            "(implies (isa ?x Country) (hasBorders ?x))",
            "rules.mkb",
            &base,
        );
        assert!(report.ok());
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].message.contains("universally closed"));
    }

    #[test]
    fn monotonic_forms_set_strength() {
        let (mut kb, mut templates, base) = fresh();
        let report =
            load_str(&mut kb, &mut templates, "(monotonic (isa Two EvenNumber))", "m.mkb", &base);
        assert!(report.ok());
        let a = kb.assertion(report.assertions[0]).unwrap();
        assert_eq!(a.strength, Strength::Monotonic);
    }

    #[test]
    fn templates_load_alongside_assertions() {
        let (mut kb, mut templates, base) = fresh();
        let report = load_str(
            &mut kb,
            &mut templates,
            "(template loves 2 \"{0} loves {1}\")\n(loves A B)\n",
            "t.mkb",
            &base,
        );
        assert!(report.ok());
        assert_eq!(report.templates, 1);
        assert!(templates.get(&Symbol::new("loves"), 2).is_some());
    }
}
