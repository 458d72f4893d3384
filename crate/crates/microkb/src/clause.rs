//! Clausal normalization: negation normal form, skolemization, and the
//! definite-clause restriction every stored assertion must satisfy.

use std::collections::HashMap;

use thiserror::Error;

use crate::logic::{Atom, Formula, Term, Var, VarId};
use crate::symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not clausifiable: {0}")]
pub struct NonClausifiable(pub String);

/// Whether an assertion is defeasible. Default assertions are true-by-default
/// and can lose to preferred counter-arguments; monotonic ones cannot be
/// defeated, and arguments built only from them count as proofs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Strength {
    Default,
    Monotonic,
}

impl std::fmt::Display for Strength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strength::Default => write!(f, "default"),
            Strength::Monotonic => write!(f, "monotonic"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LitMode {
    Pos,
    Neg,
    Naf,
}

/// A literal: an atom tagged positive, explicitly negated, or
/// negation-as-failure. Heads are never `Naf`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub mode: LitMode,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { mode: LitMode::Pos, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { mode: LitMode::Neg, atom }
    }

    pub fn naf(atom: Atom) -> Self {
        Literal { mode: LitMode::Naf, atom }
    }

    /// The literal with the opposite truth claim. NAF maps to the positive
    /// form (the claim whose finite failure it asserts).
    pub fn complement(&self) -> Literal {
        match self.mode {
            LitMode::Pos => Literal::neg(self.atom.clone()),
            LitMode::Neg | LitMode::Naf => Literal::pos(self.atom.clone()),
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self.mode {
            LitMode::Pos => Formula::Atom(self.atom.clone()),
            LitMode::Neg => Formula::Not(Box::new(Formula::Atom(self.atom.clone()))),
            LitMode::Naf => Formula::Naf(Box::new(Formula::Atom(self.atom.clone()))),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }
}

/// A definite clause: one head literal (positive or explicitly negated atom)
/// and a conjunctive body. Facts have an empty body.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn fact(head: Literal) -> Self {
        Clause { head, body: Vec::new() }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        let mut push = |v: &Var| {
            if !out.iter().any(|o| o.id == v.id) {
                out.push(v.clone());
            }
        };
        for lit in std::iter::once(&self.head).chain(&self.body) {
            for t in &lit.atom.args {
                collect_term_vars(t, &mut push);
            }
        }
        out
    }

    /// Reconstruct the formula this clause encodes.
    pub fn to_formula(&self) -> Formula {
        if self.body.is_empty() {
            self.head.to_formula()
        } else {
            let ante = if self.body.len() == 1 {
                self.body[0].to_formula()
            } else {
                Formula::And(self.body.iter().map(Literal::to_formula).collect())
            };
            Formula::Implies(Box::new(ante), Box::new(self.head.to_formula()))
        }
    }
}

fn collect_term_vars(t: &Term, push: &mut impl FnMut(&Var)) {
    match t {
        Term::Variable(v) => push(v),
        Term::FunctionApp(_, args) => {
            for a in args {
                collect_term_vars(a, push);
            }
        }
        Term::Constant(_) | Term::Quoted(_) => {}
    }
}

/// Rename every variable in the clause to a fresh id, preserving display
/// names. Alpha-equivalent to the input; required before unifying a stored
/// clause against a goal.
pub fn standardize_apart(clause: &Clause) -> Clause {
    let mut map: HashMap<VarId, Var> = HashMap::new();
    let rename = |lit: &Literal, map: &mut HashMap<VarId, Var>| Literal {
        mode: lit.mode,
        atom: Atom {
            predicate: lit.atom.predicate.clone(),
            args: lit.atom.args.iter().map(|t| rename_term(t, map)).collect(),
        },
    };
    let head = rename(&clause.head, &mut map);
    let body = clause.body.iter().map(|l| rename(l, &mut map)).collect();
    Clause { head, body }
}

fn rename_term(t: &Term, map: &mut HashMap<VarId, Var>) -> Term {
    match t {
        Term::Variable(v) => {
            let nv = map.entry(v.id).or_insert_with(|| v.renamed()).clone();
            Term::Variable(nv)
        }
        Term::FunctionApp(f, args) => {
            Term::FunctionApp(f.clone(), args.iter().map(|a| rename_term(a, map)).collect())
        }
        Term::Constant(_) | Term::Quoted(_) => t.clone(),
    }
}

/// Names skolem constants and functions deterministically per knowledge base:
/// the first existential `?p` with no governing universals becomes `P1`, the
/// next `P2`; under universals `?mother` becomes the function `skMother`,
/// then `skMother2`.
#[derive(Default, Clone, Debug)]
pub struct SkolemGen {
    const_counts: HashMap<String, u32>,
    fn_counts: HashMap<String, u32>,
}

impl SkolemGen {
    pub fn new() -> Self {
        SkolemGen::default()
    }

    pub fn fresh_constant(&mut self, base: &Symbol) -> Symbol {
        let base = capitalized(base.as_str());
        let n = self.const_counts.entry(base.clone()).or_insert(0);
        *n += 1;
        Symbol::new(format!("{}{}", base, n))
    }

    pub fn fresh_function(&mut self, base: &Symbol) -> Symbol {
        let base = format!("sk{}", capitalized(base.as_str()));
        let n = self.fn_counts.entry(base.clone()).or_insert(0);
        *n += 1;
        if *n == 1 {
            Symbol::new(base)
        } else {
            Symbol::new(format!("{}{}", base, n))
        }
    }
}

fn capitalized(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::from("Sk"),
    }
}

/// Wrap the formula's free variables in outermost universal quantifiers,
/// in order of first occurrence. Returns the closed formula and the list of
/// variables that were closed over (empty when already closed).
pub fn close_universally(f: &Formula) -> (Formula, Vec<Var>) {
    let free = f.free_vars();
    let mut out = f.clone();
    for v in free.iter().rev() {
        out = Formula::ForAll(v.clone(), Box::new(out));
    }
    (out, free)
}

/// Full normalization pipeline: negation normal form, skolemization of
/// existentials (constants when no universal governs them, functions of the
/// governing universals otherwise), then definite-clause conversion.
///
/// The input must be closed.
pub fn skolemize(f: &Formula, gen: &mut SkolemGen) -> Result<Vec<Clause>, NonClausifiable> {
    if !f.free_vars().is_empty() {
        return Err(NonClausifiable(format!(
            "formula has free variables: {}",
            f.free_vars().iter().map(|v| format!("?{}", v.name)).collect::<Vec<_>>().join(" ")
        )));
    }
    let mut universals = Vec::new();
    let mut skolem_map = HashMap::new();
    let qf = remove_quantifiers(f, true, &mut universals, &mut skolem_map, gen)?;
    clausify(&qf)
}

/// Quantifier removal with polarity tracking. Variables that behave
/// universally at the clause level stay variables; the others get skolem
/// terms over the universals in scope at their binding site.
fn remove_quantifiers(
    f: &Formula,
    positive: bool,
    universals: &mut Vec<Var>,
    skolems: &mut HashMap<VarId, Term>,
    gen: &mut SkolemGen,
) -> Result<Formula, NonClausifiable> {
    match f {
        Formula::Atom(a) => Ok(Formula::Atom(apply_skolems(a, skolems))),
        Formula::Not(inner) => remove_quantifiers_negated(inner, positive, universals, skolems, gen),
        Formula::Naf(inner) => match inner.as_ref() {
            Formula::Atom(a) => Ok(Formula::Naf(Box::new(Formula::Atom(apply_skolems(a, skolems))))),
            _ => Err(NonClausifiable("naf must wrap a single atom".into())),
        },
        Formula::And(fs) => Ok(Formula::And(
            fs.iter()
                .map(|g| remove_quantifiers(g, positive, universals, skolems, gen))
                .collect::<Result<_, _>>()?,
        )),
        Formula::Or(fs) => Ok(Formula::Or(
            fs.iter()
                .map(|g| remove_quantifiers(g, positive, universals, skolems, gen))
                .collect::<Result<_, _>>()?,
        )),
        Formula::Implies(a, c) => Ok(Formula::Implies(
            Box::new(remove_quantifiers(a, !positive, universals, skolems, gen)?),
            Box::new(remove_quantifiers(c, positive, universals, skolems, gen)?),
        )),
        Formula::ForAll(v, body) => {
            if positive {
                universals.push(v.clone());
                let r = remove_quantifiers(body, positive, universals, skolems, gen);
                universals.pop();
                r
            } else {
                skolems.insert(v.id, skolem_term(v, universals, gen));
                remove_quantifiers(body, positive, universals, skolems, gen)
            }
        }
        Formula::Exists(v, body) => {
            if positive {
                skolems.insert(v.id, skolem_term(v, universals, gen));
                remove_quantifiers(body, positive, universals, skolems, gen)
            } else {
                universals.push(v.clone());
                let r = remove_quantifiers(body, positive, universals, skolems, gen);
                universals.pop();
                r
            }
        }
    }
}

/// Push a negation inward one constructor and continue.
fn remove_quantifiers_negated(
    f: &Formula,
    positive: bool,
    universals: &mut Vec<Var>,
    skolems: &mut HashMap<VarId, Term>,
    gen: &mut SkolemGen,
) -> Result<Formula, NonClausifiable> {
    let negated = match f {
        Formula::Atom(_) => {
            let inner = remove_quantifiers(f, !positive, universals, skolems, gen)?;
            return Ok(Formula::Not(Box::new(inner)));
        }
        Formula::Not(g) => g.as_ref().clone(),
        Formula::And(fs) => {
            Formula::Or(fs.iter().map(|g| Formula::Not(Box::new(g.clone()))).collect())
        }
        Formula::Or(fs) => {
            Formula::And(fs.iter().map(|g| Formula::Not(Box::new(g.clone()))).collect())
        }
        Formula::Implies(a, c) => {
            Formula::And(vec![a.as_ref().clone(), Formula::Not(c.clone())])
        }
        Formula::ForAll(v, b) => Formula::Exists(v.clone(), Box::new(Formula::Not(b.clone()))),
        Formula::Exists(v, b) => Formula::ForAll(v.clone(), Box::new(Formula::Not(b.clone()))),
        Formula::Naf(_) => {
            return Err(NonClausifiable("negation of a naf literal is not supported".into()))
        }
    };
    remove_quantifiers(&negated, positive, universals, skolems, gen)
}

fn skolem_term(v: &Var, universals: &[Var], gen: &mut SkolemGen) -> Term {
    if universals.is_empty() {
        Term::Constant(gen.fresh_constant(&v.name))
    } else {
        Term::FunctionApp(
            gen.fresh_function(&v.name),
            universals.iter().map(|u| Term::Variable(u.clone())).collect(),
        )
    }
}

fn apply_skolems(a: &Atom, skolems: &HashMap<VarId, Term>) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| apply_skolems_term(t, skolems)).collect(),
    }
}

fn apply_skolems_term(t: &Term, skolems: &HashMap<VarId, Term>) -> Term {
    match t {
        Term::Variable(v) => skolems.get(&v.id).cloned().unwrap_or_else(|| t.clone()),
        Term::FunctionApp(f, args) => Term::FunctionApp(
            f.clone(),
            args.iter().map(|a| apply_skolems_term(a, skolems)).collect(),
        ),
        Term::Constant(_) | Term::Quoted(_) => t.clone(),
    }
}

/// Convert a quantifier-free formula to definite clauses.
///
/// Implications become head+body clauses (conjunctive or nested-implication
/// consequents split and curry; disjunctive antecedents distribute);
/// top-level conjunctions split; bare disjunctions are rejected.
pub fn clausify(f: &Formula) -> Result<Vec<Clause>, NonClausifiable> {
    let mut out = Vec::new();
    clausify_into(f, &mut out)?;
    for c in &out {
        check_clause_safety(c)?;
    }
    Ok(out)
}

fn clausify_into(f: &Formula, out: &mut Vec<Clause>) -> Result<(), NonClausifiable> {
    match f {
        Formula::And(fs) => {
            for g in fs {
                clausify_into(g, out)?;
            }
            Ok(())
        }
        Formula::Atom(a) => {
            out.push(Clause::fact(Literal::pos(a.clone())));
            Ok(())
        }
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => {
                out.push(Clause::fact(Literal::neg(a.clone())));
                Ok(())
            }
            _ => Err(NonClausifiable("negation of a non-atom survived normalization".into())),
        },
        Formula::Implies(ante, cons) => {
            let body_alternatives = body_literals(ante)?;
            let heads = head_literals(cons)?;
            for alt in &body_alternatives {
                for (head, extra_body) in &heads {
                    let mut body = alt.clone();
                    body.extend(extra_body.iter().cloned());
                    out.push(Clause { head: head.clone(), body });
                }
            }
            Ok(())
        }
        Formula::Or(_) => Err(NonClausifiable(
            "disjunctive assertion: only definite clauses (one head literal) are accepted".into(),
        )),
        Formula::Naf(_) => {
            Err(NonClausifiable("naf is only meaningful inside a rule body".into()))
        }
        Formula::ForAll(..) | Formula::Exists(..) => {
            Err(NonClausifiable("quantifier present: input must be skolemized first".into()))
        }
    }
}

/// Antecedent to alternative conjunctive bodies (disjunctions distribute).
fn body_literals(f: &Formula) -> Result<Vec<Vec<Literal>>, NonClausifiable> {
    match f {
        Formula::Atom(a) => Ok(vec![vec![Literal::pos(a.clone())]]),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => Ok(vec![vec![Literal::neg(a.clone())]]),
            _ => Err(NonClausifiable("complex negation in rule body".into())),
        },
        Formula::Naf(inner) => match inner.as_ref() {
            Formula::Atom(a) => Ok(vec![vec![Literal::naf(a.clone())]]),
            _ => Err(NonClausifiable("naf must wrap a single atom".into())),
        },
        Formula::And(fs) => {
            let mut alts: Vec<Vec<Literal>> = vec![Vec::new()];
            for g in fs {
                let g_alts = body_literals(g)?;
                let mut next = Vec::with_capacity(alts.len() * g_alts.len());
                for a in &alts {
                    for b in &g_alts {
                        let mut merged = a.clone();
                        merged.extend(b.iter().cloned());
                        next.push(merged);
                    }
                }
                alts = next;
            }
            Ok(alts)
        }
        Formula::Or(fs) => {
            let mut alts = Vec::new();
            for g in fs {
                alts.extend(body_literals(g)?);
            }
            Ok(alts)
        }
        Formula::Implies(..) => {
            Err(NonClausifiable("nested implication in antecedent is not Horn".into()))
        }
        _ => Err(NonClausifiable("unsupported antecedent form".into())),
    }
}

/// Consequent to head literals, each with extra body literals contributed by
/// currying nested implications: A => (B => H) is A and B => H.
fn head_literals(f: &Formula) -> Result<Vec<(Literal, Vec<Literal>)>, NonClausifiable> {
    match f {
        Formula::Atom(a) => Ok(vec![(Literal::pos(a.clone()), Vec::new())]),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => Ok(vec![(Literal::neg(a.clone()), Vec::new())]),
            _ => Err(NonClausifiable("complex negation in consequent".into())),
        },
        Formula::And(fs) => {
            let mut out = Vec::new();
            for g in fs {
                out.extend(head_literals(g)?);
            }
            Ok(out)
        }
        Formula::Implies(a, c) => {
            let extra_alts = body_literals(a)?;
            if extra_alts.len() != 1 {
                return Err(NonClausifiable("disjunction in nested consequent antecedent".into()));
            }
            let extra = &extra_alts[0];
            Ok(head_literals(c)?
                .into_iter()
                .map(|(h, mut eb)| {
                    let mut merged = extra.clone();
                    merged.append(&mut eb);
                    (h, merged)
                })
                .collect())
        }
        Formula::Or(_) => Err(NonClausifiable(
            "disjunctive consequent: only definite clauses are accepted".into(),
        )),
        _ => Err(NonClausifiable("unsupported consequent form".into())),
    }
}

/// Range restriction: head variables must occur in the body; naf literals may
/// only mention variables bound by positive body literals.
fn check_clause_safety(c: &Clause) -> Result<(), NonClausifiable> {
    if c.body.is_empty() {
        if let Some(v) = c.vars().first() {
            return Err(NonClausifiable(format!(
                "fact mentions unbound variable ?{}; universally quantified facts are not storable",
                v.name
            )));
        }
        return Ok(());
    }
    let mut body_vars: Vec<VarId> = Vec::new();
    let mut positive_vars: Vec<VarId> = Vec::new();
    for lit in &c.body {
        for t in &lit.atom.args {
            collect_term_vars(t, &mut |v| {
                body_vars.push(v.id);
                if lit.mode == LitMode::Pos {
                    positive_vars.push(v.id);
                }
            });
        }
    }
    let mut head_unbound = None;
    for t in &c.head.atom.args {
        collect_term_vars(t, &mut |v| {
            if !body_vars.contains(&v.id) && head_unbound.is_none() {
                head_unbound = Some(v.clone());
            }
        });
    }
    if let Some(v) = head_unbound {
        return Err(NonClausifiable(format!(
            "head variable ?{} does not appear in the rule body",
            v.name
        )));
    }
    for lit in &c.body {
        if lit.mode == LitMode::Naf {
            let mut unsafe_var = None;
            for t in &lit.atom.args {
                collect_term_vars(t, &mut |v| {
                    if !positive_vars.contains(&v.id) && unsafe_var.is_none() {
                        unsafe_var = Some(v.clone());
                    }
                });
            }
            if let Some(v) = unsafe_var {
                return Err(NonClausifiable(format!(
                    "naf literal mentions ?{} which no positive body literal binds",
                    v.name
                )));
            }
        }
    }
    Ok(())
}

/// Canonical text key for duplicate detection: variables are renumbered by
/// first occurrence, so alpha-equivalent clause sets collide.
pub fn canonical_key(clauses: &[Clause]) -> String {
    let mut parts: Vec<String> = clauses
        .iter()
        .map(|c| {
            let mut ids: HashMap<VarId, usize> = HashMap::new();
            let mut s = String::new();
            encode_literal(&c.head, &mut ids, &mut s);
            for b in &c.body {
                s.push('&');
                encode_literal(b, &mut ids, &mut s);
            }
            s
        })
        .collect();
    parts.sort();
    parts.join("|")
}

/// Canonical text for a single literal (variables renumbered by first
/// occurrence); used as a memo key so alpha-equivalent goals coincide.
pub(crate) fn canon_literal(lit: &Literal) -> String {
    let mut ids = HashMap::new();
    let mut s = String::new();
    encode_literal(lit, &mut ids, &mut s);
    s
}

fn encode_literal(lit: &Literal, ids: &mut HashMap<VarId, usize>, out: &mut String) {
    out.push(match lit.mode {
        LitMode::Pos => '+',
        LitMode::Neg => '-',
        LitMode::Naf => '~',
    });
    out.push_str(lit.atom.predicate.as_str());
    for t in &lit.atom.args {
        out.push(' ');
        encode_term(t, ids, out);
    }
    out.push(';');
}

fn encode_term(t: &Term, ids: &mut HashMap<VarId, usize>, out: &mut String) {
    match t {
        Term::Constant(c) => {
            out.push('c');
            out.push_str(c.as_str());
        }
        Term::Variable(v) => {
            let n = ids.len();
            let id = *ids.entry(v.id).or_insert(n);
            out.push('?');
            out.push_str(&id.to_string());
        }
        Term::FunctionApp(f, args) => {
            out.push('(');
            out.push_str(f.as_str());
            for a in args {
                out.push(' ');
                encode_term(a, ids, out);
            }
            out.push(')');
        }
        Term::Quoted(q) => {
            out.push('{');
            out.push_str(&format!("{:?}", canonical_quote(q)));
            out.push('}');
        }
    }
}

/// Quoted formulas are opaque; canonicalize their variables independently.
fn canonical_quote(f: &Formula) -> Formula {
    fn walk(f: &Formula, map: &mut HashMap<VarId, Var>) -> Formula {
        match f {
            Formula::Atom(a) => Formula::Atom(Atom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(|t| walk_term(t, map)).collect(),
            }),
            Formula::Not(g) => Formula::Not(Box::new(walk(g, map))),
            Formula::Naf(g) => Formula::Naf(Box::new(walk(g, map))),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| walk(g, map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| walk(g, map)).collect()),
            Formula::Implies(a, c) => {
                Formula::Implies(Box::new(walk(a, map)), Box::new(walk(c, map)))
            }
            Formula::ForAll(v, b) => {
                let nv = renumber(v, map);
                Formula::ForAll(nv, Box::new(walk(b, map)))
            }
            Formula::Exists(v, b) => {
                let nv = renumber(v, map);
                Formula::Exists(nv, Box::new(walk(b, map)))
            }
        }
    }
    fn walk_term(t: &Term, map: &mut HashMap<VarId, Var>) -> Term {
        match t {
            Term::Variable(v) => Term::Variable(renumber(v, map)),
            Term::FunctionApp(f, args) => {
                Term::FunctionApp(f.clone(), args.iter().map(|a| walk_term(a, map)).collect())
            }
            Term::Quoted(q) => Term::Quoted(Box::new(walk(q, map))),
            Term::Constant(_) => t.clone(),
        }
    }
    fn renumber(v: &Var, map: &mut HashMap<VarId, Var>) -> Var {
        let n = map.len() as VarId;
        map.entry(v.id).or_insert_with(|| Var { name: v.name.clone(), id: n }).clone()
    }
    let mut map = HashMap::new();
    walk(f, &mut map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Substitution;

    fn v(name: &str) -> Var {
        Var::fresh(name)
    }

    fn atom(p: &str, args: Vec<Term>) -> Formula {
        Formula::atom(p, args)
    }

    #[test]
    fn rule_clausifies_to_head_and_body() {
        // (forAll x)(forAll y)((isa x Person) and (parent x y)) implies (loves x y)
        let x = v("x");
        let y = v("y");
        let f = Formula::ForAll(
            x.clone(),
            Box::new(Formula::ForAll(
                y.clone(),
                Box::new(Formula::Implies(
                    Box::new(Formula::And(vec![
                        atom("isa", vec![Term::Variable(x.clone()), Term::constant("Person")]),
                        atom("parent", vec![Term::Variable(x.clone()), Term::Variable(y.clone())]),
                    ])),
                    Box::new(atom("loves", vec![Term::Variable(x), Term::Variable(y)])),
                )),
            )),
        );
        let clauses = skolemize(&f, &mut SkolemGen::new()).unwrap();
        assert_eq!(clauses.len(), 1);
        let c = &clauses[0];
        assert_eq!(c.head.atom.predicate, "loves");
        assert_eq!(c.head.mode, LitMode::Pos);
        assert_eq!(c.body.len(), 2);
        assert_eq!(c.body[0].atom.predicate, "isa");
        assert_eq!(c.body[1].atom.predicate, "parent");
    }

    #[test]
    fn ground_atom_is_a_fact_clause() {
        let f = atom("isa", vec![Term::constant("Socrates"), Term::constant("Man")]);
        let clauses = clausify(&f).unwrap();
        assert_eq!(clauses.len(), 1);
        assert!(clauses[0].is_fact());
    }

    #[test]
    fn disjunctive_assertion_is_rejected() {
        let f = Formula::Or(vec![atom("p", vec![]), atom("q", vec![])]);
        assert!(clausify(&f).is_err());
        assert!(skolemize(&f, &mut SkolemGen::new()).is_err());
    }

    #[test]
    fn king_skolemizes_to_shared_constant() {
        // thereExists k: forAll y: (isa y Swede) implies (kingOf y k)
        let k = v("k");
        let y = v("y");
        let f = Formula::Exists(
            k.clone(),
            Box::new(Formula::ForAll(
                y.clone(),
                Box::new(Formula::Implies(
                    Box::new(atom("isa", vec![Term::Variable(y.clone()), Term::constant("Swede")])),
                    Box::new(atom("kingOf", vec![Term::Variable(y), Term::Variable(k)])),
                )),
            )),
        );
        let clauses = skolemize(&f, &mut SkolemGen::new()).unwrap();
        assert_eq!(clauses.len(), 1);
        let c = &clauses[0];
        assert_eq!(c.head.atom.predicate, "kingOf");
        assert_eq!(c.head.atom.args[1], Term::constant("K1"));
    }

    #[test]
    fn mother_skolemizes_to_function_of_governing_universal() {
        // forAll y: (isa y Swede) implies thereExists mother: (motherOf y mother)
        let y = v("y");
        let m = v("mother");
        let f = Formula::ForAll(
            y.clone(),
            Box::new(Formula::Implies(
                Box::new(atom("isa", vec![Term::Variable(y.clone()), Term::constant("Swede")])),
                Box::new(Formula::Exists(
                    m.clone(),
                    Box::new(atom("motherOf", vec![Term::Variable(y), Term::Variable(m)])),
                )),
            )),
        );
        let clauses = skolemize(&f, &mut SkolemGen::new()).unwrap();
        assert_eq!(clauses.len(), 1);
        let c = &clauses[0];
        match &c.head.atom.args[1] {
            Term::FunctionApp(name, args) => {
                assert_eq!(name.as_str(), "skMother");
                assert_eq!(args.len(), 1);
                matches!(&args[0], Term::Variable(_));
            }
            other => panic!("expected skolem function, got {:?}", other),
        }
    }

    #[test]
    fn existential_conjunction_becomes_ground_facts() {
        let p = v("p");
        let d = v("d");
        let f = Formula::Exists(
            p.clone(),
            Box::new(Formula::Exists(
                d.clone(),
                Box::new(Formula::And(vec![
                    atom("isa", vec![Term::Variable(p.clone()), Term::constant("Person")]),
                    atom("daughter", vec![Term::Variable(p), Term::Variable(d)]),
                ])),
            )),
        );
        let clauses = skolemize(&f, &mut SkolemGen::new()).unwrap();
        assert_eq!(clauses.len(), 2);
        assert!(clauses.iter().all(Clause::is_fact));
        assert_eq!(clauses[0].head.atom.args[0], Term::constant("P1"));
        assert_eq!(clauses[1].head.atom.args, vec![Term::constant("P1"), Term::constant("D1")]);
    }

    #[test]
    fn standardize_apart_gives_disjoint_ids_and_stays_alpha_equivalent() {
        let x = v("x");
        let y = v("y");
        let c = Clause {
            head: Literal::pos(Atom::new(
                "loves",
                vec![Term::Variable(x.clone()), Term::Variable(y.clone())],
            )),
            body: vec![Literal::pos(Atom::new(
                "parent",
                vec![Term::Variable(x), Term::Variable(y)],
            ))],
        };
        let c1 = standardize_apart(&c);
        let c2 = standardize_apart(&c);
        let ids1: Vec<_> = c1.vars().iter().map(|v| v.id).collect();
        let ids2: Vec<_> = c2.vars().iter().map(|v| v.id).collect();
        assert!(ids1.iter().all(|i| !ids2.contains(i)));
        assert_eq!(canonical_key(&[c.clone()]), canonical_key(&[c1.clone()]));
        // The two copies must unify without capturing each other's variables.
        let s = Substitution::new();
        assert!(crate::logic::unify_atoms(&c1.head.atom, &c2.head.atom, &s).is_some());
    }

    #[test]
    fn ground_clause_standardizes_to_itself() {
        let c = Clause::fact(Literal::pos(Atom::new("isa", vec![Term::constant("A"), Term::constant("B")])));
        assert_eq!(standardize_apart(&c), c);
    }

    #[test]
    fn universally_quantified_fact_is_rejected() {
        let x = v("x");
        let f = Formula::ForAll(x.clone(), Box::new(atom("p", vec![Term::Variable(x)])));
        assert!(skolemize(&f, &mut SkolemGen::new()).is_err());
    }

    #[test]
    fn clausify_of_clause_formula_is_idempotent() {
        let x = v("x");
        let y = v("y");
        let f = Formula::ForAll(
            x.clone(),
            Box::new(Formula::ForAll(
                y.clone(),
                Box::new(Formula::Implies(
                    Box::new(atom("daughter", vec![Term::Variable(x.clone()), Term::Variable(y.clone())])),
                    Box::new(atom("parent", vec![Term::Variable(x), Term::Variable(y)])),
                )),
            )),
        );
        let first = skolemize(&f, &mut SkolemGen::new()).unwrap();
        let back = first[0].to_formula();
        let second = clausify(&back).unwrap();
        assert_eq!(canonical_key(&first), canonical_key(&second));
    }
}
