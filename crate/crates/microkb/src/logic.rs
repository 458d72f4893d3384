//! Terms, formulas, substitutions, and unification: the expressive
//! assertion-language layer every other module operates on.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::symbol::Symbol;

pub type VarId = u64;

static NEXT_VAR_ID: AtomicU64 = AtomicU64::new(1);

/// Allocate a fresh, process-unique variable id.
pub fn fresh_var_id() -> VarId {
    NEXT_VAR_ID.fetch_add(1, Ordering::Relaxed)
}

/// A logic variable. Identity is the numeric id; the name is only for display.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: Symbol,
    pub id: VarId,
}

impl Var {
    pub fn fresh(name: impl Into<Symbol>) -> Self {
        Var { name: name.into(), id: fresh_var_id() }
    }

    /// Same display name, new identity.
    pub fn renamed(&self) -> Self {
        Var { name: self.name.clone(), id: fresh_var_id() }
    }
}

impl std::fmt::Debug for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "?{}#{}", self.name, self.id)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Constant(Symbol),
    Variable(Var),
    FunctionApp(Symbol, Vec<Term>),
    /// A formula reified as a term. Opaque to unification and substitution:
    /// two quoted formulas unify iff they are alpha-equivalent.
    Quoted(Box<Formula>),
}

impl Term {
    pub fn constant(name: impl Into<Symbol>) -> Term {
        Term::Constant(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) => true,
            Term::Variable(_) => false,
            Term::FunctionApp(_, args) => args.iter().all(Term::is_ground),
            Term::Quoted(_) => true,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    /// Negation as failure; legal only as a rule-body conjunct.
    Naf(Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<Symbol>, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::new(predicate, args))
    }

    /// Free variables in order of first occurrence, deduplicated by id.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<VarId>, out: &mut Vec<Var>) {
    match f {
        Formula::Atom(a) => {
            for t in &a.args {
                collect_free_term(t, bound, out);
            }
        }
        Formula::Not(inner) | Formula::Naf(inner) => collect_free(inner, bound, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                collect_free(g, bound, out);
            }
        }
        Formula::Implies(a, c) => {
            collect_free(a, bound, out);
            collect_free(c, bound, out);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            bound.push(v.id);
            collect_free(body, bound, out);
            bound.pop();
        }
    }
}

fn collect_free_term(t: &Term, bound: &mut Vec<VarId>, out: &mut Vec<Var>) {
    match t {
        Term::Variable(v) => {
            if !bound.contains(&v.id) && !out.iter().any(|o| o.id == v.id) {
                out.push(v.clone());
            }
        }
        Term::FunctionApp(_, args) => {
            for a in args {
                collect_free_term(a, bound, out);
            }
        }
        Term::Constant(_) | Term::Quoted(_) => {}
    }
}

/// A binding set from variable ids to terms.
///
/// Bindings are kept triangular; `apply_*` resolves chains fully, so applying
/// twice equals applying once. The occurs check runs on every new binding.
#[derive(Clone, Default, Debug)]
pub struct Substitution {
    bindings: HashMap<VarId, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, id: VarId) -> Option<&Term> {
        self.bindings.get(&id)
    }

    /// Resolve a term one level: follow variable bindings until a non-variable
    /// or an unbound variable is reached.
    pub fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Variable(v) = cur {
            match self.bindings.get(&v.id) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }

    fn occurs(&self, id: VarId, t: &Term) -> bool {
        match self.walk(t) {
            Term::Variable(v) => v.id == id,
            Term::FunctionApp(_, args) => args.iter().any(|a| self.occurs(id, a)),
            Term::Constant(_) | Term::Quoted(_) => false,
        }
    }

    /// Bind a variable, failing on the occurs check.
    pub fn bind(&mut self, var: &Var, t: Term) -> bool {
        if let Term::Variable(v) = self.walk(&t) {
            if v.id == var.id {
                return true; // binding a variable to itself is a no-op
            }
        }
        if self.occurs(var.id, &t) {
            return false;
        }
        self.bindings.insert(var.id, t);
        true
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Variable(v) => Term::Variable(v.clone()),
            Term::Constant(c) => Term::Constant(c.clone()),
            Term::FunctionApp(f, args) => {
                Term::FunctionApp(f.clone(), args.iter().map(|a| self.apply_term(a)).collect())
            }
            Term::Quoted(q) => Term::Quoted(q.clone()),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.apply_term(t)).collect() }
    }

    pub fn apply_formula(&self, f: &Formula) -> Formula {
        match f {
            Formula::Atom(a) => Formula::Atom(self.apply_atom(a)),
            Formula::Not(g) => Formula::Not(Box::new(self.apply_formula(g))),
            Formula::Naf(g) => Formula::Naf(Box::new(self.apply_formula(g))),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| self.apply_formula(g)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| self.apply_formula(g)).collect()),
            Formula::Implies(a, c) => Formula::Implies(
                Box::new(self.apply_formula(a)),
                Box::new(self.apply_formula(c)),
            ),
            // Quantified variables shadow outer bindings only if ids collide,
            // which standardization rules out; apply directly.
            Formula::ForAll(v, body) => Formula::ForAll(v.clone(), Box::new(self.apply_formula(body))),
            Formula::Exists(v, body) => Formula::Exists(v.clone(), Box::new(self.apply_formula(body))),
        }
    }

    /// Restrict to the given variables, fully resolving each binding.
    pub fn project(&self, vars: &[Var]) -> Vec<(Var, Term)> {
        vars.iter()
            .filter_map(|v| {
                self.bindings
                    .get(&v.id)
                    .map(|_| (v.clone(), self.apply_term(&Term::Variable(v.clone()))))
            })
            .collect()
    }
}

/// Most general unifier of two terms, extending `s`. `None` on clash or
/// occurs-check failure; failure is a normal result, not an error.
pub fn unify_terms(a: &Term, b: &Term, s: &Substitution) -> Option<Substitution> {
    let mut s = s.clone();
    if unify_terms_mut(a, b, &mut s) {
        Some(s)
    } else {
        None
    }
}

pub(crate) fn unify_terms_mut(a: &Term, b: &Term, s: &mut Substitution) -> bool {
    let ra = s.walk(a).clone();
    let rb = s.walk(b).clone();
    match (&ra, &rb) {
        (Term::Variable(v1), Term::Variable(v2)) if v1.id == v2.id => true,
        (Term::Variable(v), other) | (other, Term::Variable(v)) => s.bind(v, other.clone()),
        (Term::Constant(c1), Term::Constant(c2)) => c1 == c2,
        (Term::FunctionApp(f1, a1), Term::FunctionApp(f2, a2)) => {
            f1 == f2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| unify_terms_mut(x, y, s))
        }
        (Term::Quoted(q1), Term::Quoted(q2)) => alpha_eq(q1, q2),
        _ => false,
    }
}

/// Most general unifier of two atoms, extending `s`.
pub fn unify_atoms(a: &Atom, b: &Atom, s: &Substitution) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut s = s.clone();
    for (x, y) in a.args.iter().zip(&b.args) {
        if !unify_terms_mut(x, y, &mut s) {
            return None;
        }
    }
    Some(s)
}

/// One-way matching: variables may be bound only on the pattern side.
/// Used by the proof checker to confirm an instance relationship.
pub fn match_atom(pattern: &Atom, instance: &Atom, s: &Substitution) -> Option<Substitution> {
    if pattern.predicate != instance.predicate || pattern.args.len() != instance.args.len() {
        return None;
    }
    let mut s = s.clone();
    for (p, i) in pattern.args.iter().zip(&instance.args) {
        if !match_term(p, i, &mut s) {
            return None;
        }
    }
    Some(s)
}

fn match_term(pattern: &Term, instance: &Term, s: &mut Substitution) -> bool {
    let rp = s.walk(pattern).clone();
    match (&rp, instance) {
        (Term::Variable(v), inst) => s.bind(v, inst.clone()),
        (Term::Constant(c1), Term::Constant(c2)) => c1 == c2,
        (Term::FunctionApp(f1, a1), Term::FunctionApp(f2, a2)) => {
            f1 == f2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| match_term(x, y, s))
        }
        (Term::Quoted(q1), Term::Quoted(q2)) => alpha_eq(q1, q2),
        _ => false,
    }
}

/// Structural equality modulo a bijective renaming of variable ids.
pub fn alpha_eq(f1: &Formula, f2: &Formula) -> bool {
    let mut fwd = HashMap::new();
    let mut bwd = HashMap::new();
    alpha_eq_formula(f1, f2, &mut fwd, &mut bwd)
}

fn alpha_eq_formula(
    f1: &Formula,
    f2: &Formula,
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    match (f1, f2) {
        (Formula::Atom(a1), Formula::Atom(a2)) => alpha_eq_atom(a1, a2, fwd, bwd),
        (Formula::Not(g1), Formula::Not(g2)) | (Formula::Naf(g1), Formula::Naf(g2)) => {
            alpha_eq_formula(g1, g2, fwd, bwd)
        }
        (Formula::And(x), Formula::And(y)) | (Formula::Or(x), Formula::Or(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(a, b)| alpha_eq_formula(a, b, fwd, bwd))
        }
        (Formula::Implies(a1, c1), Formula::Implies(a2, c2)) => {
            alpha_eq_formula(a1, a2, fwd, bwd) && alpha_eq_formula(c1, c2, fwd, bwd)
        }
        (Formula::ForAll(v1, b1), Formula::ForAll(v2, b2))
        | (Formula::Exists(v1, b1), Formula::Exists(v2, b2)) => {
            bind_pair(v1.id, v2.id, fwd, bwd) && alpha_eq_formula(b1, b2, fwd, bwd)
        }
        _ => false,
    }
}

pub(crate) fn alpha_eq_atom(
    a1: &Atom,
    a2: &Atom,
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    a1.predicate == a2.predicate
        && a1.args.len() == a2.args.len()
        && a1.args.iter().zip(&a2.args).all(|(x, y)| alpha_eq_term(x, y, fwd, bwd))
}

fn alpha_eq_term(
    t1: &Term,
    t2: &Term,
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    match (t1, t2) {
        (Term::Constant(c1), Term::Constant(c2)) => c1 == c2,
        (Term::Variable(v1), Term::Variable(v2)) => bind_pair(v1.id, v2.id, fwd, bwd),
        (Term::FunctionApp(f1, a1), Term::FunctionApp(f2, a2)) => {
            f1 == f2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| alpha_eq_term(x, y, fwd, bwd))
        }
        (Term::Quoted(q1), Term::Quoted(q2)) => alpha_eq_formula(q1, q2, fwd, bwd),
        _ => false,
    }
}

fn bind_pair(
    id1: VarId,
    id2: VarId,
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    match (fwd.get(&id1), bwd.get(&id2)) {
        (None, None) => {
            fwd.insert(id1, id2);
            bwd.insert(id2, id1);
            true
        }
        (Some(&m1), Some(&m2)) => m1 == id2 && m2 == id1,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str) -> Var {
        Var::fresh(name)
    }

    #[test]
    fn unify_binds_single_variable() {
        let x = var("x");
        let s = unify_terms(
            &Term::Variable(x.clone()),
            &Term::constant("Andorra"),
            &Substitution::new(),
        )
        .unwrap();
        assert_eq!(s.apply_term(&Term::Variable(x)), Term::constant("Andorra"));
    }

    #[test]
    fn unify_distinct_constants_fails() {
        assert!(unify_terms(
            &Term::constant("Andorra"),
            &Term::constant("France"),
            &Substitution::new()
        )
        .is_none());
    }

    #[test]
    fn occurs_check_rejects_cyclic_binding() {
        let x = var("x");
        let t = Term::FunctionApp("motherOf".into(), vec![Term::Variable(x.clone())]);
        assert!(unify_terms(&Term::Variable(x), &t, &Substitution::new()).is_none());
    }

    #[test]
    fn apply_replaces_bound_and_keeps_unbound() {
        let x = var("x");
        let y = var("y");
        let mut s = Substitution::new();
        assert!(s.bind(&x, Term::constant("p")));
        let f = Formula::atom("loves", vec![Term::Variable(x), Term::Variable(y.clone())]);
        let applied = s.apply_formula(&f);
        assert_eq!(
            applied,
            Formula::atom("loves", vec![Term::constant("p"), Term::Variable(y)])
        );
    }

    #[test]
    fn apply_ground_term_is_fixed_point() {
        let x = var("x");
        let mut s = Substitution::new();
        assert!(s.bind(&x, Term::constant("p")));
        assert_eq!(s.apply_term(&Term::constant("Andorra")), Term::constant("Andorra"));
    }

    #[test]
    fn apply_is_idempotent_through_chains() {
        // x -> y, y -> c: applying once must already resolve x to c.
        let x = var("x");
        let y = var("y");
        let mut s = Substitution::new();
        assert!(s.bind(&x, Term::Variable(y.clone())));
        assert!(s.bind(&y, Term::constant("c")));
        let once = s.apply_term(&Term::Variable(x.clone()));
        let twice = s.apply_term(&once);
        assert_eq!(once, twice);
        assert_eq!(once, Term::constant("c"));
    }

    #[test]
    fn unify_function_apps() {
        let x = var("x");
        let a = Term::FunctionApp("skMother".into(), vec![Term::Variable(x.clone())]);
        let b = Term::FunctionApp("skMother".into(), vec![Term::constant("SwedeA")]);
        let s = unify_terms(&a, &b, &Substitution::new()).unwrap();
        assert_eq!(s.apply_term(&Term::Variable(x)), Term::constant("SwedeA"));
    }

    #[test]
    fn alpha_eq_respects_bijection() {
        let x1 = var("x");
        let y1 = var("y");
        let x2 = var("a");
        let y2 = var("b");
        // p(x, y, x) is alpha-equal to p(a, b, a) but not to p(b, b, b).
        let f1 = Formula::atom("p", vec![Term::Variable(x1.clone()), Term::Variable(y1), Term::Variable(x1)]);
        let f2 = Formula::atom("p", vec![Term::Variable(x2.clone()), Term::Variable(y2.clone()), Term::Variable(x2)]);
        let f3 = Formula::atom("p", vec![Term::Variable(y2.clone()), Term::Variable(y2.clone()), Term::Variable(y2)]);
        assert!(alpha_eq(&f1, &f2));
        assert!(!alpha_eq(&f1, &f3));
    }

    #[test]
    fn quoted_formulas_unify_only_alpha_equal() {
        let q1 = Term::Quoted(Box::new(Formula::atom("owns", vec![Term::constant("You"), Term::constant("House")])));
        let q2 = Term::Quoted(Box::new(Formula::atom("owns", vec![Term::constant("You"), Term::constant("House")])));
        let q3 = Term::Quoted(Box::new(Formula::atom("owns", vec![Term::constant("You"), Term::constant("Car")])));
        assert!(unify_terms(&q1, &q2, &Substitution::new()).is_some());
        assert!(unify_terms(&q1, &q3, &Substitution::new()).is_none());
    }
}
