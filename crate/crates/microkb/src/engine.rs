//! Budgeted backward-chaining argument search. Subgoals are offered to the
//! Heuristic Level first; generic clause chaining over visible clauses is the
//! last resort. The search runs iterative deepening with per-query subgoal
//! memoization, saturating recursive goals round by round, and returns
//! proof-checkable argument trees for both a query and its negation.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::clause::{canon_literal, standardize_apart, LitMode, Literal, Strength};
use crate::hl::{BudgetSlice, Registry, SolveOutcome};
use crate::kb::{AssertionId, KnowledgeBase};
use crate::logic::{alpha_eq, unify_atoms, Atom, Formula, Substitution, Term, Var};
use crate::symbol::Symbol;

pub const NAF_MODULE: &str = "NegationAsFailure";
pub const CONJUNCTION_MODULE: &str = "ConjunctionSplit";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown microtheory '{0}'")]
    UnknownMt(Symbol),
    #[error("predicate '{0}' is not declared by any assertion and no reasoner serves it")]
    UndeclaredPredicate(Symbol),
    #[error("unsupported query shape: {0}")]
    UnsupportedQuery(String),
}

/// Cooperative resource limits, enforced at every step boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: u64,
    pub max_depth: u32,
    pub wall_millis: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 10_000, max_depth: 32, wall_millis: 2_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Distinct answers reported per free-variable query.
    pub answer_cap: usize,
    /// Distinct conclusions retained per internal subgoal.
    pub subgoal_cap: usize,
    /// Alternative argument trees kept per distinct conclusion.
    pub trees_per_conclusion: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { answer_cap: 64, subgoal_cap: 4096, trees_per_conclusion: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepVia {
    Assertion(AssertionId),
    Module(&'static str),
}

/// One inference step. Replaying the children's conclusions through `via`
/// under `bindings` re-derives `conclusion`; steps produced by a specialized
/// reasoner are opaque but cite the assertions they relied on.
#[derive(Debug, Clone)]
pub struct InferenceStep {
    pub conclusion: Literal,
    pub via: StepVia,
    pub bindings: Substitution,
    pub children: Vec<InferenceStep>,
    pub cited: Vec<AssertionId>,
    pub note: Option<String>,
    pub qualifier: Option<f64>,
    /// True when the step's warrant is a default assumption (taxonomy
    /// disjointness, temporal projection, negation as failure).
    pub assumption: bool,
}

impl InferenceStep {
    pub fn count(&self) -> usize {
        1 + self.children.iter().map(InferenceStep::count).sum::<usize>()
    }

    /// Visit this step and every descendant, parents before children.
    pub fn walk_steps(&self, f: &mut impl FnMut(&InferenceStep)) {
        f(self);
        for c in &self.children {
            c.walk_steps(f);
        }
    }

    fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash_into(&mut h);
        h.finish()
    }

    fn hash_into<H: Hasher>(&self, h: &mut H) {
        canon_literal(&self.conclusion).hash(h);
        match &self.via {
            StepVia::Assertion(id) => (0u8, id).hash(h),
            StepVia::Module(m) => (1u8, m).hash(h),
        }
        self.cited.hash(h);
        self.children.len().hash(h);
        for c in &self.children {
            c.hash_into(h);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Pro,
    Con,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgStrength {
    Proof,
    DefaultArgument,
}

impl std::fmt::Display for ArgStrength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArgStrength::Proof => write!(f, "proof"),
            ArgStrength::DefaultArgument => write!(f, "default"),
        }
    }
}

/// A justification tree for a literal (pro) or its negation (con).
#[derive(Debug, Clone)]
pub struct ArgumentTree {
    pub root: InferenceStep,
    pub polarity: Polarity,
    pub strength: ArgStrength,
    pub step_count: usize,
    pub used_assertion_ids: BTreeSet<AssertionId>,
    /// Ingest timestamp of the stalest premise (minimum over used
    /// assertions); `i64::MAX` when the argument cites no assertion.
    pub stalest_premise: i64,
    pub mt: Symbol,
    /// Likelihood qualifier reported by temporal projection, when present.
    pub qualifier: Option<f64>,
}

impl ArgumentTree {
    pub fn conclusion(&self) -> &Literal {
        &self.root.conclusion
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub steps_expanded: u64,
    pub chain_steps_by_pred: HashMap<Symbol, u64>,
}

impl SearchStats {
    pub fn chain_steps(&self, pred: &Symbol) -> u64 {
        self.chain_steps_by_pred.get(pred).copied().unwrap_or(0)
    }

    fn merge(&mut self, other: &SearchStats) {
        self.steps_expanded += other.steps_expanded;
        for (p, n) in &other.chain_steps_by_pred {
            *self.chain_steps_by_pred.entry(p.clone()).or_insert(0) += n;
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProveOutcome {
    pub trees: Vec<ArgumentTree>,
    pub suspended: bool,
    pub stats: SearchStats,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AskOutcome {
    pub pro: Vec<ArgumentTree>,
    pub con: Vec<ArgumentTree>,
    pub suspended: bool,
    pub stats: SearchStats,
    pub notes: Vec<String>,
    pub free_vars: Vec<Var>,
    pub query: Formula,
}

// ---------------------------------------------------------------------------
// Search internals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum EntryState {
    Fresh,
    Open,
    Done,
}

#[derive(Debug, Clone)]
struct AnswerRec {
    conclusion: Literal,
    step: InferenceStep,
}

#[derive(Debug)]
struct MemoEntry {
    answers: Vec<AnswerRec>,
    fingerprints: HashSet<u64>,
    conclusions: HashSet<String>,
    state: EntryState,
    eval_depth: u32,
}

impl MemoEntry {
    fn new() -> Self {
        MemoEntry {
            answers: Vec::new(),
            fingerprints: HashSet::new(),
            conclusions: HashSet::new(),
            state: EntryState::Fresh,
            eval_depth: 0,
        }
    }
}

struct Search<'a> {
    kb: &'a KnowledgeBase,
    registry: &'a Registry,
    config: &'a EngineConfig,
    deadline: Instant,
    max_steps: u64,
    steps: u64,
    suspended: bool,
    depth_cut: bool,
    changed: bool,
    cycle_hit: bool,
    memo: HashMap<(String, Symbol), MemoEntry>,
    stats: SearchStats,
    notes: Vec<String>,
}

impl<'a> Search<'a> {
    fn new(
        kb: &'a KnowledgeBase,
        registry: &'a Registry,
        config: &'a EngineConfig,
        deadline: Instant,
        max_steps: u64,
    ) -> Self {
        Search {
            kb,
            registry,
            config,
            deadline,
            max_steps,
            steps: 0,
            suspended: false,
            depth_cut: false,
            changed: false,
            cycle_hit: false,
            memo: HashMap::new(),
            stats: SearchStats::default(),
            notes: Vec::new(),
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.steps >= self.max_steps || Instant::now() >= self.deadline {
            self.suspended = true;
            true
        } else {
            false
        }
    }

    fn note(&mut self, msg: String) {
        if !self.notes.contains(&msg) {
            self.notes.push(msg);
        }
    }

    /// Saturation driver: rerun the depth-limited search until no new answer
    /// appears. Goal graphs without recursion finish in one round.
    fn saturate(&mut self, goal: &Literal, mt: &Symbol, depth: u32) -> Vec<AnswerRec> {
        loop {
            self.changed = false;
            self.cycle_hit = false;
            for e in self.memo.values_mut() {
                if e.state == EntryState::Done {
                    e.state = EntryState::Fresh;
                }
            }
            let answers = self.solve(goal, mt, depth);
            if self.suspended || !self.changed || !self.cycle_hit {
                return answers;
            }
        }
    }

    fn solve(&mut self, goal: &Literal, mt: &Symbol, depth: u32) -> Vec<AnswerRec> {
        let key = (canon_literal(goal), mt.clone());
        match self.memo.get(&key).map(|e| (e.state.clone(), e.eval_depth)) {
            Some((EntryState::Open, _)) => {
                self.cycle_hit = true;
                return self.memo[&key].answers.clone();
            }
            Some((EntryState::Done, d)) if d >= depth => {
                return self.memo[&key].answers.clone();
            }
            Some(_) => {}
            None => {
                self.memo.insert(key.clone(), MemoEntry::new());
            }
        }
        {
            let e = self.memo.get_mut(&key).expect("entry exists");
            e.state = EntryState::Open;
            e.eval_depth = e.eval_depth.max(depth);
        }
        self.evaluate(goal, mt, depth, &key);
        let e = self.memo.get_mut(&key).expect("entry exists");
        e.state = EntryState::Done;
        e.answers.clone()
    }

    fn record(&mut self, key: &(String, Symbol), conclusion: Literal, step: InferenceStep) {
        let e = self.memo.get_mut(key).expect("entry exists");
        let fp = step.fingerprint();
        if e.fingerprints.contains(&fp) {
            return;
        }
        let ckey = canon_literal(&conclusion);
        let is_new_conclusion = !e.conclusions.contains(&ckey);
        if is_new_conclusion && e.conclusions.len() >= self.config.subgoal_cap {
            return;
        }
        if !is_new_conclusion {
            let existing =
                e.answers.iter().filter(|a| canon_literal(&a.conclusion) == ckey).count();
            if existing >= self.config.trees_per_conclusion {
                return;
            }
        }
        e.fingerprints.insert(fp);
        e.conclusions.insert(ckey);
        e.answers.push(AnswerRec { conclusion, step });
        self.changed = true;
    }

    fn evaluate(&mut self, goal: &Literal, mt: &Symbol, depth: u32, key: &(String, Symbol)) {
        if goal.mode == LitMode::Naf {
            if !goal.atom.is_ground() {
                self.note(format!(
                    "naf goal {} has unbound variables and cannot be checked",
                    goal.atom
                ));
                return;
            }
            if let Some(step) = self.naf_check(&goal.atom, mt, depth) {
                self.record(key, Literal::naf(goal.atom.clone()), step);
            }
            return;
        }

        // Heuristic Level first, cheapest bid first.
        let dispatch = self.registry.dispatch(goal, mt, self.kb);
        for (module, _bid) in dispatch {
            if self.out_of_budget() {
                return;
            }
            self.steps += 1;
            self.stats.steps_expanded += 1;
            let slice = BudgetSlice {
                steps_remaining: self.max_steps.saturating_sub(self.steps),
                deadline: self.deadline,
            };
            match module.solve(goal, mt, self.kb, &slice) {
                SolveOutcome::Answers { answers, authoritative, note } => {
                    if let Some(n) = note {
                        self.note(n);
                    }
                    for a in answers {
                        self.record(key, a.conclusion, a.step);
                    }
                    if authoritative {
                        return;
                    }
                }
                SolveOutcome::Pass => {}
                SolveOutcome::Overrun => {
                    self.suspended = true;
                }
            }
        }

        self.chain(goal, mt, depth, key);
    }

    /// Generic clause chaining: the last resort.
    fn chain(&mut self, goal: &Literal, mt: &Symbol, depth: u32, key: &(String, Symbol)) {
        let positive = goal.mode == LitMode::Pos;
        let Ok(clause_refs) = self.kb.visible_clauses(mt, &goal.atom.predicate, positive) else {
            return;
        };
        for cref in clause_refs {
            if self.out_of_budget() {
                return;
            }
            let assertion = self.kb.assertion(cref.assertion).expect("indexed assertion");
            let stored = &assertion.clauses[cref.clause];
            if !stored.is_fact() && depth == 0 {
                self.depth_cut = true;
                continue;
            }
            let clause = standardize_apart(stored);
            let Some(subst) = unify_atoms(&clause.head.atom, &goal.atom, &Substitution::new())
            else {
                continue;
            };
            self.steps += 1;
            self.stats.steps_expanded += 1;
            *self.stats.chain_steps_by_pred.entry(goal.atom.predicate.clone()).or_insert(0) += 1;
            if clause.is_fact() {
                let conclusion =
                    Literal { mode: clause.head.mode, atom: subst.apply_atom(&clause.head.atom) };
                let step = InferenceStep {
                    conclusion: conclusion.clone(),
                    via: StepVia::Assertion(assertion.id),
                    bindings: Substitution::new(),
                    children: Vec::new(),
                    cited: Vec::new(),
                    note: None,
                    qualifier: None,
                    assumption: false,
                };
                self.record(key, conclusion, step);
            } else {
                // naf literals run last, once their variables are bound
                let mut order: Vec<usize> = (0..clause.body.len())
                    .filter(|i| clause.body[*i].mode != LitMode::Naf)
                    .collect();
                order.extend(
                    (0..clause.body.len()).filter(|i| clause.body[*i].mode == LitMode::Naf),
                );
                let slots: Vec<Option<InferenceStep>> = vec![None; clause.body.len()];
                self.solve_body(&clause, &order, 0, subst, slots, mt, depth - 1, assertion.id, key);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_body(
        &mut self,
        clause: &crate::clause::Clause,
        order: &[usize],
        pos: usize,
        subst: Substitution,
        slots: Vec<Option<InferenceStep>>,
        mt: &Symbol,
        depth: u32,
        assertion_id: AssertionId,
        key: &(String, Symbol),
    ) {
        if self.out_of_budget() {
            return;
        }
        if pos == order.len() {
            let conclusion =
                Literal { mode: clause.head.mode, atom: subst.apply_atom(&clause.head.atom) };
            let step = InferenceStep {
                conclusion: conclusion.clone(),
                via: StepVia::Assertion(assertion_id),
                bindings: subst,
                children: slots.into_iter().map(|s| s.expect("all body slots filled")).collect(),
                cited: Vec::new(),
                note: None,
                qualifier: None,
                assumption: false,
            };
            self.record(key, conclusion, step);
            return;
        }
        let idx = order[pos];
        let lit = &clause.body[idx];
        let inst = Literal { mode: lit.mode, atom: subst.apply_atom(&lit.atom) };
        if lit.mode == LitMode::Naf {
            if !inst.atom.is_ground() {
                self.note(format!(
                    "naf literal {} still has unbound variables after the positive body; path dropped",
                    inst.atom
                ));
                return;
            }
            if let Some(step) = self.naf_check(&inst.atom, mt, depth) {
                let mut next = slots;
                next[idx] = Some(step);
                self.solve_body(clause, order, pos + 1, subst, next, mt, depth, assertion_id, key);
            }
        } else {
            let sub_answers = self.solve(&inst, mt, depth);
            for ans in sub_answers {
                if self.out_of_budget() {
                    return;
                }
                if ans.conclusion.mode != inst.mode {
                    continue;
                }
                if let Some(s2) = unify_atoms(&inst.atom, &ans.conclusion.atom, &subst) {
                    let mut next = slots.clone();
                    next[idx] = Some(ans.step.clone());
                    self.solve_body(
                        clause,
                        order,
                        pos + 1,
                        s2,
                        next,
                        mt,
                        depth,
                        assertion_id,
                        key,
                    );
                }
            }
        }
    }

    /// Negation as failure: succeeds iff the positive goal finitely fails
    /// within the remaining budget and the goal context is closed-world.
    /// Runs as a nested self-contained search so its verdict is stable.
    fn naf_check(&mut self, atom: &Atom, mt: &Symbol, depth: u32) -> Option<InferenceStep> {
        if !self.kb.is_closed_world(mt) {
            self.note(format!(
                "naf on {} failed: microtheory '{}' is not flagged closed-world",
                atom, mt
            ));
            return None;
        }
        if self.out_of_budget() {
            return None;
        }
        self.steps += 1;
        self.stats.steps_expanded += 1;
        let mut sub = Search::new(
            self.kb,
            self.registry,
            self.config,
            self.deadline,
            self.max_steps.saturating_sub(self.steps),
        );
        let answers = sub.saturate(&Literal::pos(atom.clone()), mt, depth);
        self.steps += sub.steps;
        self.stats.merge(&sub.stats);
        for n in sub.notes {
            self.note(n);
        }
        if sub.suspended {
            self.suspended = true;
            return None; // cut off, not finite failure
        }
        if sub.depth_cut {
            self.depth_cut = true;
            return None; // a deeper iteration may settle it
        }
        if !answers.is_empty() {
            return None; // positive goal succeeded
        }
        Some(InferenceStep {
            conclusion: Literal::naf(atom.clone()),
            via: StepVia::Module(NAF_MODULE),
            bindings: Substitution::new(),
            children: Vec::new(),
            cited: Vec::new(),
            note: Some(format!("no derivation of {} exists in closed-world '{}'", atom, mt)),
            qualifier: None,
            assumption: true,
        })
    }

    /// Enumerate solutions of a conjunctive query under shared bindings.
    fn solve_query_conjunction(
        &mut self,
        lits: &[Literal],
        mt: &Symbol,
        depth: u32,
        key: &(String, Symbol),
    ) {
        let mut order: Vec<usize> =
            (0..lits.len()).filter(|i| lits[*i].mode != LitMode::Naf).collect();
        order.extend((0..lits.len()).filter(|i| lits[*i].mode == LitMode::Naf));
        let slots: Vec<Option<InferenceStep>> = vec![None; lits.len()];
        self.conjunction_step(lits, &order, 0, Substitution::new(), slots, mt, depth, key);
    }

    #[allow(clippy::too_many_arguments)]
    fn conjunction_step(
        &mut self,
        lits: &[Literal],
        order: &[usize],
        pos: usize,
        subst: Substitution,
        slots: Vec<Option<InferenceStep>>,
        mt: &Symbol,
        depth: u32,
        key: &(String, Symbol),
    ) {
        if self.out_of_budget() {
            return;
        }
        if pos == order.len() {
            let children: Vec<InferenceStep> =
                slots.into_iter().map(|s| s.expect("filled")).collect();
            let args: Vec<Term> = lits
                .iter()
                .map(|l| {
                    Term::Quoted(Box::new(
                        Literal { mode: l.mode, atom: subst.apply_atom(&l.atom) }.to_formula(),
                    ))
                })
                .collect();
            let conclusion = Literal::pos(Atom::new("and", args));
            let step = InferenceStep {
                conclusion: conclusion.clone(),
                via: StepVia::Module(CONJUNCTION_MODULE),
                bindings: subst,
                children,
                cited: Vec::new(),
                note: None,
                qualifier: None,
                assumption: false,
            };
            self.record(key, conclusion, step);
            return;
        }
        let idx = order[pos];
        let lit = &lits[idx];
        let inst = Literal { mode: lit.mode, atom: subst.apply_atom(&lit.atom) };
        if lit.mode == LitMode::Naf {
            if !inst.atom.is_ground() {
                self.note(format!(
                    "naf conjunct {} still has unbound variables; path dropped",
                    inst.atom
                ));
                return;
            }
            if let Some(step) = self.naf_check(&inst.atom, mt, depth) {
                let mut next = slots;
                next[idx] = Some(step);
                self.conjunction_step(lits, order, pos + 1, subst, next, mt, depth, key);
            }
        } else {
            let sub_answers = self.solve(&inst, mt, depth);
            for ans in sub_answers {
                if self.out_of_budget() {
                    return;
                }
                if ans.conclusion.mode != inst.mode {
                    continue;
                }
                if let Some(s2) = unify_atoms(&inst.atom, &ans.conclusion.atom, &subst) {
                    let mut next = slots.clone();
                    next[idx] = Some(ans.step.clone());
                    self.conjunction_step(lits, order, pos + 1, s2, next, mt, depth, key);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

fn deepening_schedule(max_depth: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while d < max_depth {
        out.push(d);
        d = d.saturating_mul(2);
    }
    out.push(max_depth.max(1));
    out
}

fn build_tree(
    root: InferenceStep,
    polarity: Polarity,
    mt: &Symbol,
    kb: &KnowledgeBase,
) -> ArgumentTree {
    let mut used = BTreeSet::new();
    let mut any_assumption = false;
    let mut qualifier: Option<f64> = None;
    root.walk_steps(&mut |s| {
        if let StepVia::Assertion(id) = &s.via {
            used.insert(*id);
        }
        used.extend(s.cited.iter().copied());
        any_assumption |= s.assumption;
        if let Some(q) = s.qualifier {
            qualifier = Some(qualifier.map_or(q, |cur| cur.min(q)));
        }
    });
    let all_monotonic = used
        .iter()
        .all(|id| kb.assertion(*id).map(|a| a.strength == Strength::Monotonic).unwrap_or(false));
    let stalest = used
        .iter()
        .filter_map(|id| kb.assertion(*id).map(|a| a.provenance.timestamp))
        .min()
        .unwrap_or(i64::MAX);
    let strength = if !any_assumption && all_monotonic {
        ArgStrength::Proof
    } else {
        ArgStrength::DefaultArgument
    };
    ArgumentTree {
        step_count: root.count(),
        root,
        polarity,
        strength,
        used_assertion_ids: used,
        stalest_premise: stalest,
        mt: mt.clone(),
        qualifier,
    }
}

enum QueryShape {
    Single(Literal),
    Conjunction(Vec<Literal>),
}

fn classify_query(f: &Formula) -> Result<QueryShape, EngineError> {
    fn literal_of(f: &Formula) -> Option<Literal> {
        match f {
            Formula::Atom(a) => Some(Literal::pos(a.clone())),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => Some(Literal::neg(a.clone())),
                _ => None,
            },
            Formula::Naf(inner) => match inner.as_ref() {
                Formula::Atom(a) => Some(Literal::naf(a.clone())),
                _ => None,
            },
            _ => None,
        }
    }
    if let Some(lit) = literal_of(f) {
        return Ok(QueryShape::Single(lit));
    }
    if let Formula::And(fs) = f {
        let lits: Option<Vec<Literal>> = fs.iter().map(literal_of).collect();
        if let Some(lits) = lits {
            if !lits.is_empty() {
                return Ok(QueryShape::Conjunction(lits));
            }
        }
    }
    Err(EngineError::UnsupportedQuery(
        "queries must be a literal or a conjunction of literals".into(),
    ))
}

fn check_goal_predicate(
    lit: &Literal,
    mt: &Symbol,
    kb: &KnowledgeBase,
    registry: &Registry,
) -> Result<(), EngineError> {
    let pred = &lit.atom.predicate;
    if kb.decls.predicates.contains_key(pred) || registry.any_applicable(lit, mt, kb) {
        Ok(())
    } else {
        Err(EngineError::UndeclaredPredicate(pred.clone()))
    }
}

/// Search for argument trees for one goal literal under a budget.
pub fn prove(
    kb: &KnowledgeBase,
    registry: &Registry,
    goal: &Literal,
    mt: &Symbol,
    budget: &Budget,
    config: &EngineConfig,
    polarity: Polarity,
) -> Result<ProveOutcome, EngineError> {
    if !kb.has_mt(mt) {
        return Err(EngineError::UnknownMt(mt.clone()));
    }
    check_goal_predicate(goal, mt, kb, registry)?;
    let deadline = Instant::now() + Duration::from_millis(budget.wall_millis);
    let mut trees: Vec<ArgumentTree> = Vec::new();
    let mut fingerprints = HashSet::new();
    let mut conclusions = HashSet::new();
    let mut stats = SearchStats::default();
    let mut notes = Vec::new();
    let mut steps_used = 0u64;
    let mut suspended = false;

    for d in deepening_schedule(budget.max_depth) {
        let remaining = budget.max_steps.saturating_sub(steps_used);
        if remaining == 0 {
            suspended = true;
            break;
        }
        let mut search = Search::new(kb, registry, config, deadline, remaining);
        let answers = search.saturate(goal, mt, d);
        steps_used += search.steps;
        stats.merge(&search.stats);
        for n in search.notes {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
        for ans in answers {
            let fp = ans.step.fingerprint();
            if fingerprints.contains(&fp) {
                continue;
            }
            let ckey = canon_literal(&ans.conclusion);
            if !conclusions.contains(&ckey) && conclusions.len() >= config.answer_cap {
                let msg = format!("answer enumeration capped at {}", config.answer_cap);
                if !notes.contains(&msg) {
                    notes.push(msg);
                }
                continue;
            }
            fingerprints.insert(fp);
            conclusions.insert(ckey);
            trees.push(build_tree(ans.step, polarity, mt, kb));
        }
        if search.suspended {
            suspended = true;
            break;
        }
        if !search.depth_cut {
            break; // the search was complete at this depth
        }
    }
    stats.steps_expanded = steps_used;
    Ok(ProveOutcome { trees, suspended, stats, notes })
}

/// Prove a conjunctive query under shared bindings (pro side only).
fn prove_conjunction(
    kb: &KnowledgeBase,
    registry: &Registry,
    lits: &[Literal],
    mt: &Symbol,
    budget: &Budget,
    config: &EngineConfig,
) -> Result<ProveOutcome, EngineError> {
    for lit in lits {
        check_goal_predicate(lit, mt, kb, registry)?;
    }
    let deadline = Instant::now() + Duration::from_millis(budget.wall_millis);
    let mut trees: Vec<ArgumentTree> = Vec::new();
    let mut fingerprints = HashSet::new();
    let mut conclusions = HashSet::new();
    let mut stats = SearchStats::default();
    let mut notes = Vec::new();
    let mut steps_used = 0u64;
    let mut suspended = false;
    let key = (String::from("*query-conjunction*"), mt.clone());

    for d in deepening_schedule(budget.max_depth) {
        let remaining = budget.max_steps.saturating_sub(steps_used);
        if remaining == 0 {
            suspended = true;
            break;
        }
        let mut search = Search::new(kb, registry, config, deadline, remaining);
        search.memo.insert(key.clone(), MemoEntry::new());
        loop {
            search.changed = false;
            search.cycle_hit = false;
            for e in search.memo.values_mut() {
                if e.state == EntryState::Done {
                    e.state = EntryState::Fresh;
                }
            }
            let seeded = search.memo.get_mut(&key).expect("seeded");
            seeded.answers.clear();
            seeded.fingerprints.clear();
            seeded.conclusions.clear();
            search.solve_query_conjunction(lits, mt, d, &key);
            if search.suspended || !search.changed || !search.cycle_hit {
                break;
            }
        }
        let answers = search.memo.remove(&key).expect("seeded").answers;
        steps_used += search.steps;
        stats.merge(&search.stats);
        for n in search.notes {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
        for ans in answers {
            let fp = ans.step.fingerprint();
            if fingerprints.contains(&fp) {
                continue;
            }
            let ckey = canon_literal(&ans.conclusion);
            if !conclusions.contains(&ckey) && conclusions.len() >= config.answer_cap {
                let msg = format!("answer enumeration capped at {}", config.answer_cap);
                if !notes.contains(&msg) {
                    notes.push(msg);
                }
                continue;
            }
            fingerprints.insert(fp);
            conclusions.insert(ckey);
            trees.push(build_tree(ans.step, Polarity::Pro, mt, kb));
        }
        if search.suspended {
            suspended = true;
            break;
        }
        if !search.depth_cut {
            break;
        }
    }
    stats.steps_expanded = steps_used;
    Ok(ProveOutcome { trees, suspended, stats, notes })
}

/// Gather pro and con arguments for a query under one shared budget, split
/// evenly between the sides; whatever the pro side leaves unspent rolls over
/// to the con side.
pub fn ask_truth(
    kb: &KnowledgeBase,
    registry: &Registry,
    query: &Formula,
    mt: &Symbol,
    budget: &Budget,
    config: &EngineConfig,
) -> Result<AskOutcome, EngineError> {
    if !kb.has_mt(mt) {
        return Err(EngineError::UnknownMt(mt.clone()));
    }
    let free_vars = query.free_vars();
    let started = Instant::now();
    match classify_query(query)? {
        QueryShape::Single(lit) => {
            let pro_budget = Budget {
                max_steps: (budget.max_steps / 2).max(1),
                max_depth: budget.max_depth,
                wall_millis: (budget.wall_millis / 2).max(1),
            };
            let pro = prove(kb, registry, &lit, mt, &pro_budget, config, Polarity::Pro)?;
            let elapsed = started.elapsed().as_millis() as u64;
            let con_budget = Budget {
                max_steps: budget.max_steps.saturating_sub(pro.stats.steps_expanded).max(1),
                max_depth: budget.max_depth,
                wall_millis: budget.wall_millis.saturating_sub(elapsed).max(1),
            };
            let con =
                prove(kb, registry, &lit.complement(), mt, &con_budget, config, Polarity::Con)?;
            let mut stats = pro.stats.clone();
            stats.merge(&con.stats);
            let mut notes = pro.notes.clone();
            for n in con.notes {
                if !notes.contains(&n) {
                    notes.push(n);
                }
            }
            Ok(AskOutcome {
                pro: pro.trees,
                con: con.trees,
                suspended: pro.suspended || con.suspended,
                stats,
                notes,
                free_vars,
                query: query.clone(),
            })
        }
        QueryShape::Conjunction(lits) => {
            let out = prove_conjunction(kb, registry, &lits, mt, budget, config)?;
            let mut notes = out.notes;
            notes.push(
                "con search skipped: the negation of a conjunction is disjunctive".to_string(),
            );
            Ok(AskOutcome {
                pro: out.trees,
                con: Vec::new(),
                suspended: out.suspended,
                stats: out.stats,
                notes,
                free_vars,
                query: query.clone(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Proof checking
// ---------------------------------------------------------------------------

/// Re-derive every step of the tree from the snapshot: assertion steps must
/// replay through one of their clauses by unification; opaque module steps
/// must cite assertions that exist.
pub fn proof_check(tree: &ArgumentTree, kb: &KnowledgeBase) -> bool {
    check_step(&tree.root, kb, &tree.mt)
}

fn check_step(step: &InferenceStep, kb: &KnowledgeBase, mt: &Symbol) -> bool {
    match &step.via {
        StepVia::Assertion(id) => {
            let Some(assertion) = kb.assertion(*id) else { return false };
            let structure_ok = assertion.clauses.iter().any(|stored| {
                if stored.head.mode != step.conclusion.mode
                    || stored.body.len() != step.children.len()
                {
                    return false;
                }
                let clause = standardize_apart(stored);
                let Some(mut s) =
                    unify_atoms(&clause.head.atom, &step.conclusion.atom, &Substitution::new())
                else {
                    return false;
                };
                for (blit, child) in clause.body.iter().zip(&step.children) {
                    if blit.mode != child.conclusion.mode {
                        return false;
                    }
                    match unify_atoms(&blit.atom, &child.conclusion.atom, &s) {
                        Some(s2) => s = s2,
                        None => return false,
                    }
                }
                // the replayed head must reproduce the recorded conclusion
                s.apply_atom(&clause.head.atom) == step.conclusion.atom
            });
            structure_ok && step.children.iter().all(|c| check_step(c, kb, mt))
        }
        StepVia::Module(name) => {
            if !step.cited.iter().all(|id| kb.assertion(*id).is_some()) {
                return false;
            }
            match *name {
                NAF_MODULE => {
                    step.conclusion.mode == LitMode::Naf
                        && step.children.is_empty()
                        && kb.is_closed_world(mt)
                }
                CONJUNCTION_MODULE => {
                    let args = &step.conclusion.atom.args;
                    args.len() == step.children.len()
                        && args.iter().zip(&step.children).all(|(arg, child)| match arg {
                            Term::Quoted(q) => alpha_eq(q, &child.conclusion.to_formula()),
                            _ => false,
                        })
                        && step.children.iter().all(|c| check_step(c, kb, mt))
                }
                // Specialized reasoners are opaque but auditable through
                // their citations; nested children still must check.
                _ => step.children.iter().all(|c| check_step(c, kb, mt)),
            }
        }
    }
}
