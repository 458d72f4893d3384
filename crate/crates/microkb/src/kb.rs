//! Assertion storage: predicate/polarity indexing, the microtheory
//! generalization lattice with visibility, declarations and load-time lints,
//! and the incrementally maintained edge store behind the transitivity
//! reasoner.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::clause::{
    canonical_key, close_universally, skolemize, Clause, LitMode, NonClausifiable, SkolemGen,
    Strength,
};
use crate::logic::{Formula, Term};
use crate::symbol::Symbol;

pub type AssertionId = u64;

pub const BASE_MT: &str = "BaseMt";

pub fn now_secs() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("unknown microtheory '{0}'")]
    UnknownMt(Symbol),
    #[error("unknown assertion #{0}")]
    UnknownAssertion(AssertionId),
    #[error("microtheory '{0}' already exists")]
    MtExists(Symbol),
    #[error("genl-mt {child} -> {parent} would create a cycle in the microtheory lattice")]
    CycleError { child: Symbol, parent: Symbol },
    #[error("{kind} '{symbol}' is declared with arity {declared} but used with arity {used}")]
    ArityConflict { kind: &'static str, symbol: Symbol, declared: usize, used: usize },
    #[error(transparent)]
    NonClausifiable(#[from] NonClausifiable),
    #[error("naf on '{predicate}' closes a recursive loop through negation; stratification rejected")]
    Stratification { predicate: Symbol },
    #[error("'{predicate}' is declared transitive and only takes ground constant-to-constant edge facts")]
    TransitiveRule { predicate: Symbol },
    #[error("taxonomy predicate is already declared as '{0}'")]
    TaxonomyConflict(Symbol),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub source: String,
    pub timestamp: i64,
    pub file: Option<String>,
    pub line: Option<u32>,
}

impl Provenance {
    pub fn new(source: impl Into<String>, timestamp: i64) -> Self {
        Provenance { source: source.into(), timestamp, file: None, line: None }
    }

    pub fn interactive(source: impl Into<String>) -> Self {
        Provenance::new(source, now_secs())
    }
}

#[derive(Debug, Clone)]
pub struct Assertion {
    pub id: AssertionId,
    /// The formula as asserted (after universal closure), for display/export.
    pub formula: Formula,
    pub clauses: Vec<Clause>,
    pub mt: Symbol,
    pub strength: Strength,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct Microtheory {
    pub name: Symbol,
    pub genl_mts: BTreeSet<Symbol>,
    pub closed_world: bool,
    pub created: i64,
}

/// Points at one clause of one assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseRef {
    pub assertion: AssertionId,
    pub clause: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Declarations {
    pub predicates: BTreeMap<Symbol, usize>,
    pub functions: BTreeMap<Symbol, usize>,
    pub transitive: BTreeSet<Symbol>,
    pub taxonomy: Option<Symbol>,
}

/// Ground `pred(a, b)` edges for declared-transitive predicates, mirrored out
/// of the assertion store so reachability queries never chain clauses. Nodes
/// are interned to integer ids per predicate; edges carry the microtheory
/// they were asserted in for visibility filtering.
#[derive(Debug, Clone, Default)]
struct EdgeStore {
    graphs: HashMap<Symbol, PredGraph>,
    by_assertion: HashMap<AssertionId, Vec<(Symbol, u32, u32)>>,
}

#[derive(Debug, Clone, Default)]
struct PredGraph {
    ids: HashMap<Symbol, u32>,
    names: Vec<Symbol>,
    fwd: Vec<Vec<GraphEdge>>,
    bwd: Vec<Vec<GraphEdge>>,
}

#[derive(Debug, Clone)]
struct GraphEdge {
    other: u32,
    mt: Symbol,
    assertion: AssertionId,
}

impl PredGraph {
    fn intern(&mut self, name: &Symbol) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.clone(), id);
        self.names.push(name.clone());
        self.fwd.push(Vec::new());
        self.bwd.push(Vec::new());
        id
    }
}

impl EdgeStore {
    fn add(&mut self, pred: &Symbol, mt: &Symbol, from: &Symbol, to: &Symbol, id: AssertionId) {
        let graph = self.graphs.entry(pred.clone()).or_default();
        let f = graph.intern(from);
        let t = graph.intern(to);
        graph.fwd[f as usize].push(GraphEdge { other: t, mt: mt.clone(), assertion: id });
        graph.bwd[t as usize].push(GraphEdge { other: f, mt: mt.clone(), assertion: id });
        self.by_assertion.entry(id).or_default().push((pred.clone(), f, t));
    }

    fn remove_assertion(&mut self, id: AssertionId) {
        let Some(edges) = self.by_assertion.remove(&id) else { return };
        for (pred, f, t) in edges {
            if let Some(graph) = self.graphs.get_mut(&pred) {
                graph.fwd[f as usize].retain(|e| !(e.assertion == id && e.other == t));
                graph.bwd[t as usize].retain(|e| !(e.assertion == id && e.other == f));
            }
        }
    }
}

/// Result of a successful assert.
#[derive(Debug, Clone)]
pub struct AssertOutcome {
    pub id: AssertionId,
    /// True when an identical assertion already existed; `id` is the original.
    pub duplicate: bool,
    /// Free variables that were universally closed at assert time.
    pub closed_vars: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    assertions: BTreeMap<AssertionId, Assertion>,
    next_id: AssertionId,
    /// (head predicate, head-is-positive) -> mt -> clause refs in id order.
    index: HashMap<(Symbol, bool), BTreeMap<Symbol, Vec<ClauseRef>>>,
    mts: BTreeMap<Symbol, Microtheory>,
    pub decls: Declarations,
    revision: u64,
    skolems: SkolemGen,
    dup_index: HashMap<String, AssertionId>,
    edges: EdgeStore,
    /// head predicate -> (body predicate, via-naf) dependency edges with counts.
    naf_graph: HashMap<(Symbol, Symbol, bool), usize>,
    intersections: HashMap<(Symbol, Symbol), Symbol>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        let mut kb = KnowledgeBase { next_id: 1, ..Default::default() };
        kb.mts.insert(
            Symbol::new(BASE_MT),
            Microtheory {
                name: Symbol::new(BASE_MT),
                genl_mts: BTreeSet::new(),
                closed_world: false,
                created: now_secs(),
            },
        );
        kb
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn assertion(&self, id: AssertionId) -> Option<&Assertion> {
        self.assertions.get(&id)
    }

    pub fn assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.values()
    }

    pub fn assertion_count(&self) -> usize {
        self.assertions.len()
    }

    pub fn mt(&self, name: &Symbol) -> Option<&Microtheory> {
        self.mts.get(name)
    }

    pub fn mts(&self) -> impl Iterator<Item = &Microtheory> {
        self.mts.values()
    }

    pub fn has_mt(&self, name: &Symbol) -> bool {
        self.mts.contains_key(name)
    }

    // -- microtheory lattice ------------------------------------------------

    /// Create a microtheory with the given parents. Parentless microtheories
    /// hang off BaseMt so every context reaches the root.
    pub fn create_mt(&mut self, name: &Symbol, parents: &[Symbol]) -> Result<(), KbError> {
        if self.mts.contains_key(name) {
            return Err(KbError::MtExists(name.clone()));
        }
        for p in parents {
            if !self.mts.contains_key(p) {
                return Err(KbError::UnknownMt(p.clone()));
            }
        }
        let mut genl_mts: BTreeSet<Symbol> = parents.iter().cloned().collect();
        if genl_mts.is_empty() && name.as_str() != BASE_MT {
            genl_mts.insert(Symbol::new(BASE_MT));
        }
        self.mts.insert(
            name.clone(),
            Microtheory { name: name.clone(), genl_mts, closed_world: false, created: now_secs() },
        );
        self.revision += 1;
        Ok(())
    }

    /// Loader-friendly: create under BaseMt when absent.
    pub fn ensure_mt(&mut self, name: &Symbol) {
        if !self.mts.contains_key(name) {
            let _ = self.create_mt(name, &[]);
        }
    }

    /// Add a generalization link (child specializes parent), creating either
    /// end under BaseMt when absent. Rejects cycles.
    pub fn add_genl_mt(&mut self, child: &Symbol, parent: &Symbol) -> Result<(), KbError> {
        self.ensure_mt(parent);
        self.ensure_mt(child);
        if child == parent || self.ancestors(parent).iter().any(|(m, _)| m == child) {
            return Err(KbError::CycleError { child: child.clone(), parent: parent.clone() });
        }
        self.mts.get_mut(child).expect("ensured").genl_mts.insert(parent.clone());
        self.revision += 1;
        Ok(())
    }

    pub fn set_closed_world(&mut self, mt: &Symbol) -> Result<(), KbError> {
        match self.mts.get_mut(mt) {
            Some(m) => {
                m.closed_world = true;
                self.revision += 1;
                Ok(())
            }
            None => Err(KbError::UnknownMt(mt.clone())),
        }
    }

    pub fn is_closed_world(&self, mt: &Symbol) -> bool {
        self.mts.get(mt).map(|m| m.closed_world).unwrap_or(false)
    }

    /// The mt itself plus all generalization ancestors, breadth-first:
    /// ordered by depth, then name; each mt listed once at its minimum depth.
    pub fn ancestors(&self, mt: &Symbol) -> Vec<(Symbol, usize)> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut frontier = vec![mt.clone()];
        let mut depth = 0;
        while !frontier.is_empty() {
            frontier.sort();
            frontier.dedup();
            let mut next = Vec::new();
            for m in frontier {
                if seen.insert(m.clone()) {
                    if let Some(node) = self.mts.get(&m) {
                        next.extend(node.genl_mts.iter().cloned());
                    }
                    out.push((m, depth));
                }
            }
            frontier = next;
            depth += 1;
        }
        out
    }

    /// The context whose parents are exactly {a, b}: created on first use,
    /// the same context object on every later call. Intersecting a context
    /// with itself is that context.
    pub fn intersect_contexts(&mut self, a: &Symbol, b: &Symbol) -> Result<Symbol, KbError> {
        if !self.mts.contains_key(a) {
            return Err(KbError::UnknownMt(a.clone()));
        }
        if !self.mts.contains_key(b) {
            return Err(KbError::UnknownMt(b.clone()));
        }
        if a == b {
            return Ok(a.clone());
        }
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(name) = self.intersections.get(&key) {
            return Ok(name.clone());
        }
        let name = Symbol::new(format!("IntersectMt-{}-{}", key.0, key.1));
        if !self.mts.contains_key(&name) {
            self.create_mt(&name, &[key.0.clone(), key.1.clone()])?;
        }
        self.intersections.insert(key, name.clone());
        Ok(name)
    }

    // -- declarations -------------------------------------------------------

    pub fn declare_predicate(&mut self, name: &Symbol, arity: usize) -> Result<(), KbError> {
        match self.decls.predicates.get(name) {
            Some(&existing) if existing != arity => Err(KbError::ArityConflict {
                kind: "predicate",
                symbol: name.clone(),
                declared: existing,
                used: arity,
            }),
            _ => {
                self.decls.predicates.insert(name.clone(), arity);
                Ok(())
            }
        }
    }

    pub fn declare_function(&mut self, name: &Symbol, arity: usize) -> Result<(), KbError> {
        match self.decls.functions.get(name) {
            Some(&existing) if existing != arity => Err(KbError::ArityConflict {
                kind: "function",
                symbol: name.clone(),
                declared: existing,
                used: arity,
            }),
            _ => {
                self.decls.functions.insert(name.clone(), arity);
                Ok(())
            }
        }
    }

    pub fn declare_transitive(&mut self, pred: &Symbol) -> Result<(), KbError> {
        if self.decls.transitive.contains(pred) {
            return Ok(());
        }
        // Existing rules concluding the predicate would make the precomputed
        // closure incomplete, so they are rejected up front.
        for positive in [true, false] {
            if let Some(per_mt) = self.index.get(&(pred.clone(), positive)) {
                for refs in per_mt.values() {
                    for r in refs {
                        let a = &self.assertions[&r.assertion];
                        if !a.clauses[r.clause].is_fact() || !positive {
                            return Err(KbError::TransitiveRule { predicate: pred.clone() });
                        }
                    }
                }
            }
        }
        self.decls.transitive.insert(pred.clone());
        // Backfill edges from already-stored facts.
        let mut edges = Vec::new();
        if let Some(per_mt) = self.index.get(&(pred.clone(), true)) {
            for refs in per_mt.values() {
                for r in refs {
                    let a = &self.assertions[&r.assertion];
                    let clause = &a.clauses[r.clause];
                    if let Some((from, to)) = edge_endpoints(clause) {
                        edges.push((a.mt.clone(), from, to, a.id));
                    } else {
                        return Err(KbError::TransitiveRule { predicate: pred.clone() });
                    }
                }
            }
        }
        for (mt, from, to, id) in edges {
            self.edges.add(pred, &mt, &from, &to, id);
        }
        self.revision += 1;
        Ok(())
    }

    /// Declare the taxonomy (sub-taxon) predicate. It is tracked in the edge
    /// store like a transitive predicate, since disjointness is decided by
    /// chasing sub-taxon links.
    pub fn declare_taxonomy(&mut self, pred: &Symbol) -> Result<(), KbError> {
        match &self.decls.taxonomy {
            Some(existing) if existing != pred => Err(KbError::TaxonomyConflict(existing.clone())),
            _ => {
                self.decls.taxonomy = Some(pred.clone());
                self.declare_transitive(pred)
            }
        }
    }

    pub fn taxonomy_pred(&self) -> Option<&Symbol> {
        self.decls.taxonomy.as_ref()
    }

    pub fn is_transitive(&self, pred: &Symbol) -> bool {
        self.decls.transitive.contains(pred)
    }

    // -- assert / retract ---------------------------------------------------

    /// Clausify and store a formula. Free variables are universally closed
    /// (reported in the outcome); duplicate assertions return the original
    /// id without mutating anything.
    pub fn assert_formula(
        &mut self,
        f: &Formula,
        mt: &Symbol,
        strength: Strength,
        provenance: Provenance,
    ) -> Result<AssertOutcome, KbError> {
        if !self.mts.contains_key(mt) {
            return Err(KbError::UnknownMt(mt.clone()));
        }
        let (closed, closed_over) = close_universally(f);
        self.check_arities(&closed)?;

        let mut skolems = self.skolems.clone();
        let clauses = skolemize(&closed, &mut skolems)?;

        for clause in &clauses {
            if self.decls.transitive.contains(&clause.head.atom.predicate)
                && (clause.head.mode != LitMode::Pos
                    || !clause.is_fact()
                    || edge_endpoints(clause).is_none())
            {
                return Err(KbError::TransitiveRule {
                    predicate: clause.head.atom.predicate.clone(),
                });
            }
            self.check_stratification(clause)?;
        }

        let key = format!("{}@{}#{}", canonical_key(&clauses), mt, strength);
        if let Some(&existing) = self.dup_index.get(&key) {
            return Ok(AssertOutcome {
                id: existing,
                duplicate: true,
                closed_vars: closed_over.iter().map(|v| v.name.as_str().to_string()).collect(),
            });
        }

        // All checks passed: commit skolem counters, declarations, and edges.
        self.skolems = skolems;
        self.register_arities(&closed);
        for clause in &clauses {
            self.register_naf_deps(clause, 1);
        }

        let id = self.next_id;
        self.next_id += 1;
        for (i, clause) in clauses.iter().enumerate() {
            let positive = clause.head.mode == LitMode::Pos;
            self.index
                .entry((clause.head.atom.predicate.clone(), positive))
                .or_default()
                .entry(mt.clone())
                .or_default()
                .push(ClauseRef { assertion: id, clause: i });
            if positive && self.decls.transitive.contains(&clause.head.atom.predicate) {
                if let Some((from, to)) = edge_endpoints(clause) {
                    self.edges.add(&clause.head.atom.predicate, mt, &from, &to, id);
                }
            }
        }
        self.dup_index.insert(key, id);
        self.assertions.insert(
            id,
            Assertion { id, formula: closed, clauses, mt: mt.clone(), strength, provenance },
        );
        self.revision += 1;
        Ok(AssertOutcome {
            id,
            duplicate: false,
            closed_vars: closed_over.iter().map(|v| v.name.as_str().to_string()).collect(),
        })
    }

    pub fn retract(&mut self, id: AssertionId) -> Result<(), KbError> {
        let assertion = self.assertions.remove(&id).ok_or(KbError::UnknownAssertion(id))?;
        for (i, clause) in assertion.clauses.iter().enumerate() {
            let positive = clause.head.mode == LitMode::Pos;
            if let Some(per_mt) = self.index.get_mut(&(clause.head.atom.predicate.clone(), positive))
            {
                if let Some(refs) = per_mt.get_mut(&assertion.mt) {
                    refs.retain(|r| !(r.assertion == id && r.clause == i));
                }
            }
            self.register_naf_deps(clause, -1);
        }
        let key =
            format!("{}@{}#{}", canonical_key(&assertion.clauses), assertion.mt, assertion.strength);
        self.dup_index.remove(&key);
        self.edges.remove_assertion(id);
        self.revision += 1;
        Ok(())
    }

    // -- visibility ---------------------------------------------------------

    /// Clauses visible from `mt` with the given head predicate and polarity:
    /// the union over the ancestor closure, ordered by ancestor depth then
    /// assertion id.
    pub fn visible_clauses(
        &self,
        mt: &Symbol,
        pred: &Symbol,
        positive: bool,
    ) -> Result<Vec<ClauseRef>, KbError> {
        if !self.mts.contains_key(mt) {
            return Err(KbError::UnknownMt(mt.clone()));
        }
        let mut out = Vec::new();
        if let Some(per_mt) = self.index.get(&(pred.clone(), positive)) {
            for (ancestor, _) in self.ancestors(mt) {
                if let Some(refs) = per_mt.get(&ancestor) {
                    out.extend(refs.iter().copied());
                }
            }
        }
        Ok(out)
    }

    /// Whole assertions visible from `mt` for a predicate (either polarity),
    /// ordered by ancestor depth then id.
    pub fn visible_assertions(
        &self,
        mt: &Symbol,
        pred: &Symbol,
    ) -> Result<Vec<&Assertion>, KbError> {
        if !self.mts.contains_key(mt) {
            return Err(KbError::UnknownMt(mt.clone()));
        }
        let mut ids = Vec::new();
        for positive in [true, false] {
            if let Some(per_mt) = self.index.get(&(pred.clone(), positive)) {
                for (i, (ancestor, _)) in self.ancestors(mt).into_iter().enumerate() {
                    if let Some(refs) = per_mt.get(&ancestor) {
                        ids.extend(refs.iter().map(|r| (i, r.assertion)));
                    }
                }
            }
        }
        ids.sort();
        ids.dedup();
        Ok(ids.into_iter().map(|(_, id)| &self.assertions[&id]).collect())
    }

    // -- transitive reachability over the edge store -------------------------

    fn visible_mt_set(&self, mt: &Symbol) -> HashSet<Symbol> {
        self.ancestors(mt).into_iter().map(|(m, _)| m).collect()
    }

    /// Breadth-first witness path (edge assertion ids) from `from` to `to`
    /// over visible edges; `None` when unreachable. Paths need at least one
    /// edge: the relation is not reflexive by default, but a cycle back to
    /// the start counts.
    pub fn transitive_path(
        &self,
        pred: &Symbol,
        mt: &Symbol,
        from: &Symbol,
        to: &Symbol,
    ) -> Option<Vec<AssertionId>> {
        let graph = self.edges.graphs.get(pred)?;
        let start = *graph.ids.get(from)?;
        let target = *graph.ids.get(to)?;
        let visible = self.visible_mt_set(mt);
        let n = graph.names.len();
        let mut prev: Vec<Option<(u32, AssertionId)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[start as usize] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for e in &graph.fwd[node as usize] {
                if !visible.contains(&e.mt) {
                    continue;
                }
                if e.other == target {
                    // walk back from `node`, then append the final edge
                    let mut path = vec![e.assertion];
                    let mut cur = node;
                    while cur != start {
                        let (p, id) = prev[cur as usize].expect("bfs predecessor");
                        path.push(id);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                if !seen[e.other as usize] {
                    seen[e.other as usize] = true;
                    prev[e.other as usize] = Some((node, e.assertion));
                    queue.push_back(e.other);
                }
            }
        }
        None
    }

    /// All nodes reachable from `from` in one or more visible edges, each
    /// with a witness path, in breadth-first discovery order, up to `limit`
    /// results. A node on a cycle through `from` counts as reachable from
    /// itself.
    pub fn transitive_successors(
        &self,
        pred: &Symbol,
        mt: &Symbol,
        from: &Symbol,
        limit: usize,
    ) -> Vec<(Symbol, Vec<AssertionId>)> {
        self.sweep(pred, mt, from, false, limit)
    }

    /// All nodes that reach `to`, each with a witness path, up to `limit`.
    pub fn transitive_predecessors(
        &self,
        pred: &Symbol,
        mt: &Symbol,
        to: &Symbol,
        limit: usize,
    ) -> Vec<(Symbol, Vec<AssertionId>)> {
        self.sweep(pred, mt, to, true, limit)
    }

    fn sweep(
        &self,
        pred: &Symbol,
        mt: &Symbol,
        start_name: &Symbol,
        backwards: bool,
        limit: usize,
    ) -> Vec<(Symbol, Vec<AssertionId>)> {
        let Some(graph) = self.edges.graphs.get(pred) else { return Vec::new() };
        let Some(&start) = graph.ids.get(start_name) else { return Vec::new() };
        let visible = self.visible_mt_set(mt);
        let n = graph.names.len();
        let mut prev: Vec<Option<(u32, AssertionId)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[start as usize] = true;
        let mut order: Vec<u32> = Vec::new();
        // An edge back to the start (a cycle) still makes it reachable.
        let mut start_cycle: Option<(u32, AssertionId)> = None;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            let edges = if backwards { &graph.bwd[node as usize] } else { &graph.fwd[node as usize] };
            for e in edges {
                if !visible.contains(&e.mt) {
                    continue;
                }
                if e.other == start {
                    if start_cycle.is_none() {
                        start_cycle = Some((node, e.assertion));
                        order.push(start);
                    }
                } else if !seen[e.other as usize] {
                    seen[e.other as usize] = true;
                    prev[e.other as usize] = Some((node, e.assertion));
                    order.push(e.other);
                    queue.push_back(e.other);
                }
            }
        }
        let walk_back = |mut cur: u32, mut path: Vec<AssertionId>| {
            while cur != start {
                let (p, id) = prev[cur as usize].expect("bfs predecessor");
                path.push(id);
                cur = p;
            }
            path.reverse();
            path
        };
        order
            .into_iter()
            .take(limit)
            .map(|node| {
                let path = if node == start {
                    let (via, id) = start_cycle.expect("cycle recorded");
                    walk_back(via, vec![id])
                } else {
                    walk_back(node, Vec::new())
                };
                (graph.names[node as usize].clone(), path)
            })
            .collect()
    }

    /// Every node that appears in a visible edge of the predicate.
    pub fn edge_nodes(&self, pred: &Symbol, mt: &Symbol) -> BTreeSet<Symbol> {
        let Some(graph) = self.edges.graphs.get(pred) else { return BTreeSet::new() };
        let visible = self.visible_mt_set(mt);
        let mut out = BTreeSet::new();
        for (node, edges) in graph.fwd.iter().enumerate() {
            for e in edges {
                if visible.contains(&e.mt) {
                    out.insert(graph.names[node].clone());
                    out.insert(graph.names[e.other as usize].clone());
                }
            }
        }
        out
    }

    // -- lints ---------------------------------------------------------------

    fn check_arities(&self, f: &Formula) -> Result<(), KbError> {
        let mut pending_preds: HashMap<Symbol, usize> = HashMap::new();
        let mut pending_fns: HashMap<Symbol, usize> = HashMap::new();
        self.walk_arities(f, &mut pending_preds, &mut pending_fns)
    }

    /// Collect every arity conflict in the formula against the current
    /// declarations (first use wins within the formula itself). Unlike
    /// `assert_formula`, which stops at the first problem, this reports all
    /// of them, for load-time linting.
    pub fn lint_formula(&self, f: &Formula) -> Vec<KbError> {
        let mut preds: HashMap<Symbol, usize> = HashMap::new();
        let mut fns: HashMap<Symbol, usize> = HashMap::new();
        let mut out = Vec::new();
        self.lint_walk(f, &mut preds, &mut fns, &mut out);
        out
    }

    fn lint_walk(
        &self,
        f: &Formula,
        preds: &mut HashMap<Symbol, usize>,
        fns: &mut HashMap<Symbol, usize>,
        out: &mut Vec<KbError>,
    ) {
        match f {
            Formula::Atom(a) => {
                let used = a.args.len();
                let known = self.decls.predicates.get(&a.predicate).copied();
                match known.or_else(|| preds.get(&a.predicate).copied()) {
                    Some(n) if n != used => out.push(KbError::ArityConflict {
                        kind: "predicate",
                        symbol: a.predicate.clone(),
                        declared: n,
                        used,
                    }),
                    None => {
                        preds.insert(a.predicate.clone(), used);
                    }
                    _ => {}
                }
                for t in &a.args {
                    self.lint_walk_term(t, fns, out);
                }
            }
            Formula::Not(g) | Formula::Naf(g) => self.lint_walk(g, preds, fns, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for g in fs {
                    self.lint_walk(g, preds, fns, out);
                }
            }
            Formula::Implies(a, c) => {
                self.lint_walk(a, preds, fns, out);
                self.lint_walk(c, preds, fns, out);
            }
            Formula::ForAll(_, b) | Formula::Exists(_, b) => self.lint_walk(b, preds, fns, out),
        }
    }

    fn lint_walk_term(
        &self,
        t: &Term,
        fns: &mut HashMap<Symbol, usize>,
        out: &mut Vec<KbError>,
    ) {
        if let Term::FunctionApp(name, args) = t {
            let used = args.len();
            let known = self.decls.functions.get(name).copied();
            match known.or_else(|| fns.get(name).copied()) {
                Some(n) if n != used => out.push(KbError::ArityConflict {
                    kind: "function",
                    symbol: name.clone(),
                    declared: n,
                    used,
                }),
                None => {
                    fns.insert(name.clone(), used);
                }
                _ => {}
            }
            for a in args {
                self.lint_walk_term(a, fns, out);
            }
        }
    }

    fn walk_arities(
        &self,
        f: &Formula,
        preds: &mut HashMap<Symbol, usize>,
        fns: &mut HashMap<Symbol, usize>,
    ) -> Result<(), KbError> {
        match f {
            Formula::Atom(a) => {
                let used = a.args.len();
                let declared = self.decls.predicates.get(&a.predicate).copied();
                let seen = preds.get(&a.predicate).copied();
                match declared.or(seen) {
                    Some(n) if n != used => {
                        return Err(KbError::ArityConflict {
                            kind: "predicate",
                            symbol: a.predicate.clone(),
                            declared: n,
                            used,
                        })
                    }
                    None => {
                        preds.insert(a.predicate.clone(), used);
                    }
                    _ => {}
                }
                for t in &a.args {
                    self.walk_term_arities(t, fns)?;
                }
                Ok(())
            }
            Formula::Not(g) | Formula::Naf(g) => self.walk_arities(g, preds, fns),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().try_for_each(|g| self.walk_arities(g, preds, fns))
            }
            Formula::Implies(a, c) => {
                self.walk_arities(a, preds, fns)?;
                self.walk_arities(c, preds, fns)
            }
            Formula::ForAll(_, b) | Formula::Exists(_, b) => self.walk_arities(b, preds, fns),
        }
    }

    fn walk_term_arities(
        &self,
        t: &Term,
        fns: &mut HashMap<Symbol, usize>,
    ) -> Result<(), KbError> {
        match t {
            Term::FunctionApp(name, args) => {
                let used = args.len();
                let declared = self.decls.functions.get(name).copied();
                let seen = fns.get(name).copied();
                match declared.or(seen) {
                    Some(n) if n != used => {
                        return Err(KbError::ArityConflict {
                            kind: "function",
                            symbol: name.clone(),
                            declared: n,
                            used,
                        })
                    }
                    None => {
                        fns.insert(name.clone(), used);
                    }
                    _ => {}
                }
                args.iter().try_for_each(|a| self.walk_term_arities(a, fns))
            }
            Term::Constant(_) | Term::Variable(_) | Term::Quoted(_) => Ok(()),
        }
    }

    /// First use wins: commit implicit declarations from a checked formula.
    fn register_arities(&mut self, f: &Formula) {
        let mut preds = HashMap::new();
        let mut fns = HashMap::new();
        let _ = self.walk_arities(f, &mut preds, &mut fns);
        for (p, n) in preds {
            self.decls.predicates.entry(p).or_insert(n);
        }
        for (fsym, n) in fns {
            self.decls.functions.entry(fsym).or_insert(n);
        }
    }

    fn register_naf_deps(&mut self, clause: &Clause, delta: i64) {
        for lit in &clause.body {
            let key = (
                clause.head.atom.predicate.clone(),
                lit.atom.predicate.clone(),
                lit.mode == LitMode::Naf,
            );
            let count = self.naf_graph.entry(key.clone()).or_insert(0);
            if delta > 0 {
                *count += 1;
            } else if *count > 0 {
                *count -= 1;
            }
            if *count == 0 {
                self.naf_graph.remove(&key);
            }
        }
    }

    /// Reject a clause whose naf literal closes a dependency cycle back to
    /// its own head predicate.
    fn check_stratification(&self, clause: &Clause) -> Result<(), KbError> {
        let head = &clause.head.atom.predicate;
        for lit in &clause.body {
            if lit.mode == LitMode::Naf {
                // adding head ->naf lit.pred: is head reachable from lit.pred?
                if lit.atom.predicate == *head
                    || self.pred_reaches(&lit.atom.predicate, head, &clause_edges(clause, head))
                {
                    return Err(KbError::Stratification { predicate: lit.atom.predicate.clone() });
                }
            }
        }
        Ok(())
    }

    fn pred_reaches(
        &self,
        from: &Symbol,
        to: &Symbol,
        extra: &[(Symbol, Symbol)],
    ) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![from.clone()];
        while let Some(p) = stack.pop() {
            if &p == to {
                return true;
            }
            if !seen.insert(p.clone()) {
                continue;
            }
            for (h, b, _) in self.naf_graph.keys() {
                if *h == p {
                    stack.push(b.clone());
                }
            }
            for (h, b) in extra {
                if *h == p {
                    stack.push(b.clone());
                }
            }
        }
        false
    }

    // -- maintenance checks & export -----------------------------------------

    /// Rebuild the predicate index from scratch and compare with the
    /// incrementally maintained one.
    pub fn index_is_consistent(&self) -> bool {
        let mut rebuilt: HashMap<(Symbol, bool), BTreeMap<Symbol, Vec<ClauseRef>>> = HashMap::new();
        for a in self.assertions.values() {
            for (i, clause) in a.clauses.iter().enumerate() {
                rebuilt
                    .entry((clause.head.atom.predicate.clone(), clause.head.mode == LitMode::Pos))
                    .or_default()
                    .entry(a.mt.clone())
                    .or_default()
                    .push(ClauseRef { assertion: a.id, clause: i });
            }
        }
        let mut live: HashMap<(Symbol, bool), BTreeMap<Symbol, Vec<ClauseRef>>> = HashMap::new();
        for (key, per_mt) in &self.index {
            for (mt, refs) in per_mt {
                if !refs.is_empty() {
                    live.entry(key.clone()).or_default().insert(mt.clone(), refs.clone());
                }
            }
        }
        rebuilt == live
    }

    /// Canonical `.mkb` text of the whole KB: directives first, then
    /// assertions grouped by mt name in assertion-id order.
    pub fn export_mkb(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (p, n) in &self.decls.predicates {
            let _ = writeln!(out, "(declare-predicate {} {})", p, n);
        }
        for (f, n) in &self.decls.functions {
            let _ = writeln!(out, "(declare-function {} {})", f, n);
        }
        for p in &self.decls.transitive {
            if self.decls.taxonomy.as_ref() != Some(p) {
                let _ = writeln!(out, "(declare-transitive {})", p);
            }
        }
        if let Some(t) = &self.decls.taxonomy {
            let _ = writeln!(out, "(declare-taxonomy {})", t);
        }
        for mt in self.mts.values() {
            for parent in &mt.genl_mts {
                if parent.as_str() != BASE_MT || mt.genl_mts.len() > 1 {
                    let _ = writeln!(out, "(genl-mt {} {})", mt.name, parent);
                }
            }
            if mt.closed_world {
                let _ = writeln!(out, "(closed-world {})", mt.name);
            }
        }
        let mut by_mt: BTreeMap<&Symbol, Vec<&Assertion>> = BTreeMap::new();
        for a in self.assertions.values() {
            by_mt.entry(&a.mt).or_default().push(a);
        }
        for (mt, assertions) in by_mt {
            let _ = writeln!(out, "(in-mt {})", mt);
            for a in assertions {
                let _ = writeln!(
                    out,
                    "(source \"{}\" {})",
                    a.provenance.source.replace('\\', "\\\\").replace('"', "\\\""),
                    a.provenance.timestamp
                );
                match a.strength {
                    Strength::Monotonic => {
                        let _ = writeln!(out, "(monotonic {})", crate::parser::print_formula(&a.formula));
                    }
                    Strength::Default => {
                        let _ = writeln!(out, "{}", crate::parser::print_formula(&a.formula));
                    }
                }
            }
        }
        out
    }
}

/// For a ground binary fact, the (from, to) constant pair.
fn edge_endpoints(clause: &Clause) -> Option<(Symbol, Symbol)> {
    if !clause.is_fact() || clause.head.atom.args.len() != 2 {
        return None;
    }
    match (&clause.head.atom.args[0], &clause.head.atom.args[1]) {
        (Term::Constant(a), Term::Constant(b)) => Some((a.clone(), b.clone())),
        _ => None,
    }
}

fn clause_edges(clause: &Clause, head: &Symbol) -> Vec<(Symbol, Symbol)> {
    clause.body.iter().map(|lit| (head.clone(), lit.atom.predicate.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn kb_with(formulas: &[&str], mt: &str) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        let mt = Symbol::new(mt);
        kb.ensure_mt(&mt);
        for f in formulas {
            kb.assert_formula(
                &parse_formula(f).unwrap(),
                &mt,
                Strength::Default,
                Provenance::new("test", 0),
            )
            .unwrap();
        }
        kb
    }

    #[test]
    fn duplicate_assertions_return_original_id() {
        let mut kb = KnowledgeBase::new();
        let base = Symbol::new(BASE_MT);
        let f = parse_formula("(isa Andorra Country)").unwrap();
        let first = kb
            .assert_formula(&f, &base, Strength::Default, Provenance::new("a", 0))
            .unwrap();
        let second = kb
            .assert_formula(&f, &base, Strength::Default, Provenance::new("b", 5))
            .unwrap();
        assert!(!first.duplicate);
        assert!(second.duplicate);
        assert_eq!(first.id, second.id);
        assert_eq!(kb.assertion_count(), 1);
    }

    #[test]
    fn unknown_mt_is_rejected() {
        let mut kb = KnowledgeBase::new();
        let err = kb
            .assert_formula(
                &parse_formula("(isa A B)").unwrap(),
                &Symbol::new("NowhereMt"),
                Strength::Default,
                Provenance::new("", 0),
            )
            .unwrap_err();
        assert!(matches!(err, KbError::UnknownMt(_)));
    }

    #[test]
    fn retract_twice_reports_unknown_assertion() {
        let mut kb = kb_with(&["(isa Andorra Country)"], BASE_MT);
        let id = kb.assertions().next().unwrap().id;
        kb.retract(id).unwrap();
        assert!(matches!(kb.retract(id), Err(KbError::UnknownAssertion(_))));
    }

    #[test]
    fn genl_cycle_is_rejected() {
        let mut kb = KnowledgeBase::new();
        let (a, b, c) = (Symbol::new("A"), Symbol::new("B"), Symbol::new("C"));
        kb.add_genl_mt(&b, &a).unwrap();
        kb.add_genl_mt(&c, &b).unwrap();
        assert!(matches!(kb.add_genl_mt(&a, &c), Err(KbError::CycleError { .. })));
        assert!(matches!(kb.add_genl_mt(&a, &a), Err(KbError::CycleError { .. })));
    }

    #[test]
    fn base_mt_is_visible_from_everywhere() {
        let mut kb = kb_with(&["(isa Everything Thing)"], BASE_MT);
        let leaf = Symbol::new("LeafMt");
        kb.ensure_mt(&leaf);
        let visible = kb.visible_clauses(&leaf, &Symbol::new("isa"), true).unwrap();
        assert_eq!(visible.len(), 1);
    }

    #[test]
    fn diamond_lattice_has_no_duplicate_visibility() {
        let mut kb = KnowledgeBase::new();
        let (l, r, bottom) = (Symbol::new("L"), Symbol::new("R"), Symbol::new("Bottom"));
        kb.ensure_mt(&l);
        kb.ensure_mt(&r);
        kb.create_mt(&bottom, &[l.clone(), r.clone()]).unwrap();
        kb.assert_formula(
            &parse_formula("(isa X Y)").unwrap(),
            &Symbol::new(BASE_MT),
            Strength::Default,
            Provenance::new("", 0),
        )
        .unwrap();
        let visible = kb.visible_clauses(&bottom, &Symbol::new("isa"), true).unwrap();
        assert_eq!(visible.len(), 1);
    }

    #[test]
    fn intersect_contexts_is_idempotent_and_sees_both_parents() {
        let mut kb = KnowledgeBase::new();
        let (a, b) = (Symbol::new("CanadianSportsMt"), Symbol::new("Post1900Mt"));
        kb.ensure_mt(&a);
        kb.ensure_mt(&b);
        let m1 = kb.intersect_contexts(&a, &b).unwrap();
        let m2 = kb.intersect_contexts(&b, &a).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(kb.intersect_contexts(&a, &a).unwrap(), a);
        kb.assert_formula(&parse_formula("(p A)").unwrap(), &a, Strength::Default, Provenance::new("", 0))
            .unwrap();
        kb.assert_formula(&parse_formula("(q B)").unwrap(), &b, Strength::Default, Provenance::new("", 0))
            .unwrap();
        assert_eq!(kb.visible_clauses(&m1, &Symbol::new("p"), true).unwrap().len(), 1);
        assert_eq!(kb.visible_clauses(&m1, &Symbol::new("q"), true).unwrap().len(), 1);
    }

    #[test]
    fn arity_conflict_is_a_load_error() {
        let mut kb = kb_with(&["(located Thing Place Time)"], BASE_MT);
        let err = kb
            .assert_formula(
                &parse_formula("(located Thing Place)").unwrap(),
                &Symbol::new(BASE_MT),
                Strength::Default,
                Provenance::new("", 0),
            )
            .unwrap_err();
        assert!(matches!(err, KbError::ArityConflict { declared: 3, used: 2, .. }));
    }

    #[test]
    fn stratification_rejects_naf_loop() {
        let mut kb = KnowledgeBase::new();
        let base = Symbol::new(BASE_MT);
        kb.assert_formula(
            &parse_formula("(implies (and (thing ?x) (naf (q ?x))) (p ?x))").unwrap(),
            &base,
            Strength::Default,
            Provenance::new("", 0),
        )
        .unwrap();
        let err = kb
            .assert_formula(
                &parse_formula("(implies (and (thing ?x) (naf (p ?x))) (q ?x))").unwrap(),
                &base,
                Strength::Default,
                Provenance::new("", 0),
            )
            .unwrap_err();
        assert!(matches!(err, KbError::Stratification { .. }));
    }

    #[test]
    fn transitive_predicates_reject_rules() {
        let mut kb = KnowledgeBase::new();
        let base = Symbol::new(BASE_MT);
        kb.declare_transitive(&Symbol::new("locIn")).unwrap();
        let err = kb
            .assert_formula(
                &parse_formula("(implies (inside ?a ?b) (locIn ?a ?b))").unwrap(),
                &base,
                Strength::Default,
                Provenance::new("", 0),
            )
            .unwrap_err();
        assert!(matches!(err, KbError::TransitiveRule { .. }));
    }

    #[test]
    fn edge_store_tracks_assert_and_retract() {
        let mut kb = KnowledgeBase::new();
        let base = Symbol::new(BASE_MT);
        let pred = Symbol::new("locIn");
        kb.declare_transitive(&pred).unwrap();
        let a = kb
            .assert_formula(&parse_formula("(locIn Austin Texas)").unwrap(), &base, Strength::Default, Provenance::new("", 0))
            .unwrap();
        kb.assert_formula(&parse_formula("(locIn Texas USA)").unwrap(), &base, Strength::Default, Provenance::new("", 0))
            .unwrap();
        let path = kb.transitive_path(&pred, &base, &Symbol::new("Austin"), &Symbol::new("USA"));
        assert_eq!(path.map(|p| p.len()), Some(2));
        kb.retract(a.id).unwrap();
        assert!(kb
            .transitive_path(&pred, &base, &Symbol::new("Austin"), &Symbol::new("USA"))
            .is_none());
    }

    #[test]
    fn index_consistency_after_random_ops() {
        let mut kb = KnowledgeBase::new();
        let base = Symbol::new(BASE_MT);
        let mut ids = Vec::new();
        for i in 0..60 {
            let f = parse_formula(&format!("(p{} C{})", i % 7, i)).unwrap();
            let out = kb
                .assert_formula(&f, &base, Strength::Default, Provenance::new("", 0))
                .unwrap();
            ids.push(out.id);
            if i % 3 == 0 {
                let victim = ids.remove(ids.len() / 2);
                kb.retract(victim).unwrap();
            }
            assert!(kb.index_is_consistent());
        }
    }
}
