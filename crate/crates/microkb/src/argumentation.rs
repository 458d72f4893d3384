//! Argument adjudication: collects the pro and con trees a query produced,
//! compares clashing and competing pairs with preference meta-rules
//! (specificity, then monotonic strength, then brevity, then recency), and
//! settles a final answer status. Losing arguments are retained, never
//! discarded; explanations need them.

use std::collections::BTreeMap;

use crate::clause::{LitMode, Literal};
use crate::engine::{
    ask_truth, ArgStrength, ArgumentTree, AskOutcome, Budget, EngineConfig, EngineError, Polarity,
    StepVia,
};
use crate::hl::Registry;
use crate::kb::KnowledgeBase;
use crate::logic::{match_atom, Formula, Substitution, Term, Var};
use crate::symbol::Symbol;

pub use crate::engine::proof_check;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    True,
    False,
    Ambiguous,
    Unknown,
    Suspended,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::True => "True",
            Status::False => "False",
            Status::Ambiguous => "Ambiguous",
            Status::Unknown => "Unknown",
            Status::Suspended => "Suspended",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "True" => Ok(Status::True),
            "False" => Ok(Status::False),
            "Ambiguous" => Ok(Status::Ambiguous),
            "Unknown" => Ok(Status::Unknown),
            "Suspended" => Ok(Status::Suspended),
            other => Err(format!("unknown status '{}'", other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecidingRule {
    Specificity,
    Monotonicity,
    Brevity,
    Recency,
    None,
}

impl std::fmt::Display for DecidingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DecidingRule::Specificity => "specificity",
            DecidingRule::Monotonicity => "monotonicity",
            DecidingRule::Brevity => "brevity",
            DecidingRule::Recency => "recency",
            DecidingRule::None => "none",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictWinner {
    Pro,
    Con,
    Neither,
}

/// The outcome of comparing one pair of arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceVerdict {
    pub winner: VerdictWinner,
    pub deciding_rule: DecidingRule,
    /// Indices into `Answer::retained` of the compared pair.
    pub compared: (usize, usize),
    /// Index into `Answer::retained` of the winning tree.
    pub winner_tree: Option<usize>,
}

/// Adjudicated result of a query.
#[derive(Debug, Clone)]
pub struct Answer {
    pub status: Status,
    /// One map per undefeated pro answer: variable name to bound term.
    pub bindings: Vec<BTreeMap<String, Term>>,
    /// Indices into `retained` of the preferred arguments.
    pub preferred: Vec<usize>,
    /// Every argument found, pro trees first, in discovery order.
    pub retained: Vec<ArgumentTree>,
    pub verdicts: Vec<PreferenceVerdict>,
    pub notes: Vec<String>,
    pub query: Formula,
    pub free_vars: Vec<Var>,
    pub steps_expanded: u64,
}

impl Answer {
    pub fn preferred_trees(&self) -> impl Iterator<Item = &ArgumentTree> {
        self.preferred.iter().map(|&i| &self.retained[i])
    }
}

/// The membership predicate used for specificity guards.
const ISA: &str = "isa";

/// The class guarding a defeasible argument: when the root step applied a
/// rule whose body carries exactly one `(isa ?v Class)` literal, that class.
fn guard_class(tree: &ArgumentTree, kb: &KnowledgeBase) -> Option<Symbol> {
    let StepVia::Assertion(id) = &tree.root.via else { return None };
    let assertion = kb.assertion(*id)?;
    // Recover which clause the root step used: same head mode, same body length.
    let clause = assertion.clauses.iter().find(|c| {
        c.head.mode == tree.root.conclusion.mode && c.body.len() == tree.root.children.len()
    })?;
    if clause.body.is_empty() {
        return None;
    }
    let guards: Vec<&Symbol> = clause
        .body
        .iter()
        .filter(|lit| lit.mode == LitMode::Pos && lit.atom.predicate.as_str() == ISA)
        .filter_map(|lit| match lit.atom.args.as_slice() {
            [Term::Variable(_), Term::Constant(class)] => Some(class),
            _ => None,
        })
        .collect();
    match guards.as_slice() {
        [only] => Some((*only).clone()),
        _ => None, // zero or several guards: incomparable at the specificity tier
    }
}

fn strictly_specializes(a: &Symbol, b: &Symbol, mt: &Symbol, kb: &KnowledgeBase) -> bool {
    if a == b {
        return false;
    }
    match kb.taxonomy_pred() {
        Some(taxonomy) => kb.transitive_path(taxonomy, mt, a, b).is_some(),
        None => false,
    }
}

/// Whether two conclusions make opposite truth claims about the same atom.
fn clashes(a: &Literal, b: &Literal) -> bool {
    if a.atom != b.atom {
        return false;
    }
    matches!(
        (a.mode, b.mode),
        (LitMode::Pos, LitMode::Neg)
            | (LitMode::Neg, LitMode::Pos)
            | (LitMode::Pos, LitMode::Naf)
            | (LitMode::Naf, LitMode::Pos)
    )
}

/// Lexicographic pairwise preference. Clashing arguments run all four tiers;
/// competing alternatives (same side, different bindings) compare on
/// specificity only. A monotonic proof never loses a comparison.
pub fn prefer(a: &ArgumentTree, b: &ArgumentTree, kb: &KnowledgeBase) -> PreferenceVerdict {
    let competing = a.polarity == b.polarity;
    let mut winner: Option<usize> = None;
    let mut rule = DecidingRule::None;

    // Tier 1: specificity, only between defeasible arguments.
    if a.strength == ArgStrength::DefaultArgument && b.strength == ArgStrength::DefaultArgument {
        if let (Some(ga), Some(gb)) = (guard_class(a, kb), guard_class(b, kb)) {
            if strictly_specializes(&ga, &gb, &a.mt, kb) {
                winner = Some(0);
                rule = DecidingRule::Specificity;
            } else if strictly_specializes(&gb, &ga, &a.mt, kb) {
                winner = Some(1);
                rule = DecidingRule::Specificity;
            }
        }
    }

    if winner.is_none() && !competing {
        match (a.strength, b.strength) {
            // Tier 2: a proof defeats a default argument; two proofs cannot
            // defeat each other.
            (ArgStrength::Proof, ArgStrength::DefaultArgument) => {
                winner = Some(0);
                rule = DecidingRule::Monotonicity;
            }
            (ArgStrength::DefaultArgument, ArgStrength::Proof) => {
                winner = Some(1);
                rule = DecidingRule::Monotonicity;
            }
            (ArgStrength::Proof, ArgStrength::Proof) => {}
            (ArgStrength::DefaultArgument, ArgStrength::DefaultArgument) => {
                // Tier 3: brevity.
                if a.step_count < b.step_count {
                    winner = Some(0);
                    rule = DecidingRule::Brevity;
                } else if b.step_count < a.step_count {
                    winner = Some(1);
                    rule = DecidingRule::Brevity;
                } else if a.stalest_premise > b.stalest_premise {
                    // Tier 4: recency of the stalest premise.
                    winner = Some(0);
                    rule = DecidingRule::Recency;
                } else if b.stalest_premise > a.stalest_premise {
                    winner = Some(1);
                    rule = DecidingRule::Recency;
                }
            }
        }
    }

    let side = |idx: usize| match (if idx == 0 { a } else { b }).polarity {
        Polarity::Pro => VerdictWinner::Pro,
        Polarity::Con => VerdictWinner::Con,
    };
    PreferenceVerdict {
        winner: winner.map(side).unwrap_or(VerdictWinner::Neither),
        deciding_rule: rule,
        compared: (0, 1),
        winner_tree: winner,
    }
}

/// Extract variable bindings for a query answer by matching the query
/// pattern against the tree's (ground) conclusion.
fn answer_bindings(
    query: &Formula,
    free_vars: &[Var],
    tree: &ArgumentTree,
) -> Option<BTreeMap<String, Term>> {
    if free_vars.is_empty() {
        return Some(BTreeMap::new());
    }
    fn pattern_of(f: &Formula) -> Option<&crate::logic::Atom> {
        match f {
            Formula::Atom(a) => Some(a),
            Formula::Not(inner) | Formula::Naf(inner) => match inner.as_ref() {
                Formula::Atom(a) => Some(a),
                _ => None,
            },
            _ => None,
        }
    }
    let mut subst = Substitution::new();
    match (&tree.root.via, query) {
        (StepVia::Module(m), Formula::And(fs)) if *m == crate::engine::CONJUNCTION_MODULE => {
            for (f, child) in fs.iter().zip(&tree.root.children) {
                subst = match_atom(pattern_of(f)?, &child.conclusion.atom, &subst)?;
            }
        }
        _ => {
            subst = match_atom(pattern_of(query)?, &tree.root.conclusion.atom, &subst)?;
        }
    }
    let mut map = BTreeMap::new();
    for v in free_vars {
        if subst.get(v.id).is_some() {
            map.insert(v.name.as_str().to_string(), subst.apply_term(&Term::Variable(v.clone())));
        }
    }
    Some(map)
}

/// Apply preference meta-rules over every clashing and competing pair and
/// settle the answer status.
pub fn adjudicate(outcome: AskOutcome, kb: &KnowledgeBase) -> Answer {
    let AskOutcome { pro, con, suspended, stats, notes, free_vars, query } = outcome;
    let n_pro = pro.len();
    let mut retained: Vec<ArgumentTree> = pro;
    retained.extend(con);

    let mut verdicts: Vec<PreferenceVerdict> = Vec::new();
    // Pro vs con clashes.
    for i in 0..n_pro {
        for j in n_pro..retained.len() {
            if clashes(retained[i].conclusion(), retained[j].conclusion()) {
                let mut v = prefer(&retained[i], &retained[j], kb);
                v.winner_tree = v.winner_tree.map(|w| if w == 0 { i } else { j });
                v.compared = (i, j);
                verdicts.push(v);
            }
        }
    }
    // Pro vs pro competing bindings (different conclusions for one query).
    for i in 0..n_pro {
        for j in (i + 1)..n_pro {
            if retained[i].conclusion() != retained[j].conclusion() {
                let mut v = prefer(&retained[i], &retained[j], kb);
                v.winner_tree = v.winner_tree.map(|w| if w == 0 { i } else { j });
                v.compared = (i, j);
                verdicts.push(v);
            }
        }
    }

    let mut defeated = vec![false; retained.len()];
    for v in &verdicts {
        if let Some(w) = v.winner_tree {
            let loser = if v.compared.0 == w { v.compared.1 } else { v.compared.0 };
            defeated[loser] = true;
        }
    }
    let undefeated_pro: Vec<usize> = (0..n_pro).filter(|&i| !defeated[i]).collect();
    let undefeated_con: Vec<usize> = (n_pro..retained.len()).filter(|&i| !defeated[i]).collect();

    let any_proof = retained.iter().any(|t| t.strength == ArgStrength::Proof);
    let status = if suspended && !any_proof {
        Status::Suspended
    } else if retained.is_empty() {
        Status::Unknown
    } else if !undefeated_pro.is_empty() && undefeated_con.is_empty() {
        Status::True
    } else if undefeated_pro.is_empty() && !undefeated_con.is_empty() {
        Status::False
    } else {
        Status::Ambiguous
    };

    let preferred: Vec<usize> = match status {
        Status::True => undefeated_pro.clone(),
        Status::False => undefeated_con.clone(),
        Status::Unknown => Vec::new(),
        // Surface up to three representatives per side.
        Status::Ambiguous | Status::Suspended => undefeated_pro
            .iter()
            .take(3)
            .chain(undefeated_con.iter().take(3))
            .copied()
            .collect(),
    };

    let mut bindings: Vec<BTreeMap<String, Term>> = Vec::new();
    if status == Status::True || (status == Status::Suspended && !undefeated_pro.is_empty()) {
        for &i in &undefeated_pro {
            if let Some(map) = answer_bindings(&query, &free_vars, &retained[i]) {
                if !bindings.contains(&map) {
                    bindings.push(map);
                }
            }
        }
    }

    Answer {
        status,
        bindings,
        preferred,
        retained,
        verdicts,
        notes,
        query,
        free_vars,
        steps_expanded: stats.steps_expanded,
    }
}

/// One-call query pipeline: search for arguments, then adjudicate.
pub fn ask(
    kb: &KnowledgeBase,
    registry: &Registry,
    query: &Formula,
    mt: &Symbol,
    budget: &Budget,
    config: &EngineConfig,
) -> Result<Answer, EngineError> {
    let outcome = ask_truth(kb, registry, query, mt, budget, config)?;
    Ok(adjudicate(outcome, kb))
}
