//! Evaluable arithmetic: exact rational evaluation of ground expressions,
//! linear systems solved by Gaussian elimination with partial pivoting over
//! rationals, and quadratic roots via the discriminant (irrational roots are
//! reported as tagged floating approximations).

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

use crate::clause::{LitMode, Literal};
use crate::engine::{InferenceStep, StepVia};
use crate::kb::{AssertionId, KnowledgeBase};
use crate::logic::{Atom, Substitution, Term};
use crate::symbol::Symbol;

use super::{BudgetSlice, HlAnswer, HlBid, HlModule, SolveOutcome};

pub struct AlgebraModule;

const NAME: &str = "AlgebraModule";

pub const EVALUATE_PRED: &str = "evaluate";
pub const EQUATION_PRED: &str = "equationOf";
pub const LINEAR_PRED: &str = "linearSolution";
pub const QUADRATIC_PRED: &str = "quadraticRoots";
const MAX_UNKNOWNS: usize = 16;

/// Parse a numeral symbol: integer, decimal, or `p/q` rational.
pub fn parse_numeral(sym: &Symbol) -> Option<BigRational> {
    let s = sym.as_str();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    let make = |n: BigRational| if neg { -n } else { n };
    if let Some((p, q)) = body.split_once('/') {
        let num: BigInt = p.parse().ok()?;
        let den: BigInt = q.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(make(BigRational::new(num, den)));
    }
    if let Some((int_part, frac_part)) = body.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let num: BigInt = format!("{}{}", int_part, frac_part).parse().ok()?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Some(make(BigRational::new(num, den)));
    }
    let num: BigInt = body.parse().ok()?;
    Some(make(BigRational::from(num)))
}

/// Canonical numeral text: plain integer when the denominator is one,
/// otherwise `p/q` in lowest terms.
pub fn format_numeral(v: &BigRational) -> String {
    if v.denom() == &BigInt::from(1) {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn numeral_term(v: &BigRational) -> Term {
    Term::Constant(Symbol::new(format_numeral(v)))
}

fn term_numeral(t: &Term) -> Option<BigRational> {
    match t {
        Term::Constant(c) => parse_numeral(c),
        _ => None,
    }
}

/// Evaluate a ground arithmetic expression exactly.
fn eval_ground(t: &Term) -> Result<BigRational, String> {
    match t {
        Term::Constant(c) => {
            parse_numeral(c).ok_or_else(|| format!("'{}' is not a numeral", c))
        }
        Term::Variable(v) => Err(format!("unbound variable ?{}", v.name)),
        Term::Quoted(_) => Err("quoted formula is not a number".into()),
        Term::FunctionApp(f, args) => {
            let vals: Vec<BigRational> =
                args.iter().map(eval_ground).collect::<Result<_, _>>()?;
            match f.as_str() {
                "PlusFn" if !vals.is_empty() => Ok(vals.into_iter().sum()),
                "TimesFn" if !vals.is_empty() => Ok(vals.into_iter().product()),
                "DifferenceFn" if vals.len() == 2 => Ok(vals[0].clone() - vals[1].clone()),
                "QuotientFn" if vals.len() == 2 => {
                    if vals[1].is_zero() {
                        Err("division by zero".into())
                    } else {
                        Ok(vals[0].clone() / vals[1].clone())
                    }
                }
                other => Err(format!("'{}' is not an arithmetic function", other)),
            }
        }
    }
}

/// A linear combination over symbolic unknowns plus a constant.
#[derive(Debug, Clone, Default)]
struct LinExpr {
    coeffs: BTreeMap<Symbol, BigRational>,
    constant: BigRational,
}

impl LinExpr {
    fn constant(v: BigRational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: v }
    }

    fn unknown(u: Symbol) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(u, BigRational::from(BigInt::from(1)));
        LinExpr { coeffs, constant: BigRational::zero() }
    }

    fn add(mut self, other: LinExpr) -> LinExpr {
        for (u, c) in other.coeffs {
            let e = self.coeffs.entry(u).or_insert_with(BigRational::zero);
            *e += c;
        }
        self.constant += other.constant;
        self
    }

    fn scale(mut self, k: &BigRational) -> LinExpr {
        for c in self.coeffs.values_mut() {
            *c *= k.clone();
        }
        self.constant *= k.clone();
        self
    }

    fn neg(self) -> LinExpr {
        self.scale(&-BigRational::from(BigInt::from(1)))
    }

    fn is_constant(&self) -> bool {
        self.coeffs.values().all(BigRational::is_zero)
    }
}

/// Parse a term as a linear expression over constant-symbol unknowns.
fn linear_expr(t: &Term) -> Result<LinExpr, String> {
    match t {
        Term::Constant(c) => match parse_numeral(c) {
            Some(v) => Ok(LinExpr::constant(v)),
            None => Ok(LinExpr::unknown(c.clone())),
        },
        Term::Variable(v) => Err(format!("logic variable ?{} in equation", v.name)),
        Term::Quoted(_) => Err("quoted formula in equation".into()),
        Term::FunctionApp(f, args) => match f.as_str() {
            "PlusFn" if !args.is_empty() => {
                let mut acc = LinExpr::default();
                for a in args {
                    acc = acc.add(linear_expr(a)?);
                }
                Ok(acc)
            }
            "DifferenceFn" if args.len() == 2 => {
                Ok(linear_expr(&args[0])?.add(linear_expr(&args[1])?.neg()))
            }
            "TimesFn" if !args.is_empty() => {
                let parts: Vec<LinExpr> =
                    args.iter().map(linear_expr).collect::<Result<_, _>>()?;
                let mut acc = LinExpr::constant(BigRational::from(BigInt::from(1)));
                for p in parts {
                    if p.is_constant() {
                        acc = acc.scale(&p.constant);
                    } else if acc.is_constant() {
                        let k = acc.constant.clone();
                        acc = p.scale(&k);
                    } else {
                        return Err("product of two unknowns is not linear".into());
                    }
                }
                Ok(acc)
            }
            "QuotientFn" if args.len() == 2 => {
                let denom = linear_expr(&args[1])?;
                if !denom.is_constant() || denom.constant.is_zero() {
                    return Err("division by an unknown or by zero".into());
                }
                Ok(linear_expr(&args[0])?.scale(&denom.constant.recip()))
            }
            other => Err(format!("'{}' is not a linear arithmetic function", other)),
        },
    }
}

/// Gaussian elimination with partial pivoting, exact over rationals.
/// Returns `Err` for singular (underdetermined or inconsistent) systems.
fn solve_linear(
    rows_in: Vec<(Vec<BigRational>, BigRational)>,
    n_unknowns: usize,
) -> Result<Vec<BigRational>, String> {
    let mut rows: Vec<Vec<BigRational>> = rows_in
        .into_iter()
        .map(|(mut coeffs, rhs)| {
            coeffs.push(rhs);
            coeffs
        })
        .collect();
    let m = rows.len();
    let mut pivot_row = 0usize;
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..n_unknowns {
        // partial pivoting: the row with the largest absolute coefficient
        let best = (pivot_row..m)
            .filter(|&r| !rows[r][col].is_zero())
            .max_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
        let Some(best) = best else { continue };
        rows.swap(pivot_row, best);
        let pivot = rows[pivot_row][col].clone();
        for r in 0..m {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone() / pivot.clone();
                for c in col..=n_unknowns {
                    let delta = factor.clone() * rows[pivot_row][c].clone();
                    rows[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == m {
            break;
        }
    }
    // inconsistent row: 0 = non-zero
    for r in &rows {
        if r[..n_unknowns].iter().all(BigRational::is_zero) && !r[n_unknowns].is_zero() {
            return Err("inconsistent system".into());
        }
    }
    if pivots.len() < n_unknowns {
        return Err("singular system: fewer independent equations than unknowns".into());
    }
    let mut solution = vec![BigRational::zero(); n_unknowns];
    for (row, &col) in pivots.iter().enumerate() {
        solution[col] = rows[row][n_unknowns].clone() / rows[row][col].clone();
    }
    Ok(solution)
}

/// Exact square root of a non-negative rational, when one exists.
fn exact_sqrt(v: &BigRational) -> Option<BigRational> {
    if v.is_negative() {
        return None;
    }
    let ns = v.numer().sqrt();
    let ds = v.denom().sqrt();
    if &(&ns * &ns) == v.numer() && &(&ds * &ds) == v.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

fn step_for(conclusion: Literal, cited: Vec<AssertionId>, note: String) -> HlAnswer {
    HlAnswer {
        step: InferenceStep {
            conclusion: conclusion.clone(),
            via: StepVia::Module(NAME),
            bindings: Substitution::new(),
            children: Vec::new(),
            cited,
            note: Some(note),
            qualifier: None,
            assumption: false,
        },
        conclusion,
    }
}

/// Unify a computed value against the goal's result slot: a variable accepts
/// the canonical numeral; a numeral constant must be numerically equal (the
/// conclusion then reuses the goal's own spelling so unification succeeds).
fn result_slot(goal_term: &Term, value: &BigRational) -> Option<Term> {
    match goal_term {
        Term::Variable(_) => Some(numeral_term(value)),
        Term::Constant(c) => match parse_numeral(c) {
            Some(v) if &v == value => Some(goal_term.clone()),
            _ => None,
        },
        _ => None,
    }
}

impl HlModule for AlgebraModule {
    fn name(&self) -> &'static str {
        NAME
    }

    fn bid(&self, goal: &Literal, _mt: &Symbol, _kb: &KnowledgeBase) -> Option<HlBid> {
        if goal.mode != LitMode::Pos {
            return None;
        }
        let arity = goal.atom.args.len();
        let applicable = matches!(
            (goal.atom.predicate.as_str(), arity),
            (EVALUATE_PRED, 2) | (LINEAR_PRED, 3) | (QUADRATIC_PRED, 4)
        );
        applicable.then_some(HlBid { module: NAME, cost: 1 })
    }

    fn solve(
        &self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
        _slice: &BudgetSlice,
    ) -> SolveOutcome {
        match goal.atom.predicate.as_str() {
            EVALUATE_PRED => solve_evaluate(goal),
            LINEAR_PRED => solve_linear_goal(goal, mt, kb),
            QUADRATIC_PRED => solve_quadratic(goal),
            _ => SolveOutcome::Pass,
        }
    }
}

fn solve_evaluate(goal: &Literal) -> SolveOutcome {
    let expr = &goal.atom.args[0];
    if !expr.is_ground() {
        return SolveOutcome::Pass;
    }
    match eval_ground(expr) {
        Ok(v) => {
            let answers = match result_slot(&goal.atom.args[1], &v) {
                Some(slot) => {
                    let conclusion =
                        Literal::pos(Atom::new(EVALUATE_PRED, vec![expr.clone(), slot]));
                    vec![step_for(
                        conclusion,
                        Vec::new(),
                        format!("{} = {} by exact evaluation", expr, format_numeral(&v)),
                    )]
                }
                None => Vec::new(),
            };
            SolveOutcome::Answers { answers, authoritative: true, note: None }
        }
        Err(e) => SolveOutcome::Answers {
            answers: Vec::new(),
            authoritative: true,
            note: Some(format!("arithmetic evaluation failed: {}", e)),
        },
    }
}

fn solve_linear_goal(goal: &Literal, mt: &Symbol, kb: &KnowledgeBase) -> SolveOutcome {
    let system = match &goal.atom.args[0] {
        Term::Constant(c) => c.clone(),
        _ => return SolveOutcome::Pass,
    };
    // Collect (equationOf <system> (EqnFn lhs rhs)) facts visible here.
    let mut rows: Vec<LinExpr> = Vec::new();
    let mut cited: Vec<AssertionId> = Vec::new();
    let Ok(assertions) = kb.visible_assertions(mt, &Symbol::new(EQUATION_PRED)) else {
        return SolveOutcome::Pass;
    };
    for a in assertions {
        for clause in &a.clauses {
            if !clause.is_fact() || clause.head.mode != LitMode::Pos {
                continue;
            }
            let args = &clause.head.atom.args;
            if args.len() != 2 || args[0] != Term::Constant(system.clone()) {
                continue;
            }
            let Term::FunctionApp(f, sides) = &args[1] else { continue };
            if f.as_str() != "EqnFn" || sides.len() != 2 {
                return answers_note(format!(
                    "equation in system {} must be (EqnFn lhs rhs)",
                    system
                ));
            }
            let lhs = match linear_expr(&sides[0]) {
                Ok(e) => e,
                Err(e) => return answers_note(format!("non-linear equation: {}", e)),
            };
            let rhs = match linear_expr(&sides[1]) {
                Ok(e) => e,
                Err(e) => return answers_note(format!("non-linear equation: {}", e)),
            };
            rows.push(lhs.add(rhs.neg()));
            cited.push(a.id);
        }
    }
    if rows.is_empty() {
        return answers_note(format!("no equations found for system {}", system));
    }
    let mut unknowns: Vec<Symbol> = Vec::new();
    for r in &rows {
        for u in r.coeffs.keys() {
            if !unknowns.contains(u) {
                unknowns.push(u.clone());
            }
        }
    }
    unknowns.sort();
    if unknowns.len() > MAX_UNKNOWNS {
        return answers_note(format!(
            "system {} has {} unknowns; at most {} are supported",
            system,
            unknowns.len(),
            MAX_UNKNOWNS
        ));
    }
    let matrix: Vec<(Vec<BigRational>, BigRational)> = rows
        .iter()
        .map(|r| {
            (
                unknowns
                    .iter()
                    .map(|u| r.coeffs.get(u).cloned().unwrap_or_else(BigRational::zero))
                    .collect(),
                -r.constant.clone(),
            )
        })
        .collect();
    let solution = match solve_linear(matrix, unknowns.len()) {
        Ok(s) => s,
        Err(e) => return answers_note(format!("system {}: {}", system, e)),
    };
    let values: BTreeMap<Symbol, BigRational> =
        unknowns.into_iter().zip(solution).collect();

    let mut answers = Vec::new();
    let wanted: Vec<Symbol> = match &goal.atom.args[1] {
        Term::Constant(u) => {
            if values.contains_key(u) {
                vec![u.clone()]
            } else {
                Vec::new()
            }
        }
        Term::Variable(_) => values.keys().cloned().collect(),
        _ => Vec::new(),
    };
    for u in wanted {
        let v = &values[&u];
        if let Some(slot) = result_slot(&goal.atom.args[2], v) {
            let conclusion = Literal::pos(Atom::new(
                LINEAR_PRED,
                vec![Term::Constant(system.clone()), Term::Constant(u.clone()), slot],
            ));
            answers.push(step_for(
                conclusion,
                cited.clone(),
                format!("{} = {} by exact elimination", u, format_numeral(v)),
            ));
        }
    }
    SolveOutcome::Answers { answers, authoritative: true, note: None }
}

fn solve_quadratic(goal: &Literal) -> SolveOutcome {
    let (a, b, c) = match (
        term_numeral(&goal.atom.args[0]),
        term_numeral(&goal.atom.args[1]),
        term_numeral(&goal.atom.args[2]),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return SolveOutcome::Pass,
    };
    let mut roots: Vec<Term> = Vec::new();
    let mut note = None;
    if a.is_zero() {
        // degenerate: fall back to the linear equation bx + c = 0
        if b.is_zero() {
            note = Some("degenerate quadratic: a = 0 and b = 0, no roots".to_string());
        } else {
            roots.push(numeral_term(&(-c.clone() / b.clone())));
            note = Some("degenerate quadratic solved as a linear equation".to_string());
        }
    } else {
        let two = BigRational::from(BigInt::from(2));
        let four = BigRational::from(BigInt::from(4));
        let disc = b.clone() * b.clone() - four * a.clone() * c.clone();
        if disc.is_zero() {
            roots.push(numeral_term(&(-b.clone() / (two * a.clone()))));
        } else if disc.is_negative() {
            note = Some("negative discriminant: no real roots".to_string());
        } else if let Some(s) = exact_sqrt(&disc) {
            let r1 = (-b.clone() + s.clone()) / (two.clone() * a.clone());
            let r2 = (-b.clone() - s) / (two * a.clone());
            roots.push(numeral_term(&r1));
            roots.push(numeral_term(&r2));
        } else {
            let bf = b.to_f64().unwrap_or(f64::NAN);
            let af = a.to_f64().unwrap_or(f64::NAN);
            let df = disc.to_f64().unwrap_or(f64::NAN);
            for sign in [1.0, -1.0] {
                let r = (-bf + sign * df.sqrt()) / (2.0 * af);
                roots.push(Term::FunctionApp(
                    Symbol::new("ApproxFn"),
                    vec![Term::Constant(Symbol::new(format!("{}", r)))],
                ));
            }
            note = Some("irrational roots reported as floating approximations".to_string());
        }
    }
    let mut answers = Vec::new();
    for root in roots {
        let matched = match (&goal.atom.args[3], &root) {
            (Term::Variable(_), _) => Some(root.clone()),
            (Term::Constant(_), Term::Constant(_)) => {
                result_slot(&goal.atom.args[3], &term_numeral(&root).expect("rational root"))
            }
            (g, r) if g == r => Some(root.clone()),
            _ => None,
        };
        if let Some(slot) = matched {
            let conclusion = Literal::pos(Atom::new(
                QUADRATIC_PRED,
                vec![
                    goal.atom.args[0].clone(),
                    goal.atom.args[1].clone(),
                    goal.atom.args[2].clone(),
                    slot,
                ],
            ));
            answers.push(step_for(
                conclusion,
                Vec::new(),
                "root of the quadratic by the discriminant formula".to_string(),
            ));
        }
    }
    SolveOutcome::Answers { answers, authoritative: true, note }
}

fn answers_note(note: String) -> SolveOutcome {
    SolveOutcome::Answers { answers: Vec::new(), authoritative: true, note: Some(note) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_numeral(&Symbol::new(s)).unwrap()
    }

    #[test]
    fn numerals_parse_and_format() {
        assert_eq!(format_numeral(&rat("5")), "5");
        assert_eq!(format_numeral(&rat("-4")), "-4");
        assert_eq!(format_numeral(&rat("3.14")), "157/50");
        assert_eq!(format_numeral(&rat("10/2")), "5");
        assert_eq!(rat("0.5"), rat("1/2"));
        assert!(parse_numeral(&Symbol::new("PlusFn")).is_none());
        assert!(parse_numeral(&Symbol::new("1/0")).is_none());
    }

    #[test]
    fn ground_addition_is_exact() {
        let expr = Term::FunctionApp(
            Symbol::new("PlusFn"),
            vec![Term::constant("4"), Term::constant("1")],
        );
        assert_eq!(eval_ground(&expr).unwrap(), rat("5"));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let expr = Term::FunctionApp(
            Symbol::new("QuotientFn"),
            vec![Term::constant("1"), Term::constant("0")],
        );
        assert!(eval_ground(&expr).is_err());
    }

    #[test]
    fn elimination_solves_two_by_two_exactly() {
        // 2x + y = 5, x - y = 1  =>  x = 2, y = 1
        let rows = vec![
            (vec![rat("2"), rat("1")], rat("5")),
            (vec![rat("1"), rat("-1")], rat("1")),
        ];
        let sol = solve_linear(rows, 2).unwrap();
        assert_eq!(sol, vec![rat("2"), rat("1")]);
    }

    #[test]
    fn singular_system_is_rejected() {
        let rows = vec![
            (vec![rat("1"), rat("1")], rat("2")),
            (vec![rat("2"), rat("2")], rat("4")),
        ];
        assert!(solve_linear(rows, 2).is_err());
        let inconsistent = vec![
            (vec![rat("1"), rat("1")], rat("2")),
            (vec![rat("1"), rat("1")], rat("3")),
        ];
        assert!(solve_linear(inconsistent, 2).is_err());
    }

    #[test]
    fn exact_sqrt_detects_perfect_squares() {
        assert_eq!(exact_sqrt(&rat("4")), Some(rat("2")));
        assert_eq!(exact_sqrt(&rat("9/4")), Some(rat("3/2")));
        assert_eq!(exact_sqrt(&rat("2")), None);
        assert_eq!(exact_sqrt(&rat("-4")), None);
    }
}
