//! Temporal projection: how likely is an asserted fact to still hold at a
//! different time? The likelihood follows a declared decay curve (step,
//! linear, or gaussian) over elapsed seconds, drops to zero across an
//! interrupting event, and is attached to the argument as a qualifier. The
//! projected argument is always default-strength.

use crate::clause::{LitMode, Literal};
use crate::engine::{InferenceStep, StepVia};
use crate::kb::{AssertionId, KnowledgeBase};
use crate::logic::{alpha_eq, Formula, Substitution, Term};
use crate::symbol::Symbol;

use super::algebra::parse_numeral;
use super::{BudgetSlice, HlAnswer, HlBid, HlModule, SolveOutcome};

pub struct TemporalProjectionModule;

const NAME: &str = "TemporalProjectionModule";

pub const HOLDS_AT_PRED: &str = "holdsAt";
pub const DECAY_CURVE_PRED: &str = "decayCurve";
pub const INTERRUPTING_PRED: &str = "interruptingEvent";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayCurve {
    /// 1 within the horizon, 0 beyond it.
    Step { horizon: f64 },
    /// 1 - slope * elapsed, clamped to [0, 1].
    Linear { slope: f64 },
    /// exp(-(elapsed / sigma)^2 / 2).
    Gaussian { sigma: f64 },
}

impl DecayCurve {
    /// Parse a curve term: (StepFn h) | (LinearFn slope) | (GaussianFn sigma).
    pub fn from_term(t: &Term) -> Result<DecayCurve, String> {
        let Term::FunctionApp(f, args) = t else {
            return Err(format!("bad curve spec: {}", t));
        };
        if args.len() != 1 {
            return Err(format!("bad curve spec: {} takes one parameter", f));
        }
        let param = match &args[0] {
            Term::Constant(c) => parse_numeral(c)
                .and_then(|r| num::ToPrimitive::to_f64(&r))
                .ok_or_else(|| format!("bad curve spec: '{}' is not a number", c))?,
            other => return Err(format!("bad curve spec: {}", other)),
        };
        match f.as_str() {
            "StepFn" if param >= 0.0 => Ok(DecayCurve::Step { horizon: param }),
            "LinearFn" if param >= 0.0 => Ok(DecayCurve::Linear { slope: param }),
            "GaussianFn" if param > 0.0 => Ok(DecayCurve::Gaussian { sigma: param }),
            "StepFn" | "LinearFn" | "GaussianFn" => {
                Err(format!("bad curve spec: parameter {} out of range", param))
            }
            other => Err(format!("bad curve spec: unknown curve '{}'", other)),
        }
    }

    /// Likelihood after `elapsed` seconds; 1 at zero elapsed time and
    /// non-increasing in the elapsed distance.
    pub fn likelihood(&self, elapsed: f64) -> f64 {
        let d = elapsed.abs();
        match self {
            DecayCurve::Step { horizon } => {
                if d <= *horizon {
                    1.0
                } else {
                    0.0
                }
            }
            DecayCurve::Linear { slope } => (1.0 - slope * d).clamp(0.0, 1.0),
            DecayCurve::Gaussian { sigma } => (-(d / sigma).powi(2) / 2.0).exp(),
        }
    }
}

/// Pure projection: likelihood that a fact asserted at `t1` holds at `t2`,
/// zero across any interrupting event strictly between the two times.
pub fn project(t1: i64, t2: i64, curve: &DecayCurve, interrupting: &[i64]) -> f64 {
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    if interrupting.iter().any(|&e| e > lo && e < hi) {
        return 0.0;
    }
    curve.likelihood((t2 - t1) as f64)
}

impl HlModule for TemporalProjectionModule {
    fn name(&self) -> &'static str {
        NAME
    }

    fn bid(&self, goal: &Literal, _mt: &Symbol, _kb: &KnowledgeBase) -> Option<HlBid> {
        (goal.mode == LitMode::Pos
            && goal.atom.predicate.as_str() == HOLDS_AT_PRED
            && goal.atom.args.len() == 2)
            .then_some(HlBid { module: NAME, cost: 2 })
    }

    fn solve(
        &self,
        goal: &Literal,
        mt: &Symbol,
        kb: &KnowledgeBase,
        _slice: &BudgetSlice,
    ) -> SolveOutcome {
        let fail = |note: String| SolveOutcome::Answers {
            answers: Vec::new(),
            authoritative: true,
            note: Some(note),
        };
        let inner = match &goal.atom.args[0] {
            Term::Quoted(f) => match f.as_ref() {
                Formula::Atom(a) if a.is_ground() => a.clone(),
                _ => return fail("holdsAt takes a quoted ground atom".into()),
            },
            _ => return fail("holdsAt takes a quoted ground atom".into()),
        };
        let t2 = match &goal.atom.args[1] {
            Term::Constant(c) => match parse_numeral(c).and_then(|r| num::ToPrimitive::to_i64(&r))
            {
                Some(v) => v,
                None => return fail(format!("holdsAt time '{}' is not a timestamp", c)),
            },
            _ => return fail("holdsAt needs a ground timestamp".into()),
        };

        // The asserted fact this projection starts from.
        let Ok(candidates) = kb.visible_assertions(mt, &inner.predicate) else {
            return fail(format!("unknown microtheory '{}'", mt));
        };
        let mut fact: Option<(AssertionId, i64)> = None;
        for a in candidates {
            for clause in &a.clauses {
                if clause.is_fact()
                    && clause.head.mode == LitMode::Pos
                    && clause.head.atom == inner
                {
                    fact = Some((a.id, a.provenance.timestamp));
                    break;
                }
            }
            if fact.is_some() {
                break;
            }
        }
        let Some((fact_id, t1)) = fact else {
            return fail(format!("no asserted fact matches {}", inner));
        };

        // The declared decay curve for the fact's predicate.
        let mut curve: Option<(AssertionId, DecayCurve)> = None;
        if let Ok(decls) = kb.visible_assertions(mt, &Symbol::new(DECAY_CURVE_PRED)) {
            for a in decls {
                for clause in &a.clauses {
                    if !clause.is_fact() || clause.head.atom.args.len() != 2 {
                        continue;
                    }
                    if clause.head.atom.args[0] != Term::Constant(inner.predicate.clone()) {
                        continue;
                    }
                    match DecayCurve::from_term(&clause.head.atom.args[1]) {
                        Ok(c) => curve = Some((a.id, c)),
                        Err(e) => return fail(e),
                    }
                }
                if curve.is_some() {
                    break;
                }
            }
        }
        let Some((curve_id, curve)) = curve else {
            return fail(format!(
                "no decay curve declared for predicate '{}'",
                inner.predicate
            ));
        };

        // Interrupting events for this proposition.
        let mut interrupting: Vec<(AssertionId, i64)> = Vec::new();
        if let Ok(events) = kb.visible_assertions(mt, &Symbol::new(INTERRUPTING_PRED)) {
            for a in events {
                for clause in &a.clauses {
                    if !clause.is_fact() || clause.head.atom.args.len() != 2 {
                        continue;
                    }
                    let Term::Quoted(q) = &clause.head.atom.args[0] else { continue };
                    if !alpha_eq(q, &Formula::Atom(inner.clone())) {
                        continue;
                    }
                    let Term::Constant(c) = &clause.head.atom.args[1] else { continue };
                    if let Some(ts) = parse_numeral(c).and_then(|r| num::ToPrimitive::to_i64(&r))
                    {
                        interrupting.push((a.id, ts));
                    }
                }
            }
        }

        let times: Vec<i64> = interrupting.iter().map(|(_, t)| *t).collect();
        let likelihood = project(t1, t2, &curve, &times);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut cited = vec![fact_id, curve_id];
        cited.extend(
            interrupting.iter().filter(|(_, t)| *t > lo && *t < hi).map(|(id, _)| *id),
        );
        let note = if likelihood == 0.0 && times.iter().any(|&e| e > lo && e < hi) {
            format!("an interrupting event falls between {} and {}", t1, t2)
        } else {
            format!(
                "asserted at {}, projected to {} with likelihood {:.4}",
                t1, t2, likelihood
            )
        };
        let conclusion = goal.clone();
        let step = InferenceStep {
            conclusion: conclusion.clone(),
            via: StepVia::Module(NAME),
            bindings: Substitution::new(),
            children: Vec::new(),
            cited,
            note: Some(note),
            qualifier: Some(likelihood),
            assumption: true,
        };
        SolveOutcome::Answers {
            answers: vec![HlAnswer { conclusion, step }],
            authoritative: true,
            note: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_YEARS: f64 = 63_115_200.0;

    #[test]
    fn every_curve_is_one_at_zero_elapsed() {
        for curve in [
            DecayCurve::Step { horizon: 10.0 },
            DecayCurve::Linear { slope: 0.001 },
            DecayCurve::Gaussian { sigma: TWO_YEARS },
        ] {
            assert_eq!(curve.likelihood(0.0), 1.0);
            assert_eq!(project(1000, 1000, &curve, &[]), 1.0);
        }
    }

    #[test]
    fn gaussian_two_year_sigma_at_two_years() {
        let curve = DecayCurve::Gaussian { sigma: TWO_YEARS };
        let expected = (-0.5f64).exp();
        assert!((curve.likelihood(TWO_YEARS) - expected).abs() < 1e-9);
    }

    #[test]
    fn interrupting_event_zeroes_the_projection() {
        let curve = DecayCurve::Gaussian { sigma: TWO_YEARS };
        let t1 = 1_000_000;
        let t2 = t1 + 10_000;
        assert_eq!(project(t1, t2, &curve, &[t1 + 5_000]), 0.0);
        // events outside the window do not interrupt
        assert!(project(t1, t2, &curve, &[t1 - 5_000, t2 + 5_000]) > 0.0);
        // projection into the past is interrupted symmetrically
        assert_eq!(project(t2, t1, &curve, &[t1 + 5_000]), 0.0);
    }

    #[test]
    fn curves_are_monotonically_non_increasing() {
        for curve in [
            DecayCurve::Step { horizon: 500.0 },
            DecayCurve::Linear { slope: 0.002 },
            DecayCurve::Gaussian { sigma: 300.0 },
        ] {
            let mut last = 1.0f64;
            for step in 0..200 {
                let v = curve.likelihood(step as f64 * 17.0);
                assert!(v <= last + 1e-12, "curve {:?} increased at {}", curve, step);
                assert!((0.0..=1.0).contains(&v));
                last = v;
            }
        }
    }

    #[test]
    fn bad_curve_specs_are_rejected_with_reasons() {
        let bad = Term::FunctionApp(Symbol::new("CubicFn"), vec![Term::constant("1")]);
        assert!(DecayCurve::from_term(&bad).unwrap_err().contains("unknown curve"));
        let neg = Term::FunctionApp(Symbol::new("GaussianFn"), vec![Term::constant("0")]);
        assert!(DecayCurve::from_term(&neg).is_err());
    }
}
