//! Interactive REPL and batch runner over a session: load KB and template
//! files, switch contexts, ask queries under a budget, inspect answers, and
//! drill into explanations. Structured mode emits one machine-readable
//! record per answer for scripting.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use crate::argumentation::{ask, Answer, Status, VerdictWinner};
use crate::engine::{Budget, EngineConfig, Polarity, StepVia};
use crate::explain::{render_argument, render_literal, why_drilldown, TemplateStore, Verbosity};
use crate::hl::Registry;
use crate::kb::{KnowledgeBase, Provenance, BASE_MT};
use crate::loader::load_file;
use crate::parser::{parse_formula, print_term};
use crate::symbol::Symbol;

pub struct Session {
    pub kb: KnowledgeBase,
    pub templates: TemplateStore,
    pub registry: Registry,
    pub current_mt: Symbol,
    pub budget: Budget,
    pub config: EngineConfig,
    pub structured: bool,
    pub answers: Vec<StoredAnswer>,
}

pub struct StoredAnswer {
    pub answer: Answer,
    pub elapsed_millis: u64,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Self {
        Session {
            kb: KnowledgeBase::new(),
            templates: TemplateStore::new(),
            registry: Registry::standard(),
            current_mt: Symbol::new(BASE_MT),
            budget: Budget::default(),
            config: EngineConfig::default(),
            structured: false,
            answers: Vec::new(),
        }
    }
}

/// Result of one REPL command. `is_error` marks load/parse/usage problems;
/// `expect_failed` marks a failed `expect` test hook.
#[derive(Debug, Default)]
pub struct CmdResult {
    pub output: String,
    pub is_error: bool,
    pub expect_failed: bool,
    pub quit: bool,
}

impl CmdResult {
    fn text(output: impl Into<String>) -> Self {
        CmdResult { output: output.into(), ..Default::default() }
    }

    fn error(output: impl Into<String>) -> Self {
        CmdResult { output: output.into(), is_error: true, ..Default::default() }
    }
}

const USAGE: &str = "commands:
  load <path>              load a .mkb KB or template file
  mt <name>                set the default microtheory
  contexts                 list the microtheory lattice
  ask <formula>            query; prints status, bindings, arguments
  why <n> [path]           explain answer n; dotted path drills steps
  assert <formula>         assert into the current microtheory
  retract <id>             retract an assertion by id
  budget steps=<n> depth=<n> ms=<n>   adjust the query budget
  export <path>            write the KB back out as .mkb
  expect <Status>          fail (in batch) unless the last answer matched
  help                     this text
  quit                     leave the session";

/// Execute one command line against the session. Never panics on malformed
/// input; malformed commands return a usage error and leave the session
/// unchanged.
pub fn repl_command(line: &str, session: &mut Session) -> CmdResult {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
        return CmdResult::text("");
    }
    let (head, rest) = match line.split_once(char::is_whitespace) {
        Some((h, r)) => (h, r.trim()),
        None => (line, ""),
    };
    match head {
        "help" => CmdResult::text(USAGE),
        "quit" | "exit" => CmdResult { quit: true, ..Default::default() },
        "load" => cmd_load(rest, session),
        "mt" => cmd_mt(rest, session),
        "contexts" => cmd_contexts(session),
        "ask" => cmd_ask(rest, session),
        "why" => cmd_why(rest, session),
        "assert" => cmd_assert(rest, session),
        "retract" => cmd_retract(rest, session),
        "budget" => cmd_budget(rest, session),
        "export" => cmd_export(rest, session),
        "expect" => cmd_expect(rest, session),
        other => CmdResult::error(format!("unknown command '{}'; try 'help'", other)),
    }
}

fn cmd_load(rest: &str, session: &mut Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::error("usage: load <path>");
    }
    let path = Path::new(rest);
    let report = match load_file(&mut session.kb, &mut session.templates, path, &session.current_mt)
    {
        Ok(r) => r,
        Err(e) => return CmdResult::error(format!("cannot read {}: {}", rest, e)),
    };
    let mut out = String::new();
    if session.structured {
        let record = json!({
            "type": "load",
            "file": rest,
            "forms": report.forms,
            "assertions": report.assertions.len(),
            "duplicates": report.duplicates,
            "errors": report.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "warnings": report.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        });
        let _ = writeln!(out, "{}", record);
    } else {
        let _ = writeln!(out, "{}", report.summary());
        for e in &report.errors {
            let _ = writeln!(out, "  error {}:{}", rest, e);
        }
        for w in &report.warnings {
            let _ = writeln!(out, "  warning {}:{}", rest, w);
        }
    }
    CmdResult { output: out, is_error: !report.ok(), ..Default::default() }
}

fn cmd_mt(rest: &str, session: &mut Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::text(format!("current microtheory: {}", session.current_mt));
    }
    let name = Symbol::new(rest);
    if !session.kb.has_mt(&name) {
        return CmdResult::error(format!("unknown microtheory '{}'; see 'contexts'", rest));
    }
    session.current_mt = name;
    CmdResult::text(format!("default microtheory set to {}", rest))
}

fn cmd_contexts(session: &Session) -> CmdResult {
    let mut out = String::new();
    for mt in session.kb.mts() {
        let parents: Vec<&str> = mt.genl_mts.iter().map(|p| p.as_str()).collect();
        let _ = write!(out, "{}", mt.name);
        if !parents.is_empty() {
            let _ = write!(out, " -> {}", parents.join(" "));
        }
        if mt.closed_world {
            let _ = write!(out, "  [closed-world]");
        }
        if mt.name == session.current_mt {
            let _ = write!(out, "  (current)");
        }
        let _ = writeln!(out);
    }
    CmdResult::text(out)
}

fn cmd_ask(rest: &str, session: &mut Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::error("usage: ask <formula>");
    }
    let query = match parse_formula(rest) {
        Ok(f) => f,
        Err(e) => return CmdResult::error(format!("{}", e)),
    };
    let started = Instant::now();
    let answer = match ask(
        &session.kb,
        &session.registry,
        &query,
        &session.current_mt,
        &session.budget,
        &session.config,
    ) {
        Ok(a) => a,
        Err(e) => return CmdResult::error(format!("{}", e)),
    };
    let elapsed_millis = started.elapsed().as_millis() as u64;
    session.answers.push(StoredAnswer { answer, elapsed_millis });
    let idx = session.answers.len();
    let stored = &session.answers[idx - 1];
    let out = if session.structured {
        format!("{}\n", answer_record(idx, stored))
    } else {
        format_answer(idx, stored, session)
    };
    CmdResult::text(out)
}

fn answer_record(idx: usize, stored: &StoredAnswer) -> serde_json::Value {
    let a = &stored.answer;
    let bindings: Vec<serde_json::Value> = a
        .bindings
        .iter()
        .map(|m| {
            let obj: serde_json::Map<String, serde_json::Value> = m
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(print_term(v))))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let used: Vec<u64> = {
        let mut ids: Vec<u64> =
            a.preferred_trees().flat_map(|t| t.used_assertion_ids.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    json!({
        "type": "answer",
        "index": idx,
        "status": a.status.to_string(),
        "bindings": bindings,
        "stepCount": a.steps_expanded,
        "usedAssertionIds": used,
        "elapsedMillis": stored.elapsed_millis,
    })
}

fn format_answer(idx: usize, stored: &StoredAnswer, session: &Session) -> String {
    let a = &stored.answer;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "[{}] {}  ({} steps, {} ms)",
        idx, a.status, a.steps_expanded, stored.elapsed_millis
    );
    for b in &a.bindings {
        let pairs: Vec<String> =
            b.iter().map(|(k, v)| format!("?{} = {}", k, print_term(v))).collect();
        if !pairs.is_empty() {
            let _ = writeln!(out, "    {}", pairs.join(", "));
        }
    }
    for (i, tree) in a.retained.iter().enumerate() {
        let preferred = if a.preferred.contains(&i) { "*" } else { " " };
        let side = match tree.polarity {
            Polarity::Pro => "pro",
            Polarity::Con => "con",
        };
        let via = match &tree.root.via {
            StepVia::Assertion(id) => format!("assertion #{}", id),
            StepVia::Module(m) => format!("module {}", m),
        };
        let qualifier = tree
            .qualifier
            .map(|q| format!(", likelihood {:.4}", q))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "    [{}]{} {} {} {} step(s){}: {}  [{}]",
            i + 1,
            preferred,
            side,
            tree.strength,
            tree.step_count,
            qualifier,
            render_literal(&tree.root.conclusion, &session.templates),
            via
        );
    }
    for v in &a.verdicts {
        match v.winner {
            VerdictWinner::Neither => {
                let _ = writeln!(
                    out,
                    "    verdict: [{}] vs [{}]: neither prevails",
                    v.compared.0 + 1,
                    v.compared.1 + 1
                );
            }
            _ => {
                let winner = v.winner_tree.expect("winner present") + 1;
                let loser = if v.winner_tree == Some(v.compared.0) {
                    v.compared.1 + 1
                } else {
                    v.compared.0 + 1
                };
                let _ = writeln!(
                    out,
                    "    verdict: [{}] defeats [{}] by {}",
                    winner, loser, v.deciding_rule
                );
            }
        }
    }
    for n in &a.notes {
        let _ = writeln!(out, "    note: {}", n);
    }
    out
}

/// `why <n>` renders the first preferred argument of answer n in full;
/// `why <n> <path>` drills into the doc: `why 1 3` expands step 3 of the
/// doc, `why 1 3.2` then expands step 2 of that sub-document.
fn cmd_why(rest: &str, session: &Session) -> CmdResult {
    let mut parts = rest.split_whitespace();
    let idx: usize = match parts.next().and_then(|s| s.parse().ok()) {
        Some(i) => i,
        None => return CmdResult::error("usage: why <answerIndex> [stepPath]"),
    };
    let path_spec = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return CmdResult::error("usage: why <answerIndex> [stepPath]");
    }
    let Some(stored) = idx.checked_sub(1).and_then(|i| session.answers.get(i)) else {
        return CmdResult::error(format!("no answer [{}] in this session", idx));
    };
    let answer = &stored.answer;
    let tree_idx = answer.preferred.first().copied().or(if answer.retained.is_empty() {
        None
    } else {
        Some(0)
    });
    let Some(tree_idx) = tree_idx else {
        return CmdResult::text("no arguments were found for that answer");
    };
    let tree = &answer.retained[tree_idx];

    let mut doc = match render_argument(tree, &session.kb, &session.templates, Verbosity::Full) {
        Ok(d) => d,
        Err(e) => return CmdResult::error(format!("{}", e)),
    };
    if !path_spec.is_empty() {
        for comp in path_spec.split('.') {
            let step_no: usize = match comp.parse() {
                Ok(n) => n,
                Err(_) => return CmdResult::error(format!("bad step path component '{}'", comp)),
            };
            let Some(step) = step_no.checked_sub(1).and_then(|i| doc.steps.get(i)) else {
                return CmdResult::error(format!("no step {} in that explanation", step_no));
            };
            doc = match why_drilldown(
                tree,
                &step.path,
                &session.kb,
                &session.templates,
                Verbosity::Full,
            ) {
                Ok(d) => d,
                Err(e) => return CmdResult::error(format!("{}", e)),
            };
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}", doc.summary);
    for (i, step) in doc.steps.iter().enumerate() {
        let collapsed = if step.collapsed > 0 {
            format!(" (+{} collapsed)", step.collapsed)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "  {}. {}{}  [{}; {}]",
            i + 1,
            step.text,
            collapsed,
            step.via,
            step.provenance
        );
    }
    CmdResult::text(out)
}

fn cmd_assert(rest: &str, session: &mut Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::error("usage: assert <formula>");
    }
    let formula = match parse_formula(rest) {
        Ok(f) => f,
        Err(e) => return CmdResult::error(format!("{}", e)),
    };
    let provenance = Provenance::interactive(format!("asserted interactively: {}", rest));
    match session.kb.assert_formula(
        &formula,
        &session.current_mt.clone(),
        crate::clause::Strength::Default,
        provenance,
    ) {
        Ok(outcome) => {
            let mut out = String::new();
            for v in &outcome.closed_vars {
                let _ = writeln!(out, "warning: free variable ?{} universally closed", v);
            }
            if outcome.duplicate {
                let _ = writeln!(out, "duplicate of assertion #{}", outcome.id);
            } else {
                let _ = writeln!(out, "asserted #{} in {}", outcome.id, session.current_mt);
            }
            CmdResult::text(out)
        }
        Err(e) => CmdResult::error(format!("{}", e)),
    }
}

fn cmd_retract(rest: &str, session: &mut Session) -> CmdResult {
    let id: u64 = match rest.trim().trim_start_matches('#').parse() {
        Ok(i) => i,
        Err(_) => return CmdResult::error("usage: retract <assertion id>"),
    };
    match session.kb.retract(id) {
        Ok(()) => CmdResult::text(format!("retracted #{}", id)),
        Err(e) => CmdResult::error(format!("{}", e)),
    }
}

fn cmd_budget(rest: &str, session: &mut Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::text(format!(
            "budget: steps={} depth={} ms={}",
            session.budget.max_steps, session.budget.max_depth, session.budget.wall_millis
        ));
    }
    let mut budget = session.budget;
    for pair in rest.split_whitespace() {
        let Some((key, value)) = pair.split_once('=') else {
            return CmdResult::error(format!("bad budget setting '{}'; use key=value", pair));
        };
        match key {
            "steps" => match value.parse::<u64>() {
                Ok(v) if v > 0 => budget.max_steps = v,
                _ => return CmdResult::error(format!("bad steps value '{}'", value)),
            },
            "depth" => match value.parse::<u32>() {
                Ok(v) if v > 0 => budget.max_depth = v,
                _ => return CmdResult::error(format!("bad depth value '{}'", value)),
            },
            "ms" => match value.parse::<u64>() {
                Ok(v) if v > 0 => budget.wall_millis = v,
                _ => return CmdResult::error(format!("bad ms value '{}'", value)),
            },
            other => return CmdResult::error(format!("unknown budget key '{}'", other)),
        }
    }
    session.budget = budget;
    CmdResult::text(format!(
        "budget: steps={} depth={} ms={}",
        budget.max_steps, budget.max_depth, budget.wall_millis
    ))
}

fn cmd_export(rest: &str, session: &Session) -> CmdResult {
    if rest.is_empty() {
        return CmdResult::error("usage: export <path>");
    }
    match std::fs::write(rest, session.kb.export_mkb()) {
        Ok(()) => CmdResult::text(format!("exported {} assertions to {}", session.kb.assertion_count(), rest)),
        Err(e) => CmdResult::error(format!("cannot write {}: {}", rest, e)),
    }
}

fn cmd_expect(rest: &str, session: &Session) -> CmdResult {
    let want: Status = match rest.trim().parse() {
        Ok(s) => s,
        Err(e) => return CmdResult::error(e),
    };
    match session.answers.last() {
        None => CmdResult {
            output: "expect failed: no answer yet".into(),
            expect_failed: true,
            ..Default::default()
        },
        Some(stored) if stored.answer.status == want => {
            CmdResult::text(format!("expect {}: ok", want))
        }
        Some(stored) => CmdResult {
            output: format!("expect failed: wanted {}, got {}", want, stored.answer.status),
            expect_failed: true,
            ..Default::default()
        },
    }
}

/// Run a script of REPL commands. Exit code 0 when everything succeeded,
/// 1 when an `expect` failed, 2 on load/parse/command errors.
pub fn batch_run(session: &mut Session, script: &str, out: &mut impl std::io::Write) -> i32 {
    let mut had_error = false;
    let mut had_expect_failure = false;
    for (lineno, line) in script.lines().enumerate() {
        let result = repl_command(line, session);
        if !result.output.is_empty() {
            let _ = writeln!(out, "{}", result.output.trim_end());
        }
        if result.is_error {
            let _ = writeln!(out, "error at script line {}", lineno + 1);
            had_error = true;
        }
        if result.expect_failed {
            had_expect_failure = true;
        }
        if result.quit {
            break;
        }
    }
    if had_error {
        2
    } else if had_expect_failure {
        1
    } else {
        0
    }
}
