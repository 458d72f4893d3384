//! Command-line front end: load KB files, run a script or an interactive
//! REPL. Exit codes: 0 success, 1 expectation failure, 2 load/parse error.

use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use microkb::repl::{batch_run, repl_command, Session};
use microkb::symbol::Symbol;

#[derive(Parser)]
#[command(name = "microkb", about = "contextualized defeasible reasoning engine", version)]
struct Cli {
    /// KB or template file to load at startup (repeatable)
    #[arg(long = "load", value_name = "FILE")]
    load: Vec<PathBuf>,

    /// Default microtheory for queries and assertions
    #[arg(long, value_name = "NAME")]
    mt: Option<String>,

    /// Run commands from a script file instead of the interactive REPL
    #[arg(long, value_name = "FILE")]
    script: Option<PathBuf>,

    /// Emit line-delimited JSON records for answers and loads
    #[arg(long)]
    structured: bool,

    /// Query budget: maximum expanded steps
    #[arg(long = "budget-steps", value_name = "N")]
    budget_steps: Option<u64>,

    /// Query budget: maximum search depth
    #[arg(long = "budget-depth", value_name = "N")]
    budget_depth: Option<u32>,

    /// Query budget: wall-clock milliseconds
    #[arg(long = "budget-ms", value_name = "N")]
    budget_ms: Option<u64>,

    /// Maximum distinct answers enumerated per free-variable query
    #[arg(long = "answer-cap", value_name = "N")]
    answer_cap: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut session = Session::new();
    session.structured = cli.structured;
    if let Some(steps) = cli.budget_steps {
        session.budget.max_steps = steps.max(1);
    }
    if let Some(depth) = cli.budget_depth {
        session.budget.max_depth = depth.max(1);
    }
    if let Some(ms) = cli.budget_ms {
        session.budget.wall_millis = ms.max(1);
    }
    if let Some(cap) = cli.answer_cap {
        session.config.answer_cap = cap.max(1);
    }

    let stdout = std::io::stdout();
    let mut load_failed = false;
    for path in &cli.load {
        let result = repl_command(&format!("load {}", path.display()), &mut session);
        if !result.output.is_empty() {
            println!("{}", result.output.trim_end());
        }
        if result.is_error {
            load_failed = true;
        }
    }
    if load_failed {
        return ExitCode::from(2);
    }

    if let Some(mt) = &cli.mt {
        let name = Symbol::new(mt.as_str());
        session.kb.ensure_mt(&name);
        session.current_mt = name;
    }

    if let Some(script) = &cli.script {
        let text = match std::fs::read_to_string(script) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read script {}: {}", script.display(), e);
                return ExitCode::from(2);
            }
        };
        let code = batch_run(&mut session, &text, &mut stdout.lock());
        return ExitCode::from(code as u8);
    }

    // Interactive REPL.
    let interactive = std::io::stdin().is_terminal();
    let stdin = std::io::stdin();
    let mut expect_failed = false;
    loop {
        if interactive {
            print!("microkb> ");
            let _ = std::io::stdout().flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                eprintln!("input error: {}", e);
                return ExitCode::from(2);
            }
        }
        let result = repl_command(&line, &mut session);
        if !result.output.is_empty() {
            println!("{}", result.output.trim_end());
        }
        expect_failed |= result.expect_failed;
        if result.quit {
            break;
        }
    }
    if expect_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
