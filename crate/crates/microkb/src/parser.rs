//! Reader and canonical printer for the engine's s-expression surface
//! language: formulas, KB-file directives, and explanation templates.
//!
//! Grammar notes: `;` comments to end of line, symbols are case-sensitive,
//! variables are `?`-prefixed, strings are double-quoted with backslash
//! escapes. `thereExists`/`forAll` bind one variable; extra body forms are
//! read as an implicit conjunction (flagged with a warning).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::clause::Strength;
use crate::logic::{Atom, Formula, Term, Var, VarId};
use crate::symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    InMt(Symbol),
    GenlMt { child: Symbol, parent: Symbol },
    ClosedWorld(Symbol),
    DeclarePredicate(Symbol, usize),
    DeclareFunction(Symbol, usize),
    DeclareTransitive(Symbol),
    DeclareTaxonomy(Symbol),
    Source { text: String, timestamp: Option<i64> },
    Template { predicate: Symbol, arity: usize, pattern: String, negated: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Formula { formula: Formula, strength: Strength },
    Directive(Directive),
}

/// One top-level form with its source location.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceForm {
    pub payload: Payload,
    pub line: u32,
    pub col: u32,
}

/// Non-fatal observations made while reading (lenient acceptances).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug)]
pub struct ParseOutput {
    pub forms: Vec<SourceForm>,
    pub warnings: Vec<ParseWarning>,
}

const DIRECTIVE_HEADS: &[&str] = &[
    "in-mt",
    "genl-mt",
    "closed-world",
    "declare-predicate",
    "declare-function",
    "declare-transitive",
    "declare-taxonomy",
    "source",
    "template",
];

const RESERVED_HEADS: &[&str] =
    &["and", "or", "not", "implies", "forAll", "thereExists", "naf", "quote", "monotonic"];

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Sym(String),
    Str(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            // skip whitespace and comments
            loop {
                match self.chars.peek() {
                    Some(c) if c.is_whitespace() => {
                        self.bump();
                    }
                    Some(';') => {
                        while let Some(&c) = self.chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    }
                    _ => break,
                }
            }
            let (line, col) = (self.line, self.col);
            let c = match self.chars.peek() {
                None => break,
                Some(&c) => c,
            };
            match c {
                '(' => {
                    self.bump();
                    out.push(Token { tok: Tok::LParen, line, col });
                }
                ')' => {
                    self.bump();
                    out.push(Token { tok: Tok::RParen, line, col });
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => {
                                return Err(ParseError {
                                    message: "unterminated string literal".into(),
                                    line,
                                    col,
                                })
                            }
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(c2) => s.push(c2),
                                None => {
                                    return Err(ParseError {
                                        message: "unterminated escape in string".into(),
                                        line,
                                        col,
                                    })
                                }
                            },
                            Some(c2) => s.push(c2),
                        }
                    }
                    out.push(Token { tok: Tok::Str(s), line, col });
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&c2) = self.chars.peek() {
                        if c2.is_whitespace() || c2 == '(' || c2 == ')' || c2 == ';' || c2 == '"' {
                            break;
                        }
                        s.push(c2);
                        self.bump();
                    }
                    out.push(Token { tok: Tok::Sym(s), line, col });
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Reader: tokens -> s-expressions -> forms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Sexp {
    Sym(String, u32, u32),
    Str(String, u32, u32),
    List(Vec<Sexp>, u32, u32),
}

impl Sexp {
    fn loc(&self) -> (u32, u32) {
        match self {
            Sexp::Sym(_, l, c) | Sexp::Str(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }
}

fn read_sexps(tokens: &[Token]) -> Result<Vec<Sexp>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let (sexp, next) = read_one(tokens, i)?;
        out.push(sexp);
        i = next;
    }
    Ok(out)
}

fn read_one(tokens: &[Token], i: usize) -> Result<(Sexp, usize), ParseError> {
    let t = &tokens[i];
    match &t.tok {
        Tok::Sym(s) => Ok((Sexp::Sym(s.clone(), t.line, t.col), i + 1)),
        Tok::Str(s) => Ok((Sexp::Str(s.clone(), t.line, t.col), i + 1)),
        Tok::RParen => Err(ParseError {
            message: "unbalanced parenthesis: unexpected ')'".into(),
            line: t.line,
            col: t.col,
        }),
        Tok::LParen => {
            let mut items = Vec::new();
            let mut j = i + 1;
            loop {
                match tokens.get(j) {
                    None => {
                        return Err(ParseError {
                            message: "unbalanced parenthesis: '(' is never closed".into(),
                            line: t.line,
                            col: t.col,
                        })
                    }
                    Some(tk) if tk.tok == Tok::RParen => {
                        return Ok((Sexp::List(items, t.line, t.col), j + 1));
                    }
                    Some(_) => {
                        let (item, next) = read_one(tokens, j)?;
                        items.push(item);
                        j = next;
                    }
                }
            }
        }
    }
}

struct FormReader {
    warnings: Vec<ParseWarning>,
}

/// Variable scoping during a single form read: quantifier bindings shadow,
/// free names map to one shared variable per form.
struct VarScope {
    bound: Vec<(String, Var)>,
    free: HashMap<String, Var>,
}

impl VarScope {
    fn new() -> Self {
        VarScope { bound: Vec::new(), free: HashMap::new() }
    }

    fn resolve(&mut self, name: &str) -> Var {
        for (n, v) in self.bound.iter().rev() {
            if n == name {
                return v.clone();
            }
        }
        self.free.entry(name.to_string()).or_insert_with(|| Var::fresh(name)).clone()
    }
}

impl FormReader {
    fn new() -> Self {
        FormReader { warnings: Vec::new() }
    }

    fn form(&mut self, sexp: &Sexp) -> Result<SourceForm, ParseError> {
        let (line, col) = sexp.loc();
        if let Sexp::List(items, ..) = sexp {
            if let Some(Sexp::Sym(head, ..)) = items.first() {
                if DIRECTIVE_HEADS.contains(&head.as_str()) {
                    let directive = self.directive(head, items, line, col)?;
                    return Ok(SourceForm { payload: Payload::Directive(directive), line, col });
                }
                if head.starts_with("declare-") || head.ends_with("-mt") || head == "genl" {
                    return Err(ParseError {
                        message: format!("unknown directive '{}'", head),
                        line,
                        col,
                    });
                }
                if head == "monotonic" {
                    if items.len() != 2 {
                        return Err(ParseError {
                            message: "monotonic takes exactly one formula".into(),
                            line,
                            col,
                        });
                    }
                    let mut scope = VarScope::new();
                    let formula = self.formula(&items[1], &mut scope)?;
                    return Ok(SourceForm {
                        payload: Payload::Formula { formula, strength: Strength::Monotonic },
                        line,
                        col,
                    });
                }
            }
        }
        let mut scope = VarScope::new();
        let formula = self.formula(sexp, &mut scope)?;
        Ok(SourceForm { payload: Payload::Formula { formula, strength: Strength::Default }, line, col })
    }

    fn directive(
        &mut self,
        head: &str,
        items: &[Sexp],
        line: u32,
        col: u32,
    ) -> Result<Directive, ParseError> {
        let args = &items[1..];
        let err = |message: String| ParseError { message, line, col };
        let sym_arg = |i: usize, what: &str| -> Result<Symbol, ParseError> {
            match args.get(i) {
                Some(Sexp::Sym(s, ..)) => Ok(Symbol::new(s)),
                _ => Err(err(format!("{} expects a symbol for argument {}", what, i + 1))),
            }
        };
        let nat_arg = |i: usize, what: &str| -> Result<usize, ParseError> {
            match args.get(i) {
                Some(Sexp::Sym(s, ..)) => s
                    .parse::<usize>()
                    .map_err(|_| err(format!("{} expects a non-negative arity, got '{}'", what, s))),
                _ => Err(err(format!("{} expects an arity for argument {}", what, i + 1))),
            }
        };
        match head {
            "in-mt" => {
                if args.len() != 1 {
                    return Err(err("in-mt takes one microtheory name".into()));
                }
                Ok(Directive::InMt(sym_arg(0, "in-mt")?))
            }
            "genl-mt" => {
                if args.len() != 2 {
                    return Err(err("genl-mt takes child and parent names".into()));
                }
                Ok(Directive::GenlMt { child: sym_arg(0, "genl-mt")?, parent: sym_arg(1, "genl-mt")? })
            }
            "closed-world" => {
                if args.len() != 1 {
                    return Err(err("closed-world takes one microtheory name".into()));
                }
                Ok(Directive::ClosedWorld(sym_arg(0, "closed-world")?))
            }
            "declare-predicate" => {
                if args.len() != 2 {
                    return Err(err("declare-predicate takes a name and an arity".into()));
                }
                Ok(Directive::DeclarePredicate(sym_arg(0, "declare-predicate")?, nat_arg(1, "declare-predicate")?))
            }
            "declare-function" => {
                if args.len() != 2 {
                    return Err(err("declare-function takes a name and an arity".into()));
                }
                Ok(Directive::DeclareFunction(sym_arg(0, "declare-function")?, nat_arg(1, "declare-function")?))
            }
            "declare-transitive" => {
                if args.len() != 1 {
                    return Err(err("declare-transitive takes one predicate name".into()));
                }
                Ok(Directive::DeclareTransitive(sym_arg(0, "declare-transitive")?))
            }
            "declare-taxonomy" => {
                if args.len() != 1 {
                    return Err(err("declare-taxonomy takes one predicate name".into()));
                }
                Ok(Directive::DeclareTaxonomy(sym_arg(0, "declare-taxonomy")?))
            }
            "source" => {
                let text = match args.first() {
                    Some(Sexp::Str(s, ..)) => s.clone(),
                    _ => return Err(err("source expects a quoted string".into())),
                };
                let timestamp = match args.get(1) {
                    None => None,
                    Some(Sexp::Sym(s, ..)) => Some(s.parse::<i64>().map_err(|_| {
                        err(format!("source timestamp must be an integer, got '{}'", s))
                    })?),
                    Some(_) => return Err(err("source timestamp must be an integer".into())),
                };
                if args.len() > 2 {
                    return Err(err("source takes a string and an optional timestamp".into()));
                }
                Ok(Directive::Source { text, timestamp })
            }
            "template" => {
                if args.len() < 3 || args.len() > 4 {
                    return Err(err(
                        "template takes predicate, arity, pattern, and an optional negated pattern".into(),
                    ));
                }
                let predicate = sym_arg(0, "template")?;
                let arity = nat_arg(1, "template")?;
                let pattern = match &args[2] {
                    Sexp::Str(s, ..) => s.clone(),
                    _ => return Err(err("template pattern must be a quoted string".into())),
                };
                let negated = match args.get(3) {
                    None => None,
                    Some(Sexp::Str(s, ..)) => Some(s.clone()),
                    Some(_) => return Err(err("negated template pattern must be a quoted string".into())),
                };
                Ok(Directive::Template { predicate, arity, pattern, negated })
            }
            _ => Err(err(format!("unknown directive '{}'", head))),
        }
    }

    fn formula(&mut self, sexp: &Sexp, scope: &mut VarScope) -> Result<Formula, ParseError> {
        let (line, col) = sexp.loc();
        let err = |message: String| ParseError { message, line, col };
        match sexp {
            Sexp::Sym(s, ..) => {
                Err(err(format!("expected a formula, got bare symbol '{}'", s)))
            }
            Sexp::Str(..) => Err(err("string literal is not a formula".into())),
            Sexp::List(items, ..) => {
                let head = match items.first() {
                    Some(Sexp::Sym(h, ..)) => h.as_str(),
                    Some(other) => {
                        let (l, c) = other.loc();
                        return Err(ParseError {
                            message: "formula head must be a symbol".into(),
                            line: l,
                            col: c,
                        });
                    }
                    None => return Err(err("empty form".into())),
                };
                match head {
                    "and" | "or" => {
                        if items.len() < 2 {
                            return Err(err(format!("{} needs at least one sub-formula", head)));
                        }
                        let subs: Vec<Formula> = items[1..]
                            .iter()
                            .map(|s| self.formula(s, scope))
                            .collect::<Result<_, _>>()?;
                        Ok(if head == "and" { Formula::And(subs) } else { Formula::Or(subs) })
                    }
                    "not" => {
                        if items.len() != 2 {
                            return Err(err("not takes exactly one sub-formula".into()));
                        }
                        Ok(Formula::Not(Box::new(self.formula(&items[1], scope)?)))
                    }
                    "naf" => {
                        if items.len() != 2 {
                            return Err(err("naf takes exactly one sub-formula".into()));
                        }
                        Ok(Formula::Naf(Box::new(self.formula(&items[1], scope)?)))
                    }
                    "implies" => {
                        if items.len() != 3 {
                            return Err(err("implies takes an antecedent and a consequent".into()));
                        }
                        Ok(Formula::Implies(
                            Box::new(self.formula(&items[1], scope)?),
                            Box::new(self.formula(&items[2], scope)?),
                        ))
                    }
                    "forAll" | "thereExists" => {
                        if items.len() < 3 {
                            return Err(err(format!("{} takes a variable and a body", head)));
                        }
                        let vname = match &items[1] {
                            Sexp::Sym(s, ..) if s.starts_with('?') && s.len() > 1 => {
                                s[1..].to_string()
                            }
                            other => {
                                let (l, c) = other.loc();
                                return Err(ParseError {
                                    message: format!("{} binds a ?-prefixed variable", head),
                                    line: l,
                                    col: c,
                                });
                            }
                        };
                        if items.len() > 3 {
                            self.warnings.push(ParseWarning {
                                message: format!(
                                    "{} with multiple body forms read as an implicit conjunction",
                                    head
                                ),
                                line,
                                col,
                            });
                        }
                        let var = Var::fresh(vname.as_str());
                        scope.bound.push((vname, var.clone()));
                        let bodies: Vec<Formula> = items[2..]
                            .iter()
                            .map(|s| self.formula(s, scope))
                            .collect::<Result<_, _>>()?;
                        scope.bound.pop();
                        let body =
                            if bodies.len() == 1 { bodies.into_iter().next().unwrap() } else { Formula::And(bodies) };
                        Ok(if head == "forAll" {
                            Formula::ForAll(var, Box::new(body))
                        } else {
                            Formula::Exists(var, Box::new(body))
                        })
                    }
                    "quote" => Err(err("quote builds a term, not a formula".into())),
                    _ => {
                        if head.starts_with('?') {
                            return Err(err("a variable cannot be a predicate".into()));
                        }
                        let args: Vec<Term> = items[1..]
                            .iter()
                            .map(|s| self.term(s, scope))
                            .collect::<Result<_, _>>()?;
                        Ok(Formula::Atom(Atom::new(head, args)))
                    }
                }
            }
        }
    }

    fn term(&mut self, sexp: &Sexp, scope: &mut VarScope) -> Result<Term, ParseError> {
        let (line, col) = sexp.loc();
        let err = |message: String| ParseError { message, line, col };
        match sexp {
            Sexp::Sym(s, ..) => {
                if let Some(name) = s.strip_prefix('?') {
                    if name.is_empty() {
                        return Err(err("'?' alone is not a variable".into()));
                    }
                    Ok(Term::Variable(scope.resolve(name)))
                } else {
                    Ok(Term::Constant(Symbol::new(s)))
                }
            }
            Sexp::Str(..) => {
                Err(err("string literals are only allowed in directives".into()))
            }
            Sexp::List(items, ..) => {
                let head = match items.first() {
                    Some(Sexp::Sym(h, ..)) => h.as_str(),
                    _ => return Err(err("function term head must be a symbol".into())),
                };
                if head == "quote" {
                    if items.len() != 2 {
                        return Err(err("quote takes exactly one formula".into()));
                    }
                    let inner = self.formula(&items[1], scope)?;
                    return Ok(Term::Quoted(Box::new(inner)));
                }
                if RESERVED_HEADS.contains(&head) {
                    return Err(err(format!("reserved word '{}' cannot be a functor", head)));
                }
                if head.starts_with('?') {
                    return Err(err("a variable cannot be a functor".into()));
                }
                let args: Vec<Term> = items[1..]
                    .iter()
                    .map(|s| self.term(s, scope))
                    .collect::<Result<_, _>>()?;
                if args.is_empty() {
                    return Err(err(format!(
                        "'({})' is not a term; write the constant '{}' without parentheses",
                        head, head
                    )));
                }
                Ok(Term::FunctionApp(Symbol::new(head), args))
            }
        }
    }
}

/// Parse a whole stream of top-level forms (a KB or template file).
pub fn parse_forms(text: &str) -> Result<ParseOutput, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let sexps = read_sexps(&tokens)?;
    let mut reader = FormReader::new();
    let mut forms = Vec::new();
    for sexp in &sexps {
        forms.push(reader.form(sexp)?);
    }
    Ok(ParseOutput { forms, warnings: reader.warnings })
}

/// Parse a single formula (for `ask`/`assert`); free variables are allowed
/// and left free.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let sexps = read_sexps(&tokens)?;
    if sexps.len() != 1 {
        return Err(ParseError {
            message: format!("expected exactly one formula, found {}", sexps.len()),
            line: 1,
            col: 1,
        });
    }
    let mut reader = FormReader::new();
    let mut scope = VarScope::new();
    reader.formula(&sexps[0], &mut scope)
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

/// Assigns each distinct variable id a collision-free display name, so the
/// printed form reads back alpha-equivalent.
struct NamePool {
    by_id: HashMap<VarId, String>,
    taken: HashMap<String, VarId>,
}

impl NamePool {
    fn new() -> Self {
        NamePool { by_id: HashMap::new(), taken: HashMap::new() }
    }

    fn name(&mut self, v: &Var) -> String {
        if let Some(n) = self.by_id.get(&v.id) {
            return n.clone();
        }
        let base = v.name.as_str();
        let mut candidate = base.to_string();
        let mut k = 1;
        while self.taken.contains_key(&candidate) {
            k += 1;
            candidate = format!("{}_{}", base, k);
        }
        self.taken.insert(candidate.clone(), v.id);
        self.by_id.insert(v.id, candidate.clone());
        candidate
    }
}

/// Deterministic canonical text: single spaces, no line breaks,
/// `parse(print(f))` is alpha-equivalent to `f`.
pub fn print_formula(f: &Formula) -> String {
    let mut pool = NamePool::new();
    let mut s = String::new();
    write_formula(f, &mut pool, &mut s);
    s
}

pub fn print_term(t: &Term) -> String {
    let mut pool = NamePool::new();
    let mut s = String::new();
    write_term(t, &mut pool, &mut s);
    s
}

pub fn print_atom(a: &Atom) -> String {
    let mut pool = NamePool::new();
    let mut s = String::new();
    write_atom(a, &mut pool, &mut s);
    s
}

fn write_formula(f: &Formula, pool: &mut NamePool, out: &mut String) {
    match f {
        Formula::Atom(a) => write_atom(a, pool, out),
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(g, pool, out);
            out.push(')');
        }
        Formula::Naf(g) => {
            out.push_str("(naf ");
            write_formula(g, pool, out);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push('(');
            out.push_str(if matches!(f, Formula::And(_)) { "and" } else { "or" });
            for g in fs {
                out.push(' ');
                write_formula(g, pool, out);
            }
            out.push(')');
        }
        Formula::Implies(a, c) => {
            out.push_str("(implies ");
            write_formula(a, pool, out);
            out.push(' ');
            write_formula(c, pool, out);
            out.push(')');
        }
        Formula::ForAll(v, b) | Formula::Exists(v, b) => {
            out.push('(');
            out.push_str(if matches!(f, Formula::ForAll(..)) { "forAll" } else { "thereExists" });
            out.push_str(" ?");
            out.push_str(&pool.name(v));
            out.push(' ');
            write_formula(b, pool, out);
            out.push(')');
        }
    }
}

fn write_atom(a: &Atom, pool: &mut NamePool, out: &mut String) {
    out.push('(');
    out.push_str(a.predicate.as_str());
    for t in &a.args {
        out.push(' ');
        write_term(t, pool, out);
    }
    out.push(')');
}

fn write_term(t: &Term, pool: &mut NamePool, out: &mut String) {
    match t {
        Term::Constant(c) => out.push_str(c.as_str()),
        Term::Variable(v) => {
            out.push('?');
            out.push_str(&pool.name(v));
        }
        Term::FunctionApp(f, args) => {
            out.push('(');
            out.push_str(f.as_str());
            for a in args {
                out.push(' ');
                write_term(a, pool, out);
            }
            out.push(')');
        }
        Term::Quoted(q) => {
            out.push_str("(quote ");
            write_formula(q, pool, out);
            out.push(')');
        }
    }
}

pub fn print_directive(d: &Directive) -> String {
    fn quoted(s: &str) -> String {
        let mut out = String::from("\"");
        for c in s.chars() {
            match c {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\t' => out.push_str("\\t"),
                _ => out.push(c),
            }
        }
        out.push('"');
        out
    }
    match d {
        Directive::InMt(m) => format!("(in-mt {})", m),
        Directive::GenlMt { child, parent } => format!("(genl-mt {} {})", child, parent),
        Directive::ClosedWorld(m) => format!("(closed-world {})", m),
        Directive::DeclarePredicate(p, n) => format!("(declare-predicate {} {})", p, n),
        Directive::DeclareFunction(f, n) => format!("(declare-function {} {})", f, n),
        Directive::DeclareTransitive(p) => format!("(declare-transitive {})", p),
        Directive::DeclareTaxonomy(p) => format!("(declare-taxonomy {})", p),
        Directive::Source { text, timestamp } => match timestamp {
            Some(ts) => format!("(source {} {})", quoted(text), ts),
            None => format!("(source {})", quoted(text)),
        },
        Directive::Template { predicate, arity, pattern, negated } => match negated {
            Some(n) => format!("(template {} {} {} {})", predicate, arity, quoted(pattern), quoted(n)),
            None => format!("(template {} {} {})", predicate, arity, quoted(pattern)),
        },
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_atom(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::alpha_eq;

    fn formula(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn parses_figure_rule_shape() {
        let f = formula("(implies (and (isa ?x Person) (parent ?x ?y)) (loves ?x ?y))");
        match &f {
            Formula::Implies(a, c) => {
                match a.as_ref() {
                    Formula::And(fs) => assert_eq!(fs.len(), 2),
                    other => panic!("expected and, got {:?}", other),
                }
                match c.as_ref() {
                    Formula::Atom(at) => assert_eq!(at.predicate, "loves"),
                    other => panic!("expected atom, got {:?}", other),
                }
            }
            other => panic!("expected implies, got {:?}", other),
        }
        // the two ?x occurrences resolve to the same variable
        let frees = f.free_vars();
        assert_eq!(frees.len(), 2);
    }

    #[test]
    fn parses_simple_atom() {
        let f = formula("(isa Socrates Man)");
        assert_eq!(
            f,
            Formula::Atom(Atom::new("isa", vec![Term::constant("Socrates"), Term::constant("Man")]))
        );
    }

    #[test]
    fn reports_error_at_end_of_input() {
        let e = parse_formula("(and (isa ?x").unwrap_err();
        assert!(e.message.contains("unbalanced"));
        assert_eq!(e.line, 1);
        assert_eq!(e.col, 6); // the innermost paren left open
    }

    #[test]
    fn error_location_points_into_offending_form() {
        let e = parse_forms("(isa A B)\n(loves \"nope\")").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.col > 1);
    }

    #[test]
    fn prints_canonical_atom() {
        let f = Formula::Atom(Atom::new("isa", vec![Term::constant("Socrates"), Term::constant("Man")]));
        assert_eq!(print_formula(&f), "(isa Socrates Man)");
    }

    #[test]
    fn print_is_fixed_point_after_one_round() {
        let text = "(implies (and (isa ?x Person) (parent ?x ?y)) (loves ?x ?y))";
        let once = print_formula(&formula(text));
        let twice = print_formula(&formula(&once));
        assert_eq!(once, twice);
        assert_eq!(once, text);
    }

    #[test]
    fn quoted_formula_round_trips() {
        let f = formula("(believes Jane (quote (isa Yoda Jedi)))");
        assert_eq!(print_formula(&f), "(believes Jane (quote (isa Yoda Jedi)))");
        assert!(alpha_eq(&formula(&print_formula(&f)), &f));
    }

    #[test]
    fn quantifiers_bind_and_round_trip() {
        let f = formula("(thereExists ?k (forAll ?y (implies (isa ?y Swede) (kingOf ?y ?k))))");
        assert!(f.free_vars().is_empty());
        assert!(alpha_eq(&formula(&print_formula(&f)), &f));
    }

    #[test]
    fn colliding_variable_names_print_unambiguously() {
        // two distinct variables that both carry the display name "x"
        let v1 = Var::fresh("x");
        let v2 = Var::fresh("x");
        let f = Formula::atom("p", vec![Term::Variable(v1), Term::Variable(v2)]);
        let printed = print_formula(&f);
        assert_eq!(printed, "(p ?x ?x_2)");
        assert!(alpha_eq(&formula(&printed), &f));
    }

    #[test]
    fn multiple_quantifier_bodies_read_as_conjunction_with_warning() {
        let out = parse_forms("(thereExists ?x (isa ?x A) (isa ?x B))").unwrap();
        assert_eq!(out.warnings.len(), 1);
        match &out.forms[0].payload {
            Payload::Formula { formula: Formula::Exists(_, body), .. } => {
                assert!(matches!(body.as_ref(), Formula::And(fs) if fs.len() == 2));
            }
            other => panic!("unexpected payload {:?}", other),
        }
    }

    #[test]
    fn directives_parse() {
        let out = parse_forms(
            "(in-mt GeographyMt) (genl-mt GeographyMt BaseMt) (declare-transitive physicallyLocatedIn)\n\
             (source \"CIA factbook\" 1690000000) (template loves 2 \"{0} loves {1}\")",
        )
        .unwrap();
        assert_eq!(out.forms.len(), 5);
        assert!(matches!(
            &out.forms[0].payload,
            Payload::Directive(Directive::InMt(m)) if m.as_str() == "GeographyMt"
        ));
        assert!(matches!(
            &out.forms[3].payload,
            Payload::Directive(Directive::Source { timestamp: Some(1690000000), .. })
        ));
    }

    #[test]
    fn unknown_directive_is_an_error() {
        let e = parse_forms("(declare-modal possibly)").unwrap_err();
        assert!(e.message.contains("unknown directive"));
    }

    #[test]
    fn monotonic_wraps_a_formula() {
        let out = parse_forms("(monotonic (isa Two EvenNumber))").unwrap();
        assert!(matches!(
            &out.forms[0].payload,
            Payload::Formula { strength: Strength::Monotonic, .. }
        ));
    }

    #[test]
    fn comments_are_skipped() {
        let out = parse_forms("; a comment\n(isa A B) ; trailing\n").unwrap();
        assert_eq!(out.forms.len(), 1);
    }
}
