//! Text syntax for terms and rule files.
//!
//! Term programs look like `vars x y:E; 2.x + 3/4.y`. Operators, loosest
//! first: `+` (vector or scalar sum, chosen by sort), `@` (bilinear
//! product), `*` (scalar product), `.` (scalar action, right associative).
//! Literals are integers or `p/q`, optionally negative. `0E`, `0F`, `0G` are
//! the vector zeros.
//!
//! Rule files are line oriented:
//!
//! ```text
//! sorts K
//! ac +K *
//! vars l m:K
//! rule 1 + 1 -> 0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::engine::{RewriteSystem, Rule, RuleError};
use crate::term::{AcSet, Rational, Signature, Sort, Symbol, Term, TermError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lex(char),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("undeclared identifier `{0}`")]
    Undeclared(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("`{0}` is declared twice")]
    Redeclared(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(pos: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { pos, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: {source}")]
    Rule { line: usize, source: RuleError },
    #[error("line {line}: {source}")]
    Term { line: usize, source: TermError },
    #[error("line {line}: unknown directive `{directive}`")]
    Directive { line: usize, directive: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Zero(Sort),
    Plus,
    Star,
    Dot,
    At,
    LParen,
    RParen,
    Semi,
    Colon,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(q) => write!(f, "`{q}`"),
            Tok::Zero(s) => write!(f, "`0{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::At => f.write_str("`@`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(src: &str, base: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let indexed: Vec<(usize, char)> = src.char_indices().collect();
    let bytes: Vec<char> = indexed.iter().map(|&(_, c)| c).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = base + indexed[i].0;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            '.' => Some(Tok::Dot),
            '@' => Some(Tok::At),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((pos, tok));
            i += 1;
            continue;
        }
        if c == '-' && bytes.get(i + 1) == Some(&'>') {
            out.push((pos, Tok::Arrow));
            i += 2;
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let negative = c == '-';
            if negative {
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = bytes[start..i].iter().collect();
            // `0E`, `0F`, `0G`
            if !negative && digits == "0" && i < bytes.len() {
                if let Some(sort) = Sort::parse(&bytes[i].to_string()).filter(|s| s.is_vector()) {
                    if !bytes.get(i + 1).copied().is_some_and(is_ident_char) {
                        out.push((pos, Tok::Zero(sort)));
                        i += 1;
                        continue;
                    }
                }
            }
            let numer: BigInt = digits.parse().expect("digits");
            let mut denom = BigInt::one();
            if bytes.get(i) == Some(&'/') && bytes.get(i + 1).is_some_and(char::is_ascii_digit) {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let d: String = bytes[start..i].iter().collect();
                denom = d.parse().expect("digits");
                if denom.is_zero() {
                    return Err(ParseError::new(pos, ParseErrorKind::ZeroDenominator));
                }
            }
            if bytes.get(i).copied().is_some_and(is_ident_start) {
                return Err(ParseError::new(pos, ParseErrorKind::Lex(bytes[i])));
            }
            let numer = if negative { -numer } else { numer };
            out.push((pos, Tok::Num(Rational::new(numer, denom))));
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            out.push((pos, Tok::Ident(bytes[start..i].iter().collect())));
            continue;
        }
        return Err(ParseError::new(pos, ParseErrorKind::Lex(c)));
    }
    out.push((base + src.len(), Tok::Eof));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Ast {
    Num(Rational),
    Ident(String),
    Zero(Sort),
    Bin(BinOp, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Plus,
    Star,
    Dot,
    At,
}

#[derive(Debug, Clone)]
struct Node {
    pos: usize,
    ast: Ast,
}

/// What identifiers mean inside a program.
#[derive(Debug, Clone, Default)]
struct Scope {
    names: BTreeMap<String, Term>,
    order: Vec<String>,
}

impl Scope {
    fn declare(&mut self, pos: usize, name: &str, term: Term) -> Result<(), ParseError> {
        if self.names.insert(name.to_owned(), term).is_some() {
            return Err(ParseError::new(pos, ParseErrorKind::Redeclared(name.to_owned())));
        }
        self.order.push(name.to_owned());
        Ok(())
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn new(toks: Vec<(usize, Tok)>) -> Parser {
        Parser { toks, at: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            ParseErrorKind::Unexpected {
                expected: expected.to_owned(),
                found: self.peek().to_string(),
            },
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<usize, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().0)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    /// `ident+ : sort` groups until `;` or end of input.
    fn declarations(
        &mut self,
        sig: &Signature,
        constants: bool,
        scope: &mut Scope,
        sig_out: &mut Signature,
    ) -> Result<(), ParseError> {
        loop {
            let mut names = Vec::new();
            while let Tok::Ident(name) = self.peek().clone() {
                names.push((self.pos(), name));
                self.bump();
            }
            if names.is_empty() {
                return Err(self.unexpected("identifier"));
            }
            self.expect(Tok::Colon)?;
            let sort_pos = self.pos();
            let sort = match self.bump().1 {
                Tok::Ident(s) => Sort::parse(&s)
                    .filter(|s| sig.has_sort(*s))
                    .ok_or_else(|| ParseError::new(sort_pos, ParseErrorKind::UnknownSort(s)))?,
                other => {
                    return Err(ParseError::new(
                        sort_pos,
                        ParseErrorKind::Unexpected {
                            expected: "sort".into(),
                            found: other.to_string(),
                        },
                    ))
                }
            };
            for (pos, name) in names {
                let term = if constants {
                    if !sort.is_vector() {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Sort(format!("constant `{name}` must have a vector sort")),
                        ));
                    }
                    *sig_out = sig_out
                        .clone()
                        .with_constant(&name, sort)
                        .map_err(|e| ParseError::new(pos, ParseErrorKind::Sort(e.to_string())))?;
                    Term::constant(&name, sort)
                } else {
                    Term::var(&name, sort)
                };
                scope.declare(pos, &name, term)?;
            }
            match self.peek() {
                Tok::Ident(_) => continue,
                _ => return Ok(()),
            }
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.tensor()?;
        while *self.peek() == Tok::Plus {
            let (pos, _) = self.bump();
            let rhs = self.tensor()?;
            lhs = Node {
                pos,
                ast: Ast::Bin(BinOp::Plus, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn tensor(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        while *self.peek() == Tok::At {
            let (pos, _) = self.bump();
            let rhs = self.product()?;
            lhs = Node {
                pos,
                ast: Ast::Bin(BinOp::At, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.action()?;
        while *self.peek() == Tok::Star {
            let (pos, _) = self.bump();
            let rhs = self.action()?;
            lhs = Node {
                pos,
                ast: Ast::Bin(BinOp::Star, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn action(&mut self) -> Result<Node, ParseError> {
        let lhs = self.atom()?;
        if *self.peek() == Tok::Dot {
            let (pos, _) = self.bump();
            let rhs = self.action()?;
            return Ok(Node {
                pos,
                ast: Ast::Bin(BinOp::Dot, Box::new(lhs), Box::new(rhs)),
            });
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let pos = self.pos();
        let ast = match self.peek().clone() {
            Tok::Num(q) => Ast::Num(q),
            Tok::Ident(name) => Ast::Ident(name),
            Tok::Zero(s) => Ast::Zero(s),
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            _ => return Err(self.unexpected("term")),
        };
        self.bump();
        Ok(Node { pos, ast })
    }
}

fn elaborate(node: &Node, scope: &Scope, sig: &Signature, ac: &AcSet) -> Result<Term, ParseError> {
    let sort_err = |msg: String| ParseError::new(node.pos, ParseErrorKind::Sort(msg));
    match &node.ast {
        Ast::Num(q) => Ok(Term::Lit(q.clone())),
        Ast::Ident(name) => scope
            .names
            .get(name)
            .cloned()
            .ok_or_else(|| ParseError::new(node.pos, ParseErrorKind::Undeclared(name.clone()))),
        Ast::Zero(s) => {
            if sig.has_sort(*s) {
                Ok(Term::zero(*s))
            } else {
                Err(sort_err(format!("sort {s} is not part of the signature")))
            }
        }
        Ast::Bin(op, l, r) => {
            let l = elaborate(l, scope, sig, ac)?;
            let r = elaborate(r, scope, sig, ac)?;
            let (ls, rs) = (l.sort(), r.sort());
            let sym = match op {
                BinOp::Plus if ls == rs => Symbol::Add(ls),
                BinOp::Plus => return Err(sort_err(format!("`+` applied to {ls} and {rs}"))),
                BinOp::Star if ls == Sort::K && rs == Sort::K => Symbol::Mul,
                BinOp::Star => return Err(sort_err(format!("`*` applied to {ls} and {rs}"))),
                BinOp::Dot if ls == Sort::K && rs.is_vector() => Symbol::Act(rs),
                BinOp::Dot => return Err(sort_err(format!("`.` applied to {ls} and {rs}"))),
                BinOp::At if ls == Sort::E && rs == Sort::F => Symbol::Tensor,
                BinOp::At => return Err(sort_err(format!("`@` applied to {ls} and {rs}"))),
            };
            if !sig.declares(&sym) {
                return Err(sort_err(format!("symbol `{sym}` is not part of the signature")));
            }
            Ok(Term::app(sym, vec![l, r], ac))
        }
    }
}

/// A parsed term program: its declarations and body.
#[derive(Debug, Clone)]
pub struct Program {
    /// Declared variables in declaration order.
    pub vars: Vec<Var>,
    /// Declared constants in declaration order.
    pub constants: Vec<(String, Sort)>,
    /// `sig` extended with the declared constants.
    pub signature: Signature,
    pub term: Term,
}

impl Program {
    /// Declared variables of `sort`, in declaration order.
    pub fn vars_of(&self, sort: Sort) -> Vec<Var> {
        self.vars.iter().filter(|v| v.sort == sort).cloned().collect()
    }
}

/// Parses `vars …; consts …; term` against `sig`.
pub fn parse_program(text: &str, sig: &Signature) -> Result<Program, ParseError> {
    let mut parser = Parser::new(lex(text, 0)?);
    let mut scope = Scope::default();
    let mut signature = sig.clone();
    let mut vars = Vec::new();
    let mut constants = Vec::new();
    loop {
        let constant = match parser.peek() {
            Tok::Ident(k) if k == "vars" => false,
            Tok::Ident(k) if k == "consts" => true,
            _ => break,
        };
        // `vars` alone could also be a variable name; only treat it as a
        // keyword when a declaration follows
        if !matches!(parser.toks.get(parser.at + 1), Some((_, Tok::Ident(_)))) {
            break;
        }
        parser.bump();
        parser.declarations(sig, constant, &mut scope, &mut signature)?;
        parser.expect(Tok::Semi)?;
    }
    for name in &scope.order {
        match &scope.names[name] {
            Term::Var(v) => vars.push(v.clone()),
            t => constants.push((name.clone(), t.sort())),
        }
    }
    let ast = parser.sum()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.unexpected("end of input"));
    }
    let term = elaborate(&ast, &scope, &signature, &signature.ac_set())?;
    Ok(Program {
        vars,
        constants,
        signature,
        term,
    })
}

/// Parses a term program and returns its well-sorted canonical term.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    parse_program(text, sig).map(|p| p.term)
}

const SUM: u8 = 0;
const TENSOR: u8 = 1;
const PRODUCT: u8 = 2;
const ACTION: u8 = 3;
const ATOM: u8 = 4;

fn level(t: &Term) -> u8 {
    match t.head() {
        Some(Symbol::Add(_)) => SUM,
        Some(Symbol::Tensor) => TENSOR,
        Some(Symbol::Mul) => PRODUCT,
        Some(Symbol::Act(_)) => ACTION,
        _ => ATOM,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, ctx: u8) -> fmt::Result {
    if ctx > level(t) {
        f.write_str("(")?;
        write_body(f, t)?;
        f.write_str(")")
    } else {
        write_body(f, t)
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&v.name),
        Term::Lit(q) => write_rational(f, q),
        Term::App(Symbol::Zero(s), _) => write!(f, "0{s}"),
        Term::App(Symbol::Const(_, name), _) => f.write_str(name),
        Term::App(Symbol::Add(s), args) if s.is_vector() && args.len() > 1 => {
            let mut shown: Vec<&Term> = args.iter().collect();
            shown.sort_by(|a, b| summand_key(a).cmp(&summand_key(b)));
            let shown: Vec<Term> = shown.into_iter().cloned().collect();
            write_chain(f, &shown, " + ", SUM, TENSOR)
        }
        Term::App(Symbol::Add(_), args) => write_chain(f, args, " + ", SUM, TENSOR),
        Term::App(Symbol::Mul, args) => write_chain(f, args, " * ", PRODUCT, ACTION),
        Term::App(Symbol::Tensor, args) => {
            write_term(f, &args[0], PRODUCT)?;
            f.write_str(" @ ")?;
            write_term(f, &args[1], PRODUCT)
        }
        Term::App(Symbol::Act(_), args) => {
            write_term(f, &args[0], ATOM)?;
            f.write_str(".")?;
            write_term(f, &args[1], ATOM)
        }
    }
}

/// Summands of a vector sum are shown grouped by their vector part, bare
/// before scaled, so `5.x + 4.y` lists `x` first although the canonical
/// order compares the coefficients first.
fn summand_key(t: &Term) -> (&Term, Option<&Term>) {
    match t {
        Term::App(Symbol::Act(_), args) => (&args[1], Some(&args[0])),
        _ => (t, None),
    }
}

/// Writes an n-ary chain. A binary non-AC node gets its left operand at the
/// operator's own level since the parser is left associative.
fn write_chain(f: &mut fmt::Formatter<'_>, args: &[Term], sep: &str, own: u8, tighter: u8) -> fmt::Result {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        let ctx = if i == 0 && args.len() == 2 { own } else { tighter };
        write_term(f, arg, ctx)?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, SUM)
    }
}

/// Deterministic text for a canonical term.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Prints `t` prefixed by the declarations needed to reparse it.
pub fn print_program(t: &Term) -> String {
    let mut by_sort: BTreeMap<Sort, Vec<String>> = BTreeMap::new();
    for v in t.vars() {
        by_sort.entry(v.sort).or_default().push(v.name.to_string());
    }
    let mut consts: BTreeMap<Sort, Vec<String>> = BTreeMap::new();
    collect_constants(t, &mut consts);
    let mut out = String::new();
    for (kw, groups) in [("vars", &by_sort), ("consts", &consts)] {
        if groups.is_empty() {
            continue;
        }
        out.push_str(kw);
        for (sort, names) in groups {
            out.push(' ');
            out.push_str(&names.join(" "));
            out.push(':');
            out.push_str(sort.name());
        }
        out.push_str("; ");
    }
    out.push_str(&t.to_string());
    out
}

fn collect_constants(t: &Term, out: &mut BTreeMap<Sort, Vec<String>>) {
    if let Term::App(Symbol::Const(sort, name), _) = t {
        let names = out.entry(*sort).or_default();
        if !names.iter().any(|n| **n == **name) {
            names.push(name.to_string());
        }
    }
    t.args().iter().for_each(|a| collect_constants(a, out));
}

/// Parses a rule file into a rewrite system named `user`.
pub fn parse_system(text: &str) -> Result<RewriteSystem, SystemError> {
    let mut sorts = vec![Sort::K];
    let mut ac = AcSet::new();
    let mut decl_text = String::new();
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (directive, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        let offset = raw.find(rest).unwrap_or(0);
        match directive {
            "sorts" => {
                for (i, name) in rest.split_whitespace().enumerate() {
                    let sort = Sort::parse(name).ok_or_else(|| SystemError::Parse {
                        line,
                        source: ParseError::new(offset + i, ParseErrorKind::UnknownSort(name.into())),
                    })?;
                    if !sorts.contains(&sort) {
                        sorts.push(sort);
                    }
                }
            }
            "ac" => {
                for name in rest.split_whitespace() {
                    let sym = Symbol::from_name(name).ok_or_else(|| SystemError::Term {
                        line,
                        source: TermError::UnknownSymbol(name.into()),
                    })?;
                    ac.insert(sym).map_err(|source| SystemError::Term { line, source })?;
                }
            }
            "vars" => {
                decl_text.push_str(rest.trim_end_matches(';'));
                decl_text.push(' ');
            }
            "rule" => rules.push((line, offset, rest.to_owned())),
            other => {
                return Err(SystemError::Directive {
                    line,
                    directive: other.to_owned(),
                })
            }
        }
    }
    let sig = Signature::with_sorts(&sorts)
        .with_ac(&ac)
        .map_err(|source| SystemError::Term { line: 0, source })?;
    let prefix = if decl_text.trim().is_empty() {
        String::new()
    } else {
        format!("vars {};", decl_text.trim())
    };
    let mut parsed = Vec::new();
    for (n, (line, offset, body)) in rules.into_iter().enumerate() {
        let shift = |e: ParseError| SystemError::Parse {
            line,
            source: ParseError::new((e.pos + offset).saturating_sub(prefix.len()), e.kind),
        };
        let (lhs_text, rhs_text) = body.split_once("->").ok_or_else(|| SystemError::Parse {
            line,
            source: ParseError::new(
                offset + body.len(),
                ParseErrorKind::Unexpected {
                    expected: "`->`".into(),
                    found: "end of line".into(),
                },
            ),
        })?;
        let lhs = parse_term(&format!("{prefix}{lhs_text}"), &sig).map_err(shift)?;
        let rhs_shift = |e: ParseError| SystemError::Parse {
            line,
            source: ParseError::new(
                (e.pos + offset + lhs_text.len() + 2).saturating_sub(prefix.len()),
                e.kind,
            ),
        };
        let rhs = parse_term(&format!("{prefix}{rhs_text}"), &sig).map_err(rhs_shift)?;
        let rule = Rule::new(&format!("{}", n + 1), lhs, rhs).map_err(|source| SystemError::Rule { line, source })?;
        parsed.push(rule);
    }
    Ok(RewriteSystem::new("user", parsed, ac, sig))
}

/// Variables named in a scope, for callers that need an ordered list.
pub fn var_list(names: &[&str], sort: Sort) -> Vec<Var> {
    names.iter().map(|n| Var { name: Arc::from(*n), sort }).collect()
}
