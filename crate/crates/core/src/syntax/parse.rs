//! Surface grammar.
//!
//! ```text
//! program := ("gate" NAME "=" matrix ";"?)* term
//! term    := ("lambda" | "λ") index? x ":" type "." term
//!          | "let" "<" x ":" type "," y ":" type ">" index? "=" term "in" term
//!          | "let" x ":" type "=" term "in" term            (sugar for (λ0 x:A. N) M)
//!          | "match" index? term "with" "(" x ":" type "->" term "|" y ":" type "->" term ")"
//!          | "if" term "then" term "else" term
//!          | atom+                                           (application, left associative)
//! atom    := x annot? | "new" annot? | "meas" annot? | GATE annot?
//!          | "*" index? | "ff" index? | "tt" index?
//!          | "<" term "," term ">" index?
//!          | ("inl" | "inr") index? "[" type "," type "]" atom
//!          | "(" term ")"
//! index   := "^" NAT        annot := "^{" type "}"
//! type    := sum ("-o" type)?      sum := tensor ("+" sum)?      tensor := unary ("*" tensor)?
//! unary   := "!" unary | "qbit" | "top" | "bit" | "(" type ")"
//! ```
//! Unicode `λ ⊸ ⊗ ⊕ ⊤ →` are accepted for `lambda -o * + top ->`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::{CMatrix, Const, Context, Gate, Term, Type};

#[derive(Debug, Error, PartialEq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("{0}")]
    NonUnitary(String),
}

/// A parsed program: user gate declarations followed by a term.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub gates: Vec<Gate>,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Float(f64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Float(x) => write!(f, "`{x}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: &[(&str, &str)] = &[
    ("->", "->"),
    ("-o", "-o"),
    ("→", "->"),
    ("⊸", "-o"),
    ("⊗", "*"),
    ("⊕", "+"),
    ("λ", "lambda"),
    ("(", "("),
    (")", ")"),
    ("[", "["),
    ("]", "]"),
    ("<", "<"),
    (">", ">"),
    ("{", "{"),
    ("}", "}"),
    (",", ","),
    (".", "."),
    (":", ":"),
    (";", ";"),
    ("=", "="),
    ("|", "|"),
    ("^", "^"),
    ("*", "*"),
    ("+", "+"),
    ("-", "-"),
    ("/", "/"),
    ("!", "!"),
];

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let mut float = false;
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                float = true;
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    float = true;
                    j = k;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
            }
            let text: String = chars[start..j].iter().collect();
            let tok = if float {
                Tok::Float(text.parse().map_err(|_| err(l0, c0, format!("bad number {text}")))?)
            } else {
                Tok::Nat(text.parse().map_err(|_| err(l0, c0, format!("bad number {text}")))?)
            };
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push(Lexed { tok, line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() && c != 'λ' || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() && chars[j] != 'λ' || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push(Lexed { tok: Tok::Ident(text), line: l0, col: c0 });
            continue;
        }
        if c == '⊤' {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            out.push(Lexed { tok: Tok::Ident("top".into()), line: l0, col: c0 });
            continue;
        }
        for (text, sym) in SYMS {
            let tc: Vec<char> = text.chars().collect();
            if chars[i..].starts_with(&tc) {
                // `-o` must not swallow the start of an identifier such as `-one`
                if *text == "-o" && chars.get(i + 2).is_some_and(|c| c.is_alphanumeric()) {
                    continue;
                }
                advance(&mut i, &mut line, &mut col, tc.len(), &chars);
                out.push(Lexed { tok: Tok::Sym(sym), line: l0, col: c0 });
                continue 'outer;
            }
        }
        return Err(err(l0, c0, format!("unexpected character {c:?}")));
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

fn err(line: usize, col: usize, msg: String) -> ParseError {
    ParseError { line, col, kind: ParseErrorKind::Syntax(msg) }
}

const KEYWORDS: &[&str] = &[
    "lambda", "let", "in", "match", "with", "if", "then", "else", "new", "meas", "inl", "inr", "ff", "tt", "gate",
    "qbit", "top", "bit",
];

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    gates: HashMap<String, Gate>,
    /// binder scope, innermost last
    scope: Vec<(String, Type)>,
    outer: &'a Context,
}

impl<'a> Parser<'a> {
    fn new(src: &str, outer: &'a Context) -> Result<Parser<'a>, ParseError> {
        let mut gates = HashMap::new();
        for name in Gate::builtin_names() {
            gates.insert(name.to_string(), Gate::builtin(name).expect("builtin"));
        }
        Ok(Parser { toks: lex(src)?, pos: 0, gates, scope: Vec::new(), outer })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(err(l, c, msg.into()))
    }

    fn fail_kind<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, kind })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => self.fail(format!("unexpected {t} after end of term")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.fail(format!("expected identifier, found {t}")),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> Result<Type, ParseError> {
        let a = self.sum_ty()?;
        if self.eat_sym("-o") {
            Ok(Type::lolli(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn sum_ty(&mut self) -> Result<Type, ParseError> {
        let a = self.tensor_ty()?;
        if self.eat_sym("+") {
            Ok(Type::sum(a, self.sum_ty()?))
        } else {
            Ok(a)
        }
    }

    fn tensor_ty(&mut self) -> Result<Type, ParseError> {
        let a = self.unary_ty()?;
        if self.eat_sym("*") {
            Ok(Type::tensor(a, self.tensor_ty()?))
        } else {
            Ok(a)
        }
    }

    fn unary_ty(&mut self) -> Result<Type, ParseError> {
        if self.eat_sym("!") {
            return Ok(Type::bang(self.unary_ty()?));
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        match self.peek().clone() {
            Tok::Ident(s) if s == "qbit" => {
                self.bump();
                Ok(Type::Qbit)
            }
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(Type::Top)
            }
            Tok::Ident(s) if s == "bit" => {
                self.bump();
                Ok(Type::bit())
            }
            t => self.fail(format!("expected a type, found {t}")),
        }
    }

    // ---- gate literals ----

    fn gate_decl(&mut self) -> Result<Gate, ParseError> {
        self.expect_kw("gate")?;
        let (l, c) = self.here();
        let name = self.ident()?;
        self.expect_sym("=")?;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        self.expect_sym("[")?;
        loop {
            self.expect_sym("[")?;
            let mut row = vec![self.cexpr()?];
            while self.eat_sym(",") {
                row.push(self.cexpr()?);
            }
            self.expect_sym("]")?;
            rows.push(row);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        self.eat_sym(";");
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(err(l, c, format!("gate {name}: matrix rows must all have length {n}")));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        let matrix = CMatrix::from_row_slice(n, n, &flat);
        Gate::new(&name, matrix).map_err(|m| ParseError { line: l, col: c, kind: ParseErrorKind::NonUnitary(m) })
    }

    fn cexpr(&mut self) -> Result<Complex64, ParseError> {
        let mut acc = self.cterm()?;
        loop {
            if self.eat_sym("+") {
                acc += self.cterm()?;
            } else if self.eat_sym("-") {
                acc -= self.cterm()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn cterm(&mut self) -> Result<Complex64, ParseError> {
        let mut acc = self.cunary()?;
        loop {
            if self.eat_sym("*") {
                acc *= self.cunary()?;
            } else if self.eat_sym("/") {
                acc /= self.cunary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn cunary(&mut self) -> Result<Complex64, ParseError> {
        if self.eat_sym("-") {
            return Ok(-self.cunary()?);
        }
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Complex64::new(n as f64, 0.0))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Complex64::new(x, 0.0))
            }
            Tok::Sym("(") => {
                self.bump();
                let v = self.cexpr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                Ok(Complex64::new(0.0, 1.0))
            }
            Tok::Ident(s) if s == "pi" => {
                self.bump();
                Ok(Complex64::new(std::f64::consts::PI, 0.0))
            }
            Tok::Ident(s) if ["sqrt", "exp", "cos", "sin"].contains(&s.as_str()) => {
                self.bump();
                self.expect_sym("(")?;
                let v = self.cexpr()?;
                self.expect_sym(")")?;
                Ok(match s.as_str() {
                    "sqrt" => v.sqrt(),
                    "exp" => v.exp(),
                    "cos" => v.cos(),
                    _ => v.sin(),
                })
            }
            t => self.fail(format!("expected a number, found {t}")),
        }
    }

    // ---- terms ----

    fn index(&mut self) -> Result<u32, ParseError> {
        if self.is_sym("^") && matches!(self.peek_at(1), Tok::Nat(_)) {
            self.bump();
            if let Tok::Nat(n) = self.bump() {
                return u32::try_from(n).or_else(|_| self.fail("index too large"));
            }
        }
        Ok(0)
    }

    fn annot(&mut self) -> Result<Option<Type>, ParseError> {
        if self.is_sym("^") && matches!(self.peek_at(1), Tok::Sym("{")) {
            self.bump();
            self.bump();
            let t = self.ty()?;
            self.expect_sym("}")?;
            return Ok(Some(t));
        }
        Ok(None)
    }

    fn binder(&mut self) -> Result<(String, Type), ParseError> {
        let x = self.ident()?;
        self.expect_sym(":")?;
        let t = self.ty()?;
        Ok((x, t))
    }

    fn with_bound<T>(&mut self, binds: &[(String, Type)], k: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        self.scope.extend(binds.iter().cloned());
        let out = k(self);
        self.scope.truncate(self.scope.len() - binds.len());
        out
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.is_sym("lambda") || self.is_kw("lambda") {
            self.bump();
            let n = match self.peek() {
                Tok::Nat(n) => {
                    let n = *n;
                    self.bump();
                    u32::try_from(n).or_else(|_| self.fail("index too large"))?
                }
                _ => self.index()?,
            };
            let (x, t) = self.binder()?;
            self.expect_sym(".")?;
            let body = self.with_bound(&[(x.clone(), t.clone())], |p| p.term())?;
            return Ok(Term::Lam(n, x, t, Box::new(body)));
        }
        if self.is_kw("let") {
            self.bump();
            if self.eat_sym("<") {
                let (x, a) = self.binder()?;
                self.expect_sym(",")?;
                let (y, b) = self.binder()?;
                self.expect_sym(">")?;
                let n = self.index()?;
                self.expect_sym("=")?;
                let scrut = self.term()?;
                self.expect_kw("in")?;
                let body = self.with_bound(&[(x.clone(), Type::bangs(n, a.clone())), (y.clone(), Type::bangs(n, b.clone()))], |p| p.term())?;
                return Ok(Term::LetPair(n, x, a, y, b, Box::new(scrut), Box::new(body)));
            }
            let (x, a) = self.binder()?;
            self.expect_sym("=")?;
            let bound = self.term()?;
            self.expect_kw("in")?;
            let body = self.with_bound(&[(x.clone(), a.clone())], |p| p.term())?;
            return Ok(Term::app(Term::Lam(0, x, a, Box::new(body)), bound));
        }
        if self.is_kw("match") {
            self.bump();
            let n = self.index()?;
            let scrut = self.term()?;
            self.expect_kw("with")?;
            self.expect_sym("(")?;
            let (x, a) = self.binder()?;
            self.expect_sym("->")?;
            let left = self.with_bound(&[(x.clone(), Type::bangs(n, a.clone()))], |p| p.term())?;
            self.expect_sym("|")?;
            let (y, b) = self.binder()?;
            self.expect_sym("->")?;
            let right = self.with_bound(&[(y.clone(), Type::bangs(n, b.clone()))], |p| p.term())?;
            self.expect_sym(")")?;
            return Ok(Term::Match(n, Box::new(scrut), x, a, Box::new(left), y, b, Box::new(right)));
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.term()?;
            self.expect_kw("then")?;
            let m = self.term()?;
            self.expect_kw("else")?;
            let k = self.term()?;
            return Ok(Term::if_(c, m, k));
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !["in", "with", "then", "else", "gate"].contains(&s.as_str()),
            Tok::Sym(s) => ["(", "<", "*"].contains(s),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.eat_sym("(") {
            let t = self.term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.eat_sym("*") {
            return Ok(Term::Star(self.index()?));
        }
        if self.eat_sym("<") {
            let a = self.term()?;
            self.expect_sym(",")?;
            let b = self.term()?;
            self.expect_sym(">")?;
            let n = self.index()?;
            return Ok(Term::pair(n, a, b));
        }
        let (l, c) = self.here();
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            t => return self.fail(format!("expected a term, found {t}")),
        };
        match name.as_str() {
            "ff" | "tt" => {
                self.bump();
                let n = self.index()?;
                Ok(if name == "ff" { Term::ff(n) } else { Term::tt(n) })
            }
            "inl" | "inr" => {
                self.bump();
                let n = self.index()?;
                self.expect_sym("[")?;
                let a = self.ty()?;
                self.expect_sym(",")?;
                let b = self.ty()?;
                self.expect_sym("]")?;
                let m = self.atom()?;
                Ok(if name == "inl" { Term::inl(n, a, b, m) } else { Term::inr(n, a, b, m) })
            }
            "new" | "meas" => {
                self.bump();
                let k = if name == "new" { Const::New } else { Const::Meas };
                let t = self.annot()?.unwrap_or_else(|| k.default_annotation());
                Ok(Term::Const(k, t))
            }
            _ if KEYWORDS.contains(&name.as_str()) => self.fail(format!("unexpected keyword `{name}`")),
            _ => {
                self.bump();
                let ann = self.annot()?;
                if let Some((_, t)) = self.scope.iter().rev().find(|(x, _)| *x == name) {
                    let t = ann.unwrap_or_else(|| t.clone());
                    return Ok(Term::Var(name, t));
                }
                if let Some(g) = self.gates.get(&name) {
                    let k = Const::Gate(g.clone());
                    let t = ann.unwrap_or_else(|| k.default_annotation());
                    return Ok(Term::Const(k, t));
                }
                if let Some(t) = ann.or_else(|| self.outer.get(&name).cloned()) {
                    return Ok(Term::Var(name, t));
                }
                let kind = if name.starts_with(|c: char| c.is_uppercase()) {
                    ParseErrorKind::UnknownGate(name)
                } else {
                    ParseErrorKind::UnboundVariable(name)
                };
                Err(ParseError { line: l, col: c, kind })
            }
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut gates = Vec::new();
        while self.is_kw("gate") {
            let (l, c) = self.here();
            let g = self.gate_decl()?;
            if Gate::builtin(&g.name).is_some() || gates.iter().any(|h: &Gate| h.name == g.name) {
                return Err(err(l, c, format!("gate {} is already defined", g.name)));
            }
            self.gates.insert(g.name.clone(), g.clone());
            gates.push(g);
        }
        if matches!(self.peek(), Tok::Eof) {
            return self.fail_kind(ParseErrorKind::Syntax("program has no term".into()));
        }
        let term = self.term()?;
        self.expect_eof()?;
        Ok(Program { gates, term })
    }
}

/// Parse a program file: optional gate declarations followed by one term.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let ctx = Context::new();
    Parser::new(src, &ctx)?.program()
}

/// Parse a closed term (gate declarations allowed in front).
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    Ok(parse_program(src)?.term)
}

/// Parse a term whose free variables default their annotations from `ctx`.
pub fn parse_term_in(src: &str, ctx: &Context) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, ctx)?;
    Ok(p.program()?.term)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let ctx = Context::new();
    let mut p = Parser::new(src, &ctx)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meas_new_ff() {
        let t = parse_term("meas (new ff)").unwrap();
        assert_eq!(t, Term::app(Term::meas(), Term::app(Term::new_(), Term::inl(0, Type::Top, Type::Top, Term::Star(0)))));
    }

    #[test]
    fn identity_lambda() {
        let t = parse_term("λ0 x:qbit. x").unwrap();
        assert_eq!(t, Term::lam(0, "x", Type::Qbit, Term::var("x", Type::Qbit)));
        let t2 = parse_term("lambda^0 x:qbit. x").unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn non_unitary_gate() {
        let e = parse_program("gate BAD = [[1,0],[0,2]]\nBAD").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::NonUnitary(_)), "{e}");
    }

    #[test]
    fn user_gate_expressions() {
        let p = parse_program("gate HH = [[1/sqrt(2), 1/sqrt(2)], [1/sqrt(2), -1/sqrt(2)]];\nmeas (HH (new ff))").unwrap();
        assert_eq!(p.gates.len(), 1);
        assert_eq!(p.gates[0].qubits(), 1);
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(parse_term("FOO (new ff)").unwrap_err().kind, ParseErrorKind::UnknownGate(_)));
        assert!(matches!(parse_term("meas q").unwrap_err().kind, ParseErrorKind::UnboundVariable(_)));
    }

    #[test]
    fn error_position() {
        let e = parse_term("meas\n  (new ff").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
    }

    #[test]
    fn types() {
        assert_eq!(parse_type("qbit * qbit * qbit").unwrap(), Type::qbits(3));
        assert_eq!(
            parse_type("!bit -o qbit -o top").unwrap(),
            Type::lolli(Type::bang(Type::bit()), Type::lolli(Type::Qbit, Type::Top))
        );
        assert_eq!(parse_type("⊤ ⊕ ⊤").unwrap(), Type::bit());
    }

    #[test]
    fn sugar() {
        let t = parse_term("if meas (new ff) then tt else ff").unwrap();
        assert!(matches!(t, Term::Match(0, ..)));
        let t = parse_term("let b:bit = tt in b").unwrap();
        assert!(matches!(t, Term::App(..)));
    }
}
