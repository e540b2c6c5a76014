//! Types and indexed terms of the quantum lambda calculus.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

mod parse;
mod print;
mod subst;

pub use parse::{parse_program, parse_term, parse_term_in, parse_type, ParseError, Program};
pub use print::{print_program, print_term, print_type};
pub use subst::{alpha_eq, fresh_name, retype, substitute, substitute_many, SubstError};

/// Dense complex matrix used for gate literals and linear maps.
pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Qbit,
    Top,
    Bang(Box<Type>),
    Lollipop(Box<Type>, Box<Type>),
    Tensor(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
}

impl Type {
    pub fn bang(t: Type) -> Type {
        Type::Bang(Box::new(t))
    }

    /// `!^n t`
    pub fn bangs(n: u32, mut t: Type) -> Type {
        for _ in 0..n {
            t = Type::bang(t);
        }
        t
    }

    pub fn lolli(a: Type, b: Type) -> Type {
        Type::Lollipop(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    /// `bit = top + top`
    pub fn bit() -> Type {
        Type::sum(Type::Top, Type::Top)
    }

    /// Right-nested `qbit * (qbit * ...)` with `k` factors; `k = 0` gives `top`.
    pub fn qbits(k: usize) -> Type {
        match k {
            0 => Type::Top,
            1 => Type::Qbit,
            _ => Type::tensor(Type::Qbit, Type::qbits(k - 1)),
        }
    }

    /// Split off the leading `!` prefix: `!^n core` with `core` not a `Bang`.
    pub fn strip_bangs(&self) -> (u32, &Type) {
        let mut n = 0;
        let mut t = self;
        while let Type::Bang(inner) = t {
            n += 1;
            t = inner;
        }
        (n, t)
    }

    /// Remove exactly `n` leading bangs if present.
    pub fn unbang(&self, n: u32) -> Option<&Type> {
        let mut t = self;
        for _ in 0..n {
            match t {
                Type::Bang(inner) => t = inner,
                _ => return None,
            }
        }
        Some(t)
    }

    pub fn is_bang(&self) -> bool {
        matches!(self, Type::Bang(_))
    }

    pub fn is_bit(&self) -> bool {
        *self == Type::bit()
    }

    /// True if a `-o` occurs anywhere in the type.
    pub fn has_arrow(&self) -> bool {
        match self {
            Type::Qbit | Type::Top => false,
            Type::Lollipop(..) => true,
            Type::Bang(a) => a.has_arrow(),
            Type::Tensor(a, b) | Type::Sum(a, b) => a.has_arrow() || b.has_arrow(),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

/// A unitary gate constant acting on `qubits()` qubits.
#[derive(Clone, Debug)]
pub struct Gate {
    pub name: String,
    pub matrix: Arc<CMatrix>,
}

impl PartialEq for Gate {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && (Arc::ptr_eq(&self.matrix, &other.matrix) || self.matrix == other.matrix)
    }
}

impl Gate {
    pub fn qubits(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    pub fn builtin(name: &str) -> Option<Gate> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = |n: usize, v: Vec<Complex64>| CMatrix::from_row_slice(n, n, &v);
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let matrix = match name {
            "H" => m(2, vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
            "X" => m(2, vec![z, o, o, z]),
            "Y" => m(2, vec![z, c(0.0, -1.0), c(0.0, 1.0), z]),
            "Z" => m(2, vec![o, z, z, c(-1.0, 0.0)]),
            "S" => m(2, vec![o, z, z, c(0.0, 1.0)]),
            "T" => m(2, vec![o, z, z, c(s, s)]),
            "CNOT" => m(
                4,
                vec![o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
            ),
            _ => return None,
        };
        Some(Gate { name: name.to_string(), matrix: Arc::new(matrix) })
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["H", "X", "Y", "Z", "S", "T", "CNOT"]
    }

    /// Build a user gate, checking shape and unitarity to `1e-9`.
    pub fn new(name: &str, matrix: CMatrix) -> Result<Gate, String> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n < 2 || !n.is_power_of_two() {
            return Err(format!("gate {name}: matrix must be 2^k x 2^k with k >= 1, got {}x{}", n, matrix.ncols()));
        }
        let err = unitarity_error(&matrix);
        if err > 1e-9 {
            return Err(format!("gate {name}: matrix is not unitary (max deviation {err:.3e})"));
        }
        Ok(Gate { name: name.to_string(), matrix: Arc::new(matrix) })
    }
}

/// `max |U^dagger U - I|` entrywise.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub enum Const {
    New,
    Meas,
    Gate(Gate),
}

impl Const {
    /// The type `A_c` of the constant; its occurrences may be annotated with any supertype of `!A_c`.
    pub fn base_type(&self) -> Type {
        match self {
            Const::New => Type::lolli(Type::bit(), Type::Qbit),
            Const::Meas => Type::lolli(Type::Qbit, Type::bang(Type::bit())),
            Const::Gate(g) => Type::lolli(Type::qbits(g.qubits()), Type::qbits(g.qubits())),
        }
    }

    /// Annotation used when the surface program gives none.
    pub fn default_annotation(&self) -> Type {
        match self {
            Const::Meas => Type::lolli(Type::Qbit, Type::bit()),
            other => other.base_type(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Const::New => "new",
            Const::Meas => "meas",
            Const::Gate(g) => &g.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String, Type),
    Const(Const, Type),
    Lam(u32, String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Star(u32),
    /// `let <x:A, y:B>^n = scrutinee in body`
    LetPair(u32, String, Type, String, Type, Box<Term>, Box<Term>),
    Pair(u32, Box<Term>, Box<Term>),
    Inl(u32, Type, Type, Box<Term>),
    Inr(u32, Type, Type, Box<Term>),
    /// `match^n scrutinee with (x:A -> left | y:B -> right)`
    Match(u32, Box<Term>, String, Type, Box<Term>, String, Type, Box<Term>),
}

impl Term {
    pub fn var(x: &str, t: Type) -> Term {
        Term::Var(x.to_string(), t)
    }

    pub fn lam(n: u32, x: &str, t: Type, body: Term) -> Term {
        Term::Lam(n, x.to_string(), t, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn pair(n: u32, a: Term, b: Term) -> Term {
        Term::Pair(n, Box::new(a), Box::new(b))
    }

    pub fn inl(n: u32, a: Type, b: Type, m: Term) -> Term {
        Term::Inl(n, a, b, Box::new(m))
    }

    pub fn inr(n: u32, a: Type, b: Type, m: Term) -> Term {
        Term::Inr(n, a, b, Box::new(m))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn let_pair(n: u32, x: &str, a: Type, y: &str, b: Type, scrut: Term, body: Term) -> Term {
        Term::LetPair(n, x.to_string(), a, y.to_string(), b, Box::new(scrut), Box::new(body))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn match_(n: u32, scrut: Term, x: &str, a: Type, m: Term, y: &str, b: Type, k: Term) -> Term {
        Term::Match(n, Box::new(scrut), x.to_string(), a, Box::new(m), y.to_string(), b, Box::new(k))
    }

    pub fn new_() -> Term {
        Term::Const(Const::New, Const::New.default_annotation())
    }

    pub fn meas() -> Term {
        Term::Const(Const::Meas, Const::Meas.default_annotation())
    }

    pub fn gate(name: &str) -> Term {
        let c = Const::Gate(Gate::builtin(name).expect("builtin gate"));
        let t = c.default_annotation();
        Term::Const(c, t)
    }

    /// `ff^n = inl^n[top, top] *^n`
    pub fn ff(n: u32) -> Term {
        Term::inl(n, Type::Top, Type::Top, Term::Star(n))
    }

    /// `tt^n = inr^n[top, top] *^n`
    pub fn tt(n: u32) -> Term {
        Term::inr(n, Type::Top, Type::Top, Term::Star(n))
    }

    /// `if l then m else k = match^0 l with (x:top -> k | y:top -> m)`: `tt` selects `m`, binders fresh.
    pub fn if_(l: Term, m: Term, k: Term) -> Term {
        let mut avoid = free_vars(&m);
        avoid.extend(free_vars(&k));
        let x = fresh_name("u", &avoid);
        let y = fresh_name("v", &avoid);
        Term::match_(0, l, &x, Type::Top, k, &y, Type::Top, m)
    }

    pub fn is_value(&self) -> bool {
        is_value(self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

pub fn is_value(m: &Term) -> bool {
    match m {
        Term::Var(..) | Term::Const(..) | Term::Star(_) | Term::Lam(..) => true,
        Term::Pair(_, a, b) => is_value(a) && is_value(b),
        Term::Inl(_, _, _, a) | Term::Inr(_, _, _, a) => is_value(a),
        Term::App(..) | Term::LetPair(..) | Term::Match(..) => false,
    }
}

/// The type a term synthesizes from its annotations alone (no context needed), if its
/// annotations are shape-consistent.
pub fn type_of(m: &Term) -> Option<Type> {
    Some(match m {
        Term::Var(_, t) | Term::Const(_, t) => t.clone(),
        Term::Star(n) => Type::bangs(*n, Type::Top),
        Term::Lam(n, _, a, body) => Type::bangs(*n, Type::lolli(a.clone(), type_of(body)?)),
        Term::App(f, _) => match type_of(f)? {
            Type::Lollipop(_, b) => *b,
            _ => return None,
        },
        Term::Pair(n, a, b) => {
            let ta = type_of(a)?;
            let tb = type_of(b)?;
            Type::bangs(*n, Type::tensor(ta.unbang(*n)?.clone(), tb.unbang(*n)?.clone()))
        }
        Term::Inl(n, a, b, _) | Term::Inr(n, a, b, _) => Type::bangs(*n, Type::sum(a.clone(), b.clone())),
        Term::LetPair(_, _, _, _, _, _, body) => type_of(body)?,
        Term::Match(_, _, _, _, l, _, _, _) => type_of(l)?,
    })
}

pub fn free_vars(m: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_fv(m, &mut Vec::new(), &mut out);
    out
}

fn collect_fv(m: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match m {
        Term::Var(x, _) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Const(..) | Term::Star(_) => {}
        Term::Lam(_, x, _, body) => {
            bound.push(x.clone());
            collect_fv(body, bound, out);
            bound.pop();
        }
        Term::App(a, b) | Term::Pair(_, a, b) => {
            collect_fv(a, bound, out);
            collect_fv(b, bound, out);
        }
        Term::Inl(_, _, _, a) | Term::Inr(_, _, _, a) => collect_fv(a, bound, out),
        Term::LetPair(_, x, _, y, _, scrut, body) => {
            collect_fv(scrut, bound, out);
            bound.push(x.clone());
            bound.push(y.clone());
            collect_fv(body, bound, out);
            bound.pop();
            bound.pop();
        }
        Term::Match(_, scrut, x, _, left, y, _, right) => {
            collect_fv(scrut, bound, out);
            bound.push(x.clone());
            collect_fv(left, bound, out);
            bound.pop();
            bound.push(y.clone());
            collect_fv(right, bound, out);
            bound.pop();
        }
    }
}

/// Every variable name occurring in the term, bound or free.
pub fn all_names(m: &Term) -> BTreeSet<String> {
    fn go(m: &Term, out: &mut BTreeSet<String>) {
        match m {
            Term::Var(x, _) => {
                out.insert(x.clone());
            }
            Term::Const(..) | Term::Star(_) => {}
            Term::Lam(_, x, _, b) => {
                out.insert(x.clone());
                go(b, out);
            }
            Term::App(a, b) | Term::Pair(_, a, b) => {
                go(a, out);
                go(b, out);
            }
            Term::Inl(_, _, _, a) | Term::Inr(_, _, _, a) => go(a, out),
            Term::LetPair(_, x, _, y, _, s, b) => {
                out.insert(x.clone());
                out.insert(y.clone());
                go(s, out);
                go(b, out);
            }
            Term::Match(_, s, x, _, l, y, _, r) => {
                out.insert(x.clone());
                out.insert(y.clone());
                go(s, out);
                go(l, out);
                go(r, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(m, &mut out);
    out
}

/// Ordered list of typed hypotheses with distinct variables.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Context {
    entries: Vec<(String, Type)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_entries(entries: Vec<(String, Type)>) -> Result<Context, String> {
        let mut ctx = Context::new();
        for (x, t) in entries {
            ctx.push(x, t)?;
        }
        Ok(ctx)
    }

    pub fn qubits<S: AsRef<str>>(names: &[S]) -> Context {
        Context::from_entries(names.iter().map(|n| (n.as_ref().to_string(), Type::Qbit)).collect())
            .expect("distinct register names")
    }

    pub fn push(&mut self, x: String, t: Type) -> Result<(), String> {
        if self.contains(&x) {
            return Err(format!("duplicate variable {x} in context"));
        }
        self.entries.push((x, t));
        Ok(())
    }

    /// Extend with `x : t`, dropping any earlier (shadowed) hypothesis for `x`.
    pub fn extended(&self, x: &str, t: Type) -> Context {
        let mut entries: Vec<_> = self.entries.iter().filter(|(y, _)| y != x).cloned().collect();
        entries.push((x.to_string(), t));
        Context { entries }
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.get(x).is_some()
    }

    pub fn entries(&self) -> &[(String, Type)] {
        &self.entries
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keep the hypotheses satisfying `keep`, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&str, &Type) -> bool) -> Context {
        Context { entries: self.entries.iter().filter(|(x, t)| keep(x, t)).cloned().collect() }
    }

    pub fn restrict(&self, vars: &BTreeSet<String>) -> Context {
        self.filter(|x, _| vars.contains(x))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(x, t)| format!("{x}:{}", print_type(t))).collect();
        f.write_str(&parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_examples() {
        assert_eq!(free_vars(&Term::var("x", Type::Qbit)), ["x".to_string()].into());
        assert!(free_vars(&Term::lam(0, "x", Type::Qbit, Term::var("x", Type::Qbit))).is_empty());
        let app = Term::app(
            Term::var("x", Type::lolli(Type::Qbit, Type::Qbit)),
            Term::var("y", Type::Qbit),
        );
        assert_eq!(free_vars(&app), ["x".to_string(), "y".to_string()].into());
    }

    #[test]
    fn values() {
        assert!(Term::pair(0, Term::var("x", Type::Qbit), Term::var("y", Type::Qbit)).is_value());
        assert!(!Term::app(Term::new_(), Term::ff(0)).is_value());
        assert!(Term::inl(1, Type::Top, Type::Top, Term::Star(1)).is_value());
    }

    #[test]
    fn builtin_gates_are_unitary() {
        for name in Gate::builtin_names() {
            let g = Gate::builtin(name).unwrap();
            assert!(unitarity_error(&g.matrix) < 1e-12, "{name}");
        }
        assert_eq!(Gate::builtin("CNOT").unwrap().qubits(), 2);
    }

    #[test]
    fn strip() {
        let t = Type::bangs(3, Type::bit());
        assert_eq!(t.strip_bangs(), (3, &Type::bit()));
        assert_eq!(t.unbang(2), Some(&Type::bang(Type::bit())));
        assert_eq!(Type::Qbit.unbang(1), None);
    }
}
