//! Seeded generators of well-typed programs for property tests: closed programs of type `bit`
//! and redex/contractum pairs over a small qubit context.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{parse_term, parse_term_in, substitute, substitute_many, Const, Context, Term};

const GATES: [&str; 6] = ["H", "X", "Y", "Z", "S", "T"];

/// A variable that must be used exactly once by the generated text.
#[derive(Clone, Debug)]
struct Hole {
    name: String,
    qbit: bool,
}

/// Source-level generator; every generated subterm is closed apart from its hole.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    next: usize,
}

/// Upper bound on the number of qubits a run of `m` allocates: an argument bound to a
/// variable counts once per occurrence of that variable.
pub fn max_allocations(m: &Term) -> usize {
    match m {
        Term::Const(Const::New, _) => 1,
        Term::Var(..) | Term::Const(..) | Term::Star(_) => 0,
        Term::App(f, a) => match &**f {
            Term::Lam(_, x, _, body) => max_allocations(body) + max_allocations(a) * occurrences(body, x).max(1),
            _ => max_allocations(f) + max_allocations(a),
        },
        Term::Lam(_, _, _, b) | Term::Inl(_, _, _, b) | Term::Inr(_, _, _, b) => max_allocations(b),
        Term::Pair(_, a, b) | Term::LetPair(_, _, _, _, _, a, b) => max_allocations(a) + max_allocations(b),
        Term::Match(_, s, _, _, l, _, _, r) => max_allocations(s) + max_allocations(l).max(max_allocations(r)),
    }
}

fn occurrences(m: &Term, x: &str) -> usize {
    match m {
        Term::Var(y, _) => usize::from(y == x),
        Term::Const(..) | Term::Star(_) => 0,
        Term::Lam(_, y, _, b) => if y == x { 0 } else { occurrences(b, x) },
        Term::App(a, b) | Term::Pair(_, a, b) => occurrences(a, x) + occurrences(b, x),
        Term::Inl(_, _, _, b) | Term::Inr(_, _, _, b) => occurrences(b, x),
        Term::LetPair(_, y, _, z, _, s, b) => occurrences(s, x) + if y == x || z == x { 0 } else { occurrences(b, x) },
        Term::Match(_, s, y, _, l, z, _, r) => {
            occurrences(s, x) + if y == x { 0 } else { occurrences(l, x) } + if z == x { 0 } else { occurrences(r, x) }
        }
    }
}

/// A redex in the context `ctx` and its one-step contractum.
#[derive(Clone, Debug)]
pub struct BetaPair {
    pub ctx: Context,
    pub redex: Term,
    pub contractum: Term,
}

impl ProgramGen {
    pub fn new(seed: u64) -> ProgramGen {
        ProgramGen { rng: ChaCha8Rng::seed_from_u64(seed), next: 0 }
    }

    fn name(&mut self, stem: &str) -> String {
        self.next += 1;
        format!("{stem}{}", self.next)
    }

    fn gate(&mut self) -> &'static str {
        GATES.choose(&mut self.rng).copied().unwrap_or("H")
    }

    /// Source of a `bit`-typed term of depth at most `d`.
    fn bit(&mut self, d: usize, hole: Option<Hole>) -> String {
        if d == 0 {
            return match hole {
                Some(h) if h.qbit => format!("meas {}", h.name),
                Some(h) => h.name,
                None if self.rng.gen() => "tt".into(),
                None => "ff".into(),
            };
        }
        match self.rng.gen_range(0..7) {
            0 if hole.is_none() => if self.rng.gen() { "tt".into() } else { "ff".into() },
            0 | 1 => format!("meas ({})", self.qbit(d - 1, hole)),
            2 => format!("if {} then {} else {}", self.bit(d - 1, hole), self.bit(d - 1, None), self.bit(d - 1, None)),
            3 => {
                let x = self.name("x");
                format!("(lambda {x}:bit. if {x} then {} else {}) ({})", self.bit(d - 1, None), self.bit(d - 1, None), self.bit(d - 1, hole))
            }
            4 => {
                let (a, b) = (self.name("a"), self.name("b"));
                let (l, r) = (self.qbit(d - 1, hole), self.qbit(d - 1, None));
                let bh = Some(Hole { name: b.clone(), qbit: true });
                let (t, e) = (self.qbit(d - 1, bh.clone()), self.qbit(d - 1, bh));
                format!("let <{a}:qbit, {b}:qbit> = CNOT <{l}, {r}> in if meas {a} then meas ({t}) else meas ({e})")
            }
            5 => {
                let (f, y) = (self.name("f"), self.name("y"));
                let (t, e) = (self.bit(d - 1, None), self.bit(d - 1, None));
                let arg = self.bit(d - 1, hole);
                format!("let {f}:!(bit -o bit) = (lambda^1 {y}:bit. if {y} then {t} else {e}) in {f}^{{bit -o bit}} ({f}^{{bit -o bit}} ({arg}))")
            }
            _ => {
                let (p, r) = (self.name("p"), self.name("r"));
                let c = self.bit(d - 1, hole);
                let (q, b) = (self.qbit(d - 1, None), self.bit(d - 1, None));
                let left = self.qbit(d - 1, Some(Hole { name: p.clone(), qbit: true }));
                let (t, e) = (self.bit(d - 1, None), self.bit(d - 1, None));
                format!(
                    "match (if {c} then inl[qbit, bit] ({q}) else inr[qbit, bit] ({b})) with ({p}:qbit -> meas ({left}) | {r}:bit -> if {r} then {t} else {e})"
                )
            }
        }
    }

    /// Source of a `qbit`-typed term of depth at most `d`.
    fn qbit(&mut self, d: usize, hole: Option<Hole>) -> String {
        if d == 0 {
            return match hole {
                Some(h) if h.qbit => h.name,
                Some(h) => format!("new {}", h.name),
                None if self.rng.gen() => "new tt".into(),
                None => "new ff".into(),
            };
        }
        match self.rng.gen_range(0..5) {
            0 => format!("new ({})", self.bit(d - 1, hole)),
            1 => {
                let g = self.gate();
                format!("{g} ({})", self.qbit(d - 1, hole))
            }
            2 => {
                let q = self.name("q");
                let g = self.gate();
                format!("(lambda {q}:qbit. {g} {q}) ({})", self.qbit(d - 1, hole))
            }
            3 => {
                let (a, b, z) = (self.name("a"), self.name("b"), self.name("z"));
                let (l, r) = (self.qbit(d - 1, hole), self.qbit(d - 1, None));
                format!("let <{a}:qbit, {b}:qbit> = CNOT <{l}, {r}> in let {z}:bit = meas {b} in {a}")
            }
            _ => {
                let g = self.gate();
                format!("{g} ({})", self.qbit(d - 1, hole))
            }
        }
    }

    /// A closed program of type `bit`.
    pub fn program(&mut self, depth: usize) -> Term {
        let src = self.bit(depth, None);
        parse_term(&src).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{src}"))
    }

    /// A closed program of type `bit` allocating at most `max_qubits` qubits on any run.
    pub fn bounded_program(&mut self, depth: usize, max_qubits: usize) -> Term {
        loop {
            let m = self.program(depth);
            if max_allocations(&m) <= max_qubits {
                return m;
            }
        }
    }

    /// A redex of type `bit` over `y0:qbit, y1:qbit` together with its contractum.
    pub fn beta_pair(&mut self, depth: usize) -> BetaPair {
        let ctx = Context::qubits(&["y0", "y1"]);
        let parse = |s: &str| parse_term_in(s, &ctx).unwrap_or_else(|e| panic!("generated redex does not parse: {e}\n{s}"));
        let hole = |name: &str, qbit: bool| Some(Hole { name: name.into(), qbit });
        let (redex, contractum) = match self.rng.gen_range(0..5) {
            0 => {
                let x = self.name("x");
                let body = self.bit(depth, hole(&x, true));
                let redex = parse(&format!("(lambda {x}:qbit. {body}) y0"));
                let body = parse(&format!("(lambda {x}:qbit. {body})"));
                (redex, contract_lambda(&body, "y0"))
            }
            1 => {
                let x = self.name("x");
                let body = self.bit(depth, hole(&x, false));
                let v = if self.rng.gen() { "tt" } else { "ff" };
                let redex = parse(&format!("(lambda {x}:bit. {body}) {v}"));
                let lam = parse(&format!("(lambda {x}:bit. {body})"));
                let Term::Lam(_, x, _, m) = lam else { unreachable!("parsed a lambda") };
                let contractum = substitute(&m, &x, &parse(v)).expect("substitution of a closed value");
                (redex, contractum)
            }
            2 => {
                let (a, b) = (self.name("a"), self.name("b"));
                let l = self.qbit(depth.saturating_sub(1), hole(&a, true));
                let r = self.qbit(depth.saturating_sub(1), hole(&b, true));
                let body = format!("if meas ({l}) then meas ({r}) else ff");
                let redex = parse(&format!("let <{a}:qbit, {b}:qbit> = <y0, y1> in {body}"));
                let Term::LetPair(_, a, _, b, _, _, m) = &redex else { unreachable!("parsed a let") };
                let contractum = substitute_many(m, &[(a.clone(), parse("y0")), (b.clone(), parse("y1"))])
                    .expect("substitution of variables");
                (redex, contractum)
            }
            k => {
                let (p, r) = (self.name("p"), self.name("r"));
                let left = self.bit(depth, hole(&p, true));
                let right = self.bit(depth, hole(&r, false));
                let scrut = if k == 3 { "inl[qbit, bit] y0".to_string() } else { format!("inr[qbit, bit] {}", if self.rng.gen() { "tt" } else { "ff" }) };
                let redex = parse(&format!("match {scrut} with ({p}:qbit -> {left} | {r}:bit -> {right})"));
                let Term::Match(_, s, x, _, m, y, _, n) = &redex else { unreachable!("parsed a match") };
                let contractum = match &**s {
                    Term::Inl(_, _, _, v) => substitute(m, x, v),
                    Term::Inr(_, _, _, v) => substitute(n, y, v),
                    _ => unreachable!("injection scrutinee"),
                }
                .expect("substitution of a value");
                (redex, contractum)
            }
        };
        BetaPair { ctx, redex, contractum }
    }
}

fn contract_lambda(lam: &Term, arg: &str) -> Term {
    let Term::Lam(_, x, a, m) = lam else { unreachable!("lambda expected") };
    substitute(m, x, &Term::var(arg, a.clone())).expect("substitution of a variable")
}
