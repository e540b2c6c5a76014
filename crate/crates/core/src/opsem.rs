//! Probabilistic call-by-value reduction of quantum closures.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qstate::{StateError, StateVector};
use crate::syntax::{alpha_eq, all_names, fresh_name, print_term, substitute, substitute_many, Const, SubstError, Term, Type};
use crate::typing::{check_closure, typecheck, TypeError};

/// Default cap on the number of small steps taken while enumerating or sampling.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Leaves whose states differ by less than this (max entrywise) are merged.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("stuck term: {0}")]
    Stuck(String),
    #[error("malformed closure: {0}")]
    Malformed(String),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("step budget of {0} exhausted")]
    Budget(usize),
}

/// `[|psi>, register, term]`; register entry `i` names qubit `i` of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumClosure {
    pub state: StateVector,
    pub register: Vec<String>,
    pub term: Term,
}

impl QuantumClosure {
    pub fn new(state: StateVector, register: Vec<String>, term: Term) -> Result<QuantumClosure, EvalError> {
        if state.qubits() != register.len() {
            return Err(EvalError::Malformed(format!(
                "register has {} names for {} qubits",
                register.len(),
                state.qubits()
            )));
        }
        let distinct: BTreeSet<&String> = register.iter().collect();
        if distinct.len() != register.len() {
            return Err(EvalError::Malformed("register names are not distinct".into()));
        }
        Ok(QuantumClosure { state, register, term })
    }

    /// A program with no qubits allocated yet.
    pub fn closed(term: Term) -> QuantumClosure {
        QuantumClosure { state: StateVector::scalar(), register: vec![], term }
    }

    /// Computational basis state with the given register names.
    pub fn basis<S: AsRef<str>>(bits: &[bool], names: &[S], term: Term) -> QuantumClosure {
        assert_eq!(bits.len(), names.len());
        QuantumClosure {
            state: StateVector::basis(bits),
            register: names.iter().map(|s| s.as_ref().to_string()).collect(),
            term,
        }
    }

    pub fn position(&self, x: &str) -> Option<usize> {
        self.register.iter().position(|y| y == x)
    }

    pub fn is_value(&self) -> bool {
        self.term.is_value()
    }

    /// Same register names, alpha-equivalent terms, states within `tol`.
    pub fn equivalent(&self, other: &QuantumClosure, tol: f64) -> bool {
        self.register == other.register
            && alpha_eq(&self.term, &other.term)
            && self.state.distance(&other.state).is_some_and(|d| d <= tol)
    }
}

impl fmt::Display for QuantumClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} qubit(s), |{}|, {}]", self.state.qubits(), self.register.join(" "), print_term(&self.term))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RedexRule {
    Beta,
    LetPair,
    Case1,
    Case2,
    Unitary,
    Meas0,
    Meas1,
    New0,
    New1,
}

impl fmt::Display for RedexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RedexRule::Beta => "(-o)",
            RedexRule::LetPair => "(*)",
            RedexRule::Case1 => "(+1)",
            RedexRule::Case2 => "(+2)",
            RedexRule::Unitary => "(U)",
            RedexRule::Meas0 => "(meas0)",
            RedexRule::Meas1 => "(meas1)",
            RedexRule::New0 => "(new0)",
            RedexRule::New1 => "(new1)",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub closure: QuantumClosure,
    pub prob: f64,
    pub rule: RedexRule,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Value,
    Reductions(Vec<Branch>),
}

struct Redex {
    state: StateVector,
    register: Vec<String>,
    term: Term,
    prob: f64,
    rule: RedexRule,
}

/// All one-step successors of `p`, or `Step::Value`.
pub fn step(p: &QuantumClosure) -> Result<Step, EvalError> {
    let mut avoid: BTreeSet<String> = all_names(&p.term);
    avoid.extend(p.register.iter().cloned());
    match reduce(&p.state, &p.register, &p.term, &avoid)? {
        None => Ok(Step::Value),
        Some(rs) => Ok(Step::Reductions(
            rs.into_iter()
                .map(|r| Branch {
                    closure: QuantumClosure { state: r.state, register: r.register, term: r.term },
                    prob: r.prob,
                    rule: r.rule,
                })
                .collect(),
        )),
    }
}

fn wrap(rs: Vec<Redex>, f: impl Fn(Term) -> Term) -> Vec<Redex> {
    rs.into_iter().map(|r| Redex { term: f(r.term), ..r }).collect()
}

fn reduce(state: &StateVector, reg: &[String], m: &Term, avoid: &BTreeSet<String>) -> Result<Option<Vec<Redex>>, EvalError> {
    if m.is_value() {
        return Ok(None);
    }
    let det = |term: Term, rule: RedexRule| {
        Ok(Some(vec![Redex { state: state.clone(), register: reg.to_vec(), term, prob: 1.0, rule }]))
    };
    match m {
        Term::App(f, a) => {
            if let Some(rs) = reduce(state, reg, f, avoid)? {
                return Ok(Some(wrap(rs, |t| Term::App(Box::new(t), a.clone()))));
            }
            if let Some(rs) = reduce(state, reg, a, avoid)? {
                return Ok(Some(wrap(rs, |t| Term::App(f.clone(), Box::new(t)))));
            }
            match &**f {
                Term::Lam(0, x, _, body) => det(substitute(body, x, a)?, RedexRule::Beta),
                Term::Const(Const::Gate(g), _) => {
                    let names = tuple_vars(a, g.qubits()).ok_or_else(|| stuck(m))?;
                    let positions = names
                        .iter()
                        .map(|x| reg.iter().position(|y| y == x).ok_or_else(|| stuck(m)))
                        .collect::<Result<Vec<_>, _>>()?;
                    let next = state.apply_unitary(&g.matrix, &positions)?;
                    Ok(Some(vec![Redex { state: next, register: reg.to_vec(), term: (**a).clone(), prob: 1.0, rule: RedexRule::Unitary }]))
                }
                Term::Const(Const::Meas, ann) => {
                    let x = match &**a {
                        Term::Var(x, _) => x,
                        _ => return Err(stuck(m)),
                    };
                    let i = reg.iter().position(|y| y == x).ok_or_else(|| stuck(m))?;
                    let n = match ann {
                        Type::Lollipop(_, res) => res.strip_bangs().0,
                        _ => return Err(stuck(m)),
                    };
                    let [zero, one] = state.measure(i)?;
                    let mut out = Vec::new();
                    if let Some((p, s)) = zero {
                        out.push(Redex { state: s, register: reg.to_vec(), term: Term::ff(n), prob: p, rule: RedexRule::Meas0 });
                    }
                    if let Some((p, s)) = one {
                        out.push(Redex { state: s, register: reg.to_vec(), term: Term::tt(n), prob: p, rule: RedexRule::Meas1 });
                    }
                    Ok(Some(out))
                }
                Term::Const(Const::New, _) => {
                    let b = match &**a {
                        Term::Inl(_, _, _, s) if matches!(**s, Term::Star(_)) => false,
                        Term::Inr(_, _, _, s) if matches!(**s, Term::Star(_)) => true,
                        _ => return Err(stuck(m)),
                    };
                    let y = fresh_name("y", avoid);
                    let mut register = reg.to_vec();
                    register.push(y.clone());
                    let rule = if b { RedexRule::New1 } else { RedexRule::New0 };
                    Ok(Some(vec![Redex { state: state.append_qubit(b), register, term: Term::Var(y, Type::Qbit), prob: 1.0, rule }]))
                }
                _ => Err(stuck(m)),
            }
        }
        Term::Pair(n, a, b) => {
            if let Some(rs) = reduce(state, reg, a, avoid)? {
                return Ok(Some(wrap(rs, |t| Term::Pair(*n, Box::new(t), b.clone()))));
            }
            match reduce(state, reg, b, avoid)? {
                Some(rs) => Ok(Some(wrap(rs, |t| Term::Pair(*n, a.clone(), Box::new(t))))),
                None => Err(stuck(m)),
            }
        }
        Term::Inl(n, ta, tb, a) => match reduce(state, reg, a, avoid)? {
            Some(rs) => Ok(Some(wrap(rs, |t| Term::Inl(*n, ta.clone(), tb.clone(), Box::new(t))))),
            None => Err(stuck(m)),
        },
        Term::Inr(n, ta, tb, a) => match reduce(state, reg, a, avoid)? {
            Some(rs) => Ok(Some(wrap(rs, |t| Term::Inr(*n, ta.clone(), tb.clone(), Box::new(t))))),
            None => Err(stuck(m)),
        },
        Term::LetPair(n, x, ta, y, tb, s, body) => {
            if let Some(rs) = reduce(state, reg, s, avoid)? {
                return Ok(Some(wrap(rs, |t| {
                    Term::LetPair(*n, x.clone(), ta.clone(), y.clone(), tb.clone(), Box::new(t), body.clone())
                })));
            }
            match &**s {
                Term::Pair(_, v, w) => {
                    det(substitute_many(body, &[(x.clone(), (**v).clone()), (y.clone(), (**w).clone())])?, RedexRule::LetPair)
                }
                _ => Err(stuck(m)),
            }
        }
        Term::Match(n, s, x, ta, l, y, tb, r) => {
            if let Some(rs) = reduce(state, reg, s, avoid)? {
                return Ok(Some(wrap(rs, |t| {
                    Term::Match(*n, Box::new(t), x.clone(), ta.clone(), l.clone(), y.clone(), tb.clone(), r.clone())
                })));
            }
            match &**s {
                Term::Inl(_, _, _, v) => det(substitute(l, x, v)?, RedexRule::Case1),
                Term::Inr(_, _, _, v) => det(substitute(r, y, v)?, RedexRule::Case2),
                _ => Err(stuck(m)),
            }
        }
        Term::Var(..) | Term::Const(..) | Term::Star(_) | Term::Lam(..) => Ok(None),
    }
}

fn stuck(m: &Term) -> EvalError {
    EvalError::Stuck(print_term(m))
}

/// `<x1, <x2, ... xk>^0>^0` as a list of variable names.
fn tuple_vars(v: &Term, k: usize) -> Option<Vec<String>> {
    match (v, k) {
        (Term::Var(x, _), 1) => Some(vec![x.clone()]),
        (Term::Pair(0, a, b), k) if k >= 2 => {
            let mut out = tuple_vars(a, 1)?;
            out.extend(tuple_vars(b, k - 1)?);
            Some(out)
        }
        _ => None,
    }
}

/// Finite distribution over closures.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Distribution {
    pub entries: Vec<(QuantumClosure, f64)>,
}

impl Distribution {
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn scaled(mut self, by: f64) -> Distribution {
        if by != 1.0 {
            for (_, p) in &mut self.entries {
                *p *= by;
            }
        }
        self
    }

    /// Append `other`, merging equivalent closures into existing entries.
    fn absorb(&mut self, other: Distribution) {
        for (c, p) in other.entries {
            match self.entries.iter_mut().find(|(d, _)| d.equivalent(&c, MERGE_TOL)) {
                Some((_, q)) => *q += p,
                None => self.entries.push((c, p)),
            }
        }
    }
}

/// How branch enumeration is scheduled. The result does not depend on the choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Threads(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub distribution: Distribution,
    /// Number of small steps taken over the whole reduction tree.
    pub steps: usize,
}

/// Exhaustive enumeration of the reduction tree; leaves are value closures.
pub fn big_step(p: &QuantumClosure, max_steps: usize) -> Result<Distribution, EvalError> {
    Ok(enumerate(p, max_steps, Parallelism::Sequential)?.distribution)
}

pub fn enumerate(p: &QuantumClosure, max_steps: usize, par: Parallelism) -> Result<Enumeration, EvalError> {
    let budget = AtomicUsize::new(0);
    let distribution = match par {
        Parallelism::Sequential => explore(p.clone(), max_steps, &budget, false)?,
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| EvalError::Malformed(format!("thread pool: {e}")))?;
            pool.install(|| explore(p.clone(), max_steps, &budget, true))?
        }
    };
    Ok(Enumeration { distribution, steps: budget.load(Ordering::Relaxed) })
}

fn explore(mut p: QuantumClosure, max: usize, budget: &AtomicUsize, parallel: bool) -> Result<Distribution, EvalError> {
    let mut factor = 1.0;
    loop {
        let branches = match step(&p)? {
            Step::Value => return Ok(Distribution { entries: vec![(p, 1.0)] }.scaled(factor)),
            Step::Reductions(b) => b,
        };
        if budget.fetch_add(1, Ordering::Relaxed) >= max {
            return Err(EvalError::Budget(max));
        }
        let mut branches = branches.into_iter();
        match (branches.next(), branches.next()) {
            (Some(b), None) => {
                factor *= b.prob;
                p = b.closure;
            }
            (Some(b0), Some(b1)) => {
                let (p0, p1) = (b0.prob, b1.prob);
                let (d0, d1) = if parallel {
                    rayon::join(
                        || explore(b0.closure, max, budget, true),
                        || explore(b1.closure, max, budget, true),
                    )
                } else {
                    (explore(b0.closure, max, budget, false), explore(b1.closure, max, budget, false))
                };
                let mut d = d0?.scaled(p0);
                d.absorb(d1?.scaled(p1));
                return Ok(d.scaled(factor));
            }
            (None, _) => return Err(EvalError::Stuck(print_term(&p.term))),
        }
    }
}

/// Visit every closure of the reduction tree depth-first; `f` receives the successors of each
/// non-value closure and `None` at leaves.
pub fn visit(
    p: &QuantumClosure,
    max_steps: usize,
    f: &mut dyn FnMut(&QuantumClosure, Option<&[Branch]>),
) -> Result<usize, EvalError> {
    let mut stack = vec![p.clone()];
    let mut steps = 0;
    while let Some(q) = stack.pop() {
        match step(&q)? {
            Step::Value => f(&q, None),
            Step::Reductions(bs) => {
                steps += 1;
                if steps > max_steps {
                    return Err(EvalError::Budget(max_steps));
                }
                f(&q, Some(&bs));
                for b in bs.into_iter().rev() {
                    stack.push(b.closure);
                }
            }
        }
    }
    Ok(steps)
}

/// `(P ⇓ ff, P ⇓ tt)` for a closure of type `bit`.
pub fn observe(p: &QuantumClosure, max_steps: usize) -> Result<(f64, f64), EvalError> {
    check_closure(p, &Type::bit())?;
    let d = big_step(p, max_steps)?;
    let (mut ff, mut tt) = (0.0, 0.0);
    for (c, w) in &d.entries {
        if alpha_eq(&c.term, &Term::ff(0)) {
            ff += w;
        } else if alpha_eq(&c.term, &Term::tt(0)) {
            tt += w;
        } else {
            return Err(EvalError::Stuck(format!("bit-typed program produced {}", print_term(&c.term))));
        }
    }
    Ok((ff, tt))
}

/// One trace line per step: rule, probability, register, term.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceLine {
    pub rule: RedexRule,
    pub prob: f64,
    pub register: Vec<String>,
    pub term: String,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<8} {:.12} |{}| {}", self.rule.to_string(), self.prob, self.register.join(" "), self.term)
    }
}

/// Follow one trajectory, choosing branches with a seeded PRNG.
pub fn sample(p: &QuantumClosure, seed: u64, max_steps: usize) -> Result<QuantumClosure, EvalError> {
    Ok(sample_traced(p, seed, max_steps)?.0)
}

pub fn sample_traced(p: &QuantumClosure, seed: u64, max_steps: usize) -> Result<(QuantumClosure, Vec<TraceLine>), EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = p.clone();
    let mut trace = Vec::new();
    loop {
        let branches = match step(&cur)? {
            Step::Value => return Ok((cur, trace)),
            Step::Reductions(b) => b,
        };
        if trace.len() >= max_steps {
            return Err(EvalError::Budget(max_steps));
        }
        let total: f64 = branches.iter().map(|b| b.prob).sum();
        let mut r = rng.gen::<f64>() * total;
        let last = branches.len() - 1;
        let mut chosen = last;
        for (i, b) in branches.iter().enumerate() {
            if r < b.prob {
                chosen = i;
                break;
            }
            r -= b.prob;
        }
        let b = branches.into_iter().nth(chosen).expect("branch index");
        trace.push(TraceLine {
            rule: b.rule,
            prob: b.prob,
            register: b.closure.register.clone(),
            term: print_term(&b.closure.term),
        });
        cur = b.closure;
    }
}

/// Type of a closure, synthesized against its register.
pub fn closure_type(p: &QuantumClosure) -> Result<Type, EvalError> {
    let ctx = crate::syntax::Context::qubits(&p.register);
    Ok(typecheck(&ctx, &p.term)?.ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_term_in, Context};

    fn closed(src: &str) -> QuantumClosure {
        QuantumClosure::closed(parse_term(src).unwrap())
    }

    #[test]
    fn new_allocates() {
        match step(&closed("new ff")).unwrap() {
            Step::Reductions(bs) => {
                assert_eq!(bs.len(), 1);
                assert_eq!(bs[0].closure.register, vec!["y0".to_string()]);
                assert_eq!(bs[0].closure.term, Term::var("y0", Type::Qbit));
                assert_eq!(bs[0].closure.state, StateVector::basis(&[false]));
                assert_eq!(bs[0].rule, RedexRule::New0);
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn measure_plus() {
        let ctx = Context::qubits(&["x"]);
        let plus = StateVector::basis(&[false]).apply_unitary(&crate::syntax::Gate::builtin("H").unwrap().matrix, &[0]).unwrap();
        let p = QuantumClosure::new(plus, vec!["x".into()], parse_term_in("meas x", &ctx).unwrap()).unwrap();
        match step(&p).unwrap() {
            Step::Reductions(bs) => {
                assert_eq!(bs.len(), 2);
                assert!((bs[0].prob - 0.5).abs() < 1e-12);
                assert_eq!(bs[0].closure.term, Term::ff(0));
                assert_eq!(bs[1].closure.term, Term::tt(0));
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn beta() {
        let p = closed("(λ0 x:bit. x) tt");
        match step(&p).unwrap() {
            Step::Reductions(bs) => assert_eq!(bs[0].closure.term, Term::tt(0)),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn coin_and_double_hadamard() {
        assert_eq!(big_step(&closed("tt"), 10).unwrap().entries, vec![(closed("tt"), 1.0)]);
        let (ff, tt) = observe(&closed("meas (H (new ff))"), 100).unwrap();
        assert!((ff - 0.5).abs() < 1e-12 && (tt - 0.5).abs() < 1e-12);
        let (ff, tt) = observe(&closed("meas (H (H (new ff)))"), 100).unwrap();
        assert!((ff - 1.0).abs() < 1e-12 && tt == 0.0);
        let (ff, tt) = observe(&closed("if meas (new ff) then tt else ff"), 100).unwrap();
        assert_eq!((ff, tt), (1.0, 0.0));
    }

    #[test]
    fn budget_is_reported() {
        assert!(matches!(big_step(&closed("meas (H (new ff))"), 2), Err(EvalError::Budget(2))));
    }

    #[test]
    fn sampling_deterministic_program() {
        let p = closed("meas (X (new ff))");
        for seed in 0..5 {
            assert_eq!(sample(&p, seed, 100).unwrap().term, Term::tt(0));
        }
    }
}
