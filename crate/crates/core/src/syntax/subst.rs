//! Capture-avoiding, annotation-correct substitution and alpha-equivalence.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{all_names, free_vars, is_value, type_of, Term, Type};

#[derive(Debug, Error, PartialEq)]
pub enum SubstError {
    #[error("substituted term is not a value: {0}")]
    NotAValue(String),
    #[error("cannot re-annotate {term} at type {target}")]
    Retype { term: String, target: String },
}

/// First name of the form `base0`, `base1`, ... not in `avoid`. Trailing digits of `base` are dropped.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (0..)
        .map(|k| format!("{stem}{k}"))
        .find(|name| !avoid.contains(name))
        .expect("unbounded counter")
}

/// Re-annotate `m` so that it synthesizes exactly `target`.
///
/// Annotations are pushed along the result spine: variable and constant occurrences take the
/// new annotation, `*`, lambdas, pairs and injections change their index and component
/// annotations, and eliminators re-annotate their bodies. The caller is responsible for
/// `type_of(m) <: target`.
pub fn retype(m: &Term, target: &Type) -> Result<Term, SubstError> {
    if type_of(m).as_ref() == Some(target) {
        return Ok(m.clone());
    }
    let fail = || SubstError::Retype { term: super::print_term(m), target: super::print_type(target) };
    let (k, core) = target.strip_bangs();
    Ok(match m {
        Term::Var(x, _) => Term::Var(x.clone(), target.clone()),
        Term::Const(c, _) => Term::Const(c.clone(), target.clone()),
        Term::Star(_) => match core {
            Type::Top => Term::Star(k),
            _ => return Err(fail()),
        },
        Term::Lam(_, x, _, body) => match core {
            Type::Lollipop(a, b) => Term::Lam(k, x.clone(), (**a).clone(), Box::new(retype(body, b)?)),
            _ => return Err(fail()),
        },
        Term::App(f, a) => match type_of(f) {
            Some(Type::Lollipop(arg, _)) => {
                let ft = Type::Lollipop(arg, Box::new(target.clone()));
                Term::App(Box::new(retype(f, &ft)?), a.clone())
            }
            _ => return Err(fail()),
        },
        Term::Pair(_, a, b) => match core {
            Type::Tensor(ta, tb) => Term::Pair(
                k,
                Box::new(retype(a, &Type::bangs(k, (**ta).clone()))?),
                Box::new(retype(b, &Type::bangs(k, (**tb).clone()))?),
            ),
            _ => return Err(fail()),
        },
        Term::Inl(_, _, _, a) => match core {
            Type::Sum(ta, tb) => Term::Inl(
                k,
                (**ta).clone(),
                (**tb).clone(),
                Box::new(retype(a, &Type::bangs(k, (**ta).clone()))?),
            ),
            _ => return Err(fail()),
        },
        Term::Inr(_, _, _, a) => match core {
            Type::Sum(ta, tb) => Term::Inr(
                k,
                (**ta).clone(),
                (**tb).clone(),
                Box::new(retype(a, &Type::bangs(k, (**tb).clone()))?),
            ),
            _ => return Err(fail()),
        },
        Term::LetPair(n, x, a, y, b, s, body) => {
            Term::LetPair(*n, x.clone(), a.clone(), y.clone(), b.clone(), s.clone(), Box::new(retype(body, target)?))
        }
        Term::Match(n, s, x, a, l, y, b, r) => Term::Match(
            *n,
            s.clone(),
            x.clone(),
            a.clone(),
            Box::new(retype(l, target)?),
            y.clone(),
            b.clone(),
            Box::new(retype(r, target)?),
        ),
    })
}

/// `m[v/x]`: each free occurrence `x^{A'}` becomes `v` re-annotated at `A'`.
pub fn substitute(m: &Term, x: &str, v: &Term) -> Result<Term, SubstError> {
    substitute_many(m, &[(x.to_string(), v.clone())])
}

/// Simultaneous substitution of values for distinct variables.
pub fn substitute_many(m: &Term, subs: &[(String, Term)]) -> Result<Term, SubstError> {
    for (_, v) in subs {
        if !is_value(v) {
            return Err(SubstError::NotAValue(super::print_term(v)));
        }
    }
    let fvs: BTreeSet<String> = subs.iter().flat_map(|(_, v)| free_vars(v)).collect();
    subst(m, subs, &fvs)
}

fn subst(m: &Term, subs: &[(String, Term)], fvs: &BTreeSet<String>) -> Result<Term, SubstError> {
    if subs.is_empty() {
        return Ok(m.clone());
    }
    Ok(match m {
        Term::Var(y, ann) => match subs.iter().find(|(x, _)| x == y) {
            Some((_, v)) => retype(v, ann)?,
            None => m.clone(),
        },
        Term::Const(..) | Term::Star(_) => m.clone(),
        Term::App(a, b) => Term::App(Box::new(subst(a, subs, fvs)?), Box::new(subst(b, subs, fvs)?)),
        Term::Pair(n, a, b) => Term::Pair(*n, Box::new(subst(a, subs, fvs)?), Box::new(subst(b, subs, fvs)?)),
        Term::Inl(n, ta, tb, a) => Term::Inl(*n, ta.clone(), tb.clone(), Box::new(subst(a, subs, fvs)?)),
        Term::Inr(n, ta, tb, a) => Term::Inr(*n, ta.clone(), tb.clone(), Box::new(subst(a, subs, fvs)?)),
        Term::Lam(n, y, t, body) => {
            let (names, body) = under_binders(&[y.as_str()], body, subs, fvs)?;
            Term::Lam(*n, names[0].clone(), t.clone(), Box::new(body))
        }
        Term::LetPair(n, x, ta, y, tb, s, body) => {
            let s = subst(s, subs, fvs)?;
            let (names, body) = under_binders(&[x.as_str(), y.as_str()], body, subs, fvs)?;
            Term::LetPair(*n, names[0].clone(), ta.clone(), names[1].clone(), tb.clone(), Box::new(s), Box::new(body))
        }
        Term::Match(n, s, x, ta, l, y, tb, r) => {
            let s = subst(s, subs, fvs)?;
            let (xs, l) = under_binders(&[x.as_str()], l, subs, fvs)?;
            let (ys, r) = under_binders(&[y.as_str()], r, subs, fvs)?;
            Term::Match(
                *n,
                Box::new(s),
                xs[0].clone(),
                ta.clone(),
                Box::new(l),
                ys[0].clone(),
                tb.clone(),
                Box::new(r),
            )
        }
    })
}

/// Push a substitution under binders, renaming any binder that would capture a free variable
/// of a substituted value.
fn under_binders(
    binders: &[&str],
    body: &Term,
    subs: &[(String, Term)],
    fvs: &BTreeSet<String>,
) -> Result<(Vec<String>, Term), SubstError> {
    let remaining: Vec<(String, Term)> =
        subs.iter().filter(|(x, _)| !binders.contains(&x.as_str())).cloned().collect();
    if remaining.is_empty() {
        return Ok((binders.iter().map(|b| b.to_string()).collect(), body.clone()));
    }
    let mut body = body.clone();
    let mut names = Vec::new();
    let mut avoid: BTreeSet<String> = all_names(&body);
    avoid.extend(fvs.iter().cloned());
    avoid.extend(remaining.iter().map(|(x, _)| x.clone()));
    avoid.extend(binders.iter().map(|b| b.to_string()));
    for b in binders {
        if fvs.contains(*b) {
            let fresh = fresh_name(b, &avoid);
            avoid.insert(fresh.clone());
            body = rename_free(&body, b, &fresh);
            names.push(fresh);
        } else {
            names.push(b.to_string());
        }
    }
    let inner_fvs: BTreeSet<String> = remaining.iter().flat_map(|(_, v)| free_vars(v)).collect();
    Ok((names, subst(&body, &remaining, &inner_fvs)?))
}

/// Rename free occurrences of `from` to `to`; `to` must not occur in `m`.
fn rename_free(m: &Term, from: &str, to: &str) -> Term {
    let go = |t: &Term| Box::new(rename_free(t, from, to));
    match m {
        Term::Var(y, ann) if y == from => Term::Var(to.to_string(), ann.clone()),
        Term::Var(..) | Term::Const(..) | Term::Star(_) => m.clone(),
        Term::App(a, b) => Term::App(go(a), go(b)),
        Term::Pair(n, a, b) => Term::Pair(*n, go(a), go(b)),
        Term::Inl(n, ta, tb, a) => Term::Inl(*n, ta.clone(), tb.clone(), go(a)),
        Term::Inr(n, ta, tb, a) => Term::Inr(*n, ta.clone(), tb.clone(), go(a)),
        Term::Lam(n, y, t, body) => {
            let body = if y == from { body.clone() } else { go(body) };
            Term::Lam(*n, y.clone(), t.clone(), body)
        }
        Term::LetPair(n, x, ta, y, tb, s, body) => {
            let body = if x == from || y == from { body.clone() } else { go(body) };
            Term::LetPair(*n, x.clone(), ta.clone(), y.clone(), tb.clone(), go(s), body)
        }
        Term::Match(n, s, x, ta, l, y, tb, r) => {
            let l = if x == from { l.clone() } else { go(l) };
            let r = if y == from { r.clone() } else { go(r) };
            Term::Match(*n, go(s), x.clone(), ta.clone(), l, y.clone(), tb.clone(), r)
        }
    }
}

/// Equality up to consistent renaming of bound variables; annotations and indices must match.
pub fn alpha_eq(m: &Term, n: &Term) -> bool {
    aeq(m, n, &mut Vec::new())
}

fn aeq(m: &Term, n: &Term, env: &mut Vec<(String, String)>) -> bool {
    match (m, n) {
        (Term::Var(x, a), Term::Var(y, b)) => {
            if a != b {
                return false;
            }
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ry = env.iter().rposition(|(_, r)| r == y);
            match (lx, ry) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Const(c, a), Term::Const(d, b)) => c == d && a == b,
        (Term::Star(i), Term::Star(j)) => i == j,
        (Term::App(a1, b1), Term::App(a2, b2)) => aeq(a1, a2, env) && aeq(b1, b2, env),
        (Term::Pair(i, a1, b1), Term::Pair(j, a2, b2)) => i == j && aeq(a1, a2, env) && aeq(b1, b2, env),
        (Term::Inl(i, s1, t1, a1), Term::Inl(j, s2, t2, a2))
        | (Term::Inr(i, s1, t1, a1), Term::Inr(j, s2, t2, a2)) => {
            i == j && s1 == s2 && t1 == t2 && aeq(a1, a2, env)
        }
        (Term::Lam(i, x, s, b1), Term::Lam(j, y, t, b2)) => {
            i == j && s == t && bind(env, &[(x, y)], |env| aeq(b1, b2, env))
        }
        (Term::LetPair(i, x1, s1, y1, t1, sc1, b1), Term::LetPair(j, x2, s2, y2, t2, sc2, b2)) => {
            i == j
                && s1 == s2
                && t1 == t2
                && aeq(sc1, sc2, env)
                && bind(env, &[(x1, x2), (y1, y2)], |env| aeq(b1, b2, env))
        }
        (Term::Match(i, s1, x1, a1, l1, y1, b1, r1), Term::Match(j, s2, x2, a2, l2, y2, b2, r2)) => {
            i == j
                && a1 == a2
                && b1 == b2
                && aeq(s1, s2, env)
                && bind(env, &[(x1, x2)], |env| aeq(l1, l2, env))
                && bind(env, &[(y1, y2)], |env| aeq(r1, r2, env))
        }
        _ => false,
    }
}

fn bind(env: &mut Vec<(String, String)>, pairs: &[(&String, &String)], k: impl FnOnce(&mut Vec<(String, String)>) -> bool) -> bool {
    for (l, r) in pairs {
        env.push(((*l).clone(), (*r).clone()));
    }
    let out = k(env);
    for _ in pairs {
        env.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Type {
        Type::Qbit
    }

    #[test]
    fn variable_reannotation() {
        // (y^{A'-o B} x^{A'})[z^A / x] = y^{A'-o B} z^{A'}
        let a = Type::bang(Type::bit());
        let a2 = Type::bit();
        let m = Term::app(Term::var("y", Type::lolli(a2.clone(), q())), Term::var("x", a2.clone()));
        let out = substitute(&m, "x", &Term::var("z", a)).unwrap();
        assert_eq!(out, Term::app(Term::var("y", Type::lolli(a2.clone(), q())), Term::var("z", a2)));
    }

    #[test]
    fn unrelated_and_bound() {
        let v = Term::ff(0);
        let m = Term::var("x", q());
        assert_eq!(substitute(&m, "y", &v).unwrap(), m);
        let l = Term::lam(0, "x", q(), Term::var("x", q()));
        assert_eq!(substitute(&l, "x", &v).unwrap(), l);
    }

    #[test]
    fn capture_is_avoided() {
        // (lambda y. <x, y>)[y/x] renames the binder
        let m = Term::lam(0, "y", q(), Term::pair(0, Term::var("x", q()), Term::var("y", q())));
        let out = substitute(&m, "x", &Term::var("y", q())).unwrap();
        match &out {
            Term::Lam(_, b, _, body) => {
                assert_ne!(b, "y");
                assert_eq!(**body, Term::pair(0, Term::var("y", q()), Term::var(b, q())));
            }
            _ => panic!("{out:?}"),
        }
    }

    #[test]
    fn non_value_rejected() {
        let m = Term::var("x", q());
        assert!(matches!(substitute(&m, "x", &Term::app(Term::new_(), Term::ff(0))), Err(SubstError::NotAValue(_))));
    }

    #[test]
    fn structured_value_reannotation() {
        // <ff^1, tt^1>^1 used at bit * bit
        let v = Term::pair(1, Term::ff(1), Term::tt(1));
        let target = Type::tensor(Type::bit(), Type::bit());
        let out = retype(&v, &target).unwrap();
        assert_eq!(out, Term::pair(0, Term::ff(0), Term::tt(0)));
        assert_eq!(type_of(&out), Some(target));
    }

    #[test]
    fn alpha() {
        let a = Term::lam(0, "x", q(), Term::var("x", q()));
        let b = Term::lam(0, "y", q(), Term::var("y", q()));
        let c = Term::lam(1, "y", q(), Term::var("y", q()));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
        assert!(!alpha_eq(&Term::Star(0), &Term::Star(1)));
        // free vs bound
        let d = Term::lam(0, "y", q(), Term::var("x", q()));
        assert!(!alpha_eq(&a, &d));
    }

    #[test]
    fn fresh_names() {
        let avoid: BTreeSet<String> = ["y0".to_string(), "y1".to_string()].into();
        assert_eq!(fresh_name("y", &avoid), "y2");
        assert_eq!(fresh_name("y7", &BTreeSet::new()), "y0");
    }
}
