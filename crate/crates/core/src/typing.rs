//! Subtyping and syntax-directed typechecking of indexed terms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::opsem::QuantumClosure;
use crate::syntax::{free_vars, print_term, print_type, Context, Term, Type};

/// `a <: b`
pub fn subtype(a: &Type, b: &Type) -> bool {
    let (n, ca) = a.strip_bangs();
    let (m, cb) = b.strip_bangs();
    if n == 0 && m != 0 {
        return false;
    }
    match (ca, cb) {
        (Type::Qbit, Type::Qbit) | (Type::Top, Type::Top) => true,
        (Type::Lollipop(a2, b1), Type::Lollipop(a1, b2)) => subtype(a1, a2) && subtype(b1, b2),
        (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) | (Type::Sum(a1, a2), Type::Sum(b1, b2)) => {
            subtype(a1, b1) && subtype(a2, b2)
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Ax1,
    Ax2,
    LolliI1,
    LolliI2,
    LolliE,
    Top,
    TensorI,
    TensorE,
    SumI1,
    SumI2,
    SumE,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Ax1 => "ax1",
            Rule::Ax2 => "ax2",
            Rule::LolliI1 => "-o.I1",
            Rule::LolliI2 => "-o.I2",
            Rule::LolliE => "-o.E",
            Rule::Top => "top",
            Rule::TensorI => "*.I",
            Rule::TensorE => "*.E",
            Rule::SumI1 => "+.I1",
            Rule::SumI2 => "+.I2",
            Rule::SumE => "+.E",
        };
        f.write_str(s)
    }
}

/// How a binary rule divided its conclusion context.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    /// `!`-typed hypotheses given to both premises.
    pub shared: Vec<String>,
    /// Non-`!` hypotheses of the first group (function, left component, let body, match branches).
    pub left: Vec<String>,
    /// Non-`!` hypotheses of the second group (argument, right component, scrutinees).
    pub right: Vec<String>,
}

/// A typing derivation. Premise order per rule:
/// `-o.E`: [function, argument]; `*.I`: [left, right]; `*.E`: [body, scrutinee];
/// `+.E`: [left branch, right branch, scrutinee]; one premise for the unary rules.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub rule: Rule,
    pub context: Context,
    pub term: Term,
    pub ty: Type,
    pub premises: Vec<Derivation>,
    pub split: Option<Split>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|d| d.size()).sum::<usize>()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("non-duplicable variable {var} used more than once in {term}")]
    LinearReuse { var: String, term: String },
    #[error("variable {var} has type {found}, not a subtype of its annotation {expected}")]
    VarSubtype { var: String, found: String, expected: String },
    #[error("constant {name} cannot be annotated {annotation} (needs a supertype of {base})")]
    ConstSubtype { name: String, annotation: String, base: String },
    #[error("lambda^{index} captures non-duplicable variable {var}")]
    Capture { index: u32, var: String },
    #[error("expected {expected}, found {found} in {term}")]
    Mismatch { expected: String, found: String, term: String },
    #[error("{0}")]
    Malformed(String),
}

fn mismatch(expected: &Type, found: &Type, term: &Term) -> TypeError {
    TypeError::Mismatch { expected: print_type(expected), found: print_type(found), term: print_term(term) }
}

/// Typecheck `ctx |> m : A`, reading `A` off the annotations.
pub fn typecheck(ctx: &Context, m: &Term) -> Result<Derivation, TypeError> {
    let mut seen = BTreeSet::new();
    for (x, _) in ctx.entries() {
        if !seen.insert(x.clone()) {
            return Err(TypeError::Malformed(format!("duplicate variable {x} in context")));
        }
    }
    check(ctx, m)
}

/// Typecheck the closure's term against its register (all `qbit`) and compare with `expected`.
pub fn check_closure(p: &QuantumClosure, expected: &Type) -> Result<Derivation, TypeError> {
    for x in free_vars(&p.term) {
        if !p.register.contains(&x) {
            return Err(TypeError::Unbound(x));
        }
    }
    let ctx = Context::qubits(&p.register);
    let d = typecheck(&ctx, &p.term)?;
    if &d.ty != expected {
        return Err(mismatch(expected, &d.ty, &p.term));
    }
    Ok(d)
}

fn leaf(rule: Rule, ctx: &Context, m: &Term, ty: Type) -> Derivation {
    Derivation { rule, context: ctx.clone(), term: m.clone(), ty, premises: vec![], split: None }
}

/// Route hypotheses for a binary rule: `!`-typed are shared, others go to the group using them.
fn split(ctx: &Context, left_uses: &BTreeSet<String>, right_uses: &BTreeSet<String>, m: &Term) -> Result<Split, TypeError> {
    let mut s = Split { shared: vec![], left: vec![], right: vec![] };
    for (x, t) in ctx.entries() {
        if t.is_bang() {
            s.shared.push(x.clone());
        } else if left_uses.contains(x) && right_uses.contains(x) {
            return Err(TypeError::LinearReuse { var: x.clone(), term: print_term(m) });
        } else if right_uses.contains(x) {
            s.right.push(x.clone());
        } else {
            s.left.push(x.clone());
        }
    }
    Ok(s)
}

fn part(ctx: &Context, s: &Split, left: bool) -> Context {
    let group = if left { &s.left } else { &s.right };
    ctx.filter(|x, _| s.shared.iter().any(|y| y == x) || group.iter().any(|y| y == x))
}

fn without(mut set: BTreeSet<String>, xs: &[&str]) -> BTreeSet<String> {
    for x in xs {
        set.remove(*x);
    }
    set
}

fn check(ctx: &Context, m: &Term) -> Result<Derivation, TypeError> {
    match m {
        Term::Var(x, b) => {
            let a = ctx.get(x).ok_or_else(|| TypeError::Unbound(x.clone()))?;
            if !subtype(a, b) {
                return Err(TypeError::VarSubtype { var: x.clone(), found: print_type(a), expected: print_type(b) });
            }
            Ok(leaf(Rule::Ax1, ctx, m, b.clone()))
        }
        Term::Const(c, b) => {
            let base = Type::bang(c.base_type());
            if !subtype(&base, b) {
                return Err(TypeError::ConstSubtype {
                    name: c.name().to_string(),
                    annotation: print_type(b),
                    base: print_type(&base),
                });
            }
            Ok(leaf(Rule::Ax2, ctx, m, b.clone()))
        }
        Term::Star(n) => Ok(leaf(Rule::Top, ctx, m, Type::bangs(*n, Type::Top))),
        Term::Lam(n, x, a, body) => {
            if *n > 0 {
                for y in free_vars(m) {
                    match ctx.get(&y) {
                        Some(t) if t.is_bang() => {}
                        Some(_) => return Err(TypeError::Capture { index: *n, var: y }),
                        None => return Err(TypeError::Unbound(y)),
                    }
                }
            }
            let inner = ctx.extended(x, a.clone());
            let d = check(&inner, body)?;
            let ty = Type::bangs(*n, Type::lolli(a.clone(), d.ty.clone()));
            let rule = if *n == 0 { Rule::LolliI1 } else { Rule::LolliI2 };
            Ok(Derivation { rule, context: ctx.clone(), term: m.clone(), ty, premises: vec![d], split: None })
        }
        Term::App(f, a) => {
            let s = split(ctx, &free_vars(f), &free_vars(a), m)?;
            let df = check(&part(ctx, &s, true), f)?;
            let da = check(&part(ctx, &s, false), a)?;
            let ty = match &df.ty {
                Type::Lollipop(arg, res) => {
                    if **arg != da.ty {
                        return Err(mismatch(arg, &da.ty, a));
                    }
                    (**res).clone()
                }
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a function type A -o B".into(),
                        found: print_type(other),
                        term: print_term(f),
                    })
                }
            };
            Ok(Derivation { rule: Rule::LolliE, context: ctx.clone(), term: m.clone(), ty, premises: vec![df, da], split: Some(s) })
        }
        Term::Pair(n, a, b) => {
            let s = split(ctx, &free_vars(a), &free_vars(b), m)?;
            let da = check(&part(ctx, &s, true), a)?;
            let db = check(&part(ctx, &s, false), b)?;
            let ca = da.ty.unbang(*n).ok_or_else(|| mismatch(&Type::bangs(*n, Type::Top), &da.ty, a))?.clone();
            let cb = db.ty.unbang(*n).ok_or_else(|| mismatch(&Type::bangs(*n, Type::Top), &db.ty, b))?.clone();
            let ty = Type::bangs(*n, Type::tensor(ca, cb));
            Ok(Derivation { rule: Rule::TensorI, context: ctx.clone(), term: m.clone(), ty, premises: vec![da, db], split: Some(s) })
        }
        Term::LetPair(n, x, a, y, b, scrut, body) => {
            if x == y {
                return Err(TypeError::Malformed(format!("let binds {x} twice")));
            }
            let body_uses = without(free_vars(body), &[x, y]);
            let s = split(ctx, &body_uses, &free_vars(scrut), m)?;
            let ds = check(&part(ctx, &s, false), scrut)?;
            let want = Type::bangs(*n, Type::tensor(a.clone(), b.clone()));
            if ds.ty != want {
                return Err(mismatch(&want, &ds.ty, scrut));
            }
            let inner = part(ctx, &s, true).extended(x, Type::bangs(*n, a.clone())).extended(y, Type::bangs(*n, b.clone()));
            let db = check(&inner, body)?;
            let ty = db.ty.clone();
            Ok(Derivation { rule: Rule::TensorE, context: ctx.clone(), term: m.clone(), ty, premises: vec![db, ds], split: Some(s) })
        }
        Term::Inl(n, a, b, v) | Term::Inr(n, a, b, v) => {
            let left = matches!(m, Term::Inl(..));
            let d = check(ctx, v)?;
            let want = Type::bangs(*n, if left { a.clone() } else { b.clone() });
            if d.ty != want {
                return Err(mismatch(&want, &d.ty, v));
            }
            let ty = Type::bangs(*n, Type::sum(a.clone(), b.clone()));
            let rule = if left { Rule::SumI1 } else { Rule::SumI2 };
            Ok(Derivation { rule, context: ctx.clone(), term: m.clone(), ty, premises: vec![d], split: None })
        }
        Term::Match(n, scrut, x, a, l, y, b, r) => {
            let mut branch_uses = without(free_vars(l), &[x]);
            branch_uses.extend(without(free_vars(r), &[y]));
            let s = split(ctx, &branch_uses, &free_vars(scrut), m)?;
            let ds = check(&part(ctx, &s, false), scrut)?;
            let want = Type::bangs(*n, Type::sum(a.clone(), b.clone()));
            if ds.ty != want {
                return Err(mismatch(&want, &ds.ty, scrut));
            }
            let base = part(ctx, &s, true);
            let dl = check(&base.extended(x, Type::bangs(*n, a.clone())), l)?;
            let dr = check(&base.extended(y, Type::bangs(*n, b.clone())), r)?;
            if dl.ty != dr.ty {
                return Err(mismatch(&dl.ty, &dr.ty, r));
            }
            let ty = dl.ty.clone();
            Ok(Derivation { rule: Rule::SumE, context: ctx.clone(), term: m.clone(), ty, premises: vec![dl, dr, ds], split: Some(s) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_term_in, parse_type};

    fn t(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn subtype_examples() {
        assert!(subtype(&t("!qbit"), &t("qbit")));
        assert!(!subtype(&t("qbit"), &t("!qbit")));
        assert!(subtype(&t("top -o !top"), &t("!top -o !!top")));
        assert!(subtype(&t("!(qbit -o !bit)"), &t("qbit -o bit")));
        assert!(!subtype(&t("qbit -o bit"), &t("qbit -o !bit")));
    }

    #[test]
    fn meas_annotation() {
        let d = typecheck(&Context::new(), &parse_term("meas").unwrap()).unwrap();
        assert_eq!(d.rule, Rule::Ax2);
        assert_eq!(d.ty, t("qbit -o bit"));
    }

    #[test]
    fn duplicate_linear_use() {
        let e = typecheck(&Context::new(), &parse_term("λ0 x:qbit. <x, x>").unwrap()).unwrap_err();
        assert!(matches!(e, TypeError::LinearReuse { .. }), "{e}");
    }

    #[test]
    fn shared_bang_variable() {
        let ctx = Context::from_entries(vec![("x".into(), t("!bit"))]).unwrap();
        let m = parse_term_in("<x^{bit}, x^{bit}>", &ctx).unwrap();
        let d = typecheck(&ctx, &m).unwrap();
        assert_eq!(d.ty, t("bit * bit"));
        assert_eq!(d.split.unwrap().shared, vec!["x".to_string()]);
    }

    #[test]
    fn closures() {
        let p = QuantumClosure::basis(&[false], &["x"], parse_term_in("x", &Context::qubits(&["x"])).unwrap());
        check_closure(&p, &Type::Qbit).unwrap();
        let p = QuantumClosure::basis(&[false], &["x"], parse_term_in("meas x", &Context::qubits(&["x"])).unwrap());
        check_closure(&p, &Type::bit()).unwrap();
        let p = QuantumClosure::basis(&[false], &["x"], Term::var("y", Type::Qbit));
        assert_eq!(check_closure(&p, &Type::Qbit).unwrap_err(), TypeError::Unbound("y".into()));
    }

    #[test]
    fn bang_lambda_capture() {
        let ctx = Context::qubits(&["q"]);
        let m = parse_term_in("λ1 u:top. meas q", &ctx).unwrap();
        assert!(matches!(typecheck(&ctx, &m).unwrap_err(), TypeError::Capture { .. }));
    }

    #[test]
    fn branches_may_discard() {
        let ctx = Context::qubits(&["q"]);
        let m = parse_term_in("if tt then meas q else ff", &ctx).unwrap();
        typecheck(&ctx, &m).unwrap();
    }
}
