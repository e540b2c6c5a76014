//! Interpretation of typing derivations as morphisms `[[A]] -> [[Delta]]` of finite-dimensional
//! von Neumann algebras (Heisenberg picture). Function spaces are kept as opaque `Hom` objects;
//! a law-driven normalizer plus a string-diagram cut eliminator extract concrete matrices for
//! programs whose type and context are first order.

mod diagram;
mod normalize;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::opsem::QuantumClosure;
use crate::syntax::{free_vars, Const, Context, Term, Type};
use crate::typing::{check_closure, Derivation, Rule, TypeError};
use crate::vna::{self, VnaError, VnaMorphism, VnaObject};

pub use normalize::{normalize, NORMALIZE_BUDGET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenotError {
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    #[error("algebra error: {0}")]
    Vna(String),
    #[error("malformed morphism: {0}")]
    Malformed(String),
    #[error("normalization budget of {0} steps exceeded")]
    Budget(usize),
    #[error("no concrete form: {0}")]
    Residual(String),
}

impl From<VnaError> for DenotError {
    fn from(e: VnaError) -> Self {
        DenotError::Vna(e.to_string())
    }
}

// ---------------------------------------------------------------------------------------------
// Objects

/// Semantic objects in canonical form: tensors are flattened with adjacent concrete factors
/// multiplied out and `[1]` factors dropped, `L` is pushed through tensors and sums, `LL = L`,
/// and anything without a `Hom` inside is `Concrete`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SemObject {
    Concrete(VnaObject),
    Hom(Box<SemObject>, Box<SemObject>),
    LFormal(Box<SemObject>),
    TensorF(Box<SemObject>, Box<SemObject>),
    SumF(Box<SemObject>, Box<SemObject>),
}

impl SemObject {
    pub fn unit() -> SemObject {
        SemObject::Concrete(VnaObject::scalar())
    }

    pub fn concrete(&self) -> Option<&VnaObject> {
        match self {
            SemObject::Concrete(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_concrete(&self) -> bool {
        matches!(self, SemObject::Concrete(_))
    }

    pub fn hom(a: SemObject, b: SemObject) -> SemObject {
        SemObject::Hom(Box::new(a), Box::new(b))
    }

    /// Non-tensor factors; `[1]` contributes none.
    pub fn atoms(&self) -> Vec<SemObject> {
        match self {
            SemObject::TensorF(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
            SemObject::Concrete(v) if *v == VnaObject::scalar() => vec![],
            other => vec![other.clone()],
        }
    }

    /// Canonical tensor of a factor list.
    pub fn from_atoms(atoms: impl IntoIterator<Item = SemObject>) -> SemObject {
        let mut flat: Vec<SemObject> = Vec::new();
        for a in atoms {
            for x in a.atoms() {
                match (flat.last_mut(), x) {
                    (Some(SemObject::Concrete(prev)), SemObject::Concrete(v)) => *prev = vna::tensor(prev, &v),
                    (_, x) => flat.push(x),
                }
            }
        }
        flat.retain(|x| x.concrete() != Some(&VnaObject::scalar()));
        let mut it = flat.into_iter().rev();
        match it.next() {
            None => SemObject::unit(),
            Some(last) => it.fold(last, |acc, x| SemObject::TensorF(Box::new(x), Box::new(acc))),
        }
    }

    pub fn tensor(a: &SemObject, b: &SemObject) -> SemObject {
        SemObject::from_atoms([a.clone(), b.clone()])
    }

    pub fn tensor_all<'a>(xs: impl IntoIterator<Item = &'a SemObject>) -> SemObject {
        SemObject::from_atoms(xs.into_iter().cloned())
    }

    pub fn sum(a: &SemObject, b: &SemObject) -> SemObject {
        match (a, b) {
            (SemObject::Concrete(x), SemObject::Concrete(y)) => SemObject::Concrete(vna::direct_sum(x, y)),
            _ => SemObject::SumF(Box::new(a.clone()), Box::new(b.clone())),
        }
    }

    /// `L` on canonical objects.
    pub fn bang(&self) -> SemObject {
        match self {
            SemObject::Concrete(v) => SemObject::Concrete(vna::l_obj(v)),
            SemObject::Hom(..) => SemObject::LFormal(Box::new(self.clone())),
            SemObject::LFormal(_) => self.clone(),
            SemObject::TensorF(a, b) => SemObject::tensor(&a.bang(), &b.bang()),
            SemObject::SumF(a, b) => SemObject::sum(&a.bang(), &b.bang()),
        }
    }

    /// Whether `L` fixes this object, so `eta` is invertible here.
    pub fn is_l_form(&self) -> bool {
        self.bang() == *self
    }
}

impl fmt::Display for SemObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemObject::Concrete(v) => write!(f, "{v}"),
            SemObject::Hom(a, b) => write!(f, "({a} -o {b})"),
            SemObject::LFormal(a) => write!(f, "L{a}"),
            SemObject::TensorF(a, b) => write!(f, "{a} (x) {b}"),
            SemObject::SumF(a, b) => write!(f, "({a} (+) {b})"),
        }
    }
}

pub fn interp_type(t: &Type) -> SemObject {
    match t {
        Type::Qbit => SemObject::Concrete(VnaObject::matrix(2)),
        Type::Top => SemObject::unit(),
        Type::Bang(a) => interp_type(a).bang(),
        Type::Lollipop(a, b) => SemObject::hom(interp_type(a), interp_type(b)),
        Type::Tensor(a, b) => SemObject::tensor(&interp_type(a), &interp_type(b)),
        Type::Sum(a, b) => SemObject::sum(&interp_type(a), &interp_type(b)),
    }
}

// ---------------------------------------------------------------------------------------------
// Morphism IR

/// Symbolic morphisms. `Comp(g, f)` is `g o f`.
#[derive(Clone, Debug, PartialEq)]
pub enum MorIR {
    Id(SemObject),
    Conc(Arc<VnaMorphism>),
    Comp(Box<MorIR>, Box<MorIR>),
    Tens(Box<MorIR>, Box<MorIR>),
    Oplus(Box<MorIR>, Box<MorIR>),
    Tuple(Box<MorIR>, Box<MorIR>),
    /// `pi_which : left (+) right -> left | right`
    Proj { which: usize, left: SemObject, right: SemObject },
    /// `Lambda body : Hom(arg, B) -> ctx` for `body : B -> ctx (x) arg`.
    Lam { body: Box<MorIR>, arg: SemObject, ctx: SemObject },
    /// `eps_{A,B} : B -> Hom(A, B) (x) A`
    Eps(SemObject, SemObject),
    Lmap(Box<MorIR>),
    Eta(SemObject),
    /// `eta^-1 : L X -> X`, defined when `X` is of `L`-form.
    EtaInv(SemObject),
    Mu(SemObject),
    DL(SemObject, SemObject),
    DLInv(SemObject, SemObject),
    EL(SemObject, SemObject),
    ELInv(SemObject, SemObject),
    /// `L X (x) L X -> L X`
    Nabla(SemObject),
    Theta(SemObject, SemObject, SemObject),
    ThetaInv(SemObject, SemObject, SemObject),
    Gamma(SemObject, SemObject),
    /// `(x)_{present} factors -> (x) factors`
    Iota { factors: Vec<SemObject>, present: Vec<bool> },
    /// `(x) left (x) (x) right -> (x) target`, positional; doubly hit slots are combined by `Nabla`.
    Merge { target: Vec<SemObject>, left: Vec<SemObject>, left_to: Vec<usize>, right: Vec<SemObject>, right_to: Vec<usize> },
    /// The unique unital map `C -> X`.
    Bang(SemObject),
}

fn bx(e: MorIR) -> Box<MorIR> {
    Box::new(e)
}

impl MorIR {
    pub fn conc(f: VnaMorphism) -> MorIR {
        MorIR::Conc(Arc::new(f))
    }

    pub fn comp(g: MorIR, f: MorIR) -> MorIR {
        MorIR::Comp(bx(g), bx(f))
    }

    pub fn tens(f: MorIR, g: MorIR) -> MorIR {
        MorIR::Tens(bx(f), bx(g))
    }

    /// Compose a chain given in application order.
    pub fn chain(parts: impl IntoIterator<Item = MorIR>) -> MorIR {
        let mut it = parts.into_iter();
        let first = it.next().expect("non-empty chain");
        it.fold(first, |acc, g| MorIR::comp(g, acc))
    }

    pub fn dom(&self) -> Result<SemObject, DenotError> {
        Ok(self.typ()?.0)
    }

    pub fn cod(&self) -> Result<SemObject, DenotError> {
        Ok(self.typ()?.1)
    }

    /// `(dom, cod)`, checking every composite on the way.
    pub fn typ(&self) -> Result<(SemObject, SemObject), DenotError> {
        use SemObject as S;
        let t = |a: &S, b: &S| S::tensor(a, b);
        Ok(match self {
            MorIR::Id(x) => (x.clone(), x.clone()),
            MorIR::Conc(f) => (S::Concrete(f.dom().clone()), S::Concrete(f.cod().clone())),
            MorIR::Comp(g, f) => {
                let (a, m1) = f.typ()?;
                let (m2, c) = g.typ()?;
                if m1 != m2 {
                    return Err(DenotError::Malformed(format!("composite mismatch: {m1} vs {m2} in {self}")));
                }
                (a, c)
            }
            MorIR::Tens(f, g) => {
                let (a, b) = f.typ()?;
                let (c, d) = g.typ()?;
                (t(&a, &c), t(&b, &d))
            }
            MorIR::Oplus(f, g) => {
                let (a, b) = f.typ()?;
                let (c, d) = g.typ()?;
                (S::sum(&a, &c), S::sum(&b, &d))
            }
            MorIR::Tuple(f, g) => {
                let (a, b) = f.typ()?;
                let (c, d) = g.typ()?;
                if a != c {
                    return Err(DenotError::Malformed(format!("tuple of maps with domains {a} and {c}")));
                }
                (a, S::sum(&b, &d))
            }
            MorIR::Proj { which, left, right } => {
                (S::sum(left, right), if *which == 0 { left.clone() } else { right.clone() })
            }
            MorIR::Lam { body, arg, ctx } => {
                let (bo, c) = body.typ()?;
                if c != t(ctx, arg) {
                    return Err(DenotError::Malformed(format!("lambda body lands in {c}, expected {ctx} (x) {arg}")));
                }
                (S::hom(arg.clone(), bo), ctx.clone())
            }
            MorIR::Eps(a, bo) => (bo.clone(), t(&S::hom(a.clone(), bo.clone()), a)),
            MorIR::Lmap(h) => {
                let (x, y) = h.typ()?;
                (x.bang(), y.bang())
            }
            MorIR::Eta(x) => (x.clone(), x.bang()),
            MorIR::EtaInv(x) => {
                if !x.is_l_form() {
                    return Err(DenotError::Malformed(format!("eta is not invertible at {x}")));
                }
                (x.clone(), x.clone())
            }
            MorIR::Mu(x) => (x.bang(), x.bang()),
            MorIR::DL(a, c) => (t(&a.bang(), &c.bang()), t(a, c).bang()),
            MorIR::DLInv(a, c) => (t(a, c).bang(), t(&a.bang(), &c.bang())),
            MorIR::EL(a, c) => (S::sum(&a.bang(), &c.bang()), S::sum(a, c).bang()),
            MorIR::ELInv(a, c) => (S::sum(a, c).bang(), S::sum(&a.bang(), &c.bang())),
            MorIR::Nabla(x) => (t(&x.bang(), &x.bang()), x.bang()),
            MorIR::Theta(a, bo, c) => (S::sum(&t(a, bo), &t(a, c)), t(a, &S::sum(bo, c))),
            MorIR::ThetaInv(a, bo, c) => (t(a, &S::sum(bo, c)), S::sum(&t(a, bo), &t(a, c))),
            MorIR::Gamma(a, bo) => (t(a, bo), t(bo, a)),
            MorIR::Iota { factors, present } => {
                if factors.len() != present.len() {
                    return Err(DenotError::Malformed("iota shape".into()));
                }
                let dom = S::from_atoms(factors.iter().zip(present).filter(|(_, p)| **p).map(|(f, _)| f.clone()));
                (dom, S::tensor_all(factors))
            }
            MorIR::Merge { target, left, left_to, right, right_to } => {
                let mut hits = vec![0usize; target.len()];
                for (x, &k) in left.iter().zip(left_to).chain(right.iter().zip(right_to)) {
                    let slot = target.get(k).ok_or_else(|| DenotError::Malformed("merge position".into()))?;
                    if slot != x {
                        return Err(DenotError::Malformed(format!("merge factor {x} into slot {slot}")));
                    }
                    hits[k] += 1;
                }
                if left.len() != left_to.len() || right.len() != right_to.len() || hits.iter().any(|&h| h == 0 || h > 2) {
                    return Err(DenotError::Malformed("merge coverage".into()));
                }
                (S::from_atoms(left.iter().chain(right).cloned()), S::tensor_all(target))
            }
            MorIR::Bang(x) => (S::unit(), x.clone()),
        })
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            MorIR::Comp(a, c) | MorIR::Tens(a, c) | MorIR::Oplus(a, c) | MorIR::Tuple(a, c) => a.size() + c.size(),
            MorIR::Lam { body, .. } => body.size(),
            MorIR::Lmap(h) => h.size(),
            _ => 0,
        }
    }
}

impl fmt::Display for MorIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorIR::Id(x) => write!(f, "id[{x}]"),
            MorIR::Conc(m) => write!(f, "conc[{} -> {}]", m.dom(), m.cod()),
            MorIR::Comp(g, h) => write!(f, "({g} . {h})"),
            MorIR::Tens(g, h) => write!(f, "({g} (x) {h})"),
            MorIR::Oplus(g, h) => write!(f, "({g} (+) {h})"),
            MorIR::Tuple(g, h) => write!(f, "<{g}, {h}>"),
            MorIR::Proj { which, left, right } => write!(f, "pi{}[{left}, {right}]", which + 1),
            MorIR::Lam { body, .. } => write!(f, "Lambda({body})"),
            MorIR::Eps(a, c) => write!(f, "eps[{a}, {c}]"),
            MorIR::Lmap(h) => write!(f, "L({h})"),
            MorIR::Eta(x) => write!(f, "eta[{x}]"),
            MorIR::EtaInv(x) => write!(f, "eta^-1[{x}]"),
            MorIR::Mu(x) => write!(f, "mu[{x}]"),
            MorIR::DL(a, c) => write!(f, "dL[{a}, {c}]"),
            MorIR::DLInv(a, c) => write!(f, "dL^-1[{a}, {c}]"),
            MorIR::EL(a, c) => write!(f, "eL[{a}, {c}]"),
            MorIR::ELInv(a, c) => write!(f, "eL^-1[{a}, {c}]"),
            MorIR::Nabla(x) => write!(f, "nabla[{x}]"),
            MorIR::Theta(a, c, d) => write!(f, "theta[{a}, {c}, {d}]"),
            MorIR::ThetaInv(a, c, d) => write!(f, "theta^-1[{a}, {c}, {d}]"),
            MorIR::Gamma(a, c) => write!(f, "gamma[{a}, {c}]"),
            MorIR::Iota { present, .. } => {
                let s: String = present.iter().map(|p| if *p { '1' } else { '0' }).collect();
                write!(f, "iota[{s}]")
            }
            MorIR::Merge { left_to, right_to, .. } => write!(f, "merge[{left_to:?}|{right_to:?}]"),
            MorIR::Bang(x) => write!(f, "unit[{x}]"),
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Interpretation

/// `[[A <: B]] : [[B]] -> [[A]]`
pub fn interp_subtype(a: &Type, b: &Type) -> Result<MorIR, DenotError> {
    if !crate::typing::subtype(a, b) {
        return Err(DenotError::Malformed(format!("{a} is not a subtype of {b}")));
    }
    Ok(subtype_map(a, b))
}

fn subtype_map(a: &Type, b: &Type) -> MorIR {
    if a == b {
        return MorIR::Id(interp_type(a));
    }
    let (n, ca) = a.strip_bangs();
    let (m, cb) = b.strip_bangs();
    let core = core_subtype(ca, cb);
    match (n, m) {
        (0, _) => core,
        (_, 0) => MorIR::comp(MorIR::Eta(interp_type(ca)), core),
        _ => {
            let mut parts = Vec::new();
            if m > 1 {
                parts.push(MorIR::Mu(interp_type(cb)));
            }
            parts.push(MorIR::Lmap(bx(core)));
            if n > 1 {
                parts.push(MorIR::Eta(interp_type(ca).bang()));
            }
            MorIR::chain(parts)
        }
    }
}

/// Subtype map between types without an outer `!`.
fn core_subtype(a: &Type, b: &Type) -> MorIR {
    match (a, b) {
        (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) => MorIR::tens(subtype_map(a1, b1), subtype_map(a2, b2)),
        (Type::Sum(a1, a2), Type::Sum(b1, b2)) => MorIR::Oplus(bx(subtype_map(a1, b1)), bx(subtype_map(a2, b2))),
        (Type::Lollipop(a1, a2), Type::Lollipop(b1, b2)) => {
            // Hom(b1, b2) -> Hom(a1, a2) is Lambda((id (x) [[b1 <: a1]]) o eps o [[a2 <: b2]])
            let (oa1, oa2, ob1) = (interp_type(a1), interp_type(a2), interp_type(b1));
            let hom = SemObject::hom(oa1.clone(), oa2.clone());
            let body = MorIR::chain([
                subtype_map(a2, b2),
                MorIR::Eps(oa1, oa2),
                MorIR::tens(MorIR::Id(hom.clone()), subtype_map(b1, a1)),
            ]);
            MorIR::Lam { body: bx(body), arg: ob1, ctx: hom }
        }
        _ => MorIR::Id(interp_type(a)),
    }
}

/// `[[c]] : [[A_c]] -> C`, where `A_c` is the constant's base function type.
pub fn interp_constant(c: &Const) -> MorIR {
    let unit = SemObject::unit();
    let lam = match c {
        Const::New => MorIR::Lam {
            body: bx(MorIR::conc(vna::f_new())),
            arg: SemObject::Concrete(VnaObject::linf(2)),
            ctx: unit.clone(),
        },
        Const::Meas => MorIR::Lam {
            body: bx(MorIR::comp(MorIR::conc(vna::f_meas()), MorIR::EtaInv(SemObject::Concrete(VnaObject::linf(2))))),
            arg: SemObject::Concrete(VnaObject::matrix(2)),
            ctx: unit.clone(),
        },
        Const::Gate(g) => MorIR::Lam {
            body: bx(MorIR::conc(vna::f_unitary(&g.matrix))),
            arg: SemObject::Concrete(VnaObject::matrix(g.matrix.nrows())),
            ctx: unit.clone(),
        },
    };
    MorIR::comp(MorIR::EtaInv(unit), MorIR::Lmap(bx(lam)))
}

fn objs(entries: &[(String, Type)]) -> Vec<SemObject> {
    entries.iter().map(|(_, t)| interp_type(t)).collect()
}

fn restrict(entries: &[(String, Type)], fv: &BTreeSet<String>) -> Vec<(String, Type)> {
    entries.iter().filter(|(x, _)| fv.contains(x)).cloned().collect()
}

fn iota_from(factors: &[(String, Type)], used: &BTreeSet<String>) -> MorIR {
    MorIR::Iota { factors: objs(factors), present: factors.iter().map(|(x, _)| used.contains(x)).collect() }
}

fn position(target: &[(String, Type)], x: &str) -> Result<usize, DenotError> {
    target.iter().position(|(y, _)| y == x).ok_or_else(|| DenotError::Malformed(format!("variable {x} missing from merge target")))
}

fn merge_of(target: &[(String, Type)], left: &[(String, Type)], right: &[(String, Type)]) -> Result<MorIR, DenotError> {
    Ok(MorIR::Merge {
        target: objs(target),
        left: objs(left),
        left_to: left.iter().map(|(x, _)| position(target, x)).collect::<Result<_, _>>()?,
        right: objs(right),
        right_to: right.iter().map(|(x, _)| position(target, x)).collect::<Result<_, _>>()?,
    })
}

fn premise(d: &Derivation, k: usize) -> Result<&Derivation, DenotError> {
    d.premises.get(k).ok_or_else(|| DenotError::Malformed(format!("{} derivation lacks premise {k}", d.rule)))
}

/// `[[Delta |> M : A]] : [[A]] -> [[Delta]]`
pub fn interp_judgement(d: &Derivation) -> Result<MorIR, DenotError> {
    let fv = free_vars(&d.term);
    let j = interp_fv(d)?;
    Ok(MorIR::comp(iota_from(d.context.entries(), &fv), j))
}

/// The interpretation restricted to the free variables: `[[A]] -> [[Delta|_FV(M)]]`.
pub fn interp_fv(d: &Derivation) -> Result<MorIR, DenotError> {
    let fv = free_vars(&d.term);
    let ctx = d.context.entries();
    let here = restrict(ctx, &fv);
    let malformed = || DenotError::Malformed(format!("{} rule on {}", d.rule, d.term));
    match (d.rule, &d.term) {
        (Rule::Ax1, Term::Var(x, t)) => {
            let a = d.context.get(x).ok_or_else(malformed)?;
            interp_subtype(a, t)
        }
        (Rule::Ax2, Term::Const(c, t)) => Ok(MorIR::comp(interp_constant(c), interp_subtype(&Type::bang(c.base_type()), t)?)),
        (Rule::Top, Term::Star(n)) => {
            let sub = interp_subtype(&Type::bang(Type::Top), &Type::bangs(*n, Type::Top))?;
            Ok(MorIR::comp(MorIR::EtaInv(SemObject::unit()), sub))
        }
        (Rule::LolliI1 | Rule::LolliI2, Term::Lam(n, x, a, body)) => {
            let p = premise(d, 0)?;
            let f = interp_fv(p)?;
            let body_fv = free_vars(body);
            let mut factors = objs(&here);
            factors.push(interp_type(a));
            let mut present = vec![true; here.len()];
            present.push(body_fv.contains(x));
            let ctx_obj = SemObject::tensor_all(&objs(&here));
            let lam = MorIR::Lam {
                body: bx(MorIR::comp(MorIR::Iota { factors, present }, f)),
                arg: interp_type(a),
                ctx: ctx_obj.clone(),
            };
            if *n == 0 {
                return Ok(lam);
            }
            let arrow = Type::lolli(a.clone(), p.ty.clone());
            let sub = interp_subtype(&Type::bang(arrow.clone()), &Type::bangs(*n, arrow))?;
            // (d^L)^-1 is the identity between canonical objects
            Ok(MorIR::chain([sub, MorIR::Lmap(bx(lam)), MorIR::Mu(ctx_obj)]))
        }
        (Rule::LolliE, Term::App(fun, arg)) => {
            let (df, da) = (premise(d, 0)?, premise(d, 1)?);
            let (a, res) = match &df.ty {
                Type::Lollipop(a, r) => (interp_type(a), interp_type(r)),
                _ => return Err(malformed()),
            };
            let left = restrict(df.context.entries(), &fv);
            let right = restrict(da.context.entries(), &fv);
            Ok(MorIR::chain([
                MorIR::Eps(a, res),
                MorIR::tens(interp_fv(df)?, interp_fv(da)?),
                MorIR::tens(iota_from(&left, &free_vars(fun)), iota_from(&right, &free_vars(arg))),
                merge_of(&here, &left, &right)?,
            ]))
        }
        (Rule::TensorI, Term::Pair(n, m1, m2)) => {
            let (d1, d2) = (premise(d, 0)?, premise(d, 1)?);
            let left = restrict(d1.context.entries(), &fv);
            let right = restrict(d2.context.entries(), &fv);
            let mut parts = Vec::new();
            if *n > 0 {
                let c1 = d1.ty.unbang(*n).ok_or_else(malformed)?;
                let c2 = d2.ty.unbang(*n).ok_or_else(malformed)?;
                parts.push(MorIR::DLInv(interp_type(c1), interp_type(c2)));
            }
            parts.extend([
                MorIR::tens(interp_fv(d1)?, interp_fv(d2)?),
                MorIR::tens(iota_from(&left, &free_vars(m1)), iota_from(&right, &free_vars(m2))),
                merge_of(&here, &left, &right)?,
            ]);
            Ok(MorIR::chain(parts))
        }
        (Rule::TensorE, Term::LetPair(n, x, a, y, bt, scrut, body)) => {
            let (db, ds) = (premise(d, 0)?, premise(d, 1)?);
            let inner = db.context.entries();
            if inner.len() < 2 {
                return Err(malformed());
            }
            let k = restrict(&inner[..inner.len() - 2], &fv);
            let body_fv = free_vars(body);
            let mut factors = objs(&k);
            factors.push(interp_type(&Type::bangs(*n, a.clone())));
            factors.push(interp_type(&Type::bangs(*n, bt.clone())));
            let mut present: Vec<bool> = k.iter().map(|(v, _)| body_fv.contains(v)).collect();
            present.push(body_fv.contains(x));
            present.push(body_fv.contains(y));
            let k_obj = SemObject::tensor_all(&objs(&k));
            let id_k = || MorIR::Id(k_obj.clone());
            let right = restrict(ds.context.entries(), &fv);
            let mut parts = vec![interp_fv(db)?, MorIR::Iota { factors, present }];
            if *n > 0 {
                parts.push(MorIR::tens(id_k(), MorIR::DL(interp_type(a), interp_type(bt))));
            }
            parts.extend([
                MorIR::tens(id_k(), interp_fv(ds)?),
                MorIR::tens(id_k(), iota_from(&right, &free_vars(scrut))),
                merge_of(&here, &k, &right)?,
            ]);
            Ok(MorIR::chain(parts))
        }
        (Rule::SumI1 | Rule::SumI2, Term::Inl(n, a, bt, _) | Term::Inr(n, a, bt, _)) => {
            let which = usize::from(d.rule == Rule::SumI2);
            let mut pi = MorIR::Proj { which, left: interp_type(a), right: interp_type(bt) };
            for _ in 0..*n {
                pi = MorIR::Lmap(bx(pi));
            }
            Ok(MorIR::comp(interp_fv(premise(d, 0)?)?, pi))
        }
        (Rule::SumE, Term::Match(n, scrut, x, a, l, y, bt, r)) => {
            let (dl, dr, ds) = (premise(d, 0)?, premise(d, 1)?, premise(d, 2)?);
            let s = d.split.as_ref().ok_or_else(malformed)?;
            let base: Vec<(String, Type)> = ctx
                .iter()
                .filter(|(v, _)| s.shared.contains(v) || s.left.contains(v))
                .cloned()
                .collect();
            let k = restrict(&base, &fv);
            let k_obj = SemObject::tensor_all(&objs(&k));
            let id_k = || MorIR::Id(k_obj.clone());
            let (oa, ob) = (interp_type(&Type::bangs(*n, a.clone())), interp_type(&Type::bangs(*n, bt.clone())));
            let branch_iota = |binder: &str, obj: &SemObject, term: &Term| {
                let used = free_vars(term);
                let mut factors = objs(&k);
                factors.push(obj.clone());
                let mut present: Vec<bool> = k.iter().map(|(v, _)| v != binder && used.contains(v)).collect();
                present.push(used.contains(binder));
                MorIR::Iota { factors, present }
            };
            let right = restrict(ds.context.entries(), &fv);
            let mut parts = vec![
                MorIR::Tuple(bx(interp_fv(dl)?), bx(interp_fv(dr)?)),
                MorIR::Oplus(bx(branch_iota(x, &oa, l)), bx(branch_iota(y, &ob, r))),
                MorIR::Theta(k_obj.clone(), oa, ob),
            ];
            if *n > 0 {
                parts.push(MorIR::tens(id_k(), MorIR::EL(interp_type(a), interp_type(bt))));
            }
            parts.extend([
                MorIR::tens(id_k(), interp_fv(ds)?),
                MorIR::tens(id_k(), iota_from(&right, &free_vars(scrut))),
                merge_of(&here, &k, &right)?,
            ]);
            Ok(MorIR::chain(parts))
        }
        _ => Err(malformed()),
    }
}

/// `<psi| - |psi> o [[x_1:qbit, ..., x_n:qbit |> M : A]]`
pub fn interp_closure(p: &QuantumClosure, a: &Type) -> Result<MorIR, DenotError> {
    let d = check_closure(p, a)?;
    Ok(MorIR::comp(MorIR::conc(vna::psi_functional(&p.state)), interp_judgement(&d)?))
}

/// Typecheck `ctx |> m` and interpret it.
pub fn interp_term(ctx: &Context, m: &Term) -> Result<MorIR, DenotError> {
    interp_judgement(&crate::typing::typecheck(ctx, m)?)
}

/// Normalize and extract a concrete morphism.
pub fn to_concrete(e: &MorIR) -> Result<VnaMorphism, DenotError> {
    let n = normalize(e)?;
    if let MorIR::Conc(f) = &n {
        return Ok((**f).clone());
    }
    let (dom, cod) = n.typ()?;
    if !dom.is_concrete() || !cod.is_concrete() {
        return Err(DenotError::Residual(format!("non-concrete boundary {dom} -> {cod}: {}", smallest_residual(&n))));
    }
    diagram::evaluate(&n).map_err(|e| match e {
        DenotError::Residual(msg) => DenotError::Residual(format!("{msg}; smallest symbolic subterm {}", smallest_residual(&n))),
        other => other,
    })
}

/// The smallest subterm whose boundary is not concrete.
fn smallest_residual(e: &MorIR) -> String {
    fn walk<'a>(e: &'a MorIR, best: &mut Option<&'a MorIR>) {
        match e {
            MorIR::Comp(a, c) | MorIR::Tens(a, c) | MorIR::Oplus(a, c) | MorIR::Tuple(a, c) => {
                walk(a, best);
                walk(c, best);
            }
            MorIR::Lam { body, .. } => walk(body, best),
            MorIR::Lmap(h) => walk(h, best),
            _ => {}
        }
        let symbolic = e.typ().map(|(d, c)| !d.is_concrete() || !c.is_concrete()).unwrap_or(true);
        if symbolic && best.is_none_or(|b| e.size() < b.size()) {
            *best = Some(e);
        }
    }
    let mut best = None;
    walk(e, &mut best);
    best.map_or_else(|| e.to_string(), |b| b.to_string())
}

#[cfg(test)]
mod tests;
