//! Directed law set over `MorIR`, applied leftmost-innermost. Composition chains are kept
//! flat so pair rules see through associativity.

use super::{DenotError, MorIR, SemObject};
use crate::vna::{self, VnaMorphism};

/// Maximum number of rewrite steps per normalization.
pub const NORMALIZE_BUDGET: usize = 1_000_000;

/// Apply the law set to a fixpoint.
pub fn normalize(e: &MorIR) -> Result<MorIR, DenotError> {
    e.typ()?;
    let mut budget = NORMALIZE_BUDGET;
    norm(e.clone(), &mut budget)
}

fn tick(budget: &mut usize) -> Result<(), DenotError> {
    if *budget == 0 {
        return Err(DenotError::Budget(NORMALIZE_BUDGET));
    }
    *budget -= 1;
    Ok(())
}

fn bx(e: MorIR) -> Box<MorIR> {
    Box::new(e)
}

fn norm(e: MorIR, budget: &mut usize) -> Result<MorIR, DenotError> {
    tick(budget)?;
    let e = match e {
        MorIR::Comp(..) => {
            let mut items = Vec::new();
            flatten(e, &mut items);
            return norm_chain(items, budget);
        }
        MorIR::Tens(f, g) => {
            let (f, g) = (norm(*f, budget)?, norm(*g, budget)?);
            return tens_rules(f, g, budget);
        }
        MorIR::Oplus(f, g) => {
            let (f, g) = (norm(*f, budget)?, norm(*g, budget)?);
            match (&f, &g) {
                (MorIR::Id(a), MorIR::Id(c)) => MorIR::Id(SemObject::sum(a, c)),
                _ => MorIR::Oplus(bx(f), bx(g)),
            }
        }
        MorIR::Tuple(f, g) => MorIR::Tuple(bx(norm(*f, budget)?), bx(norm(*g, budget)?)),
        MorIR::Lam { body, arg, ctx } => MorIR::Lam { body: bx(norm(*body, budget)?), arg, ctx },
        MorIR::Lmap(h) => match norm(*h, budget)? {
            MorIR::Id(x) => MorIR::Id(x.bang()),
            h => MorIR::Lmap(bx(h)),
        },
        leaf => leaf,
    };
    fold_concrete(e)
}

fn flatten(e: MorIR, out: &mut Vec<MorIR>) {
    match e {
        MorIR::Comp(g, f) => {
            flatten(*f, out);
            flatten(*g, out);
        }
        other => out.push(other),
    }
}

/// `chain` is in application order.
fn norm_chain(items: Vec<MorIR>, budget: &mut usize) -> Result<MorIR, DenotError> {
    let dom = items[0].dom()?;
    let mut chain = Vec::new();
    for it in items {
        flatten(norm(it, budget)?, &mut chain);
    }
    loop {
        chain.retain(|x| !matches!(x, MorIR::Id(_)));
        let mut fired = false;
        for i in 0..chain.len().saturating_sub(1) {
            if let Some(rep) = pair_rule(&chain[i], &chain[i + 1])? {
                tick(budget)?;
                let mut flat = Vec::new();
                for r in rep {
                    flatten(norm(r, budget)?, &mut flat);
                }
                chain.splice(i..i + 2, flat);
                fired = true;
                break;
            }
        }
        if fired {
            continue;
        }
        // evaluate adjacent concrete leaves
        let mut i = 0;
        while i + 1 < chain.len() {
            if let (MorIR::Conc(f), MorIR::Conc(g)) = (&chain[i], &chain[i + 1]) {
                tick(budget)?;
                let h = g.after(f)?;
                chain.splice(i..i + 2, [MorIR::conc(h)]);
                fired = true;
            } else {
                i += 1;
            }
        }
        if !fired {
            break;
        }
    }
    Ok(match chain.len() {
        0 => MorIR::Id(dom),
        _ => MorIR::chain(chain),
    })
}

/// Rewrite `second o first`, returning the replacement chain in application order.
fn pair_rule(first: &MorIR, second: &MorIR) -> Result<Option<Vec<MorIR>>, DenotError> {
    use MorIR as M;
    Ok(match (first, second) {
        // (Lambda f (x) g) o eps = (id (x) g) o f
        (M::Eps(..), M::Tens(l, g)) => match &**l {
            M::Lam { body, ctx, .. } => Some(vec![(**body).clone(), M::tens(M::Id(ctx.clone()), (**g).clone())]),
            _ => None,
        },
        // L h o eta = eta o h
        (M::Eta(x), M::Lmap(h)) if h.dom()? == *x => Some(vec![(**h).clone(), M::Eta(h.cod()?)]),
        // eta^-1 o L h = h o eta^-1 when both ends are of L-form
        (M::Lmap(h), M::EtaInv(y)) => {
            let (x, c) = h.typ()?;
            if x.is_l_form() && c == *y {
                Some(vec![M::EtaInv(x), (**h).clone()])
            } else {
                None
            }
        }
        (M::Lmap(f), M::Lmap(g)) => Some(vec![M::Lmap(bx(M::comp((**g).clone(), (**f).clone())))]),
        (M::DL(a, c), M::DLInv(a2, c2)) | (M::DLInv(a, c), M::DL(a2, c2)) if a == a2 && c == c2 => Some(vec![]),
        (M::EL(a, c), M::ELInv(a2, c2)) | (M::ELInv(a, c), M::EL(a2, c2)) if a == a2 && c == c2 => Some(vec![]),
        (M::Theta(a, c, d), M::ThetaInv(a2, c2, d2)) | (M::ThetaInv(a, c, d), M::Theta(a2, c2, d2))
            if a == a2 && c == c2 && d == d2 =>
        {
            Some(vec![])
        }
        (M::Gamma(a, c), M::Gamma(c2, a2)) if a == a2 && c == c2 => Some(vec![]),
        (M::Eta(x), M::EtaInv(y)) if x == y => Some(vec![]),
        (M::Lmap(h), M::Mu(x)) if matches!(&**h, M::Eta(_)) && h.dom()? == x.bang() => Some(vec![]),
        (M::Eta(y), M::Mu(x)) if *y == x.bang() => Some(vec![]),
        (M::Tuple(f1, f2), M::Proj { which, .. }) => Some(vec![if *which == 0 { (**f1).clone() } else { (**f2).clone() }]),
        // <f, g> o e = <f o e, g o e>, only for concrete e: copying larger terms into both
        // branches is exponential, and case boxes absorb them during diagram evaluation
        (e @ M::Conc(_), M::Tuple(f, g)) => Some(vec![M::Tuple(
            bx(M::comp((**f).clone(), e.clone())),
            bx(M::comp((**g).clone(), e.clone())),
        )]),
        _ => None,
    })
}

fn tens_rules(f: MorIR, g: MorIR, budget: &mut usize) -> Result<MorIR, DenotError> {
    use MorIR as M;
    let unit = SemObject::unit();
    match (f, g) {
        (M::Id(a), M::Id(c)) => Ok(M::Id(SemObject::tensor(&a, &c))),
        (M::Id(a), g) if a == unit => Ok(g),
        (f, M::Id(c)) if c == unit => Ok(f),
        // interchange
        (M::Comp(q, p), M::Comp(s, r)) => {
            tick(budget)?;
            norm(M::comp(M::tens(*q, *s), M::tens(*p, *r)), budget)
        }
        // id (x) <h1, h2> = theta o <id (x) h1, id (x) h2>
        (M::Id(y), M::Tuple(h1, h2)) => {
            tick(budget)?;
            let (a, c) = (h1.cod()?, h2.cod()?);
            let t = M::Tuple(bx(M::tens(M::Id(y.clone()), *h1)), bx(M::tens(M::Id(y.clone()), *h2)));
            norm(M::comp(M::Theta(y, a, c), t), budget)
        }
        // <h1, h2> (x) id = gamma o theta o (gamma (+) gamma) o <h1 (x) id, h2 (x) id>
        (M::Tuple(h1, h2), M::Id(y)) => {
            tick(budget)?;
            let (a, c) = (h1.cod()?, h2.cod()?);
            let t = M::Tuple(bx(M::tens(*h1, M::Id(y.clone()))), bx(M::tens(*h2, M::Id(y.clone()))));
            let swaps = M::Oplus(bx(M::Gamma(a.clone(), y.clone())), bx(M::Gamma(c.clone(), y.clone())));
            let back = M::Gamma(y.clone(), SemObject::sum(&a, &c));
            norm(M::chain([t, swaps, M::Theta(y, a, c), back]), budget)
        }
        (f, g) => fold_concrete(M::tens(f, g)),
    }
}

/// Whether every object inside `e` is concrete.
fn fully_concrete(e: &MorIR) -> bool {
    match e {
        MorIR::Conc(_) => true,
        MorIR::Lam { .. } | MorIR::Eps(..) => false,
        MorIR::Comp(a, c) | MorIR::Tens(a, c) | MorIR::Oplus(a, c) | MorIR::Tuple(a, c) => fully_concrete(a) && fully_concrete(c),
        MorIR::Lmap(h) => fully_concrete(h),
        leaf => leaf.typ().map(|(d, c)| d.is_concrete() && c.is_concrete()).unwrap_or(false),
    }
}

fn fold_concrete(e: MorIR) -> Result<MorIR, DenotError> {
    if matches!(e, MorIR::Conc(_) | MorIR::Id(_)) || !fully_concrete(&e) {
        return Ok(e);
    }
    Ok(MorIR::conc(eval_concrete(&e)?))
}

fn obj(x: &SemObject) -> Result<&vna::VnaObject, DenotError> {
    x.concrete().ok_or_else(|| DenotError::Malformed(format!("{x} is not concrete")))
}

fn objs(xs: &[SemObject]) -> Result<Vec<vna::VnaObject>, DenotError> {
    xs.iter().map(|x| obj(x).cloned()).collect()
}

/// Evaluate a fully concrete tree with vna arithmetic.
pub(crate) fn eval_concrete(e: &MorIR) -> Result<VnaMorphism, DenotError> {
    use MorIR as M;
    Ok(match e {
        M::Id(x) => VnaMorphism::identity(obj(x)?),
        M::Conc(f) => (**f).clone(),
        M::Comp(g, f) => eval_concrete(g)?.after(&eval_concrete(f)?)?,
        M::Tens(f, g) => vna::tensor_mor_unchecked(&eval_concrete(f)?, &eval_concrete(g)?),
        M::Oplus(f, g) => vna::oplus(&eval_concrete(f)?, &eval_concrete(g)?),
        M::Tuple(f, g) => vna::tuple(&eval_concrete(f)?, &eval_concrete(g)?)?,
        M::Proj { which, left, right } => vna::proj(obj(left)?, obj(right)?, *which),
        M::Lmap(h) => vna::l_mor(&eval_concrete(h)?)?,
        M::Eta(x) => vna::eta(obj(x)?),
        M::EtaInv(x) => vna::eta_inv(obj(x)?)?,
        M::Mu(x) => vna::mu(obj(x)?),
        M::DL(a, c) => vna::d_l(obj(a)?, obj(c)?),
        M::DLInv(a, c) => vna::d_l_inv(obj(a)?, obj(c)?),
        M::EL(a, c) => vna::e_l(obj(a)?, obj(c)?),
        M::ELInv(a, c) => vna::e_l_inv(obj(a)?, obj(c)?),
        M::Nabla(x) => vna::nabla(&vna::l_obj(obj(x)?))?,
        M::Theta(a, c, d) => vna::theta(obj(a)?, obj(c)?, obj(d)?),
        M::ThetaInv(a, c, d) => vna::theta_inv(obj(a)?, obj(c)?, obj(d)?),
        M::Gamma(a, c) => vna::gamma(obj(a)?, obj(c)?),
        M::Iota { factors, present } => vna::iota(&objs(factors)?, present)?,
        M::Merge { target, left, left_to, right, right_to } => {
            vna::merge(&objs(target)?, &objs(left)?, left_to, &objs(right)?, right_to)?
        }
        M::Bang(x) => vna::unit_map(obj(x)?),
        M::Lam { .. } | M::Eps(..) => return Err(DenotError::Residual(e.to_string())),
    })
}
