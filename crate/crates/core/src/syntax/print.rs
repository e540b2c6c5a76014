//! Pretty-printer emitting the surface grammar with every annotation explicit.

use num_complex::Complex64;

use super::{Const, Gate, Program, Term, Type};

pub fn print_type(t: &Type) -> String {
    let mut s = String::new();
    ty(t, 0, &mut s);
    s
}

fn level(t: &Type) -> u8 {
    match t {
        Type::Lollipop(..) => 0,
        _ if t.is_bit() => 3,
        Type::Sum(..) => 1,
        Type::Tensor(..) => 2,
        _ => 3,
    }
}

fn ty(t: &Type, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        ty(t, 0, out);
        out.push(')');
        return;
    }
    match t {
        Type::Qbit => out.push_str("qbit"),
        Type::Top => out.push_str("top"),
        _ if t.is_bit() => out.push_str("bit"),
        Type::Bang(a) => {
            out.push('!');
            ty(a, 3, out);
        }
        Type::Lollipop(a, b) => {
            ty(a, 1, out);
            out.push_str(" -o ");
            ty(b, 0, out);
        }
        Type::Sum(a, b) => {
            ty(a, 2, out);
            out.push_str(" + ");
            ty(b, 1, out);
        }
        Type::Tensor(a, b) => {
            ty(a, 3, out);
            out.push_str(" * ");
            ty(b, 2, out);
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Top,
    Fun,
    Arg,
}

pub fn print_term(m: &Term) -> String {
    let mut s = String::new();
    term(m, Pos::Top, &mut s);
    s
}

fn is_bool_lit(m: &Term) -> Option<(&'static str, u32)> {
    match m {
        Term::Inl(n, Type::Top, Type::Top, s) if **s == Term::Star(*n) => Some(("ff", *n)),
        Term::Inr(n, Type::Top, Type::Top, s) if **s == Term::Star(*n) => Some(("tt", *n)),
        _ => None,
    }
}

fn term(m: &Term, pos: Pos, out: &mut String) {
    let binder_like = matches!(m, Term::Lam(..) | Term::LetPair(..) | Term::Match(..));
    let wrap = (binder_like && pos != Pos::Top) || (matches!(m, Term::App(..)) && pos == Pos::Arg);
    if wrap {
        out.push('(');
        term(m, Pos::Top, out);
        out.push(')');
        return;
    }
    if let Some((lit, n)) = is_bool_lit(m) {
        out.push_str(&format!("{lit}^{n}"));
        return;
    }
    match m {
        Term::Var(x, t) => out.push_str(&format!("{x}^{{{}}}", print_type(t))),
        Term::Const(c, t) => out.push_str(&format!("{}^{{{}}}", c.name(), print_type(t))),
        Term::Star(n) => out.push_str(&format!("*^{n}")),
        Term::Lam(n, x, t, body) => {
            out.push_str(&format!("lambda^{n} {x}:{}. ", print_type(t)));
            term(body, Pos::Top, out);
        }
        Term::App(f, a) => {
            term(f, Pos::Fun, out);
            out.push(' ');
            term(a, Pos::Arg, out);
        }
        Term::Pair(n, a, b) => {
            out.push('<');
            term(a, Pos::Top, out);
            out.push_str(", ");
            term(b, Pos::Top, out);
            out.push_str(&format!(">^{n}"));
        }
        Term::Inl(n, a, b, v) | Term::Inr(n, a, b, v) => {
            let kw = if matches!(m, Term::Inl(..)) { "inl" } else { "inr" };
            out.push_str(&format!("{kw}^{n}[{}, {}] ", print_type(a), print_type(b)));
            term(v, Pos::Arg, out);
        }
        Term::LetPair(n, x, a, y, b, s, body) => {
            out.push_str(&format!("let <{x}:{}, {y}:{}>^{n} = ", print_type(a), print_type(b)));
            term(s, Pos::Top, out);
            out.push_str(" in ");
            term(body, Pos::Top, out);
        }
        Term::Match(n, s, x, a, l, y, b, r) => {
            out.push_str(&format!("match^{n} "));
            term(s, Pos::Top, out);
            out.push_str(&format!(" with ({x}:{} -> ", print_type(a)));
            term(l, Pos::Top, out);
            out.push_str(&format!(" | {y}:{} -> ", print_type(b)));
            term(r, Pos::Top, out);
            out.push(')');
        }
    }
}

fn complex(z: Complex64) -> String {
    let re = format!("{:?}", z.re);
    if z.im == 0.0 {
        re
    } else {
        format!("({re} + {:?} * i)", z.im)
    }
}

fn gate_decl(g: &Gate) -> String {
    let rows: Vec<String> = (0..g.matrix.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..g.matrix.ncols()).map(|j| complex(g.matrix[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("gate {} = [{}];", g.name, rows.join(", "))
}

/// Print a whole program, declaring every non-builtin gate the term uses.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for g in &p.gates {
        out.push_str(&gate_decl(g));
        out.push('\n');
    }
    let mut used = Vec::new();
    collect_gates(&p.term, &mut used);
    for g in used {
        if Gate::builtin(&g.name).as_ref() != Some(&g) && !p.gates.iter().any(|h| h.name == g.name) {
            out.push_str(&gate_decl(&g));
            out.push('\n');
        }
    }
    out.push_str(&print_term(&p.term));
    out.push('\n');
    out
}

fn collect_gates(m: &Term, out: &mut Vec<Gate>) {
    match m {
        Term::Const(Const::Gate(g), _) => {
            if !out.iter().any(|h| h.name == g.name) {
                out.push(g.clone());
            }
        }
        Term::Var(..) | Term::Const(..) | Term::Star(_) => {}
        Term::Lam(_, _, _, b) | Term::Inl(_, _, _, b) | Term::Inr(_, _, _, b) => collect_gates(b, out),
        Term::App(a, b) | Term::Pair(_, a, b) | Term::LetPair(_, _, _, _, _, a, b) => {
            collect_gates(a, out);
            collect_gates(b, out);
        }
        Term::Match(_, s, _, _, l, _, _, r) => {
            collect_gates(s, out);
            collect_gates(l, out);
            collect_gates(r, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{alpha_eq, parse_program, parse_term, parse_type};
    use super::*;

    #[test]
    fn types_round_trip() {
        for src in ["qbit * qbit * qbit", "(qbit * qbit) * qbit", "!(bit -o bit)", "(qbit -o qbit) -o top", "bit + !qbit * top"] {
            let t = parse_type(src).unwrap();
            assert_eq!(parse_type(&print_type(&t)).unwrap(), t, "{src}");
        }
    }

    #[test]
    fn terms_round_trip() {
        let srcs = [
            "meas (H (new ff))",
            "(λ1 f:bit -o bit. f tt) (λ0 b:bit. if b then ff else tt)",
            "let <a:qbit, b:qbit> = CNOT <H (new ff), new ff> in <meas a, meas b>",
            "match^1 inl^1[top, qbit] *^1 with (u:top -> tt | q:qbit -> meas q)",
        ];
        for src in srcs {
            let t = parse_term(src).unwrap();
            let printed = print_term(&t);
            let back = parse_term(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert!(alpha_eq(&t, &back), "{printed}");
        }
    }

    #[test]
    fn user_gate_program_round_trip() {
        let p = parse_program("gate W = [[0, i], [i, 0]]\nmeas (W (new ff))").unwrap();
        let back = parse_program(&print_program(&p)).unwrap();
        assert_eq!(back, p);
    }
}
