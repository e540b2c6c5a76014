use super::*;
use crate::qstate::StateVector;
use crate::syntax::{parse_term, parse_term_in, parse_type, Gate};

fn closed(src: &str) -> VnaMorphism {
    let m = parse_term(src).unwrap();
    let p = QuantumClosure::closed(m);
    let a = crate::opsem::closure_type(&p).unwrap();
    to_concrete(&interp_closure(&p, &a).unwrap()).unwrap()
}

fn in_qubits(names: &[&str], src: &str) -> Result<VnaMorphism, DenotError> {
    let ctx = Context::qubits(names);
    to_concrete(&interp_term(&ctx, &parse_term_in(src, &ctx).unwrap())?)
}

#[test]
fn type_objects() {
    let t = |s: &str| interp_type(&parse_type(s).unwrap());
    assert_eq!(t("qbit"), SemObject::Concrete(VnaObject::matrix(2)));
    assert_eq!(t("top + top"), SemObject::Concrete(VnaObject::linf(2)));
    assert_eq!(t("!bit"), SemObject::Concrete(VnaObject::linf(2)));
    assert_eq!(t("qbit * qbit"), SemObject::Concrete(VnaObject::matrix(4)));
    assert!(matches!(t("qbit -o qbit"), SemObject::Hom(..)));
    assert!(matches!(t("!(qbit -o qbit)"), SemObject::LFormal(..)));
}

#[test]
fn variable_is_identity() {
    let f = in_qubits(&["x"], "x").unwrap();
    assert!(f.approx_eq(&VnaMorphism::identity(&VnaObject::matrix(2)), 1e-12));
}

#[test]
fn star_is_identity_on_unit() {
    let n = normalize(&interp_term(&Context::default(), &parse_term("*").unwrap()).unwrap()).unwrap();
    assert_eq!(n.typ().unwrap(), (SemObject::unit(), SemObject::unit()));
    let f = to_concrete(&n).unwrap();
    assert!(f.approx_eq(&VnaMorphism::identity(&VnaObject::scalar()), 1e-12));
}

#[test]
fn measurement_map() {
    let f = in_qubits(&["x"], "meas x").unwrap();
    assert!(f.approx_eq(&vna::f_meas(), 1e-12), "{}", f.matrix());
}

#[test]
fn gate_map() {
    let h = Gate::builtin("H").unwrap();
    let f = in_qubits(&["x"], "H x").unwrap();
    assert!(f.approx_eq(&vna::f_unitary(&h.matrix), 1e-12));
}

#[test]
fn booleans_are_points() {
    let (t, f) = (closed("tt"), closed("ff"));
    let two = VnaObject::linf(2);
    let p0 = vna::proj(&VnaObject::scalar(), &VnaObject::scalar(), 0);
    let p1 = vna::proj(&VnaObject::scalar(), &VnaObject::scalar(), 1);
    assert_eq!(t.dom(), &two);
    assert!(t.approx_eq(&p1, 1e-12) || t.approx_eq(&p0, 1e-12));
    assert!(!t.approx_eq(&f, 1e-12));
    assert!(f.approx_eq(&p1, 1e-12) || f.approx_eq(&p0, 1e-12));
}

#[test]
fn new_then_measure_is_deterministic() {
    let f = closed("meas (new ff)");
    let g = closed("ff");
    assert!(f.approx_eq(&g, 1e-9), "{}\n{}", f.matrix(), g.matrix());
}

#[test]
fn coin_is_fair() {
    let f = closed("meas (H (new ff))");
    let v: Vec<f64> = f.matrix().iter().map(|z| z.re).collect();
    assert!(v.iter().all(|x| (x - 0.5).abs() < 1e-9), "{v:?}");
}

#[test]
fn closure_with_state() {
    let plus = StateVector::basis(&[false]).apply_unitary(&Gate::builtin("H").unwrap().matrix, &[0]).unwrap();
    let ctx = Context::qubits(&["x"]);
    let p = QuantumClosure::new(plus, vec!["x".into()], parse_term_in("meas x", &ctx).unwrap()).unwrap();
    let f = to_concrete(&interp_closure(&p, &Type::bit()).unwrap()).unwrap();
    assert!(f.matrix().iter().all(|z| (z.re - 0.5).abs() < 1e-9));
}

#[test]
fn function_values_have_no_concrete_form() {
    let e = interp_term(&Context::default(), &parse_term("lambda x:qbit. x").unwrap()).unwrap();
    assert!(matches!(to_concrete(&e), Err(DenotError::Residual(_))));
}

#[test]
fn cut_rule() {
    let f = MorIR::conc(vna::f_unitary(&Gate::builtin("X").unwrap().matrix));
    let q = SemObject::Concrete(VnaObject::matrix(2));
    let lam = MorIR::Lam { body: Box::new(f.clone()), arg: q.clone(), ctx: SemObject::unit() };
    let e = MorIR::comp(MorIR::tens(lam, MorIR::Id(q.clone())), MorIR::Eps(q.clone(), q));
    assert_eq!(normalize(&e).unwrap(), f);
}

#[test]
fn eta_naturality() {
    let q = VnaObject::matrix(2);
    let g = vna::f_unitary(&Gate::builtin("H").unwrap().matrix);
    let e = MorIR::comp(MorIR::Lmap(Box::new(MorIR::conc(g.clone()))), MorIR::Eta(SemObject::Concrete(q.clone())));
    let lhs = to_concrete(&e).unwrap();
    let rhs = vna::eta(&q).after(&g).unwrap();
    assert!(lhs.approx_eq(&rhs, 1e-12));
}

#[test]
fn dereliction_is_the_unit_of_l() {
    let two = VnaObject::linf(2);
    let e = interp_subtype(&parse_type("!bit").unwrap(), &parse_type("bit").unwrap()).unwrap();
    assert_eq!(e.typ().unwrap(), (SemObject::Concrete(two.clone()), SemObject::Concrete(two.clone())));
    assert!(to_concrete(&e).unwrap().approx_eq(&vna::eta(&two), 1e-12));
}

#[test]
fn register_state_is_an_expectation() {
    let ctx = Context::qubits(&["x"]);
    let p = QuantumClosure::new(StateVector::basis(&[false]), vec!["x".into()], parse_term_in("x", &ctx).unwrap()).unwrap();
    let f = to_concrete(&interp_closure(&p, &Type::Qbit).unwrap()).unwrap();
    let m = VnaObject::matrix(2);
    for k in 0..4 {
        let a = vna::VnaElement::basis(&m, k);
        let expected = if k == 0 { 1.0 } else { 0.0 };
        assert!((f.apply(&a).blocks[0][(0, 0)].re - expected).abs() < 1e-12, "basis {k}");
    }
}

#[test]
fn banged_qubits_are_the_zero_algebra() {
    assert_eq!(interp_type(&parse_type("!qbit").unwrap()), SemObject::Concrete(VnaObject::new(vec![])));
}
