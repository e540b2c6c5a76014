//! Invariants over generated programs and random maps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qlc::cli::bit_values;
use qlc::denot::{interp_closure, interp_term, normalize, to_concrete};
use qlc::gen::ProgramGen;
use qlc::opsem::{self, closure_type, observe, sample_traced, QuantumClosure, Step, DEFAULT_MAX_STEPS};
use qlc::syntax::{alpha_eq, parse_term, print_term, Context, Type};
use qlc::vna::{self, VnaMorphism, VnaObject};

const TOL: f64 = 1e-9;
const MAX_QUBITS: usize = 10;

fn program(seed: u64, depth: usize) -> QuantumClosure {
    QuantumClosure::closed(ProgramGen::new(seed).bounded_program(depth, MAX_QUBITS))
}

fn denote(p: &QuantumClosure) -> VnaMorphism {
    let ty = closure_type(p).expect("well typed");
    to_concrete(&interp_closure(p, &ty).expect("interpretation")).expect("concrete denotation")
}

fn close(a: &VnaMorphism, b: &VnaMorphism) -> bool {
    a.distance(b).is_some_and(|d| d <= TOL)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn generated_programs_are_adequate(seed in any::<u64>(), depth in 1usize..=3) {
        let p = program(seed, depth);
        let (ff, tt) = observe(&p, DEFAULT_MAX_STEPS).unwrap();
        let (dff, dtt) = bit_values(&denote(&p)).unwrap();
        prop_assert!((ff - dff).abs() <= TOL && (tt - dtt).abs() <= TOL, "{}: ({ff}, {tt}) vs ({dff}, {dtt})", print_term(&p.term));
    }

    #[test]
    fn big_step_soundness(seed in any::<u64>(), depth in 1usize..=3) {
        let p = program(seed, depth);
        let d = opsem::big_step(&p, DEFAULT_MAX_STEPS).unwrap();
        let mut sum = VnaMorphism::zero(&VnaObject::linf(2), &VnaObject::scalar());
        for (z, w) in &d.entries {
            sum = sum.add(&denote(z).scale(*w)).unwrap();
        }
        prop_assert!(close(&denote(&p), &sum));
    }

    #[test]
    fn step_soundness_along_a_trace(seed in any::<u64>(), depth in 1usize..=3) {
        let (end, _) = sample_traced(&program(seed, depth), seed, DEFAULT_MAX_STEPS).unwrap();
        prop_assert!(end.is_value());
        let mut cur = program(seed, depth);
        while let Step::Reductions(bs) = opsem::step(&cur).unwrap() {
            let lhs = denote(&cur);
            let mut rhs = VnaMorphism::zero(lhs.dom(), lhs.cod());
            for b in &bs {
                rhs = rhs.add(&denote(&b.closure).scale(b.prob)).unwrap();
            }
            prop_assert!(close(&lhs, &rhs), "{cur}");
            cur = bs.into_iter().next().unwrap().closure;
        }
    }

    #[test]
    fn subject_reduction_and_progress(seed in any::<u64>(), depth in 1usize..=3) {
        let p = program(seed, depth);
        let mut ok = true;
        opsem::visit(&p, DEFAULT_MAX_STEPS, &mut |q, bs| {
            if let Some(bs) = bs {
                let t = closure_type(q).unwrap();
                let mass: f64 = bs.iter().map(|b| b.prob).sum();
                ok &= (mass - 1.0).abs() <= TOL && bs.len() <= 2;
                ok &= bs.iter().all(|b| closure_type(&b.closure).ok().as_ref() == Some(&t));
            }
        }).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn denotations_are_cp_and_subunital(seed in any::<u64>(), depth in 1usize..=3) {
        let p = program(seed, depth);
        let f = denote(&p);
        prop_assert!(f.is_cp() && f.is_subunital());
        for (z, _) in opsem::big_step(&p, DEFAULT_MAX_STEPS).unwrap().entries {
            let ctx = Context::qubits(&z.register);
            let v = to_concrete(&interp_term(&ctx, &z.term).unwrap()).unwrap();
            prop_assert!(v.is_miu(), "value {} is not MIU", print_term(&z.term));
        }
    }

    #[test]
    fn beta_redexes_match_contracta(seed in any::<u64>(), depth in 1usize..=2) {
        let pair = ProgramGen::new(seed).beta_pair(depth);
        let eval = |m| to_concrete(&interp_term(&pair.ctx, m).unwrap()).unwrap();
        prop_assert!(close(&eval(&pair.redex), &eval(&pair.contractum)), "{}", print_term(&pair.redex));
    }

    #[test]
    fn context_permutation_is_a_symmetry(seed in any::<u64>(), depth in 1usize..=2) {
        let pair = ProgramGen::new(seed).beta_pair(depth);
        let swapped = Context::qubits(&["y1", "y0"]);
        let f = to_concrete(&interp_term(&pair.ctx, &pair.redex).unwrap()).unwrap();
        let g = to_concrete(&interp_term(&swapped, &pair.redex).unwrap()).unwrap();
        let q = VnaObject::matrix(2);
        prop_assert!(close(&g, &vna::gamma(&q, &q).after(&f).unwrap()));
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), depth in 1usize..=2) {
        let p = program(seed, depth);
        let once = normalize(&interp_closure(&p, &Type::bit()).unwrap()).unwrap();
        prop_assert_eq!(normalize(&once).unwrap(), once);
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>(), depth in 1usize..=4) {
        let m = ProgramGen::new(seed).program(depth);
        let back = parse_term(&print_term(&m)).unwrap();
        prop_assert!(alpha_eq(&m, &back));
    }
}

fn object(max_blocks: usize, max_dim: usize) -> impl Strategy<Value = VnaObject> {
    prop::collection::vec(1usize..=max_dim, 1..=max_blocks).prop_map(VnaObject::new)
}

fn small_object() -> impl Strategy<Value = VnaObject> {
    object(3, 3)
}

fn kraus(n: usize, m: usize) -> impl Strategy<Value = Vec<DMatrix<Complex64>>> {
    let entry = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im));
    prop::collection::vec(prop::collection::vec(entry, n * m).prop_map(move |v| DMatrix::from_vec(n, m, v)), 1..=3)
}

fn kraus_any() -> impl Strategy<Value = Vec<DMatrix<Complex64>>> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| kraus(n, m))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn kraus_maps_are_cp(ks in kraus_any()) {
        prop_assert!(vna::kraus_map(&ks).unwrap().is_cp());
    }

    #[test]
    fn symmetry_is_natural(f in kraus_any(), g in kraus_any()) {
        let (f, g) = (vna::kraus_map(&f).unwrap(), vna::kraus_map(&g).unwrap());
        let lhs = vna::gamma(f.cod(), g.cod()).after(&vna::tensor_mor(&f, &g).unwrap()).unwrap();
        let rhs = vna::tensor_mor(&g, &f).unwrap().after(&vna::gamma(f.dom(), g.dom())).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn tensor_is_functorial(f in kraus_any(), g in kraus(2, 2), h in kraus(2, 2)) {
        let (f, g) = (vna::kraus_map(&f).unwrap(), vna::kraus_map(&g).unwrap());
        let h = vna::kraus_map(&h).unwrap();
        let id = VnaMorphism::identity(f.cod());
        let lhs = vna::tensor_mor(&id, &h).unwrap().after(&vna::tensor_mor(&f, &g).unwrap()).unwrap();
        let rhs = vna::tensor_mor(&f, &h.after(&g).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn distributivity_is_invertible(a in object(2, 2), b in object(2, 2), c in object(2, 2)) {
        let t = vna::theta(&a, &b, &c);
        prop_assert!(t.is_miu());
        prop_assert!(close(&vna::theta_inv(&a, &b, &c).after(&t).unwrap(), &VnaMorphism::identity(t.dom())));
    }

    #[test]
    fn spectrum_of_a_tensor_is_a_product(a in small_object(), b in small_object()) {
        let ab = vna::tensor(&a, &b);
        prop_assert_eq!(vna::nsp(&ab).len(), vna::nsp(&a).len() * vna::nsp(&b).len());
        prop_assert_eq!(vna::nsp(&vna::direct_sum(&a, &b)).len(), vna::nsp(&a).len() + vna::nsp(&b).len());
    }

    #[test]
    fn bang_maps_are_miu(a in small_object(), b in small_object()) {
        prop_assert!(vna::d_l(&a, &b).is_miu() && vna::e_l(&a, &b).is_miu());
        prop_assert!(vna::eta(&a).is_miu() && vna::mu(&a).is_miu());
    }
}
