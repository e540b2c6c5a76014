//! Duplicators: commutative algebras `C^X` carry exactly one, while `M_2` has no MIU functional
//! and so no normal spectrum to copy along.
//!
//! cargo run --example duplicators

use qlc::vna::{self, VnaObject};

fn main() {
    for k in 1..=4 {
        let s = vna::solve_duplicator(k);
        let x = VnaObject::linf(k);
        let ok = s.solution.as_ref().is_some_and(|m| vna::is_duplicator(&x, m));
        println!(
            "C^{k}: {} unknowns, {} forced to zero, rank {}, unique solution {}, is a duplicator {ok}",
            s.unknowns, s.forced_zero, s.rank, s.solution.is_some()
        );
        if let Some(m) = &s.solution {
            println!("{:.0}", m.matrix());
        }
    }
    for n in 2..=3 {
        let s = vna::solve_miu_functional(n);
        println!(
            "M_{n} -> C: rank {}, forced diagonal {:?}, idempotency residual {:.3}, feasible {}",
            s.rank, s.diagonal, s.idempotency_residual, s.feasible()
        );
    }
    for obj in [VnaObject::linf(3), VnaObject::matrix(2), VnaObject::new(vec![1, 2, 1])] {
        println!("nsp({obj}) = {:?}", vna::nsp(&obj).labels);
    }
}
