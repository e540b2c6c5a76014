//! Completely positive maps between matrix algebras: Kraus constructions, Choi matrices and the
//! positivity test, with the transpose as a positive map that is not completely positive.
//!
//! cargo run --example superoperators

use nalgebra::DMatrix;
use num_complex::Complex64;
use qlc::vna::{self, VnaMorphism};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn report(name: &str, f: &VnaMorphism) {
    println!("== {name}: {} -> {}", f.dom(), f.cod());
    println!("   cp {}  unital {}  subunital {}  miu {}", f.is_cp(), f.is_unital(), f.is_subunital(), f.is_miu());
    for ((i, j), m) in vna::choi_matrices(f) {
        let eig = m.clone().symmetric_eigen().eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("   choi block ({i},{j}) {}x{} min eigenvalue {min:.4}", m.nrows(), m.ncols());
    }
}

fn main() {
    let gamma: f64 = 0.3;
    let damping = vec![
        DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]),
        DMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]),
    ];
    report("amplitude damping", &vna::kraus_map(&damping).expect("Kraus operators"));

    let p: f64 = 0.2;
    let paulis = ["X", "Y", "Z"].map(|g| qlc::syntax::Gate::builtin(g).expect("builtin").matrix);
    let mut dep = vec![DMatrix::<Complex64>::identity(2, 2) * c((1.0 - p).sqrt())];
    dep.extend(paulis.iter().map(|m| &**m * c((p / 3.0).sqrt())));
    report("depolarizing", &vna::kraus_map(&dep).expect("Kraus operators"));

    report("measurement", &vna::f_meas());
    report("transpose", &vna::transpose_map(2));
}
