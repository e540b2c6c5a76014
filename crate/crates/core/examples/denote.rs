//! Denotations of programs as maps between finite-dimensional algebras. Programs whose
//! type contains a function arrow at the top have no concrete matrix and print their residual.
//!
//! cargo run --example denote -- [FILE...]

use qlc::cli::load_source;
use qlc::denot::{interp_closure, normalize, to_concrete, DenotError};

const SAMPLES: &[&str] = &[
    "tt",
    "meas (H (new ff))",
    "new tt",
    "CNOT <H (new ff), new ff>",
    "let f:!(bit -o bit) = (lambda^1 y:bit. if y then ff else meas (H (new ff))) in f^{bit -o bit} (f^{bit -o bit} tt)",
    "lambda x:qbit. H x",
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sources: Vec<String> = if args.is_empty() {
        SAMPLES.iter().map(|s| s.to_string()).collect()
    } else {
        args.iter().map(|f| std::fs::read_to_string(f).expect("readable file")).collect()
    };
    for src in sources {
        let l = load_source("program", &src).expect("well-typed program");
        let ir = interp_closure(&l.closure, &l.ty).expect("interpretation");
        println!("== {} : {}", src.trim(), l.ty);
        println!("   normal form size {}", normalize(&ir).expect("normalizes").size());
        match to_concrete(&ir) {
            Ok(f) => println!("   {} -> {}\n{:.4}", f.dom(), f.cod(), f.matrix()),
            Err(DenotError::Residual(r)) => println!("   residual {r}\n"),
            Err(e) => println!("   error {e}\n"),
        }
    }
}
