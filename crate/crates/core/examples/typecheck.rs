//! Typecheck terms and print their derivation trees, or the reason they are rejected.
//!
//! cargo run --example typecheck -- [FILE]

use qlc::syntax::{parse_program, print_term, Context};
use qlc::typing::{typecheck, Derivation};

const SAMPLES: &[&str] = &[
    "meas (H (new ff))",
    "lambda x:qbit. let <a:qbit, b:qbit> = CNOT <x, new ff> in <a, b>",
    "let f:!(bit -o bit) = (lambda^1 y:bit. if y then ff else tt) in f^{bit -o bit} (f^{bit -o bit} tt)",
    "lambda x:qbit. <x, x>",
    "lambda x:bit. <x, x>",
    "match inl[qbit, bit] (new tt) with (q:qbit -> meas q | b:bit -> b)",
];

fn show(d: &Derivation, depth: usize) {
    println!("{:indent$}{:<6} {} : {}", "", d.rule.to_string(), print_term(&d.term), d.ty, indent = 2 * depth);
    for p in &d.premises {
        show(p, depth + 1);
    }
}

fn main() {
    let sources: Vec<String> = match std::env::args().nth(1) {
        Some(path) => vec![std::fs::read_to_string(&path).expect("readable file")],
        None => SAMPLES.iter().map(|s| s.to_string()).collect(),
    };
    for src in sources {
        println!("== {}", src.trim());
        match parse_program(&src) {
            Err(e) => println!("parse error at {e}"),
            Ok(p) => match typecheck(&Context::new(), &p.term) {
                Ok(d) => show(&d, 0),
                Err(e) => println!("rejected: {e}"),
            },
        }
        println!();
    }
}
