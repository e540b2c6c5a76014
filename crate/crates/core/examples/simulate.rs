//! Sample executions of a program: one traced run, then a histogram of outcomes over many seeds.
//! The default program teleports `|->`, so measuring the target after `H` always gives `tt`.
//!
//! cargo run --example simulate -- [FILE] [RUNS]

use std::collections::BTreeMap;

use qlc::cli::load_source;
use qlc::opsem::{sample, sample_traced, DEFAULT_MAX_STEPS};
use qlc::syntax::print_term;

const TELEPORT: &str = "
let <a:qbit, b:qbit> = CNOT <H (new ff), new ff> in
let <q:qbit, a2:qbit> = CNOT <H (new tt), a> in
let x:bit = meas (H q) in
let y:bit = meas a2 in
let b1:qbit = if y then X b else b in
let b2:qbit = if x then Z b1 else b1 in
meas (H b2)
";

fn main() {
    let mut args = std::env::args().skip(1);
    let src = match args.next() {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => TELEPORT.to_string(),
    };
    let runs: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let l = load_source("program", &src).expect("well-typed program");

    let (end, trace) = sample_traced(&l.closure, 0, DEFAULT_MAX_STEPS).expect("terminates");
    for t in &trace {
        println!("{t}");
    }
    println!("=> {end}\n");

    let mut hist: BTreeMap<String, u64> = BTreeMap::new();
    for seed in 0..runs {
        let v = sample(&l.closure, seed, DEFAULT_MAX_STEPS).expect("terminates");
        *hist.entry(print_term(&v.term)).or_default() += 1;
    }
    for (v, n) in hist {
        println!("{v:<10} {n:>6}  {:.4}", n as f64 / runs as f64);
    }
}
