//! Exhaustive output distributions, with the final quantum register of every outcome.
//!
//! cargo run --example enumerate -- [FILE...]

use qlc::cli::load;
use qlc::opsem::{enumerate, Parallelism, DEFAULT_MAX_STEPS};
use qlc::syntax::print_term;

fn main() {
    let mut files: Vec<String> = std::env::args().skip(1).collect();
    if files.is_empty() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
        files = ["bell_joint", "teleport", "sum_qbit_match"].iter().map(|n| format!("{dir}/{n}.qlc")).collect();
    }
    for f in files {
        let l = load(f.as_ref()).expect("well-typed program");
        let seq = enumerate(&l.closure, DEFAULT_MAX_STEPS, Parallelism::Sequential).expect("terminates");
        let par = enumerate(&l.closure, DEFAULT_MAX_STEPS, Parallelism::Threads(4)).expect("terminates");
        println!("== {f} : {}  ({} steps, mass {:.12})", l.ty, seq.steps, seq.distribution.mass());
        for (c, p) in &seq.distribution.entries {
            let amps: Vec<String> = c
                .state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 1e-12)
                .map(|(i, a)| format!("({:.3}{:+.3}i)|{i:0w$b}>", a.re, a.im, w = c.register.len()))
                .collect();
            println!("  {p:.6}  {:<24} [{}] {}", print_term(&c.term), c.register.join(" "), amps.join(" + "));
        }
        println!("  threaded enumeration agrees: {}\n", seq.distribution == par.distribution);
    }
}
