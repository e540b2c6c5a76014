//! Generate random closed programs of type bit and compare their operational and
//! denotational output distributions.
//!
//! cargo run --release --example random_programs -- [COUNT] [DEPTH] [SEED]

use qlc::cli::bit_values;
use qlc::denot::{interp_closure, to_concrete};
use qlc::gen::ProgramGen;
use qlc::opsem::{observe, QuantumClosure, DEFAULT_MAX_STEPS};
use qlc::syntax::{print_term, Type};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (count, depth, seed) = (args.first().copied().unwrap_or(50), args.get(1).copied().unwrap_or(3), args.get(2).copied().unwrap_or(7));
    let mut g = ProgramGen::new(seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for i in 0..count {
        let p = QuantumClosure::closed(g.bounded_program(depth as usize, 14));
        let (ff, tt) = observe(&p, DEFAULT_MAX_STEPS).expect("operational run");
        let f = match to_concrete(&interp_closure(&p, &Type::bit()).expect("interpretation")) {
            Ok(f) => f,
            Err(e) => {
                println!("NO DENOTATION #{i}: {e}\n  {}", print_term(&p.term));
                failures += 1;
                continue;
            }
        };
        let (dff, dtt) = bit_values(&f).expect("bit-typed denotation");
        let diff = (ff - dff).abs().max((tt - dtt).abs());
        worst = worst.max(diff);
        if diff > 1e-9 {
            failures += 1;
            println!("MISMATCH #{i}: {} op ({ff}, {tt}) denot ({dff}, {dtt})", print_term(&p.term));
        }
    }
    println!("{count} programs, {failures} failures, worst difference {worst:e}");
}
