//! Operational against denotational output probabilities for every program in a directory.
//!
//! cargo run --release --example adequacy_table -- [DIR] [TOL]

use qlc::cli::{cmd_adequacy, load, DEFAULT_TOL};
use qlc::opsem::DEFAULT_MAX_STEPS;

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/corpus").to_string());
    let tol: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_TOL);
    let mut paths: Vec<_> = std::fs::read_dir(&dir).expect("readable directory").map(|e| e.expect("entry").path()).collect();
    paths.sort();
    println!("{:<24} {:>8} {:>8} {:>8} {:>8} {:>10} {:>6} {:>9} {:>9}", "program", "op ff", "op tt", "den ff", "den tt", "diff", "steps", "op ms", "den ms");
    let mut failed = 0;
    for p in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "qlc")) {
        let name = p.file_stem().unwrap_or_default().to_string_lossy();
        match load(p).and_then(|l| cmd_adequacy(&l, tol, DEFAULT_MAX_STEPS)) {
            Ok(r) => {
                failed += usize::from(!r.pass);
                println!(
                    "{name:<24} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>10.2e} {:>6} {:>9.2} {:>9.2}{}",
                    r.p_ff, r.p_tt, r.denot_p_ff, r.denot_p_tt, r.difference, r.steps, r.operational_ms, r.denotational_ms,
                    if r.pass { "" } else { "  FAIL" }
                );
            }
            Err(e) => println!("{name:<24} skipped: {e}"),
        }
    }
    println!("{failed} failures at tolerance {tol:e}");
}
