use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qlc::cli::{self, CliError, DenoteReport, Loaded, DEFAULT_TOL};
use qlc::opsem::{Parallelism, DEFAULT_MAX_STEPS};

#[derive(Parser)]
#[command(name = "qlc", version, about = "Typecheck, run and interpret quantum lambda calculus programs")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for `run`
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on small steps
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Adequacy tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Emit JSON
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for `enumerate` (0 = sequential)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of a closed program
    Check { file: PathBuf },
    /// Sample one execution
    Run { file: PathBuf },
    /// Enumerate the output distribution
    Enumerate { file: PathBuf },
    /// Print the denotation as a matrix
    Denote { file: PathBuf },
    /// Compare operational and denotational probabilities of a bit-typed program
    Adequacy { file: PathBuf },
}

fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce(&T) -> String) {
    let out = if json { serde_json::to_string_pretty(report).expect("reports serialize") } else { text(report) };
    // a closed pipe (e.g. `| head`) is not an error
    let _ = writeln!(std::io::stdout().lock(), "{out}");
}

fn run(args: &Args) -> Result<bool, CliError> {
    let file = match &args.cmd {
        Cmd::Check { file } | Cmd::Run { file } | Cmd::Enumerate { file } | Cmd::Denote { file } | Cmd::Adequacy { file } => file,
    };
    let l: Loaded = cli::load(file)?;
    match &args.cmd {
        Cmd::Check { .. } => emit(args.json, &cli::cmd_check(&l), |r| r.ty.clone()),
        Cmd::Run { .. } => emit(args.json, &cli::cmd_run(&l, args.seed, args.max_steps)?, |r| {
            let mut s = String::new();
            for t in &r.trace {
                s.push_str(&format!("{:<8} {:<14} {}\n", t.rule, t.prob, t.term));
            }
            s + &format!("value: {}  register: |{}|", r.value, r.register.join(" "))
        }),
        Cmd::Enumerate { .. } => {
            let par = if args.threads == 0 { Parallelism::Sequential } else { Parallelism::Threads(args.threads) };
            emit(args.json, &cli::cmd_enumerate(&l, args.max_steps, par)?, |r| {
                let lines: Vec<String> =
                    r.outcomes.iter().map(|o| format!("{:<14} {}  |{}|", o.prob, o.value, o.register.join(" "))).collect();
                format!("{}\n({} steps, mass {})", lines.join("\n"), r.steps, r.mass)
            })
        }
        Cmd::Denote { .. } => {
            let r = cli::cmd_denote(&l)?;
            let residual = matches!(r, DenoteReport::Residual { .. });
            emit(args.json, &r, |r| match r {
                DenoteReport::Morphism { dom_blocks, cod_blocks, matrix, .. } => {
                    let rows: Vec<String> = matrix
                        .iter()
                        .map(|row| row.iter().map(|[re, im]| if *im == 0.0 { format!("{re}") } else { format!("{re}{im:+}i") }).collect::<Vec<_>>().join("  "))
                        .collect();
                    format!("{dom_blocks:?} -> {cod_blocks:?}\n{}", rows.join("\n"))
                }
                DenoteReport::Residual { residual, .. } => format!("residual: {residual}"),
            });
            return Ok(!residual);
        }
        Cmd::Adequacy { .. } => {
            let r = cli::cmd_adequacy(&l, args.tol, args.max_steps)?;
            let pass = r.pass;
            emit(args.json, &r, |r| {
                format!(
                    "operational   ff {}  tt {}\ndenotational  ff {}  tt {}\ndifference {:e} ({})",
                    r.p_ff,
                    r.p_tt,
                    r.denot_p_ff,
                    r.denot_p_tt,
                    r.difference,
                    if r.pass { "pass" } else { "FAIL" }
                )
            });
            return Ok(pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qlc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
