//! Command implementations behind the `qlc` binary. Every command returns a serializable
//! report; rendering and exit codes live in the binary.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::denot::{interp_closure, to_concrete, DenotError};
use crate::opsem::{self, closure_type, EvalError, Parallelism, QuantumClosure};
use crate::syntax::{parse_program, print_term, print_type, ParseError, Program, Type};
use crate::vna::VnaMorphism;

/// Default adequacy tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("denotation: {0}")]
    Denot(#[from] DenotError),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 2 for problems with the invocation itself, 1 for everything the program is blamed for.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// A parsed program with its closed closure and type.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub name: String,
    pub program: Program,
    pub closure: QuantumClosure,
    pub ty: Type,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    load_source(&path.display().to_string(), &src)
}

pub fn load_source(name: &str, src: &str) -> Result<Loaded, CliError> {
    let program = parse_program(src)?;
    let closure = QuantumClosure::closed(program.term.clone());
    let ty = closure_type(&closure)?;
    Ok(Loaded { name: name.to_string(), program, closure, ty })
}

/// Round to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub program: String,
    #[serde(rename = "type")]
    pub ty: String,
}

pub fn cmd_check(l: &Loaded) -> CheckReport {
    CheckReport { program: l.name.clone(), ty: print_type(&l.ty) }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TraceStep {
    pub rule: String,
    pub prob: f64,
    pub term: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunReport {
    pub program: String,
    pub seed: u64,
    pub value: String,
    pub register: Vec<String>,
    pub state: Vec<[f64; 2]>,
    pub steps: usize,
    pub trace: Vec<TraceStep>,
}

pub fn cmd_run(l: &Loaded, seed: u64, max_steps: usize) -> Result<RunReport, CliError> {
    let (end, trace) = opsem::sample_traced(&l.closure, seed, max_steps)?;
    Ok(RunReport {
        program: l.name.clone(),
        seed,
        value: print_term(&end.term),
        register: end.register.clone(),
        state: amplitudes(&end),
        steps: trace.len(),
        trace: trace
            .into_iter()
            .map(|t| TraceStep { rule: t.rule.to_string(), prob: sig12(t.prob), term: t.term })
            .collect(),
    })
}

fn amplitudes(p: &QuantumClosure) -> Vec<[f64; 2]> {
    p.state.amplitudes().iter().map(|a| [sig12(a.re), sig12(a.im)]).collect()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Outcome {
    pub value: String,
    pub prob: f64,
    pub register: Vec<String>,
    pub state: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EnumerateReport {
    pub program: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub steps: usize,
    pub mass: f64,
    pub outcomes: Vec<Outcome>,
}

pub fn cmd_enumerate(l: &Loaded, max_steps: usize, par: Parallelism) -> Result<EnumerateReport, CliError> {
    let e = opsem::enumerate(&l.closure, max_steps, par)?;
    Ok(EnumerateReport {
        program: l.name.clone(),
        ty: print_type(&l.ty),
        steps: e.steps,
        mass: sig12(e.distribution.mass()),
        outcomes: e
            .distribution
            .entries
            .iter()
            .map(|(c, p)| Outcome {
                value: print_term(&c.term),
                prob: sig12(*p),
                register: c.register.clone(),
                state: amplitudes(c),
            })
            .collect(),
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(untagged)]
pub enum DenoteReport {
    Morphism {
        program: String,
        #[serde(rename = "type")]
        ty: String,
        dom_blocks: Vec<usize>,
        cod_blocks: Vec<usize>,
        matrix: Vec<Vec<[f64; 2]>>,
    },
    Residual {
        program: String,
        #[serde(rename = "type")]
        ty: String,
        residual: String,
    },
}

/// The closed program's denotation `[[A]] -> C`.
pub fn denotation(l: &Loaded) -> Result<VnaMorphism, DenotError> {
    to_concrete(&interp_closure(&l.closure, &l.ty)?)
}

pub fn cmd_denote(l: &Loaded) -> Result<DenoteReport, CliError> {
    let (program, ty) = (l.name.clone(), print_type(&l.ty));
    match denotation(l) {
        Ok(f) => {
            let m = f.matrix();
            Ok(DenoteReport::Morphism {
                program,
                ty,
                dom_blocks: f.dom().blocks.clone(),
                cod_blocks: f.cod().blocks.clone(),
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [sig12(m[(i, j)].re), sig12(m[(i, j)].im)]).collect())
                    .collect(),
            })
        }
        Err(DenotError::Residual(residual)) => Ok(DenoteReport::Residual { program, ty, residual }),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AdequacyReport {
    pub program: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub p_ff: f64,
    pub p_tt: f64,
    pub denot_p_ff: f64,
    pub denot_p_tt: f64,
    pub difference: f64,
    pub tol: f64,
    pub pass: bool,
    pub steps: usize,
    pub operational_ms: f64,
    pub denotational_ms: f64,
}

/// Operational `(P ⇓ ff, P ⇓ tt)` against `[[P]](1,0)` and `[[P]](0,1)`.
pub fn cmd_adequacy(l: &Loaded, tol: f64, max_steps: usize) -> Result<AdequacyReport, CliError> {
    if l.ty != Type::bit() {
        return Err(CliError::Check(format!("adequacy needs a program of type bit, found {}", print_type(&l.ty))));
    }
    let t0 = Instant::now();
    let e = opsem::enumerate(&l.closure, max_steps, Parallelism::Sequential)?;
    let (p_ff, p_tt) = opsem::observe(&l.closure, max_steps)?;
    let operational_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let f = denotation(l)?;
    let denotational_ms = t1.elapsed().as_secs_f64() * 1e3;
    let (d_ff, d_tt) = bit_values(&f)?;
    let difference = (p_ff - d_ff).abs().max((p_tt - d_tt).abs());
    Ok(AdequacyReport {
        program: l.name.clone(),
        ty: print_type(&l.ty),
        p_ff: sig12(p_ff),
        p_tt: sig12(p_tt),
        denot_p_ff: sig12(d_ff),
        denot_p_tt: sig12(d_tt),
        difference,
        tol,
        pass: difference <= tol,
        steps: e.steps,
        operational_ms,
        denotational_ms,
    })
}

/// `(f(1,0), f(0,1))` for `f : C (+) C -> C`.
pub fn bit_values(f: &VnaMorphism) -> Result<(f64, f64), CliError> {
    if f.dom().blocks != [1, 1] || f.cod().blocks != [1] {
        return Err(CliError::Check(format!("expected a map [1, 1] -> [1], found {} -> {}", f.dom(), f.cod())));
    }
    Ok((f.matrix()[(0, 0)].re, f.matrix()[(0, 1)].re))
}
