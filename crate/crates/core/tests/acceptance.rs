//! One pass/fail line per acceptance criterion. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlc::cli::{self, Loaded};
use qlc::denot::{interp_closure, interp_term, to_concrete};
use qlc::gen::ProgramGen;
use qlc::opsem::{self, closure_type, Parallelism, QuantumClosure, DEFAULT_MAX_STEPS};
use qlc::syntax::print_term;
use qlc::vna::{self, VnaMorphism, VnaObject};

const ADEQUACY_TOL: f64 = 1e-9;
const ADEQUACY_SECONDS: f64 = 10.0;
const MASS_TOL: f64 = 1e-9;
const SOUNDNESS_TOL: f64 = 1e-9;
const SOUNDNESS_MIN_CLOSURES: usize = 100;
const BETA_TOL: f64 = 1e-9;
const BETA_MIN_PAIRS: usize = 50;
const LAW_TOL: f64 = 1e-9;
const KRAUS_MAPS: usize = 200;
const SAMPLES: u64 = 10_000;
const SAMPLE_WINDOW: f64 = 0.03;

fn corpus() -> Vec<Loaded> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "qlc"))
        .collect();
    paths.sort();
    paths.iter().map(|p| cli::load(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).collect()
}

fn short(l: &Loaded) -> String {
    PathBuf::from(&l.name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn closure_denotation(p: &QuantumClosure) -> Result<VnaMorphism, String> {
    let ty = closure_type(p).map_err(|e| e.to_string())?;
    to_concrete(&interp_closure(p, &ty).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn max_diff(a: &VnaMorphism, b: &VnaMorphism) -> f64 {
    a.distance(b).unwrap_or(f64::INFINITY)
}

type Outcome = (bool, String);

fn adequacy(corpus: &[Loaded]) -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut count = 0;
    for l in corpus {
        count += 1;
        match cli::cmd_adequacy(l, ADEQUACY_TOL, DEFAULT_MAX_STEPS) {
            Ok(r) => {
                worst = worst.max(r.difference);
                if !r.pass {
                    bad.push(short(l));
                }
            }
            Err(e) => bad.push(format!("{} ({e})", short(l))),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let names: Vec<String> = corpus.iter().map(short).collect();
    let required = ["teleport", "deutsch_const", "deutsch_balanced", "dup_function"];
    let missing: Vec<&str> = required.iter().copied().filter(|r| !names.iter().any(|n| n == r)).collect();
    let ok = bad.is_empty() && missing.is_empty() && count >= 10 && secs < ADEQUACY_SECONDS;
    (ok, format!("{count} programs, max |diff| {worst:.2e} (tol {ADEQUACY_TOL:e}), {secs:.2}s; failing {bad:?}; missing {missing:?}"))
}

/// Every edge of every corpus reduction tree.
fn edges(corpus: &[Loaded], f: &mut dyn FnMut(&QuantumClosure, &[opsem::Branch])) -> usize {
    let mut visited = 0;
    for l in corpus {
        opsem::visit(&l.closure, DEFAULT_MAX_STEPS, &mut |p, bs| {
            visited += 1;
            if let Some(bs) = bs {
                f(p, bs);
            }
        })
        .expect("enumeration");
    }
    visited
}

fn progress(corpus: &[Loaded]) -> Outcome {
    let (mut worst, mut max_branches, mut bad) = (0.0f64, 0, 0);
    let visited = edges(corpus, &mut |_, bs| {
        let mass: f64 = bs.iter().map(|b| b.prob).sum();
        worst = worst.max((mass - 1.0).abs());
        max_branches = max_branches.max(bs.len());
        if (mass - 1.0).abs() > MASS_TOL || bs.len() > 2 || bs.is_empty() {
            bad += 1;
        }
    });
    (bad == 0, format!("{visited} closures, max |mass - 1| {worst:.2e}, max branches {max_branches}, violations {bad}"))
}

fn subject_reduction(corpus: &[Loaded]) -> Outcome {
    let (mut total, mut kept) = (0, 0);
    edges(corpus, &mut |p, bs| {
        let t = closure_type(p).ok();
        for b in bs {
            total += 1;
            if t.is_some() && closure_type(&b.closure).ok() == t {
                kept += 1;
            }
        }
    });
    (total > 0 && kept == total, format!("{kept}/{total} edges preserve the type"))
}

fn step_soundness(corpus: &[Loaded]) -> Outcome {
    let (mut checked, mut skipped, mut bad, mut worst) = (0, 0, 0, 0.0f64);
    edges(corpus, &mut |p, bs| {
        let lhs = match closure_denotation(p) {
            Ok(f) => f,
            Err(_) => {
                skipped += 1;
                return;
            }
        };
        let mut rhs: Option<VnaMorphism> = None;
        for b in bs {
            let Ok(q) = closure_denotation(&b.closure) else {
                skipped += 1;
                return;
            };
            let term = q.scale(b.prob);
            rhs = Some(match rhs {
                None => term,
                Some(r) => r.add(&term).expect("same shape"),
            });
        }
        let d = rhs.map_or(f64::INFINITY, |r| max_diff(&lhs, &r));
        worst = worst.max(d);
        checked += 1;
        if d > SOUNDNESS_TOL {
            bad += 1;
        }
    });
    (
        checked >= SOUNDNESS_MIN_CLOSURES && bad == 0,
        format!("{checked} closures checked (min {SOUNDNESS_MIN_CLOSURES}), {skipped} not extractable, max diff {worst:.2e}, violations {bad}"),
    )
}

fn beta_equations() -> Outcome {
    let mut g = ProgramGen::new(13);
    let (mut checked, mut bad, mut worst) = (0, Vec::new(), 0.0f64);
    for i in 0..80 {
        let pair = g.beta_pair(1 + i % 2);
        let eval = |m| interp_term(&pair.ctx, m).and_then(|e| to_concrete(&e));
        match (eval(&pair.redex), eval(&pair.contractum)) {
            (Ok(a), Ok(b)) => {
                let d = max_diff(&a, &b);
                worst = worst.max(d);
                checked += 1;
                if d > BETA_TOL {
                    bad.push(print_term(&pair.redex));
                }
            }
            (a, b) => bad.push(format!("{}: {:?} / {:?}", print_term(&pair.redex), a.err(), b.err())),
        }
    }
    (checked >= BETA_MIN_PAIRS && bad.is_empty(), format!("{checked} redex/contractum pairs, max diff {worst:.2e}, failing {bad:?}"))
}

fn all_objects() -> Vec<VnaObject> {
    let mut out = Vec::new();
    let mut cur: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..4 {
        let next: Vec<Vec<usize>> = cur.iter().flat_map(|b| (1..=3).map(move |n| [b.clone(), vec![n]].concat())).collect();
        out.extend(next.iter().cloned().map(VnaObject::new));
        cur = next;
    }
    out
}

fn is_identity(f: &VnaMorphism) -> bool {
    f.dom() == f.cod() && f.approx_eq(&VnaMorphism::identity(f.dom()), LAW_TOL)
}

fn law_suite() -> Outcome {
    let objects = all_objects();
    let mut failures: Vec<String> = Vec::new();
    let mut checks = 0;
    let mut check = |ok: bool, what: String| {
        checks += 1;
        if !ok && failures.len() < 5 {
            failures.push(what);
        }
    };
    for a in &objects {
        let la = vna::l_obj(a);
        let mu = vna::mu(a);
        check(is_identity(&mu.after(&vna::eta(&la)).expect("compose")), format!("mu . eta_L at {a}"));
        check(is_identity(&mu.after(&vna::l_mor(&vna::eta(a)).expect("eta is MIU")).expect("compose")), format!("mu . L eta at {a}"));
        let lmu = vna::l_mor(&mu).expect("mu is MIU");
        check(mu.after(&lmu).expect("compose").approx_eq(&mu.after(&vna::mu(&la)).expect("compose"), LAW_TOL), format!("mu associativity at {a}"));
        check(vna::eta(a).is_miu(), format!("eta MIU at {a}"));
        for (b, &n) in a.blocks.iter().enumerate() {
            if n == 1 {
                let p = vna::point(a, b).expect("point");
                let lhs = vna::l_mor(&p).expect("points are MIU").after(&vna::eta(a)).expect("compose");
                let rhs = vna::eta(&VnaObject::scalar()).after(&p).expect("compose");
                check(lhs.approx_eq(&rhs, LAW_TOL), format!("eta naturality at point {b} of {a}"));
            }
        }
        let u = vna::unit_map(a);
        let lhs = vna::l_mor(&u).expect("unit is MIU").after(&vna::eta(&VnaObject::scalar())).expect("compose");
        check(lhs.approx_eq(&vna::eta(a).after(&u).expect("compose"), LAW_TOL), format!("eta naturality at unit of {a}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let small: Vec<&VnaObject> = objects.iter().filter(|o| o.dim() <= 10).collect();
    for _ in 0..150 {
        let a = small[rng.gen_range(0..small.len())];
        let b = small[rng.gen_range(0..small.len())];
        let c = small[rng.gen_range(0..small.len())];
        let inv = |f: &VnaMorphism, g: &VnaMorphism| is_identity(&f.after(g).expect("compose")) && is_identity(&g.after(f).expect("compose"));
        check(inv(&vna::d_l(a, b), &vna::d_l_inv(a, b)), format!("d^L iso at {a}, {b}"));
        check(inv(&vna::e_l(a, b), &vna::e_l_inv(a, b)), format!("e^L iso at {a}, {b}"));
        check(inv(&vna::theta(a, b, c), &vna::theta_inv(a, b, c)), format!("theta iso at {a}, {b}, {c}"));
        check(inv(&vna::gamma(a, b), &vna::gamma(b, a)), format!("gamma involution at {a}, {b}"));
        check(vna::d_l(a, b).is_miu() && vna::e_l(a, b).is_miu() && vna::theta(a, b, c).is_miu(), format!("isos MIU at {a}, {b}, {c}"));
        // points of a direct sum factor through one summand, bijectively
        let sum = vna::direct_sum(a, b);
        let via: Vec<VnaMorphism> = [(a, 0), (b, 1)]
            .iter()
            .flat_map(|(o, w)| {
                let pr = vna::proj(a, b, *w);
                (0..o.blocks.len()).filter(|&k| o.blocks[k] == 1).map(move |k| vna::point(o, k).expect("point").after(&pr).expect("compose"))
            })
            .collect();
        let sum_points: Vec<VnaMorphism> = (0..sum.blocks.len()).filter(|&k| sum.blocks[k] == 1).map(|k| vna::point(&sum, k).expect("point")).collect();
        check(bijective(&via, &sum_points), format!("spectrum of {a} (+) {b}"));
        // points of a tensor are exactly the products of points, bijectively
        let prod = vna::tensor(a, b);
        let mut pairs = Vec::new();
        for i in (0..a.blocks.len()).filter(|&k| a.blocks[k] == 1) {
            for j in (0..b.blocks.len()).filter(|&k| b.blocks[k] == 1) {
                let (p, q) = (vna::point(a, i).expect("point"), vna::point(b, j).expect("point"));
                pairs.push(vna::tensor_mor(&p, &q).expect("tensor of maps"));
            }
        }
        let prod_points: Vec<VnaMorphism> = (0..prod.blocks.len()).filter(|&k| prod.blocks[k] == 1).map(|k| vna::point(&prod, k).expect("point")).collect();
        check(bijective(&pairs, &prod_points), format!("spectrum of {a} (x) {b}"));
    }
    let (agree, total) = kraus_oracle();
    check(agree == total, format!("is_cp vs Kraus oracle {agree}/{total}"));
    (failures.is_empty(), format!("{checks} law checks over {} objects, is_cp agrees on {agree}/{total} maps; failing {failures:?}", objects.len()))
}

/// Each element of `xs` matches exactly one element of `ys` and the sizes agree.
fn bijective(xs: &[VnaMorphism], ys: &[VnaMorphism]) -> bool {
    xs.len() == ys.len() && xs.iter().all(|x| ys.iter().filter(|y| y.approx_eq(x, LAW_TOL)).count() == 1)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(r, c, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Maps `A |-> sum_k c_k K_k* A K_k` with random signs. The oracle computes the Choi matrix
/// from the action on matrix units and declares the map CP iff a real Cholesky factorization of
/// it exists; when every sign is positive the Kraus form itself certifies CP.
fn kraus_oracle() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut agree = 0;
    for _ in 0..KRAUS_MAPS {
        let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let terms = rng.gen_range(1..=3);
        let mut f: Option<VnaMorphism> = None;
        let mut all_positive = true;
        for _ in 0..terms {
            let k = random_matrix(&mut rng, n, m);
            let sign = if rng.gen_bool(0.4) { -1.0 } else { 1.0 };
            all_positive &= sign > 0.0;
            let g = vna::kraus_map(&[k]).expect("kraus").scale(sign);
            f = Some(match f {
                None => g,
                Some(f) => f.add(&g).expect("same shape"),
            });
        }
        let f = f.expect("at least one term");
        let choi = DMatrix::from_fn(n * m, n * m, |row, col| {
            let (r, p) = (row / m, row % m);
            let (c, q) = (col / m, col % m);
            let e = vna::VnaElement::basis(f.dom(), r + c * n);
            f.apply(&e).to_vector()[p + q * m]
        });
        // a Hermitian A + iB is PSD iff the real symmetric [[A, -B], [B, A]] is
        let d = n * m;
        let real = DMatrix::<f64>::from_fn(2 * d, 2 * d, |r, c| {
            let z = choi[(r % d, c % d)];
            match (r < d, c < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let oracle = (real + DMatrix::<f64>::identity(2 * d, 2 * d) * 1e-10).cholesky().is_some();
        let oracle = if all_positive { assert!(oracle, "Kraus form is CP"); true } else { oracle };
        if oracle == f.is_cp() {
            agree += 1;
        }
    }
    (agree, KRAUS_MAPS)
}

fn duplicators() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in 1..=3 {
        let s = vna::solve_duplicator(k);
        let x = VnaObject::linf(k);
        let pointwise = vna::nabla(&x).expect("pointwise multiplication");
        let unique = s.solution.as_ref().is_some_and(|m| m.approx_eq(&pointwise, LAW_TOL) && vna::is_duplicator(&x, m));
        ok &= unique;
        notes.push(format!("|X|={k}: rank {}/{} unique={unique}", s.rank, s.unknowns - s.forced_zero));
    }
    let miu = vna::solve_miu_functional(2);
    let infeasible = !miu.feasible() && miu.rank == 2;
    let empty = vna::nsp(&VnaObject::matrix(2)).is_empty();
    ok &= infeasible && empty;
    notes.push(format!("M_2 -> C: rank {} residual {:.3} infeasible={infeasible}, nsp empty={empty}", miu.rank, miu.idempotency_residual));
    (ok, notes.join("; "))
}

type Fingerprint = Vec<(String, Vec<String>, u64, Vec<(u64, u64)>)>;

fn fingerprint(e: &opsem::Enumeration) -> Fingerprint {
    e.distribution
        .entries
        .iter()
        .map(|(c, p)| {
            let amps = c.state.amplitudes().iter().map(|a| (a.re.to_bits(), a.im.to_bits())).collect();
            (print_term(&c.term), c.register.clone(), p.to_bits(), amps)
        })
        .collect()
}

fn determinism(corpus: &[Loaded]) -> Outcome {
    let modes = [Parallelism::Sequential, Parallelism::Sequential, Parallelism::Threads(1), Parallelism::Threads(2), Parallelism::Threads(8)];
    let mut bad = Vec::new();
    for l in corpus {
        let runs: Vec<_> = modes.iter().map(|m| fingerprint(&opsem::enumerate(&l.closure, DEFAULT_MAX_STEPS, *m).expect("enumeration"))).collect();
        let json: Vec<String> = [Parallelism::Sequential, Parallelism::Threads(4)]
            .iter()
            .map(|m| serde_json::to_string(&cli::cmd_enumerate(l, DEFAULT_MAX_STEPS, *m).expect("enumeration")).expect("json"))
            .collect();
        if runs.windows(2).any(|w| w[0] != w[1]) || json[0] != json[1] {
            bad.push(short(l));
        }
    }
    (bad.is_empty(), format!("{} programs x {} schedules, differing {bad:?}", corpus.len(), modes.len()))
}

fn sampling(corpus: &[Loaded]) -> Outcome {
    let coin = corpus.iter().find(|l| short(l) == "coin").expect("coin program");
    let ff = (0..SAMPLES)
        .filter(|&seed| {
            let end = opsem::sample(&coin.closure, seed, DEFAULT_MAX_STEPS).expect("sample");
            print_term(&end.term).starts_with("ff")
        })
        .count();
    let freq = ff as f64 / SAMPLES as f64;
    ((freq - 0.5).abs() <= SAMPLE_WINDOW, format!("{SAMPLES} samples, ff frequency {freq:.4} (window 0.5 +- {SAMPLE_WINDOW})"))
}

fn main() {
    let corpus = corpus();
    let results: Vec<(&str, Outcome)> = vec![
        ("adequacy", adequacy(&corpus)),
        ("progress", progress(&corpus)),
        ("subject reduction", subject_reduction(&corpus)),
        ("step soundness", step_soundness(&corpus)),
        ("beta equations", beta_equations()),
        ("vna laws", law_suite()),
        ("duplicators", duplicators()),
        ("determinism", determinism(&corpus)),
        ("sampling", sampling(&corpus)),
    ];
    let mut failed = 0;
    for (i, (name, (ok, detail))) in results.iter().enumerate() {
        println!("criterion {} {:<18} {}  {detail}", i + 1, name, if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
