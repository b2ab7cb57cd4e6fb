//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the test fails if any criterion does.

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sygus::dispatch::{solve, SolverConfig, Strategy};
use sygus::enumerator::{EnumConfig, Enumerator};
use sygus::frontend::{load_problem, parse_solutions, parse_sygus, parse_term};
use sygus::grammar::{embed_grammar, grammar_for};
use sygus::lia::{qf_lia_sat, LiaResult};
use sygus::problem::{Engine, Solution, SyGuSProblem, SynthOutcome};
use sygus::rewrite::rewrite;
use sygus::single_invocation::{cegqi_solve, detect_single_invocation, Cegqi, CegqiBudget};
use sygus::term::{and_all, evaluate, not, Env, Op, Sort, Symbol, Term, Value};
use sygus::verifier::{check_candidate, VerifyConfig};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solved(outcome: &SynthOutcome) -> Result<&Solution, String> {
    match outcome {
        SynthOutcome::Solved(s) => Ok(s),
        other => Err(format!("expected a solution, got {other:?}")),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

fn run_strategy(problem: &SyGuSProblem, strategy: Strategy) -> (SynthOutcome, Duration) {
    let cfg = SolverConfig {
        strategy,
        ..SolverConfig::default()
    };
    let (report, took) = timed(|| solve(problem, &cfg).expect("solvable input"));
    (report.outcome, took)
}

fn all_true(cs: &[Term], env: &Env) -> Result<(), String> {
    for c in cs {
        match evaluate(c, env) {
            Ok(Value::Bool(true)) => {}
            other => return Err(format!("{c} is {other:?} at {env}")),
        }
    }
    Ok(())
}

// 1 -------------------------------------------------------------------------

const PLUS100: &str = "(set-logic LIA)
(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int (x (+ S C))) (C Int ((Constant Int)))))
(declare-var x Int)
(constraint (> (f x) (+ x 100)))
(check-synth)";

fn criterion_constant_repair() -> Check {
    let p = load_problem(PLUS100).unwrap();
    let (outcome, took) = run_strategy(&p, Strategy::Auto);
    let s = solved(&outcome)?;
    ensure(took <= Duration::from_secs(5), || format!("took {took:?}"))?;
    let body = &s.bodies[0].1;
    let x = Term::var("x", Sort::Int);
    let c = match (body.op(), body.children()) {
        (Some(Op::Add), [a, b]) if *a == x => b.as_value().and_then(|v| v.as_int()).cloned(),
        (Some(Op::Add), [a, b]) if *b == x => a.as_value().and_then(|v| v.as_int()).cloned(),
        _ => None,
    };
    let c = c.ok_or_else(|| format!("body {body} is not x + c"))?;
    ensure(c >= 101.into(), || format!("c = {c}"))?;
    // Exact validity: the negated constraint has no integer model.
    for witness in [body.clone(), parse_term("(+ x 101)", &[("x".into(), Sort::Int)]).unwrap()] {
        let cs = p.substitute_solution(&Solution::single("f".into(), witness.clone(), Engine::Enumerative));
        match qf_lia_sat(&not(and_all(cs))) {
            Ok(LiaResult::Unsat) => {}
            other => return Err(format!("{witness} is not exactly valid: {other:?}")),
        }
    }
    Ok(format!("{body} in {took:?}"))
}

// 2 -------------------------------------------------------------------------

const MAX2: &str = "(set-logic LIA)
(synth-fun max2 ((x Int) (y Int)) Int)
(declare-var a Int)
(declare-var b Int)
(constraint (>= (max2 a b) a))
(constraint (>= (max2 a b) b))
(constraint (or (= a (max2 a b)) (= b (max2 a b))))
(check-synth)";

fn criterion_max2() -> Check {
    let p = load_problem(MAX2).unwrap();
    let (outcome, took) = run_strategy(&p, Strategy::Auto);
    let s = solved(&outcome)?;
    ensure(s.engine == Engine::SingleInvocation, || format!("engine {}", s.engine))?;
    ensure(took <= Duration::from_secs(1), || format!("took {took:?}"))?;
    let body = &s.bodies[0].1;
    for a in -10..=10i64 {
        for b in -10..=10i64 {
            let env = Env::new().with("x", Value::int(a)).with("y", Value::int(b));
            let got = evaluate(body, &env).map_err(|e| e.to_string())?;
            ensure(got == Value::int(a.max(b)), || format!("max2({a},{b}) = {got}"))?;
        }
    }
    let si = detect_single_invocation(&p).ok_or("not single-invocation")?;
    let mut stats = Default::default();
    let gamma = match cegqi_solve(&si, &CegqiBudget::default(), &Default::default(), &mut stats) {
        Cegqi::Closed(g) => g,
        other => return Err(format!("instantiation ended with {other:?}")),
    };
    let refuted = and_all(gamma.iter().map(|t| not(si.instance(t))).collect());
    ensure(matches!(qf_lia_sat(&refuted), Ok(LiaResult::Unsat)), || {
        format!("instances {gamma:?} do not close")
    })?;
    Ok(format!("{body} with {} instances in {took:?}", gamma.len()))
}

// 3 -------------------------------------------------------------------------

/// Every term of `S := x | 0 | 1 | (+ S S)` up to `max` nodes.
fn plus_terms(max: usize) -> Vec<Term> {
    let x = Term::var("x", Sort::Int);
    let mut by_size: Vec<Vec<Term>> = vec![vec![]; max + 1];
    by_size[1] = vec![x, Term::int(0), Term::int(1)];
    for k in 3..=max {
        let mut out = Vec::new();
        for l in 1..k - 1 {
            for a in &by_size[l] {
                for b in &by_size[k - 1 - l] {
                    out.push(Term::app(Op::Add, vec![a.clone(), b.clone()]).unwrap());
                }
            }
        }
        by_size[k] = out;
    }
    by_size.concat()
}

fn signature(t: &Term, xs: &[i64]) -> Vec<Value> {
    xs.iter()
        .map(|&x| evaluate(t, &Env::new().with("x", Value::int(x))).unwrap())
        .collect()
}

fn criterion_enumerator() -> Check {
    let (res, took) = timed(|| -> Result<usize, String> {
        let xs: Vec<i64> = (-2..=2).collect();
        let oracle: BTreeSet<Vec<Value>> = plus_terms(4).iter().map(|t| signature(t, &xs)).collect();
        let p = parse_sygus("(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S)))))").unwrap();
        let decl = &p.synth_funs[0];
        let g = Arc::new(embed_grammar(decl.grammar.as_ref().unwrap(), &decl.params).unwrap());
        let points = xs.iter().map(|&x| vec![Value::int(x)]).collect();
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), points);
        let mut sigs = BTreeSet::new();
        let mut keys = HashSet::new();
        let mut yielded = 0;
        while let Ok(t) = e.next_candidate() {
            if t.size() > 4 {
                break;
            }
            let term = g.unembed(&t).map_err(|e| e.to_string())?;
            let sig = signature(&term, &xs);
            ensure(keys.insert((sig.clone(), rewrite(&term))), || format!("{term} repeats"))?;
            sigs.insert(sig);
            yielded += 1;
        }
        ensure(sigs == oracle, || format!("{} signatures vs {} brute force", sigs.len(), oracle.len()))?;
        Ok(yielded)
    });
    let yielded = res?;
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!("{yielded} terms match brute force in {took:?}"))
}

// 4 -------------------------------------------------------------------------

/// All terms of `S := x | 0 | 1 | (+ S S) | (- S S) | (ite (<= S S) S S)`
/// using at most `max` productions.
fn six_production_terms(max: usize) -> Vec<Term> {
    let x = Term::var("x", Sort::Int);
    let mut by_size: Vec<Vec<Term>> = vec![vec![]; max + 1];
    by_size[1] = vec![x, Term::int(0), Term::int(1)];
    for k in 2..=max {
        let mut out = Vec::new();
        for l in 1..k - 1 {
            for a in &by_size[l] {
                for b in &by_size[k - 1 - l] {
                    for op in [Op::Add, Op::Sub] {
                        out.push(Term::app(op, vec![a.clone(), b.clone()]).unwrap());
                    }
                }
            }
        }
        // ite with four subterms whose sizes sum to k - 1
        for s1 in 1..k {
            for s2 in 1..k {
                for s3 in 1..k {
                    let used = s1 + s2 + s3;
                    if used + 1 >= k {
                        continue;
                    }
                    let s4 = k - 1 - used;
                    for a in &by_size[s1] {
                        for b in &by_size[s2] {
                            let cond = Term::app(Op::Le, vec![a.clone(), b.clone()]).unwrap();
                            for t in &by_size[s3] {
                                for e in &by_size[s4] {
                                    out.push(Term::app(Op::Ite, vec![cond.clone(), t.clone(), e.clone()]).unwrap());
                                }
                            }
                        }
                    }
                }
            }
        }
        by_size[k] = out;
    }
    by_size.concat()
}

fn criterion_rewriter() -> Check {
    let terms = six_production_terms(5);
    let xs: Vec<i64> = (-6..=6).collect();
    let mut violations = Vec::new();
    for t in &terms {
        let r = rewrite(t);
        if signature(t, &xs) != signature(&r, &xs) {
            violations.push(format!("{t} => {r} changes value"));
        }
        if rewrite(&r) != r {
            violations.push(format!("{t} => {r} is not a fixpoint"));
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("{} terms, 0 violations", terms.len()))
}

// 5 -------------------------------------------------------------------------

const FIRST_WORD: &str = r#"(set-logic SLIA)
(synth-fun f ((x String)) String
  ((S String) (I Int))
  ((S String (x " " (str.++ S S) (str.substr S I I)))
   (I Int (0 1 (str.indexof S S I)))))
(constraint (= (f "John Smith") "John"))
(constraint (= (f "Ada Lovelace") "Ada"))
(constraint (= (f "Alan Turing") "Alan"))
(constraint (= (f "Grace Hopper") "Grace"))
(check-synth)"#;

fn criterion_pbe() -> Check {
    let p = load_problem(FIRST_WORD).unwrap();
    let (outcome, took) = run_strategy(&p, Strategy::Auto);
    let s = solved(&outcome)?;
    ensure(took <= Duration::from_secs(30), || format!("took {took:?}"))?;
    let body = &s.bodies[0].1;
    for (input, want) in [("John Smith", "John"), ("Ada Lovelace", "Ada"), ("Alan Turing", "Alan"), ("Grace Hopper", "Grace")] {
        let got = evaluate(body, &Env::new().with("x", Value::str(input))).map_err(|e| e.to_string())?;
        ensure(got == Value::str(want), || format!("f({input:?}) = {got}"))?;
    }
    let g = grammar_for(&p, &p.synth_funs[0]).unwrap();
    ensure(g.derive(g.start(), body).is_some(), || format!("{body} is not in the grammar"))?;
    Ok(format!("{body} in {took:?}"))
}

// 6 -------------------------------------------------------------------------

const COUNTER: &str = "(set-logic LIA)
(synth-inv inv ((x Int)))
(define-fun pre ((x Int)) Bool (= x 0))
(define-fun trans ((x Int) (x! Int)) Bool (and (< x 10) (= x! (+ x 1))))
(define-fun post ((x Int)) Bool (<= x 10))
(inv-constraint inv pre trans post)
(check-synth)";

fn criterion_invariant() -> Check {
    let p = load_problem(COUNTER).unwrap();
    ensure(p.constraints.len() == 3, || format!("{} expanded constraints", p.constraints.len()))?;
    let info = p.invariant.as_ref().unwrap();
    let mut found = Vec::new();
    for strategy in [Strategy::Fast, Strategy::Unif] {
        let (outcome, took) = run_strategy(&p, strategy);
        let s = solved(&outcome).map_err(|e| format!("{strategy}: {e}"))?;
        ensure(took <= Duration::from_secs(10), || format!("{strategy} took {took:?}"))?;
        let cs = p.substitute_solution(s);
        for x in -20..=20 {
            for x2 in -20..=20 {
                let env = Env::new()
                    .with(info.vars[0].0.clone(), Value::int(x))
                    .with(info.primed[0].0.clone(), Value::int(x2));
                all_true(&cs, &env).map_err(|e| format!("{strategy}: {e}"))?;
            }
        }
        found.push(format!("{strategy}: {} ({took:?})", s.bodies[0].1));
    }
    Ok(found.join(", "))
}

// 7 and 9 -------------------------------------------------------------------

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("benchmarks");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "sl"))
        .collect();
    files.sort();
    files
}

/// Runs the binary over the corpus; returns per-file stdout.
fn run_corpus() -> Vec<(PathBuf, String)> {
    corpus()
        .into_iter()
        .map(|f| {
            let out = Command::new(env!("CARGO_BIN_EXE_sygus"))
                .args(["--quiet", "--seed", "0", "--timeout-ms", "30000"])
                .arg(&f)
                .output()
                .expect("binary runs");
            (f, String::from_utf8(out.stdout).unwrap())
        })
        .collect()
}

/// Values tried for each universal variable by the independent checker.
fn box_values(sort: Sort, p: &SyGuSProblem) -> Vec<Value> {
    match sort {
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Sort::Int => (-12..=12).map(Value::int).collect(),
        Sort::BitVec(w) => {
            let n = 1u64 << w.min(8);
            let mut v: Vec<Value> = (0..n).map(|b| Value::bv(w, b)).collect();
            if w > 8 {
                v.push(Value::bv(w, u64::MAX));
            }
            v
        }
        Sort::String => {
            let mut v: BTreeSet<String> = ["", " ", "a", "ab", "a b", "  x", "hello world"].iter().map(|s| s.to_string()).collect();
            for lit in p.literals() {
                if let Value::Str(s) = lit {
                    v.insert(s.clone());
                    v.insert(format!("{s}{s}"));
                    v.insert(format!("a{s}"));
                }
            }
            v.into_iter().map(Value::Str).collect()
        }
    }
}

/// Evaluates the constraints on every point of a fixed box, separately from
/// the solver's verifier.
fn independent_check(p: &SyGuSProblem, cs: &[Term]) -> Result<usize, String> {
    let vars: Vec<(Symbol, Vec<Value>)> =
        p.universal_vars.iter().map(|(n, s)| (n.clone(), box_values(*s, p))).collect();
    let total: usize = vars.iter().map(|(_, d)| d.len()).product();
    let stride = (total / 200_000).max(1);
    let mut idx = vec![0usize; vars.len()];
    let mut checked = 0;
    for k in 0..total {
        if k % stride == 0 {
            let env: Env = vars.iter().zip(&idx).map(|((n, d), &i)| (n.clone(), d[i].clone())).collect();
            all_true(cs, &env)?;
            checked += 1;
        }
        for (j, (_, d)) in vars.iter().enumerate() {
            idx[j] += 1;
            if idx[j] < d.len() {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(checked)
}

fn criterion_soundness(runs: &[(PathBuf, String)]) -> Check {
    ensure(runs.len() >= 25, || format!("only {} benchmarks", runs.len()))?;
    let mut logics = BTreeSet::new();
    let (mut solved_n, mut infeasible_n, mut unknown_n) = (0, 0, 0);
    for (file, stdout) in runs {
        let name = file.file_name().unwrap().to_string_lossy().to_string();
        let p = load_problem(&std::fs::read_to_string(file).unwrap()).unwrap();
        logics.insert(if p.is_invariant_problem() { "INV".to_string() } else { p.logic.clone() });
        match stdout.trim() {
            "infeasible" => infeasible_n += 1,
            "unknown" | "" => unknown_n += 1,
            text => {
                let defs = parse_solutions(text, &p).map_err(|e| format!("{name}: {e}"))?;
                let (fname, body) = defs.into_iter().next().ok_or(format!("{name}: empty output"))?;
                let sol = Solution::single(fname, body, Engine::Enumerative);
                ensure(check_candidate(&p, &sol, &VerifyConfig::default()).is_valid(), || {
                    format!("{name}: solver verifier rejects its own answer")
                })?;
                independent_check(&p, &p.substitute_solution(&sol)).map_err(|e| format!("{name}: {e}"))?;
                solved_n += 1;
            }
        }
    }
    ensure(logics.len() >= 4, || format!("corpus spans only {logics:?}"))?;
    Ok(format!(
        "{} problems over {:?}: {solved_n} solved and re-verified, {infeasible_n} infeasible, {unknown_n} unknown",
        runs.len(),
        logics
    ))
}

fn criterion_determinism(first: &[(PathBuf, String)]) -> Check {
    let second = run_corpus();
    let a: String = first.iter().map(|(_, s)| s.as_str()).collect();
    let b: String = second.iter().map(|(_, s)| s.as_str()).collect();
    if a != b {
        let diff = first
            .iter()
            .zip(&second)
            .find(|(x, y)| x.1 != y.1)
            .map(|(x, _)| x.0.display().to_string())
            .unwrap_or_default();
        return Err(format!("outputs differ, first at {diff}"));
    }
    Ok(format!("{} bytes identical across two runs", a.len()))
}

// 8 -------------------------------------------------------------------------

fn criterion_infeasible() -> Check {
    let p = load_problem(
        "(set-logic LIA)
         (synth-fun f ((x Int)) Int ((S Int)) ((S Int (0 1))))
         (declare-var a Int)
         (constraint (> (f a) a))
         (check-synth)",
    )
    .unwrap();
    let (outcome, took) = run_strategy(&p, Strategy::Auto);
    ensure(outcome == SynthOutcome::Infeasible, || format!("got {outcome:?}"))?;
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("infeasible in {took:?}"))
}

// ---------------------------------------------------------------------------

fn report(n: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let (ok, line) = match res {
        Ok(detail) => (true, format!("PASS {n} {name}: {detail}")),
        Err(why) => (false, format!("FAIL {n} {name}: {why}")),
    };
    // Written past the test harness's capture so the lines always show.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    ok
}

#[test]
fn acceptance() {
    let mut ok = true;
    ok &= report(1, "constant repair", criterion_constant_repair);
    ok &= report(2, "single-invocation max2", criterion_max2);
    ok &= report(3, "enumerator oracle", criterion_enumerator);
    ok &= report(4, "rewriter soundness", criterion_rewriter);
    ok &= report(5, "PBE first word", criterion_pbe);
    ok &= report(6, "invariant counter loop", criterion_invariant);
    let runs = run_corpus();
    ok &= report(7, "corpus soundness", || criterion_soundness(&runs));
    ok &= report(8, "infeasibility", criterion_infeasible);
    ok &= report(9, "determinism", || criterion_determinism(&runs));
    assert!(ok, "some acceptance criteria failed");
}
