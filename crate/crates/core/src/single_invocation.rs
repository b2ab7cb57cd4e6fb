//! Single-invocation conjectures: detection, counterexample-guided
//! quantifier instantiation for LIA, nested-ite solutions and their
//! reconstruction in the target grammar.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cegis::CegisConfig;
use crate::enumerator::{sample_points, EnumEnd, Enumerator};
use crate::grammar::DatatypeGrammar;
use crate::lia::{is_lia, lift_int_ite, qf_lia_sat_with, LiaResult};
use crate::linear::{build_sum, linearize, LinExpr};
use crate::problem::{Engine, Solution, Stats, SyGuSProblem, SynthOutcome};
use crate::rewrite::rewrite;
use crate::term::{
    and_all, evaluate, ite, map_calls, not, substitute_unchecked, Env, Kind, Op, Sort, Subst, Symbol, Term, Value,
};
use crate::verifier::{alphabet_of, check_candidate, VerificationOutcome};

/// Name of the variable standing for `f(x̄)` in the body.
pub const OUTPUT_VAR: &str = "#y";

/// A conjecture in which the target is only applied to one tuple of
/// distinct variables, renamed to the target's parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleInvocation {
    pub target: Symbol,
    pub params: Vec<(Symbol, Sort)>,
    /// The variable replacing every application of the target.
    pub y: Term,
    /// Conjunction of the renamed constraints over `params` and `y`.
    pub q_body: Term,
}

impl SingleInvocation {
    /// `q_body` with `y` replaced by `t`.
    pub fn instance(&self, t: &Term) -> Term {
        let mut sub = Subst::new();
        sub.insert(self.y.as_var().expect("output variable").clone(), t.clone());
        substitute_unchecked(&self.q_body, &sub)
    }
}

/// Recognizes single-invocation conjectures, renaming each conjunct's
/// invocation variables to the target's parameters.
pub fn detect_single_invocation(problem: &SyGuSProblem) -> Option<SingleInvocation> {
    if problem.synth_funs.len() != 1 {
        return None;
    }
    let decl = &problem.synth_funs[0];
    let name = decl.name().clone();
    let y = Term::var(OUTPUT_VAR, decl.ret());
    let mut parts = Vec::new();
    for c in &problem.constraints {
        let mut tuples: Vec<Vec<Term>> = Vec::new();
        for s in c.subterms() {
            if let Some(Op::Call(sig)) = s.op() {
                if sig.name == name && !tuples.iter().any(|t| t.as_slice() == s.children()) {
                    tuples.push(s.children().to_vec());
                }
            }
        }
        let renamed = match tuples.as_slice() {
            [] if c.free_vars().is_empty() => c.clone(),
            [args] => {
                let mut sub = Subst::new();
                for (a, (p, _)) in args.iter().zip(&decl.params) {
                    let v = a.as_var()?;
                    if sub.insert(v.clone(), Term::var(p.clone(), a.sort())).is_some() {
                        return None;
                    }
                }
                if c.free_vars().iter().any(|(v, _)| !sub.contains_key(v)) {
                    return None;
                }
                substitute_unchecked(c, &sub)
            }
            _ => return None,
        };
        parts.push(map_calls(&renamed, &|sig, _| (sig.name == name).then(|| y.clone())));
    }
    Some(SingleInvocation {
        target: name,
        params: decl.params.clone(),
        y,
        q_body: and_all(parts),
    })
}

/// Result of the instantiation loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cegqi {
    /// Instances `t_1..t_p` whose negated instances are jointly unsatisfiable.
    Closed(Vec<Term>),
    /// Some input admits no output at all.
    Infeasible,
    Unknown(String),
}

#[derive(Clone, Copy, Debug)]
pub struct CegqiBudget {
    pub max_iterations: usize,
    pub deadline: Option<Instant>,
}

impl Default for CegqiBudget {
    fn default() -> Self {
        CegqiBudget {
            max_iterations: 256,
            deadline: None,
        }
    }
}

/// Grows the instance set until the negated instances are unsatisfiable.
pub fn cegqi_solve(si: &SingleInvocation, budget: &CegqiBudget, cfg: &crate::lia::LiaConfig, stats: &mut Stats) -> Cegqi {
    if si.y.sort() != Sort::Int || !is_lia(&si.q_body) {
        return Cegqi::Unknown("theory".into());
    }
    let mut gamma: Vec<Term> = Vec::new();
    let mut negated: Vec<Term> = Vec::new();
    loop {
        if budget.deadline.is_some_and(|d| Instant::now() >= d) {
            return Cegqi::Unknown("timeout".into());
        }
        if gamma.len() >= budget.max_iterations {
            return Cegqi::Unknown("instantiation budget".into());
        }
        stats.cegqi_iterations += 1;
        if !gamma.is_empty() {
            match qf_lia_sat_with(&and_all(negated.clone()), cfg) {
                Ok(LiaResult::Unsat) => return Cegqi::Closed(gamma),
                Ok(LiaResult::Sat(_)) => {}
                Ok(LiaResult::Unknown(r)) => return Cegqi::Unknown(r),
                Err(e) => return Cegqi::Unknown(e.to_string()),
            }
        }
        let mut query = negated.clone();
        query.push(si.q_body.clone());
        let model = match qf_lia_sat_with(&and_all(query), cfg) {
            Ok(LiaResult::Sat(m)) => m,
            Ok(LiaResult::Unsat) => return Cegqi::Infeasible,
            Ok(LiaResult::Unknown(r)) => return Cegqi::Unknown(r),
            Err(e) => return Cegqi::Unknown(e.to_string()),
        };
        let t = select_instantiation(&model, &si.q_body, &si.y);
        assert!(
            !gamma.iter().any(|g| rewrite(g) == rewrite(&t)),
            "instantiation repeated: {t}"
        );
        negated.push(not(si.instance(&t)));
        gamma.push(t);
    }
}

/// Comparison atoms of a Boolean term in syntactic order, with Int-sorted
/// ites lifted out of the atoms.
fn atoms(t: &Term, out: &mut Vec<Term>) {
    match t.kind() {
        Kind::App(Op::Le | Op::Lt | Op::Ge | Op::Gt, _) | Kind::App(Op::Eq, _)
            if t.children()[0].sort() == Sort::Int =>
        {
            match lift_int_ite(t) {
                Some(lifted) => atoms(&lifted, out),
                None => {
                    if !out.contains(t) {
                        out.push(t.clone())
                    }
                }
            }
        }
        Kind::App(_, ch) if t.sort() == Sort::Bool => ch.iter().filter(|c| c.sort() == Sort::Bool).for_each(|c| atoms(c, out)),
        _ => {}
    }
}

enum Bound {
    Lower(LinExpr),
    Upper(LinExpr),
    Exact(LinExpr),
}

/// Solves `lhs - rhs ⋈ 0`, normalized to `a·y + r ⋈ 0`, for `y`.
fn solve_for(y: &Term, op: &Op, diff: LinExpr) -> Option<Bound> {
    let mut r = diff;
    let a = r.take(y);
    if a.is_zero() || r.coeffs.keys().any(|k| k.contains_var(y.as_var().expect("variable"))) {
        return None;
    }
    // Integer tightening of strict comparisons: d < 0 iff d + 1 <= 0.
    let (le, ge) = match op {
        Op::Le => (true, false),
        Op::Lt => {
            r.constant += 1;
            (true, false)
        }
        Op::Ge => (false, true),
        Op::Gt => {
            r.constant -= 1;
            (false, true)
        }
        Op::Eq => (true, true),
        _ => return None,
    };
    // a·y <= -r  (le) or a·y >= -r (ge).
    let neg_r = r.scaled(&-BigInt::one());
    let v = neg_r.div_exact(&a)?;
    Some(match (le, ge) {
        (true, true) => Bound::Exact(v),
        (true, false) if a.is_positive() => Bound::Upper(v),
        (true, false) => Bound::Lower(v),
        (false, true) if a.is_positive() => Bound::Lower(v),
        _ => Bound::Upper(v),
    })
}

fn negated_op(op: &Op) -> Option<Op> {
    Some(match op {
        Op::Le => Op::Gt,
        Op::Lt => Op::Ge,
        Op::Ge => Op::Lt,
        Op::Gt => Op::Le,
        _ => return None,
    })
}

/// Chooses an instantiation term for `y` from the atoms of `q_body` under
/// `model`: the greatest lower bound, else the least upper bound, else the
/// model value of `y`.
pub fn select_instantiation(model: &Env, q_body: &Term, y: &Term) -> Term {
    let yname = y.as_var().expect("variable");
    let value = |l: &LinExpr| evaluate(&build_sum(l), model).ok().and_then(|v| v.as_int().cloned());
    let mut lower: Option<(BigInt, LinExpr)> = None;
    let mut upper: Option<(BigInt, LinExpr)> = None;
    let mut found = Vec::new();
    atoms(q_body, &mut found);
    for atom in found.iter().filter(|a| a.contains_var(yname)) {
        let Some(truth) = evaluate(atom, model).ok().and_then(|v| v.as_bool()) else {
            continue;
        };
        let op = atom.op().expect("comparison");
        let op = if truth {
            op.clone()
        } else {
            match negated_op(op) {
                Some(n) => n,
                None => continue,
            }
        };
        let ch = atom.children();
        let diff = linearize(&ch[0]).sub(&linearize(&ch[1]));
        let (lo, hi) = match solve_for(y, &op, diff) {
            Some(Bound::Lower(l)) => (Some(l), None),
            Some(Bound::Upper(u)) => (None, Some(u)),
            Some(Bound::Exact(e)) => (Some(e.clone()), Some(e)),
            None => continue,
        };
        if let Some(l) = lo {
            if let Some(v) = value(&l) {
                if lower.as_ref().is_none_or(|(b, _)| v > *b) {
                    lower = Some((v, l));
                }
            }
        }
        if let Some(u) = hi {
            if let Some(v) = value(&u) {
                if upper.as_ref().is_none_or(|(b, _)| v < *b) {
                    upper = Some((v, u));
                }
            }
        }
    }
    match lower.or(upper) {
        Some((_, l)) => rewrite(&build_sum(&l)),
        None => Term::constant(model.get(yname).cloned().unwrap_or_else(|| Value::default_of(y.sort()))),
    }
}

/// `ite(Q[t_p], t_p, … ite(Q[t_2], t_2, t_1) …)`, rewritten.
pub fn build_ite_solution(si: &SingleInvocation, gamma: &[Term]) -> Term {
    let (first, rest) = gamma.split_first().expect("nonempty instance set");
    let mut sol = first.clone();
    for t in rest {
        sol = ite(si.instance(t), t.clone(), sol);
    }
    rewrite(&sol)
}

/// Finds a grammar term equivalent to `sol`: by matching the (rewritten)
/// term against the productions, else by enumerating terms that agree with
/// `sol` on sample points and checking each.
pub fn reconstruct_in_grammar(
    problem: &SyGuSProblem,
    g: &Arc<DatatypeGrammar>,
    sol: &Term,
    cfg: &CegisConfig,
    stats: &mut Stats,
) -> SynthOutcome {
    let decl = &problem.synth_funs[0];
    for cand in [sol.clone(), rewrite(sol)] {
        if let Some(e) = g.derive(g.start(), &cand) {
            let body = g.unembed(&e).expect("derived terms have no holes");
            return SynthOutcome::Solved(Solution::single(decl.name().clone(), body, Engine::SingleInvocation));
        }
    }
    let sorts: Vec<Sort> = g.params.iter().map(|(_, s)| *s).collect();
    let alphabet = alphabet_of([sol].into_iter().chain(&problem.constraints));
    let points = sample_points(&sorts, cfg.verify.seed, &alphabet, 16);
    let expected: Vec<Option<Value>> = points
        .iter()
        .map(|p| {
            let env: Env = g.params.iter().map(|(n, _)| n.clone()).zip(p.iter().cloned()).collect();
            evaluate(sol, &env).ok()
        })
        .collect();
    let mut en = Enumerator::new(g.clone(), cfg.enumeration.clone(), Vec::new());
    en.set_deadline(cfg.deadline);
    let mut drawn = 0u64;
    let out = loop {
        if drawn >= cfg.max_candidates {
            break SynthOutcome::Unknown("candidate budget".into());
        }
        let t = match en.next_candidate() {
            Ok(t) => t,
            Err(EnumEnd::Deadline) => break SynthOutcome::Unknown("timeout".into()),
            Err(_) => break SynthOutcome::Unknown("reconstruction failed".into()),
        };
        drawn += 1;
        stats.candidates += 1;
        if t.holes() > 0 {
            continue;
        }
        let agrees = points
            .iter()
            .zip(&expected)
            .all(|(p, want)| want.as_ref().is_some_and(|w| g.eval_embedded(&t, p).ok().as_ref() == Some(w)));
        if !agrees {
            stats.rejected += 1;
            continue;
        }
        let body = g.unembed(&t).expect("hole-free term");
        let s = Solution::single(decl.name().clone(), body, Engine::SingleInvocation);
        stats.verifier_calls += 1;
        if check_candidate(problem, &s, &cfg.verify).is_valid() {
            break SynthOutcome::Solved(s);
        }
    };
    let es = en.stats();
    stats.pruned += es.pruned_symmetry + es.pruned_redundant;
    out
}

/// The single-invocation pipeline: detect, instantiate, build the ite
/// solution, verify it and express it in the grammar when one is given.
pub fn solve_single_invocation(
    problem: &SyGuSProblem,
    g: &Arc<DatatypeGrammar>,
    cfg: &CegisConfig,
    stats: &mut Stats,
) -> SynthOutcome {
    let Some(si) = detect_single_invocation(problem) else {
        return SynthOutcome::Unknown("not single-invocation".into());
    };
    let budget = CegqiBudget {
        deadline: cfg.deadline,
        ..CegqiBudget::default()
    };
    let gamma = match cegqi_solve(&si, &budget, &cfg.verify.lia, stats) {
        Cegqi::Closed(g) => g,
        Cegqi::Infeasible => return SynthOutcome::Infeasible,
        Cegqi::Unknown(r) => return SynthOutcome::Unknown(r),
    };
    let sol = build_ite_solution(&si, &gamma);
    let candidate = Solution::single(si.target.clone(), sol.clone(), Engine::SingleInvocation);
    stats.verifier_calls += 1;
    match check_candidate(problem, &candidate, &cfg.verify) {
        VerificationOutcome::Valid => {}
        other => return SynthOutcome::Unknown(format!("ite solution did not verify: {other:?}")),
    }
    if problem.synth_funs[0].grammar.is_none() {
        return SynthOutcome::Solved(candidate);
    }
    reconstruct_in_grammar(problem, g, &sol, cfg, stats)
}

/// Substitutes `f(x̄)` back for `y`; used to check detection.
pub fn restore_invocations(si: &SingleInvocation, sig: &Arc<crate::term::FunSig>) -> Term {
    let call = Term::build(
        Op::Call(sig.clone()),
        si.params.iter().map(|(n, s)| Term::var(n.clone(), *s)).collect(),
    );
    let mut sub = BTreeMap::new();
    sub.insert(si.y.as_var().expect("variable").clone(), call);
    substitute_unchecked(&si.q_body, &sub)
}
