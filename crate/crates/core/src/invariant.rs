//! Invariant synthesis: post-condition strengthening and a pointwise
//! learner that labels states from counterexamples and fits a classifier.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use crate::cegis::{solve_cegis, CegisConfig};
use crate::enumerator::EnumEnd;
use crate::grammar::DatatypeGrammar;
use crate::lia::{is_lia, qf_lia_sat_with, LiaConfig, LiaResult};
use crate::pbe::{learn_examples, PbeInstance};
use crate::problem::{Engine, InvariantInfo, Solution, Stats, SyGuSProblem, SynthOutcome};
use crate::rewrite::rewrite;
use crate::term::{and_all, evaluate, not, map_calls, substitute_unchecked, Env, Subst, Symbol, Term, Value};
use crate::verifier::{check_candidate, VerificationOutcome};

/// How the search for the invariant itself is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantMethod {
    /// Enumerative CEGIS over the grammar.
    Enumerative,
    /// Pointwise labeling combined by the example learner.
    UnifPi,
}

fn post_over(info: &InvariantInfo, args: &[Term]) -> Term {
    let sub: Subst = info.vars.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
    substitute_unchecked(&info.post, &sub)
}

/// Replaces every `inv(ā)` by `post(ā) ∧ inv(ā)`, so the target becomes a
/// strengthening of the post-condition.
pub fn strengthen_post(problem: &SyGuSProblem) -> SyGuSProblem {
    let info = problem.invariant.as_ref().expect("invariant problem");
    let sig = problem.synth_fun(&info.inv).expect("invariant target").sig.clone();
    let mut out = problem.clone();
    out.constraints = problem
        .constraints
        .iter()
        .map(|c| {
            rewrite(&map_calls(c, &|called, args| {
                (called.name == info.inv).then(|| {
                    let call = Term::build(crate::term::Op::Call(sig.clone()), args.to_vec());
                    and_all(vec![post_over(info, args), call])
                })
            }))
        })
        .collect();
    out
}

/// The invariant `post(x̄) ∧ strengthening`, over the target's parameters.
pub fn strengthened_solution(problem: &SyGuSProblem, strengthening: &Term) -> Term {
    let info = problem.invariant.as_ref().expect("invariant problem");
    let params = problem.synth_funs[0].param_vars();
    rewrite(&and_all(vec![post_over(info, &params), strengthening.clone()]))
}

type Point = Vec<Value>;

/// A refinement lemma drawn from one counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lemma {
    /// The state must satisfy the invariant.
    Include(Point),
    /// The state must not satisfy the invariant.
    Exclude(Point),
    /// If the first state satisfies the invariant, so must the second.
    Step(Point, Point),
}

/// Accumulated lemmas plus tentative choices for unresolved steps.
#[derive(Clone, Debug, Default)]
struct Labeling {
    include: Vec<Point>,
    exclude: Vec<Point>,
    steps: Vec<(Point, Point)>,
    /// Per step: `Some(true)` guesses the successor in, `Some(false)` guesses
    /// the predecessor out.
    guesses: Vec<Option<bool>>,
}

enum Labels {
    Ok(BTreeMap<Point, bool>),
    /// A state is required both in and out by lemmas alone.
    Conflict,
    /// Only the guesses clash.
    GuessConflict,
}

impl Labeling {
    fn add(&mut self, l: Lemma) {
        match l {
            Lemma::Include(p) if !self.include.contains(&p) => self.include.push(p),
            Lemma::Exclude(p) if !self.exclude.contains(&p) => self.exclude.push(p),
            Lemma::Step(a, b) if !self.steps.iter().any(|(x, y)| *x == a && *y == b) => {
                self.steps.push((a, b));
                self.guesses.push(None);
            }
            _ => {}
        }
    }

    fn propagate(&self, labels: &mut BTreeMap<Point, bool>) -> bool {
        loop {
            let mut changed = false;
            for (a, b) in &self.steps {
                let forced = match (labels.get(a), labels.get(b)) {
                    (Some(true), Some(false)) => return false,
                    (Some(true), None) => Some((b, true)),
                    (None, Some(false)) => Some((a, false)),
                    _ => None,
                };
                if let Some((p, v)) = forced {
                    labels.insert(p.clone(), v);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn seed(&self, labels: &mut BTreeMap<Point, bool>, p: &Point, v: bool) -> bool {
        match labels.insert(p.clone(), v) {
            Some(old) => old == v,
            None => true,
        }
    }

    fn labels(&self) -> Labels {
        let mut labels = BTreeMap::new();
        let mut ok = true;
        for p in &self.include {
            ok &= self.seed(&mut labels, p, true);
        }
        for p in &self.exclude {
            ok &= self.seed(&mut labels, p, false);
        }
        if !ok || !self.propagate(&mut labels) {
            return Labels::Conflict;
        }
        for ((a, b), g) in self.steps.iter().zip(&self.guesses) {
            let fine = match g {
                Some(true) => self.seed(&mut labels, b, true),
                Some(false) => self.seed(&mut labels, a, false),
                None => true,
            };
            if !fine {
                return Labels::GuessConflict;
            }
        }
        if !self.propagate(&mut labels) {
            return Labels::GuessConflict;
        }
        Labels::Ok(labels)
    }

    /// Flips the latest "successor in" guess; false when none is left.
    fn flip_guess(&mut self) -> bool {
        match self.guesses.iter().rposition(|g| *g == Some(true)) {
            Some(i) => {
                self.guesses[i] = Some(false);
                true
            }
            None => false,
        }
    }

    fn has_guesses(&self) -> bool {
        self.guesses.iter().any(Option::is_some)
    }
}

fn point_of(env: &Env, vars: &[(Symbol, crate::term::Sort)]) -> Point {
    vars.iter()
        .map(|(n, s)| env.get(n).cloned().unwrap_or_else(|| Value::default_of(*s)))
        .collect()
}

fn holds(t: &Term, params: &[(Symbol, crate::term::Sort)], p: &Point) -> bool {
    let env: Env = params.iter().map(|(n, _)| n.clone()).zip(p.iter().cloned()).collect();
    evaluate(t, &env).ok().and_then(|v| v.as_bool()) == Some(true)
}

/// Outcome of the pointwise learner.
enum Learned {
    Solved(Term),
    Infeasible,
    Unknown(String),
}

const MAX_REFINEMENTS: usize = 500;

fn unif_pi_loop(
    problem: &SyGuSProblem,
    target: &SyGuSProblem,
    strengthened: bool,
    g: &Arc<DatatypeGrammar>,
    cfg: &CegisConfig,
    stats: &mut Stats,
) -> Learned {
    let info = problem.invariant.as_ref().expect("invariant problem");
    let decl = &problem.synth_funs[0];
    let n = target.constraints.len();
    let base = n - 3;
    let mut lab = Labeling::default();
    let mut candidate = Term::bool(true);
    if g.derive(g.start(), &candidate).is_none() {
        match learn_examples(g, &PbeInstance { examples: vec![] }, &cfg.enumeration, cfg.deadline, stats) {
            Ok(t) => candidate = g.unembed(&t).expect("hole-free"),
            Err(e) => return Learned::Unknown(e.to_string()),
        }
    }
    for _ in 0..MAX_REFINEMENTS {
        let sol = Solution::single(decl.name().clone(), candidate.clone(), Engine::UnifPi);
        stats.verifier_calls += 1;
        let cex = match check_candidate(target, &sol, &cfg.verify) {
            VerificationOutcome::Valid => return Learned::Solved(candidate),
            VerificationOutcome::Counterexample(c) => c,
            VerificationOutcome::Unknown(r) => return Learned::Unknown(r),
        };
        if cex.constraint < base {
            return Learned::Unknown("constraint outside the invariant triple".into());
        }
        let s = point_of(&cex.env, &info.vars);
        let s2 = point_of(&cex.env, &info.primed);
        let post_holds = |p: &Point| holds(&info.post, &info.vars, p);
        let lemma = match cex.constraint - base {
            0 if strengthened && !post_holds(&s) => return Learned::Infeasible,
            0 => Lemma::Include(s),
            1 if strengthened && !post_holds(&s2) => Lemma::Exclude(s),
            1 => Lemma::Step(s, s2),
            _ => Lemma::Exclude(s),
        };
        // The lemma must refute the candidate that produced it.
        let params = &decl.params;
        match &lemma {
            Lemma::Include(p) => assert!(!holds(&candidate, params, p)),
            Lemma::Exclude(p) => assert!(holds(&candidate, params, p)),
            Lemma::Step(a, b) => assert!(holds(&candidate, params, a) && !holds(&candidate, params, b)),
        }
        lab.add(lemma);
        // Unresolved steps get a tentative label; clashes flip guesses.
        for g in lab.guesses.iter_mut() {
            if g.is_none() {
                *g = Some(true);
            }
        }
        let labels = loop {
            match lab.labels() {
                Labels::Ok(l) => break l,
                Labels::Conflict => return Learned::Infeasible,
                Labels::GuessConflict => {
                    if !lab.flip_guess() {
                        return Learned::Unknown("labeling".into());
                    }
                }
            }
        };
        let inst = PbeInstance {
            examples: labels.into_iter().map(|(p, v)| (p, Value::Bool(v))).collect(),
        };
        match learn_examples(g, &inst, &cfg.enumeration, cfg.deadline, stats) {
            Ok(t) => candidate = g.unembed(&t).expect("hole-free"),
            Err(EnumEnd::Complete) if !lab.has_guesses() && !g.has_constant_slots() => return Learned::Infeasible,
            Err(e) => return Learned::Unknown(e.to_string()),
        }
    }
    Learned::Unknown("refinement budget".into())
}

/// Pointwise invariant learning on the problem as given (`strengthened`
/// false) or on its post-strengthened form.
pub fn unif_pi_solve(
    problem: &SyGuSProblem,
    g: &Arc<DatatypeGrammar>,
    cfg: &CegisConfig,
    strengthened: bool,
    stats: &mut Stats,
) -> SynthOutcome {
    let target = if strengthened { strengthen_post(problem) } else { problem.clone() };
    let name = problem.synth_funs[0].name().clone();
    match unif_pi_loop(problem, &target, strengthened, g, cfg, stats) {
        Learned::Solved(t) => {
            let body = if strengthened { strengthened_solution(problem, &t) } else { t };
            SynthOutcome::Solved(Solution::single(name, body, Engine::UnifPi))
        }
        Learned::Infeasible => SynthOutcome::Infeasible,
        Learned::Unknown(r) => SynthOutcome::Unknown(r),
    }
}

/// Unrolling depth of the reachability check run before any search.
pub const UNROLL_DEPTH: usize = 16;

/// Smallest `k <= depth` such that some state reached from `pre` in `k`
/// transitions violates `post`. Such a trace rules out every invariant.
/// Only LIA systems are checked; others report `None`.
pub fn reachable_violation(info: &InvariantInfo, depth: usize, lia: &LiaConfig) -> Option<usize> {
    let copy = |j: usize| -> Vec<Term> { info.vars.iter().map(|(n, s)| Term::var(format!("{n}#{j}"), *s)).collect() };
    let rename = |t: &Term, from: &[(Symbol, crate::term::Sort)], to: &[Term]| {
        let sub: Subst = from.iter().map(|(n, _)| n.clone()).zip(to.iter().cloned()).collect();
        substitute_unchecked(t, &sub)
    };
    let mut path = vec![rename(&info.pre, &info.vars, &copy(0))];
    for k in 0..=depth {
        if k > 0 {
            let step = rename(&info.trans, &info.vars, &copy(k - 1));
            path.push(rename(&step, &info.primed, &copy(k)));
        }
        let mut query = path.clone();
        query.push(not(rename(&info.post, &info.vars, &copy(k))));
        let phi = and_all(query);
        if !is_lia(&phi) {
            return None;
        }
        match qf_lia_sat_with(&phi, lia) {
            Ok(LiaResult::Sat(_)) => return Some(k),
            Ok(LiaResult::Unsat) => {}
            _ => return None,
        }
    }
    None
}

/// Strengthening first, then the plain problem, each with half the time.
pub fn solve_invariant(
    problem: &SyGuSProblem,
    g: &Arc<DatatypeGrammar>,
    cfg: &CegisConfig,
    method: InvariantMethod,
    stats: &mut Stats,
) -> SynthOutcome {
    if problem.invariant.is_none() || problem.synth_funs.len() != 1 {
        return SynthOutcome::Unknown("not an invariant problem".into());
    }
    if let Some(info) = &problem.invariant {
        if reachable_violation(info, UNROLL_DEPTH, &cfg.verify.lia).is_some() {
            return SynthOutcome::Infeasible;
        }
    }
    let half = cfg.deadline.map(|d| {
        let now = Instant::now();
        now + d.saturating_duration_since(now) / 2
    });
    let first = CegisConfig {
        deadline: half,
        ..cfg.clone()
    };
    let strengthened = match method {
        InvariantMethod::Enumerative => match solve_cegis(&strengthen_post(problem), g.clone(), &first, stats) {
            SynthOutcome::Solved(s) => {
                let body = strengthened_solution(problem, &s.bodies[0].1);
                SynthOutcome::Solved(Solution::single(s.bodies[0].0.clone(), body, s.engine))
            }
            // Infeasibility of the strengthened search says nothing about
            // the original problem.
            _ => SynthOutcome::Unknown("strengthening failed".into()),
        },
        InvariantMethod::UnifPi => unif_pi_solve(problem, g, &first, true, stats),
    };
    match &strengthened {
        SynthOutcome::Solved(s) => {
            let conforms = problem.synth_funs[0].grammar.is_none() || g.derive(g.start(), &s.bodies[0].1).is_some();
            stats.verifier_calls += 1;
            if conforms && check_candidate(problem, s, &cfg.verify).is_valid() {
                return strengthened;
            }
        }
        SynthOutcome::Infeasible => return strengthened,
        SynthOutcome::Unknown(_) => {}
    }
    match method {
        InvariantMethod::Enumerative => solve_cegis(problem, g.clone(), cfg, stats),
        InvariantMethod::UnifPi => unif_pi_solve(problem, g, cfg, false, stats),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_problem;
    use crate::grammar::grammar_for;

    const COUNTER: &str = "(set-logic LIA)(synth-inv inv ((x Int)))
        (define-fun pre ((x Int)) Bool (= x 0))
        (define-fun trans ((x Int) (x! Int)) Bool (and (< x 10) (= x! (+ x 1))))
        (define-fun post ((x Int)) Bool (<= x 10))
        (inv-constraint inv pre trans post)";

    fn setup(src: &str) -> (SyGuSProblem, Arc<DatatypeGrammar>) {
        let p = load_problem(src).unwrap();
        let g = Arc::new(grammar_for(&p, &p.synth_funs[0]).unwrap());
        (p, g)
    }

    fn check_on_box(p: &SyGuSProblem, body: &Term) {
        let sol = Solution::single(p.synth_funs[0].name().clone(), body.clone(), Engine::UnifPi);
        let cs = p.substitute_solution(&sol);
        let info = p.invariant.as_ref().unwrap();
        for x in -20..=20 {
            for x2 in -20..=20 {
                let env = Env::new()
                    .with(info.vars[0].0.clone(), Value::int(x))
                    .with(info.primed[0].0.clone(), Value::int(x2));
                for c in &cs {
                    assert_eq!(evaluate(c, &env).unwrap(), Value::Bool(true), "{body} at x={x}, x'={x2}");
                }
            }
        }
    }

    #[test]
    fn strengthening_makes_post_the_answer() {
        let (p, g) = setup(COUNTER);
        for method in [InvariantMethod::Enumerative, InvariantMethod::UnifPi] {
            let mut stats = Stats::default();
            let out = solve_invariant(&p, &g, &CegisConfig::default(), method, &mut stats);
            let SynthOutcome::Solved(s) = out else { panic!("{out:?}") };
            assert_eq!(s.bodies[0].1.to_string(), "(<= x 10)");
            check_on_box(&p, &s.bodies[0].1);
        }
    }

    #[test]
    fn plain_unif_learns_counter_invariant() {
        let (p, g) = setup(COUNTER);
        let out = unif_pi_solve(&p, &g, &CegisConfig::default(), false, &mut Stats::default());
        let SynthOutcome::Solved(s) = out else { panic!("{out:?}") };
        check_on_box(&p, &s.bodies[0].1);
    }

    #[test]
    fn plain_enumeration_learns_counter_invariant() {
        let (p, g) = setup(COUNTER);
        let out = solve_cegis(&p, g, &CegisConfig::default(), &mut Stats::default());
        let SynthOutcome::Solved(s) = out else { panic!("{out:?}") };
        check_on_box(&p, &s.bodies[0].1);
    }

    #[test]
    fn reachable_bad_state_is_infeasible() {
        let (p, g) = setup(
            "(synth-inv inv ((x Int)))
             (define-fun pre ((x Int)) Bool (= x 0))
             (define-fun trans ((x Int) (x! Int)) Bool (= x! (+ x 1)))
             (define-fun post ((x Int)) Bool (<= x 3))
             (inv-constraint inv pre trans post)",
        );
        let out = unif_pi_solve(&p, &g, &CegisConfig::default(), false, &mut Stats::default());
        assert_eq!(out, SynthOutcome::Infeasible);
        for method in [InvariantMethod::UnifPi, InvariantMethod::Enumerative] {
            let out = solve_invariant(&p, &g, &CegisConfig::default(), method, &mut Stats::default());
            assert_eq!(out, SynthOutcome::Infeasible);
        }
        let info = p.invariant.as_ref().unwrap();
        assert_eq!(reachable_violation(info, UNROLL_DEPTH, &LiaConfig::default()), Some(4));
        assert_eq!(reachable_violation(info, 3, &LiaConfig::default()), None);
    }

    #[test]
    fn safe_loop_has_no_short_violation() {
        let (p, _) = setup(COUNTER);
        let info = p.invariant.as_ref().unwrap();
        assert_eq!(reachable_violation(info, UNROLL_DEPTH, &LiaConfig::default()), None);
    }

    #[test]
    fn vacuous_pre_accepts_true() {
        let (p, g) = setup(
            "(synth-inv inv ((x Int)))
             (define-fun pre ((x Int)) Bool false)
             (define-fun trans ((x Int) (x! Int)) Bool (= x! x))
             (define-fun post ((x Int)) Bool true)
             (inv-constraint inv pre trans post)",
        );
        let mut stats = Stats::default();
        let out = unif_pi_solve(&p, &g, &CegisConfig::default(), false, &mut stats);
        let SynthOutcome::Solved(s) = out else { panic!("{out:?}") };
        assert!(s.bodies[0].1.is_true());
        assert_eq!(stats.verifier_calls, 1);
    }

    #[test]
    fn labels_propagate_along_steps() {
        let mut lab = Labeling::default();
        let p = |x: i64| vec![Value::int(x)];
        lab.add(Lemma::Include(p(0)));
        lab.add(Lemma::Step(p(0), p(1)));
        lab.add(Lemma::Step(p(1), p(2)));
        lab.add(Lemma::Exclude(p(5)));
        lab.add(Lemma::Step(p(4), p(5)));
        let Labels::Ok(l) = lab.labels() else { panic!() };
        assert_eq!(l.get(&p(2)), Some(&true));
        assert_eq!(l.get(&p(4)), Some(&false));
        lab.add(Lemma::Step(p(2), p(4)));
        assert!(matches!(lab.labels(), Labels::Conflict));
    }
}
