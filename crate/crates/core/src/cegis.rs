//! Counterexample-guided inductive synthesis over an embedded grammar, with
//! an inner loop that solves for constant holes.

use std::sync::Arc;
use std::time::Instant;

use crate::enumerator::{Dedup, EnumConfig, EnumEnd, Enumerator};
use crate::pbe::{is_pbe, PbeCheck};
use crate::grammar::{DatatypeGrammar, EmbeddedTerm};
use crate::lia::{is_lia, qf_lia_sat_with, LiaResult};
use crate::problem::{Engine, Solution, Stats, SyGuSProblem, SynthOutcome};
use crate::rewrite::Rewriter;
use crate::term::{and_all, evaluate, evaluate_with, substitute_unchecked, Env, Sort, Subst, Symbol, Term, Value};
use crate::verifier::{alphabet_of, check_candidate, domain, Counterexample, VerificationOutcome, VerifyConfig};

#[derive(Clone, Debug)]
pub struct CegisConfig {
    pub enumeration: EnumConfig,
    pub verify: VerifyConfig,
    pub deadline: Option<Instant>,
    pub max_candidates: u64,
    /// Verifier rounds allowed per hole template.
    pub repair_rounds: usize,
}

impl Default for CegisConfig {
    fn default() -> Self {
        CegisConfig {
            enumeration: EnumConfig::default(),
            verify: VerifyConfig::default(),
            deadline: None,
            max_candidates: 1_000_000,
            repair_rounds: 32,
        }
    }
}

/// Counterexamples collected so far.
#[derive(Clone, Debug, Default)]
pub struct RefinementState {
    pub counterexamples: Vec<Counterexample>,
}

impl RefinementState {
    pub fn push(&mut self, c: Counterexample) {
        if !self.counterexamples.iter().any(|o| o.env == c.env) {
            self.counterexamples.push(c);
        }
    }

    /// Whether some stored point falsifies a constraint when the single
    /// target is interpreted by `t`.
    pub fn refutes(&self, problem: &SyGuSProblem, g: &DatatypeGrammar, t: &EmbeddedTerm) -> bool {
        let funs = |_: &crate::term::FunSig, args: &[Value]| g.eval_embedded(t, args);
        self.counterexamples.iter().any(|cex| {
            let first = &problem.constraints[cex.constraint];
            std::iter::once(first)
                .chain(problem.constraints.iter())
                .any(|c| matches!(evaluate_with(c, &cex.env, &funs), Ok(Value::Bool(false))))
        })
    }
}

/// Result of solving for the holes of one template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Repair {
    Solved(Solution),
    /// No assignment to the holes works. `exact` is false when the search
    /// was incomplete.
    NoRepair { exact: bool },
}

fn past(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Enumerates candidates in size order and checks each against the
/// specification. Reports infeasibility only when the grammar's term space
/// is exhausted and every candidate was genuinely refuted.
pub fn solve_cegis(problem: &SyGuSProblem, grammar: Arc<DatatypeGrammar>, cfg: &CegisConfig, stats: &mut Stats) -> SynthOutcome {
    if problem.synth_funs.len() != 1 {
        return SynthOutcome::Unknown("enumeration handles a single synthesis target".into());
    }
    let name = problem.synth_funs[0].name().clone();
    // Example-only specifications allow deduplication by behaviour on the
    // example inputs.
    let (enumeration, points) = match is_pbe(problem) {
        PbeCheck::Pbe(inst) => (
            EnumConfig {
                dedup: Dedup::Observational,
                ..cfg.enumeration.clone()
            },
            inst.inputs(),
        ),
        PbeCheck::Contradictory => return SynthOutcome::Infeasible,
        PbeCheck::NotPbe => (
            EnumConfig {
                dedup: Dedup::Rewrite,
                ..cfg.enumeration.clone()
            },
            Vec::new(),
        ),
    };
    let mut en = Enumerator::new(grammar.clone(), enumeration, points);
    en.set_deadline(cfg.deadline);
    let mut state = RefinementState::default();
    let mut all_refuted = true;
    let mut drawn = 0u64;
    let outcome = loop {
        if past(cfg.deadline) {
            break SynthOutcome::Unknown("timeout".into());
        }
        if drawn >= cfg.max_candidates {
            break SynthOutcome::Unknown("candidate budget".into());
        }
        let t = match en.next_candidate() {
            Ok(t) => t,
            Err(EnumEnd::Complete) if all_refuted => break SynthOutcome::Infeasible,
            Err(end) => break SynthOutcome::Unknown(end.to_string()),
        };
        drawn += 1;
        stats.candidates += 1;
        if t.holes() > 0 {
            match repair_constants(problem, &grammar, &t, &mut state, cfg, stats) {
                Repair::Solved(sol) => break SynthOutcome::Solved(sol),
                Repair::NoRepair { exact } => all_refuted &= exact,
            }
            continue;
        }
        if state.refutes(problem, &grammar, &t) {
            stats.rejected += 1;
            continue;
        }
        let body = grammar.unembed(&t).expect("hole-free term");
        let sol = Solution::single(name.clone(), body, Engine::Enumerative);
        stats.verifier_calls += 1;
        match check_candidate(problem, &sol, &cfg.verify) {
            VerificationOutcome::Valid => break SynthOutcome::Solved(sol),
            VerificationOutcome::Counterexample(c) => state.push(c),
            VerificationOutcome::Unknown(_) => all_refuted = false,
        }
    };
    let es = en.stats();
    stats.pruned += es.pruned_symmetry + es.pruned_redundant;
    outcome
}

/// Solves for the holes of `t`: pick values consistent with every point
/// seen so far, verify, and add the counterexample on failure.
pub fn repair_constants(
    problem: &SyGuSProblem,
    g: &DatatypeGrammar,
    t: &EmbeddedTerm,
    state: &mut RefinementState,
    cfg: &CegisConfig,
    stats: &mut Stats,
) -> Repair {
    let decl = &problem.synth_funs[0];
    let (template, holes) = g.unembed_template(t);
    let with_holes = Solution::single(decl.name().clone(), template, Engine::ConstantRepair);
    let cs = problem.substitute_solution(&with_holes);
    let defaults: Env = problem
        .universal_vars
        .iter()
        .map(|(n, s)| (n.clone(), Value::default_of(*s)))
        .collect();
    let mut points: Vec<Env> = state.counterexamples.iter().map(|c| c.env.clone()).collect();
    if points.is_empty() {
        points.push(defaults);
    }
    let mut rw = Rewriter::new();
    let alphabet = alphabet_of(problem.constraints.iter());
    let literals = problem.literals();
    for _ in 0..cfg.repair_rounds {
        if past(cfg.deadline) {
            return Repair::NoRepair { exact: false };
        }
        let mut conj = Vec::new();
        for p in &points {
            let sub: Subst = p.iter().map(|(n, v)| (n.clone(), Term::constant(v.clone()))).collect();
            for c in &cs {
                conj.push(rw.rewrite(&substitute_unchecked(c, &sub)));
            }
        }
        let phi = rw.rewrite(&and_all(conj));
        let values = match solve_holes(&phi, &holes, cfg, &alphabet, &literals) {
            HoleSearch::Found(v) => v,
            HoleSearch::None { exact } => return Repair::NoRepair { exact },
        };
        let filled = g.fill_holes(t, &values);
        let body = g.unembed(&filled).expect("holes filled");
        let sol = Solution::single(decl.name().clone(), body, Engine::ConstantRepair);
        stats.verifier_calls += 1;
        match check_candidate(problem, &sol, &cfg.verify) {
            VerificationOutcome::Valid => return Repair::Solved(sol),
            VerificationOutcome::Counterexample(c) => {
                points.push(c.env.clone());
                state.push(c);
            }
            VerificationOutcome::Unknown(_) => return Repair::NoRepair { exact: false },
        }
    }
    Repair::NoRepair { exact: false }
}

enum HoleSearch {
    Found(Vec<Value>),
    None { exact: bool },
}

const HOLE_SEARCH_LIMIT: u64 = 1 << 16;

fn solve_holes(phi: &Term, holes: &[(Symbol, Sort)], cfg: &CegisConfig, alphabet: &[char], literals: &[Value]) -> HoleSearch {
    if phi.is_false() {
        return HoleSearch::None { exact: true };
    }
    if holes.iter().all(|(_, s)| *s == Sort::Int) && is_lia(phi) {
        match qf_lia_sat_with(phi, &cfg.verify.lia) {
            Ok(LiaResult::Sat(m)) => {
                return HoleSearch::Found(
                    holes
                        .iter()
                        .map(|(n, s)| m.get(n).cloned().unwrap_or_else(|| Value::default_of(*s)))
                        .collect(),
                )
            }
            Ok(LiaResult::Unsat) => return HoleSearch::None { exact: true },
            Ok(LiaResult::Unknown(_)) | Err(_) => {}
        }
    }
    // Bounded search over small values plus the problem's literals.
    let mut exact = true;
    let doms: Vec<Vec<Value>> = holes
        .iter()
        .map(|(_, s)| {
            let (mut d, complete) = domain(*s, cfg.verify.int_bound, 2, cfg.verify.bv_exhaustive_width, alphabet, 512);
            exact &= complete;
            for l in literals {
                if l.sort() == *s && !d.contains(l) {
                    d.push(l.clone());
                }
            }
            d
        })
        .collect();
    let total = doms.iter().fold(1u64, |a, d| a.saturating_mul(d.len() as u64));
    if total > HOLE_SEARCH_LIMIT {
        exact = false;
    }
    let mut pos = vec![0usize; doms.len()];
    for _ in 0..total.min(HOLE_SEARCH_LIMIT) {
        let env: Env = holes
            .iter()
            .zip(&pos)
            .zip(&doms)
            .map(|(((n, _), &p), d)| (n.clone(), d[p].clone()))
            .collect();
        if matches!(evaluate(phi, &env), Ok(Value::Bool(true))) {
            return HoleSearch::Found(pos.iter().zip(&doms).map(|(&p, d)| d[p].clone()).collect());
        }
        for k in (0..pos.len()).rev() {
            pos[k] += 1;
            if pos[k] < doms[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
    HoleSearch::None { exact }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_sygus;
    use crate::grammar::grammar_for;

    fn run(src: &str) -> (SyGuSProblem, SynthOutcome) {
        let p = parse_sygus(src).unwrap();
        let g = Arc::new(grammar_for(&p, &p.synth_funs[0]).unwrap());
        let mut stats = Stats::default();
        let out = solve_cegis(&p, g, &CegisConfig::default(), &mut stats);
        (p, out)
    }

    fn body(out: &SynthOutcome) -> String {
        match out {
            SynthOutcome::Solved(s) => s.bodies[0].1.to_string(),
            other => panic!("expected a solution, got {other:?}"),
        }
    }

    #[test]
    fn finds_successor() {
        let (_, out) = run(
            "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S)))))
             (declare-var a Int)(constraint (> (f a) a))",
        );
        assert_eq!(body(&out), "(+ x 1)");
    }

    #[test]
    fn identity_is_the_first_candidate() {
        let mut stats = Stats::default();
        let p = parse_sygus(
            "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x))))(declare-var a Int)(constraint (= (f a) a))",
        )
        .unwrap();
        let g = Arc::new(grammar_for(&p, &p.synth_funs[0]).unwrap());
        let out = solve_cegis(&p, g, &CegisConfig::default(), &mut stats);
        assert_eq!(body(&out), "x");
        assert_eq!(stats.candidates, 1);
        assert_eq!(stats.verifier_calls, 1);
    }

    #[test]
    fn finite_grammar_is_infeasible() {
        let (_, out) = run(
            "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (0 1))))(declare-var a Int)(constraint (= (f a) a))",
        );
        assert_eq!(out, SynthOutcome::Infeasible);
    }

    #[test]
    fn repairs_offset_constant() {
        let (p, out) = run(
            "(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int ((+ x C))) (C Int ((Constant Int)))))
             (declare-var x Int)(constraint (> (f x) (+ x 100)))",
        );
        let SynthOutcome::Solved(sol) = &out else { panic!("{out:?}") };
        assert_eq!(sol.engine, Engine::ConstantRepair);
        let b = &sol.bodies[0].1;
        assert_eq!(b.children()[0].to_string(), "x");
        let c = b.children()[1].as_value().unwrap().as_int().unwrap().clone();
        assert!(c >= 101.into(), "{c}");
        assert!(check_candidate(&p, sol, &VerifyConfig::default()).is_valid());
    }

    #[test]
    fn repairs_bare_constant() {
        let (_, out) = run(
            "(synth-fun f ((x Int)) Int ((C Int)) ((C Int ((Constant Int)))))
             (declare-var x Int)(constraint (= (f x) 0))",
        );
        assert_eq!(body(&out), "0");
    }

    #[test]
    fn no_constant_doubles() {
        let p = parse_sygus(
            "(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int ((+ x C))) (C Int ((Constant Int)))))
             (declare-var x Int)(constraint (= (f x) (* 2 x)))",
        )
        .unwrap();
        let g = grammar_for(&p, &p.synth_funs[0]).unwrap();
        let mut en = Enumerator::new(Arc::new(g.clone()), EnumConfig::default(), vec![]);
        let t = en.next_candidate().unwrap();
        assert_eq!(t.holes(), 1);
        let mut state = RefinementState::default();
        let r = repair_constants(&p, &g, &t, &mut state, &CegisConfig::default(), &mut Stats::default());
        assert_eq!(r, Repair::NoRepair { exact: true });
        assert!(!state.counterexamples.is_empty());
        // And the full loop proves the grammar infeasible.
        let out = solve_cegis(&p, Arc::new(g), &CegisConfig::default(), &mut Stats::default());
        assert_eq!(out, SynthOutcome::Infeasible);
    }

    #[test]
    fn stored_counterexamples_reject_candidates() {
        let mut stats = Stats::default();
        let p = parse_sygus(
            "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S)))))
             (declare-var a Int)(constraint (= (f a) (+ a a a)))",
        )
        .unwrap();
        let g = Arc::new(grammar_for(&p, &p.synth_funs[0]).unwrap());
        let out = solve_cegis(&p, g, &CegisConfig::default(), &mut stats);
        assert!(matches!(out, SynthOutcome::Solved(_)));
        assert!(stats.rejected > 0);
        assert!(stats.verifier_calls < stats.candidates);
    }

    #[test]
    fn bitvector_solution() {
        let (p, out) = run(
            "(set-logic BV)(synth-fun f ((x (_ BitVec 8))) (_ BitVec 8))
             (declare-var x (_ BitVec 8))(constraint (= (f x) (bvadd x x)))",
        );
        let SynthOutcome::Solved(sol) = &out else { panic!("{out:?}") };
        assert!(check_candidate(&p, sol, &VerifyConfig::default()).is_valid());
    }
}
