//! Candidate verification: exact evaluation for ground specifications, the
//! LIA decision procedure when the substituted constraints are linear, and
//! bounded search otherwise.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lia::{is_lia, qf_lia_sat_with, LiaConfig, LiaResult};
use crate::problem::{Solution, SyGuSProblem};
use crate::rewrite::Rewriter;
use crate::term::{bv_mask, evaluate, not, Env, Sort, Symbol, Term, Value};

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Int variables range over `[-int_bound, int_bound]` in bounded search.
    pub int_bound: i64,
    pub max_string_len: usize,
    /// Bitvectors up to this width are enumerated exhaustively.
    pub bv_exhaustive_width: u32,
    pub random_samples: usize,
    /// Largest domain enumerated exhaustively.
    pub exhaustive_limit: u64,
    pub seed: u64,
    pub lia: LiaConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            int_bound: 32,
            max_string_len: 6,
            bv_exhaustive_width: 8,
            random_samples: 10_000,
            exhaustive_limit: 1 << 17,
            seed: 0,
            lia: LiaConfig::default(),
        }
    }
}

/// A point falsifying constraint `constraint`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub env: Env,
    pub constraint: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerificationOutcome {
    Valid,
    Counterexample(Counterexample),
    Unknown(String),
}

impl VerificationOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, VerificationOutcome::Valid)
    }
}

/// Characters of every string literal in `terms`, plus one fresh character.
pub fn alphabet_of<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vec<char> {
    let mut chars: BTreeSet<char> = BTreeSet::new();
    for t in terms {
        for s in t.subterms() {
            if let Some(Value::Str(x)) = s.as_value() {
                chars.extend(x.chars());
            }
        }
    }
    let fresh = ('a'..='z')
        .chain('A'..='Z')
        .chain('0'..='9')
        .find(|c| !chars.contains(c))
        .unwrap_or('~');
    chars.insert(fresh);
    chars.into_iter().collect()
}

/// Substitutes `candidate` into the constraints and checks validity over
/// the universal variables.
pub fn check_candidate(problem: &SyGuSProblem, candidate: &Solution, cfg: &VerifyConfig) -> VerificationOutcome {
    let cs = problem.substitute_solution(candidate);
    let mut terms: Vec<&Term> = problem.constraints.iter().collect();
    terms.extend(candidate.bodies.iter().map(|(_, b)| b));
    let alphabet = alphabet_of(terms);
    verify_constraints(&cs, &problem.universal_vars, cfg, &alphabet)
}

fn eval_bool(t: &Term, env: &Env) -> Option<bool> {
    evaluate(t, env).ok().and_then(|v| v.as_bool())
}

/// Checks that every constraint (closed over `vars`, no function
/// applications) holds for all values of `vars`.
pub fn verify_constraints(
    cs: &[Term],
    vars: &[(Symbol, Sort)],
    cfg: &VerifyConfig,
    alphabet: &[char],
) -> VerificationOutcome {
    if cs.iter().any(Term::has_calls) {
        return VerificationOutcome::Unknown("candidate does not cover every synthesis target".into());
    }
    let mut rw = Rewriter::new();
    let cs: Vec<Term> = cs.iter().map(|c| rw.rewrite(c)).collect();
    let defaults: Env = vars.iter().map(|(n, s)| (n.clone(), Value::default_of(*s))).collect();
    let complete = |mut env: Env| {
        for (n, v) in defaults.iter() {
            if env.get(n).is_none() {
                env.insert(n.clone(), v.clone());
            }
        }
        env
    };
    // Ground constraints are decided by evaluation.
    let mut open: Vec<usize> = Vec::new();
    for (i, c) in cs.iter().enumerate() {
        if c.free_vars().is_empty() {
            if eval_bool(c, &Env::new()) != Some(true) {
                return VerificationOutcome::Counterexample(Counterexample {
                    env: defaults.clone(),
                    constraint: i,
                });
            }
        } else {
            open.push(i);
        }
    }
    if open.is_empty() {
        return VerificationOutcome::Valid;
    }
    // Linear constraints go to the decision procedure.
    let mut bounded: Vec<usize> = Vec::new();
    let mut lia_unknown = false;
    for &i in &open {
        if !is_lia(&cs[i]) {
            bounded.push(i);
            continue;
        }
        match qf_lia_sat_with(&not(cs[i].clone()), &cfg.lia) {
            Ok(LiaResult::Unsat) => {}
            Ok(LiaResult::Sat(m)) => {
                let env = complete(m.iter().map(|(k, v)| (k.clone(), v.clone())).collect());
                debug_assert_eq!(eval_bool(&cs[i], &env), Some(false));
                return VerificationOutcome::Counterexample(Counterexample { env, constraint: i });
            }
            Ok(LiaResult::Unknown(_)) | Err(_) => {
                lia_unknown = true;
                bounded.push(i);
            }
        }
    }
    if bounded.is_empty() {
        return VerificationOutcome::Valid;
    }
    let relevant: BTreeSet<Symbol> = bounded
        .iter()
        .flat_map(|&i| cs[i].free_vars().into_iter().map(|(n, _)| n))
        .collect();
    let rvars: Vec<(Symbol, Sort)> = vars.iter().filter(|(n, _)| relevant.contains(n)).cloned().collect();
    match bounded_search(&cs, &bounded, &rvars, cfg, alphabet) {
        Search::Found(env, i) => VerificationOutcome::Counterexample(Counterexample {
            env: complete(env),
            constraint: i,
        }),
        Search::Exhausted if !lia_unknown => VerificationOutcome::Valid,
        _ => VerificationOutcome::Unknown("bounded".into()),
    }
}

enum Search {
    Found(Env, usize),
    /// The whole (finite) domain was enumerated without a violation.
    Exhausted,
    NotFound,
}

fn int_values(bound: i64) -> Vec<Value> {
    let mut out = vec![Value::int(0)];
    for k in 1..=bound {
        out.push(Value::int(k));
        out.push(Value::int(-k));
    }
    out
}

fn string_values(alphabet: &[char], max_len: usize, cap: u64) -> Vec<Value> {
    let mut out = vec![Value::str("")];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in alphabet {
                if out.len() as u64 >= cap {
                    return out;
                }
                let mut t = s.clone();
                t.push(*c);
                out.push(Value::Str(t.clone()));
                next.push(t);
            }
        }
        frontier = next;
    }
    out
}

/// Per-variable value lists and whether they cover the sort completely.
pub(crate) fn domain(s: Sort, int_bound: i64, str_len: usize, bv_width: u32, alphabet: &[char], cap: u64) -> (Vec<Value>, bool) {
    match s {
        Sort::Bool => (vec![Value::Bool(false), Value::Bool(true)], true),
        Sort::Int => (int_values(int_bound), false),
        Sort::String => (string_values(alphabet, str_len, cap), false),
        Sort::BitVec(w) if w <= bv_width => ((0..1u64 << w).map(|b| Value::bv(w, b)).collect(), true),
        Sort::BitVec(w) => {
            let m = bv_mask(w);
            let mut v: Vec<Value> = [0, 1, 2, m, m - 1, m >> 1, (m >> 1) + 1]
                .iter()
                .map(|b| Value::bv(w, *b))
                .collect();
            v.dedup();
            (v, false)
        }
    }
}

fn violated(cs: &[Term], idx: &[usize], env: &Env) -> Option<usize> {
    idx.iter().copied().find(|&i| eval_bool(&cs[i], env) != Some(true))
}

/// Enumerates the product of `doms` (first variable slowest).
fn enumerate_product(cs: &[Term], idx: &[usize], vars: &[(Symbol, Sort)], doms: &[Vec<Value>]) -> Option<(Env, usize)> {
    let mut pos = vec![0usize; doms.len()];
    loop {
        let env: Env = vars
            .iter()
            .zip(&pos)
            .zip(doms)
            .map(|(((n, _), &p), d)| (n.clone(), d[p].clone()))
            .collect();
        if let Some(i) = violated(cs, idx, &env) {
            return Some((env, i));
        }
        let mut k = doms.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < doms[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

fn product_size(doms: &[Vec<Value>]) -> u64 {
    doms.iter().fold(1u64, |acc, d| acc.saturating_mul(d.len() as u64))
}

fn bounded_search(cs: &[Term], idx: &[usize], vars: &[(Symbol, Sort)], cfg: &VerifyConfig, alphabet: &[char]) -> Search {
    let cap = cfg.exhaustive_limit;
    let full: Vec<(Vec<Value>, bool)> = vars
        .iter()
        .map(|(_, s)| domain(*s, cfg.int_bound, cfg.max_string_len, cfg.bv_exhaustive_width, alphabet, cap.saturating_add(1)))
        .collect();
    let doms: Vec<Vec<Value>> = full.iter().map(|(d, _)| d.clone()).collect();
    if product_size(&doms) <= cap {
        if let Some((env, i)) = enumerate_product(cs, idx, vars, &doms) {
            return Search::Found(env, i);
        }
        return if full.iter().all(|(_, exact)| *exact) {
            Search::Exhausted
        } else {
            Search::NotFound
        };
    }
    // Small box first, then random samples over the full domain.
    let small: Vec<Vec<Value>> = vars
        .iter()
        .map(|(_, s)| domain(*s, 4.min(cfg.int_bound), 2.min(cfg.max_string_len), 4, alphabet, 64).0)
        .collect();
    if product_size(&small) <= cap {
        if let Some((env, i)) = enumerate_product(cs, idx, vars, &small) {
            return Search::Found(env, i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_samples {
        let env: Env = vars
            .iter()
            .map(|(n, s)| {
                let v = match s {
                    Sort::Bool => Value::Bool(rng.gen()),
                    Sort::Int => Value::int(rng.gen_range(-cfg.int_bound..=cfg.int_bound)),
                    Sort::String => {
                        let len = rng.gen_range(0..=cfg.max_string_len);
                        Value::Str((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect())
                    }
                    Sort::BitVec(w) => Value::bv(*w, rng.gen::<u64>()),
                };
                (n.clone(), v)
            })
            .collect();
        if let Some(i) = violated(cs, idx, &env) {
            return Search::Found(env, i);
        }
    }
    Search::NotFound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_sygus, parse_term};
    use crate::problem::Engine;

    fn sol(p: &SyGuSProblem, body: &str) -> Solution {
        let d = &p.synth_funs[0];
        Solution::single(d.name().clone(), parse_term(body, &d.params).unwrap(), Engine::Enumerative)
    }

    const PLUS100: &str = "(synth-fun f ((x Int)) Int)(declare-var x Int)(constraint (> (f x) (+ x 100)))";

    #[test]
    fn constant_shift_is_valid() {
        let p = parse_sygus(PLUS100).unwrap();
        assert_eq!(check_candidate(&p, &sol(&p, "(+ x 101)"), &VerifyConfig::default()), VerificationOutcome::Valid);
    }

    #[test]
    fn identity_has_a_counterexample() {
        let p = parse_sygus(PLUS100).unwrap();
        let VerificationOutcome::Counterexample(cex) = check_candidate(&p, &sol(&p, "x"), &VerifyConfig::default()) else {
            panic!()
        };
        assert_eq!(cex.constraint, 0);
        let c = p.substitute_solution(&sol(&p, "x"));
        assert_eq!(evaluate(&c[0], &cex.env).unwrap(), Value::Bool(false));
    }

    #[test]
    fn pbe_first_word() {
        let p = parse_sygus(
            "(synth-fun f ((x String)) String)(constraint (= (f \"John Smith\") \"John\"))(constraint (= (f \"Ada Lovelace\") \"Ada\"))",
        )
        .unwrap();
        let good = sol(&p, "(str.substr x 0 (str.indexof x \" \" 0))");
        assert_eq!(check_candidate(&p, &good, &VerifyConfig::default()), VerificationOutcome::Valid);
        let bad = sol(&p, "(str.substr x 0 4)");
        assert!(matches!(
            check_candidate(&p, &bad, &VerifyConfig::default()),
            VerificationOutcome::Counterexample(Counterexample { constraint: 1, .. })
        ));
    }

    #[test]
    fn bitvector_domain_is_exact() {
        let p = parse_sygus(
            "(synth-fun f ((x (_ BitVec 4))) (_ BitVec 4))(declare-var x (_ BitVec 4))(constraint (= (f x) (bvadd x x)))",
        )
        .unwrap();
        let cfg = VerifyConfig::default();
        assert_eq!(check_candidate(&p, &sol(&p, "(bvshl x #x1)"), &cfg), VerificationOutcome::Valid);
        assert!(matches!(check_candidate(&p, &sol(&p, "x"), &cfg), VerificationOutcome::Counterexample(_)));
    }

    #[test]
    fn strings_are_bounded() {
        let p = parse_sygus(
            "(synth-fun f ((x String)) Int)(declare-var x String)(constraint (>= (f x) (str.len x)))",
        )
        .unwrap();
        let cfg = VerifyConfig::default();
        assert_eq!(check_candidate(&p, &sol(&p, "(str.len (str.++ x x))"), &cfg), VerificationOutcome::Unknown("bounded".into()));
        let VerificationOutcome::Counterexample(cex) = check_candidate(&p, &sol(&p, "1"), &cfg) else { panic!() };
        assert!(cex.env.get("x").unwrap().as_str().unwrap().chars().count() >= 2);
    }

    #[test]
    fn missing_target_is_unknown() {
        let p = parse_sygus(PLUS100).unwrap();
        let empty = Solution {
            bodies: vec![],
            engine: Engine::Enumerative,
        };
        assert!(matches!(check_candidate(&p, &empty, &VerifyConfig::default()), VerificationOutcome::Unknown(_)));
    }

    #[test]
    fn valid_answers_survive_bounded_search() {
        let p = parse_sygus(
            "(synth-fun f ((x Int) (y Int)) Int)(declare-var a Int)(declare-var b Int)(constraint (>= (f a b) a))(constraint (>= (f a b) b))(constraint (or (= (f a b) a) (= (f a b) b)))",
        )
        .unwrap();
        let cfg = VerifyConfig::default();
        let s = sol(&p, "(ite (>= y x) y x)");
        assert_eq!(check_candidate(&p, &s, &cfg), VerificationOutcome::Valid);
        let cs = p.substitute_solution(&s);
        for a in -32..=32 {
            for b in -32..=32 {
                let env = Env::new().with("a", Value::int(a)).with("b", Value::int(b));
                assert!(cs.iter().all(|c| evaluate(c, &env).unwrap() == Value::Bool(true)));
            }
        }
    }

    #[test]
    fn alphabet_has_a_fresh_char() {
        let t = Term::string("ab");
        assert_eq!(alphabet_of([&t]), vec!['a', 'b', 'c']);
    }
}
