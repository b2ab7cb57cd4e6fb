//! Programming by example: divide-and-conquer construction of solutions
//! from pools of enumerated terms, using ite decision trees and string
//! concatenation.

use std::sync::Arc;
use std::time::Instant;

use crate::cegis::CegisConfig;
use crate::enumerator::{Dedup, EnumConfig, EnumEnd, Enumerator};
use crate::grammar::{DatatypeGrammar, EmbeddedTerm};
use crate::problem::{Engine, Solution, Stats, SyGuSProblem, SynthOutcome};
use crate::term::{Op, Sort, Term, Value};
use crate::verifier::{check_candidate, VerificationOutcome};

/// Input/output pairs of a programming-by-example problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbeInstance {
    pub examples: Vec<(Vec<Value>, Value)>,
}

impl PbeInstance {
    pub fn inputs(&self) -> Vec<Vec<Value>> {
        self.examples.iter().map(|(i, _)| i.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PbeCheck {
    Pbe(PbeInstance),
    NotPbe,
    /// Two examples share inputs but disagree on the output.
    Contradictory,
}

fn conjuncts(t: &Term, out: &mut Vec<Term>) {
    if t.op() == Some(&Op::And) {
        t.children().iter().for_each(|c| conjuncts(c, out));
    } else {
        out.push(t.clone());
    }
}

/// Recognizes constraints that are all of the form `f(c̄) = o` over literals.
pub fn is_pbe(problem: &SyGuSProblem) -> PbeCheck {
    if problem.synth_funs.len() != 1 || problem.constraints.is_empty() {
        return PbeCheck::NotPbe;
    }
    let name = problem.synth_funs[0].name();
    let mut parts = Vec::new();
    problem.constraints.iter().for_each(|c| conjuncts(c, &mut parts));
    let mut examples: Vec<(Vec<Value>, Value)> = Vec::new();
    for c in &parts {
        if c.op() != Some(&Op::Eq) {
            return PbeCheck::NotPbe;
        }
        let ch = c.children();
        let (call, out) = match (ch[0].op(), ch[1].op()) {
            (Some(Op::Call(s)), _) if s.name == *name => (&ch[0], &ch[1]),
            (_, Some(Op::Call(s))) if s.name == *name => (&ch[1], &ch[0]),
            _ => return PbeCheck::NotPbe,
        };
        let Some(out) = out.as_value() else {
            return PbeCheck::NotPbe;
        };
        let Some(input) = call.children().iter().map(|a| a.as_value().cloned()).collect::<Option<Vec<_>>>() else {
            return PbeCheck::NotPbe;
        };
        match examples.iter().find(|(i, _)| *i == input) {
            Some((_, o)) if o != out => return PbeCheck::Contradictory,
            Some(_) => {}
            None => examples.push((input, out.clone())),
        }
    }
    PbeCheck::Pbe(PbeInstance { examples })
}

/// Pool entry: a hole-free term and its values on the example inputs.
type Pooled = (EmbeddedTerm, Arc<[Value]>);

/// Per-nonterminal pools grown from one observational enumerator.
pub struct Pools {
    en: Enumerator,
    pools: Vec<Vec<Pooled>>,
    ended: Option<EnumEnd>,
}

impl Pools {
    pub fn new(g: Arc<DatatypeGrammar>, inst: &PbeInstance, enumeration: &EnumConfig, deadline: Option<Instant>) -> Pools {
        let cfg = EnumConfig {
            dedup: Dedup::Observational,
            ..enumeration.clone()
        };
        let n = g.nonterminals.len();
        let mut en = Enumerator::new(g, cfg, inst.inputs());
        en.set_deadline(deadline);
        Pools {
            en,
            pools: vec![Vec::new(); n],
            ended: None,
        }
    }

    /// Pulls up to `n` terms; returns how many were pooled.
    pub fn grow(&mut self, n: usize, stats: &mut Stats) -> usize {
        let mut pooled = 0;
        for _ in 0..n {
            match self.en.next_term() {
                Ok(a) => {
                    stats.candidates += 1;
                    if let Some(sig) = a.sig {
                        self.pools[a.nt].push((a.term, sig));
                        pooled += 1;
                    }
                }
                Err(e) => {
                    self.ended = Some(e);
                    break;
                }
            }
        }
        pooled
    }

    pub fn ended(&self) -> Option<EnumEnd> {
        self.ended
    }

    pub fn pool(&self, nt: usize) -> &[Pooled] {
        &self.pools[nt]
    }

    fn pruned(&self) -> u64 {
        let s = self.en.stats();
        s.pruned_symmetry + s.pruned_redundant
    }
}

/// Builds a term of nonterminal `nt` matching `outputs` on the examples
/// `idx`, combining pooled terms with ite and string concatenation.
struct Learner<'a> {
    g: &'a DatatypeGrammar,
    pools: &'a Pools,
    try_concat: bool,
}

fn entropy(pos: usize, total: usize) -> f64 {
    if pos == 0 || pos == total {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

impl Learner<'_> {
    fn ctor_with(&self, nt: usize, op: &Op) -> Option<usize> {
        self.g.by_nt[nt].iter().copied().find(|&c| self.g.constructors[c].direct_op() == Some(op))
    }

    fn learn(&self, nt: usize, idx: &[usize], outputs: &[Value], depth: usize) -> Option<EmbeddedTerm> {
        if depth > 64 {
            return None;
        }
        let pool = self.pools.pool(nt);
        let covers = |sig: &[Value]| -> Vec<bool> { idx.iter().map(|&i| sig[i] == outputs[i]).collect() };
        let mut best: Option<(usize, Vec<bool>)> = None;
        for (t, sig) in pool {
            let cov = covers(sig);
            let n = cov.iter().filter(|&&b| b).count();
            if n == idx.len() {
                return Some(t.clone());
            }
            if best.as_ref().is_none_or(|(b, _)| n > *b) {
                best = Some((n, cov));
            }
        }
        if self.try_concat && self.g.sort_of(nt) == Sort::String {
            if let Some(t) = self.learn_concat(nt, idx, outputs, depth) {
                return Some(t);
            }
        }
        if self.g.sort_of(nt) == Sort::Bool {
            if let Some(t) = self.learn_conj(nt, idx, outputs, depth) {
                return Some(t);
            }
        }
        let labels = best.map(|(_, c)| c).unwrap_or_else(|| vec![false; idx.len()]);
        self.learn_split(nt, idx, outputs, &labels, depth)
    }

    /// Splits on the pooled condition with the highest information gain
    /// over `labels`, then learns each side.
    fn learn_split(
        &self,
        nt: usize,
        idx: &[usize],
        outputs: &[Value],
        labels: &[bool],
        depth: usize,
    ) -> Option<EmbeddedTerm> {
        let ite = self.ctor_with(nt, &Op::Ite)?;
        let fields = &self.g.constructors[ite].fields;
        let (cnt, then_nt, else_nt) = (fields[0], fields[1], fields[2]);
        let pos = labels.iter().filter(|&&b| b).count();
        let base = entropy(pos, idx.len());
        let mut best: Option<(f64, usize)> = None;
        for (k, (_, sig)) in self.pools.pool(cnt).iter().enumerate() {
            let on: Vec<bool> = idx.iter().map(|&i| sig[i] == Value::Bool(true)).collect();
            let n_on = on.iter().filter(|&&b| b).count();
            if n_on == 0 || n_on == idx.len() {
                continue;
            }
            let pos_on = on.iter().zip(labels).filter(|(&o, &l)| o && l).count();
            let n_off = idx.len() - n_on;
            let gain = base
                - (n_on as f64 / idx.len() as f64) * entropy(pos_on, n_on)
                - (n_off as f64 / idx.len() as f64) * entropy(pos - pos_on, n_off);
            if best.is_none_or(|(g, _)| gain > g + 1e-12) {
                best = Some((gain, k));
            }
        }
        let (_, k) = best?;
        let (cond, sig) = &self.pools.pool(cnt)[k];
        let (yes, no): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| sig[i] == Value::Bool(true));
        let a = self.learn(then_nt, &yes, outputs, depth + 1)?;
        let b = self.learn(else_nt, &no, outputs, depth + 1)?;
        Some(self.g.apply(ite, vec![cond.clone(), a, b]))
    }

    /// `and(t, rest)` where `t` holds on every positive example and fails on
    /// at least one negative one.
    fn learn_conj(&self, nt: usize, idx: &[usize], outputs: &[Value], depth: usize) -> Option<EmbeddedTerm> {
        let and = self.ctor_with(nt, &Op::And)?;
        let fields = &self.g.constructors[and].fields;
        let (head_nt, tail_nt) = (fields[0], fields[1]);
        let truth = Value::Bool(true);
        let mut best: Option<(usize, usize)> = None;
        for (k, (_, sig)) in self.pools.pool(head_nt).iter().enumerate() {
            let mut rejected = 0;
            let mut ok = true;
            for &i in idx {
                match (sig[i] == truth, outputs[i] == truth) {
                    (false, true) => {
                        ok = false;
                        break;
                    }
                    (false, false) => rejected += 1,
                    _ => {}
                }
            }
            if ok && rejected > 0 && best.is_none_or(|(r, _)| rejected > r) {
                best = Some((rejected, k));
            }
        }
        let (_, k) = best?;
        let (head, sig) = &self.pools.pool(head_nt)[k];
        let rest: Vec<usize> = idx.iter().copied().filter(|&i| sig[i] == truth).collect();
        let tail = self.learn(tail_nt, &rest, outputs, depth + 1)?;
        Some(self.g.apply(and, vec![head.clone(), tail]))
    }

    /// `str.++(t, rest)` where `t` produces a prefix of every output.
    fn learn_concat(&self, nt: usize, idx: &[usize], outputs: &[Value], depth: usize) -> Option<EmbeddedTerm> {
        let cat = self.ctor_with(nt, &Op::StrConcat)?;
        let fields = &self.g.constructors[cat].fields;
        let (head_nt, tail_nt) = (fields[0], fields[1]);
        let mut best: Option<(usize, usize)> = None;
        for (k, (_, sig)) in self.pools.pool(head_nt).iter().enumerate() {
            let mut consumed = 0;
            let mut ok = true;
            for &i in idx {
                match (sig[i].as_str(), outputs[i].as_str()) {
                    (Some(p), Some(o)) if o.starts_with(p) => consumed += p.chars().count(),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && consumed > 0 && best.is_none_or(|(c, _)| consumed > c) {
                best = Some((consumed, k));
            }
        }
        let (_, k) = best?;
        let (head, sig) = &self.pools.pool(head_nt)[k];
        let mut rest = outputs.to_vec();
        for &i in idx {
            let p = sig[i].as_str().expect("string");
            let o = outputs[i].as_str().expect("string");
            rest[i] = Value::str(&o[p.len()..]);
        }
        let tail = self.learn(tail_nt, idx, &rest, depth + 1)?;
        Some(self.g.apply(cat, vec![head.clone(), tail]))
    }
}

/// Pool growth per learning attempt.
const ROUND: usize = 1000;

/// Grows the pools in rounds and tries to assemble a term matching every
/// example after each. Fails with the reason enumeration stopped.
pub fn learn_examples(
    g: &Arc<DatatypeGrammar>,
    inst: &PbeInstance,
    enumeration: &EnumConfig,
    deadline: Option<Instant>,
    stats: &mut Stats,
) -> Result<EmbeddedTerm, EnumEnd> {
    let outputs: Vec<Value> = inst.examples.iter().map(|(_, o)| o.clone()).collect();
    let idx: Vec<usize> = (0..outputs.len()).collect();
    let mut pools = Pools::new(g.clone(), inst, enumeration, deadline);
    let string = g.sort_of(g.start()) == Sort::String;
    let result = loop {
        pools.grow(ROUND, stats);
        let modes: &[bool] = if string { &[true, false] } else { &[false] };
        let found = modes.iter().find_map(|&try_concat| {
            Learner {
                g,
                pools: &pools,
                try_concat,
            }
            .learn(g.start(), &idx, &outputs, 0)
        });
        if let Some(t) = found {
            for (input, out) in &inst.examples {
                assert_eq!(g.eval_embedded(&t, input).as_ref(), Ok(out), "learned term is exact");
            }
            break Ok(t);
        }
        if let Some(end) = pools.ended() {
            break Err(end);
        }
    };
    stats.pruned += pools.pruned();
    result
}

/// Learns a term from the examples and checks it against the constraints.
pub fn learn_pbe(
    problem: &SyGuSProblem,
    g: &Arc<DatatypeGrammar>,
    inst: &PbeInstance,
    cfg: &CegisConfig,
    stats: &mut Stats,
) -> SynthOutcome {
    match learn_examples(g, inst, &cfg.enumeration, cfg.deadline, stats) {
        Ok(t) => {
            let body = g.unembed(&t).expect("pooled terms are hole-free");
            let engine = if body.op() == Some(&Op::StrConcat) {
                Engine::Concat
            } else {
                Engine::DecisionTree
            };
            let sol = Solution::single(problem.synth_funs[0].name().clone(), body, engine);
            stats.verifier_calls += 1;
            match check_candidate(problem, &sol, &cfg.verify) {
                VerificationOutcome::Valid => SynthOutcome::Solved(sol),
                other => SynthOutcome::Unknown(format!("learned term did not verify: {other:?}")),
            }
        }
        // Every input/output behaviour the grammar can express was pooled.
        Err(EnumEnd::Complete) if !g.has_constant_slots() => SynthOutcome::Infeasible,
        Err(end) => SynthOutcome::Unknown(end.to_string()),
    }
}

/// Recognizes and solves a programming-by-example problem.
pub fn solve_pbe(problem: &SyGuSProblem, g: &Arc<DatatypeGrammar>, cfg: &CegisConfig, stats: &mut Stats) -> SynthOutcome {
    match is_pbe(problem) {
        PbeCheck::Pbe(inst) => learn_pbe(problem, g, &inst, cfg, stats),
        PbeCheck::NotPbe => SynthOutcome::Unknown("not programming-by-example".into()),
        PbeCheck::Contradictory => SynthOutcome::Infeasible,
    }
}
