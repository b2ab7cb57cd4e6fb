//! Size-ordered bottom-up enumeration of embedded terms with redundancy
//! elimination by rewriting (or by evaluation on a fixed input set) and
//! pattern-based symmetry breaking.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grammar::{eval_tnode, Analog, DatatypeGrammar, EmbeddedTerm};
use crate::rewrite::Rewriter;
use crate::term::{bv_mask, Op, Sort, Term, Value};

pub const DEFAULT_MAX_SIZE: usize = 12;

/// Memo entries kept by the enumerator's rewriter before it is flushed.
const REWRITE_MEMO_LIMIT: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dedup {
    /// Two terms are redundant when their rewritten forms coincide.
    Rewrite,
    /// Two terms are redundant when they agree on every sample point. Only
    /// sound when the sample points are the whole relevant input space, as
    /// in programming-by-example.
    Observational,
}

#[derive(Clone, Debug)]
pub struct EnumConfig {
    pub max_size: usize,
    pub dedup: Dedup,
    pub symmetry: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_size: DEFAULT_MAX_SIZE,
            dedup: Dedup::Rewrite,
            symmetry: true,
        }
    }
}

/// Why enumeration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumEnd {
    /// Every non-redundant term has been produced.
    Complete,
    /// The size cap was reached.
    SizeLimit,
    /// The deadline passed.
    Deadline,
}

impl fmt::Display for EnumEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnumEnd::Complete => "exhausted",
            EnumEnd::SizeLimit => "size limit",
            EnumEnd::Deadline => "timeout",
        })
    }
}

/// A term admitted into its nonterminal's pool.
#[derive(Clone, Debug)]
pub struct Admitted {
    pub nt: usize,
    pub term: EmbeddedTerm,
    /// Rewritten analog; holes appear as `#c0`, `#c1`, ... Not computed for
    /// hole-free terms under observational dedup.
    pub key: Option<Term>,
    /// Values on the sample points; `None` for templates with holes.
    pub sig: Option<Arc<[Value]>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    pub generated: u64,
    pub admitted: u64,
    pub pruned_symmetry: u64,
    pub pruned_redundant: u64,
}

/// Forbidden (parent constructor, child position, child constructor)
/// triples.
pub type SymmetryRules = BTreeSet<(usize, usize, usize)>;

enum Effect {
    /// The parent equals its child at this position.
    Child(usize),
    /// The parent equals this literal.
    Literal(Value),
}

fn literal_effect(op: &Op, arity: usize, pos: usize, v: &Value) -> Option<Effect> {
    let other = |p: usize| if arity == 2 { Some(Effect::Child(1 - p)) } else { None };
    let is_int = |n: i64| v.as_int().is_some_and(|i| *i == n.into());
    let bv_zero = matches!(v, Value::BitVec { bits: 0, .. });
    let bv_ones = matches!(v, Value::BitVec { width, bits } if *bits == bv_mask(*width));
    match op {
        Op::Ite if arity == 3 && pos == 0 => match v {
            Value::Bool(true) => Some(Effect::Child(1)),
            Value::Bool(false) => Some(Effect::Child(2)),
            _ => None,
        },
        _ if arity != 2 => None,
        Op::Add if is_int(0) => other(pos),
        Op::Sub if pos == 1 && is_int(0) => other(pos),
        Op::Mul if is_int(1) => other(pos),
        Op::Mul if is_int(0) => Some(Effect::Literal(Value::int(0))),
        Op::And if *v == Value::Bool(true) => other(pos),
        Op::And if *v == Value::Bool(false) => Some(Effect::Literal(Value::Bool(false))),
        Op::Or if *v == Value::Bool(false) => other(pos),
        Op::Or if *v == Value::Bool(true) => Some(Effect::Literal(Value::Bool(true))),
        Op::Implies if pos == 0 && *v == Value::Bool(true) => other(pos),
        Op::Implies if (pos == 0) == (*v == Value::Bool(false)) => Some(Effect::Literal(Value::Bool(true))),
        Op::StrConcat if *v == Value::str("") => other(pos),
        Op::BvAdd | Op::BvOr | Op::BvXor if bv_zero => other(pos),
        Op::BvSub | Op::BvShl | Op::BvLshr if pos == 1 && bv_zero => other(pos),
        Op::BvShl | Op::BvLshr if pos == 0 && bv_zero => Some(Effect::Literal(v.clone())),
        Op::BvMul if matches!(v, Value::BitVec { bits: 1, .. }) => other(pos),
        Op::BvMul if bv_zero => Some(Effect::Literal(v.clone())),
        Op::BvAnd if bv_ones => other(pos),
        Op::BvAnd if bv_zero => Some(Effect::Literal(v.clone())),
        Op::BvOr if bv_ones => Some(Effect::Literal(v.clone())),
        _ => None,
    }
}

/// Symmetry-breaking rules justified by identities, annihilators and
/// involutions of the operators in the grammar. A rule is emitted only when
/// the equivalent smaller term is itself derivable from the parent's
/// nonterminal.
pub fn derive_symmetry_rules(g: &DatatypeGrammar) -> SymmetryRules {
    let mut rules = SymmetryRules::new();
    for (pi, p) in g.constructors.iter().enumerate() {
        let Some(op) = p.direct_op() else { continue };
        let arity = p.arity();
        for (pos, &field_nt) in p.fields.iter().enumerate() {
            for &ci in &g.by_nt[field_nt] {
                let c = &g.constructors[ci];
                if let Some(v) = c.literal() {
                    let sound = match literal_effect(op, arity, pos, v) {
                        Some(Effect::Child(j)) => p.fields[j] == p.nt,
                        Some(Effect::Literal(u)) => g.by_nt[p.nt]
                            .iter()
                            .any(|&k| g.constructors[k].literal() == Some(&u)),
                        None => false,
                    };
                    if sound {
                        rules.insert((pi, pos, ci));
                    }
                }
                // f(f(y)) = y for involutions.
                if matches!(op, Op::Not | Op::Neg | Op::BvNot | Op::BvNeg)
                    && c.direct_op() == Some(op)
                    && c.fields[0] == p.nt
                {
                    rules.insert((pi, pos, ci));
                }
            }
        }
    }
    rules
}

#[derive(Default)]
struct Cursor {
    size: usize,
    nt: usize,
    ctor_pos: usize,
    comps: Option<Vec<Vec<usize>>>,
    comp_idx: usize,
    idx: Vec<usize>,
}

/// Bottom-up enumerator over all nonterminals of a grammar at once. Terms
/// of size k are built from pooled terms whose sizes sum to k - 1.
pub struct Enumerator {
    grammar: Arc<DatatypeGrammar>,
    config: EnumConfig,
    points: Vec<Vec<Value>>,
    rules: SymmetryRules,
    /// `pools[nt][size]`
    pools: Vec<Vec<Vec<Admitted>>>,
    seen_keys: Vec<HashSet<Term>>,
    seen_sigs: Vec<HashSet<Arc<[Value]>>>,
    rewriter: Rewriter,
    cursor: Cursor,
    end: Option<EnumEnd>,
    deadline: Option<Instant>,
    stats: EnumStats,
}

impl Enumerator {
    /// `points` are argument tuples used for evaluation signatures.
    pub fn new(grammar: Arc<DatatypeGrammar>, config: EnumConfig, points: Vec<Vec<Value>>) -> Enumerator {
        let n = grammar.nonterminals.len();
        let rules = if config.symmetry {
            derive_symmetry_rules(&grammar)
        } else {
            SymmetryRules::new()
        };
        let mut e = Enumerator {
            grammar,
            config,
            points,
            rules,
            pools: vec![vec![Vec::new()]; n],
            seen_keys: vec![HashSet::new(); n],
            seen_sigs: vec![HashSet::new(); n],
            rewriter: Rewriter::new(),
            cursor: Cursor::default(),
            end: None,
            deadline: None,
            stats: EnumStats::default(),
        };
        e.start_level(1);
        e
    }

    pub fn grammar(&self) -> &Arc<DatatypeGrammar> {
        &self.grammar
    }

    pub fn points(&self) -> &[Vec<Value>] {
        &self.points
    }

    pub fn rules(&self) -> &SymmetryRules {
        &self.rules
    }

    pub fn stats(&self) -> EnumStats {
        self.stats
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
        if self.end == Some(EnumEnd::Deadline) {
            self.end = None;
        }
    }

    /// Size currently being enumerated.
    pub fn current_size(&self) -> usize {
        self.cursor.size
    }

    /// Admitted terms of `nt` in admission order.
    pub fn pool(&self, nt: usize) -> impl Iterator<Item = &Admitted> {
        self.pools[nt].iter().flatten()
    }

    /// Next non-redundant term of the start symbol.
    pub fn next_candidate(&mut self) -> Result<EmbeddedTerm, EnumEnd> {
        let start = self.grammar.start();
        loop {
            let a = self.next_term()?;
            if a.nt == start {
                return Ok(a.term);
            }
        }
    }

    /// Next non-redundant term of any nonterminal.
    pub fn next_term(&mut self) -> Result<Admitted, EnumEnd> {
        loop {
            if let Some(end) = self.end {
                return Err(end);
            }
            if self.stats.generated.is_multiple_of(256) {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        self.end = Some(EnumEnd::Deadline);
                        continue;
                    }
                }
            }
            match self.advance() {
                Some((nt, ctor, comp, idx)) => {
                    if let Some(a) = self.process(nt, ctor, &comp, &idx) {
                        return Ok(a);
                    }
                }
                None => self.finish_level(),
            }
        }
    }

    fn start_level(&mut self, size: usize) {
        if size > self.config.max_size {
            self.end = Some(EnumEnd::SizeLimit);
            return;
        }
        for p in &mut self.pools {
            p.push(Vec::new());
        }
        self.cursor = Cursor {
            size,
            ..Cursor::default()
        };
    }

    fn finish_level(&mut self) {
        let n = self.cursor.size;
        let k = (1..=n)
            .rev()
            .find(|&s| self.pools.iter().any(|p| !p[s].is_empty()))
            .unwrap_or(0);
        if n > self.grammar.max_arity() * k {
            self.end = Some(EnumEnd::Complete);
            return;
        }
        if self.rewriter.memo_len() > REWRITE_MEMO_LIMIT {
            self.rewriter.clear();
        }
        self.start_level(n + 1);
    }

    fn compositions(&self, fields: &[usize], total: usize) -> Vec<Vec<usize>> {
        fn go(pools: &[Vec<Vec<Admitted>>], fields: &[usize], total: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let Some((&f, rest)) = fields.split_first() else {
                if total == 0 {
                    out.push(acc.clone());
                }
                return;
            };
            // Leave at least one unit for each remaining field.
            for s in 1..=total.saturating_sub(rest.len()) {
                if pools[f].get(s).is_some_and(|p| !p.is_empty()) {
                    acc.push(s);
                    go(pools, rest, total - s, acc, out);
                    acc.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(&self.pools, fields, total, &mut Vec::new(), &mut out);
        out
    }

    /// Moves the cursor to the next candidate of the current level.
    fn advance(&mut self) -> Option<(usize, usize, Vec<usize>, Vec<usize>)> {
        let g = self.grammar.clone();
        loop {
            let c = &mut self.cursor;
            if c.nt >= g.nonterminals.len() {
                return None;
            }
            let ctors = &g.by_nt[c.nt];
            if c.ctor_pos >= ctors.len() {
                c.nt += 1;
                c.ctor_pos = 0;
                c.comps = None;
                continue;
            }
            let ctor = ctors[c.ctor_pos];
            let fields = &g.constructors[ctor].fields;
            if c.comps.is_none() {
                let size = c.size;
                let comps = self.compositions(fields, size - 1);
                let c = &mut self.cursor;
                c.comps = Some(comps);
                c.comp_idx = 0;
                c.idx = vec![0; fields.len()];
                continue;
            }
            let comps = c.comps.as_ref().expect("computed");
            if c.comp_idx >= comps.len() {
                c.ctor_pos += 1;
                c.comps = None;
                continue;
            }
            let comp = comps[c.comp_idx].clone();
            let idx = c.idx.clone();
            // Mixed-radix increment, last position fastest.
            let mut carry = true;
            for i in (0..fields.len()).rev() {
                c.idx[i] += 1;
                if c.idx[i] < self.pools[fields[i]][comp[i]].len() {
                    carry = false;
                    break;
                }
                c.idx[i] = 0;
            }
            if carry {
                c.comp_idx += 1;
            }
            return Some((c.nt, ctor, comp, idx));
        }
    }

    fn process(&mut self, nt: usize, ctor: usize, comp: &[usize], idx: &[usize]) -> Option<Admitted> {
        self.stats.generated += 1;
        let g = self.grammar.clone();
        let c = &g.constructors[ctor];
        let children: Vec<&Admitted> = c
            .fields
            .iter()
            .zip(comp.iter().zip(idx))
            .map(|(&f, (&s, &i))| &self.pools[f][s][i])
            .collect();
        for (pos, ch) in children.iter().enumerate() {
            if self.rules.contains(&(ctor, pos, ch.term.ctor())) {
                self.stats.pruned_symmetry += 1;
                return None;
            }
        }
        let (term, key, sig) = match &c.analog {
            Analog::Constant(s) => {
                let term = EmbeddedTerm::new(ctor, vec![], None, true);
                (term, Some(Term::var("#c0", *s)), None)
            }
            Analog::Template(tmpl) => {
                let term = EmbeddedTerm::new(ctor, children.iter().map(|a| a.term.clone()).collect(), None, false);
                let sig: Option<Arc<[Value]>> = if term.holes() == 0 && !self.points.is_empty() {
                    let mut vals = Vec::with_capacity(self.points.len());
                    let mut ok = true;
                    for (j, args) in self.points.iter().enumerate() {
                        let fields: Vec<Value> = children
                            .iter()
                            .map(|a| a.sig.as_ref().expect("hole-free children have signatures")[j].clone())
                            .collect();
                        match eval_tnode(tmpl, &fields, args) {
                            Ok(v) => vals.push(v),
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    ok.then(|| vals.into())
                } else {
                    None
                };
                let observational = self.config.dedup == Dedup::Observational && sig.is_some();
                let key = if observational {
                    None
                } else if term.holes() > 0 {
                    Some(self.rewriter.rewrite(&g.unembed_template(&term).0))
                } else {
                    let fields: Vec<Term> = children
                        .iter()
                        .map(|a| a.key.clone().expect("keys are kept in rewrite mode"))
                        .collect();
                    Some(self.rewriter.rewrite(&g.instantiate(tmpl, &fields)))
                };
                (term, key, sig)
            }
        };
        let redundant = match (&key, &sig) {
            (Some(k), _) => !self.seen_keys[nt].insert(k.clone()),
            (None, Some(s)) => !self.seen_sigs[nt].insert(s.clone()),
            (None, None) => false,
        };
        if redundant {
            self.stats.pruned_redundant += 1;
            return None;
        }
        let a = Admitted { nt, term, key, sig };
        self.pools[nt][self.cursor.size].push(a.clone());
        self.stats.admitted += 1;
        Some(a)
    }
}

/// Deterministic sample argument tuples: corner tuples followed by
/// `random` seeded draws. Strings are drawn over `alphabet`.
pub fn sample_points(sorts: &[Sort], seed: u64, alphabet: &[char], random: usize) -> Vec<Vec<Value>> {
    let corner = |s: Sort, which: usize| -> Value {
        match (s, which) {
            (Sort::Int, 0) => Value::int(0),
            (Sort::Int, 1) => Value::int(1),
            (Sort::Int, _) => Value::int(-1),
            (Sort::Bool, w) => Value::Bool(w == 1),
            (Sort::String, 0) => Value::str(""),
            (Sort::String, _) => Value::Str(alphabet.first().copied().unwrap_or('a').to_string()),
            (Sort::BitVec(w), 0) => Value::bv(w, 0),
            (Sort::BitVec(w), 1) => Value::bv(w, 1),
            (Sort::BitVec(w), _) => Value::bv(w, bv_mask(w)),
        }
    };
    let mut out: Vec<Vec<Value>> = (0..3).map(|w| sorts.iter().map(|s| corner(*s, w)).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fallback = ['a', 'b', ' '];
    let chars: &[char] = if alphabet.is_empty() { &fallback } else { alphabet };
    for _ in 0..random {
        let p = sorts
            .iter()
            .map(|s| match s {
                Sort::Int => Value::int(rng.gen_range(-10..=10)),
                Sort::Bool => Value::Bool(rng.gen()),
                Sort::String => {
                    let len = rng.gen_range(0..=5);
                    Value::Str((0..len).map(|_| chars[rng.gen_range(0..chars.len())]).collect())
                }
                Sort::BitVec(w) => Value::bv(*w, rng.gen::<u64>()),
            })
            .collect();
        out.push(p);
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_sygus;
    use crate::grammar::embed_grammar;
    use crate::rewrite::rewrite;
    use crate::term::{evaluate, Env};
    use std::collections::BTreeSet;

    fn grammar(text: &str) -> Arc<DatatypeGrammar> {
        let p = parse_sygus(text).unwrap();
        let d = &p.synth_funs[0];
        Arc::new(embed_grammar(d.grammar.as_ref().unwrap(), &d.params).unwrap())
    }

    const PLUS: &str = "(synth-fun f ((x1 Int)) Int ((S Int)) ((S Int (x1 0 1 (+ S S)))))";

    fn domain() -> Vec<Vec<Value>> {
        (-2..=2).map(|i| vec![Value::int(i)]).collect()
    }

    fn collect(e: &mut Enumerator, max: usize) -> Vec<EmbeddedTerm> {
        let mut out = Vec::new();
        while let Ok(t) = e.next_candidate() {
            if t.size() > max {
                break;
            }
            out.push(t);
        }
        out
    }

    #[test]
    fn first_terms_are_the_size_one_terms() {
        let g = grammar(PLUS);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), vec![]);
        let first: Vec<String> = (0..3).map(|_| g.unembed(&e.next_candidate().unwrap()).unwrap().to_string()).collect();
        assert_eq!(first, vec!["x1", "0", "1"]);
    }

    #[test]
    fn plus_zero_is_never_yielded() {
        let g = grammar(PLUS);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), vec![]);
        let x1 = g.apply(0, vec![]);
        let zero = g.apply(1, vec![]);
        let bad = [g.apply(3, vec![x1.clone(), zero.clone()]), g.apply(3, vec![zero, x1])];
        for t in collect(&mut e, 7) {
            assert!(!bad.contains(&t));
        }
        assert!(e.rules().contains(&(3, 1, 1)));
        assert!(e.rules().contains(&(3, 0, 1)));
    }

    #[test]
    fn no_identity_means_no_rules() {
        let g = grammar("(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 1 (+ S S)))))");
        assert!(derive_symmetry_rules(&g).is_empty());
    }

    /// Evaluation tables of every grammar term up to `max`, unpruned.
    fn brute_force_tables(g: &DatatypeGrammar, max: usize, dom: &[Vec<Value>]) -> BTreeSet<Vec<Value>> {
        let mut by_size: Vec<Vec<Vec<Value>>> = vec![vec![]; max + 1];
        for k in 1..=max {
            let mut out = Vec::new();
            for &c in &g.by_nt[0] {
                let ctor = &g.constructors[c];
                let Analog::Template(t) = &ctor.analog else { continue };
                match ctor.arity() {
                    0 if k == 1 => out.push(dom.iter().map(|a| eval_tnode(t, &[], a).unwrap()).collect()),
                    2 if k >= 3 => {
                        for l in 1..k - 1 {
                            for a in &by_size[l] {
                                for b in &by_size[k - 1 - l] {
                                    out.push(
                                        dom.iter()
                                            .enumerate()
                                            .map(|(j, args)| eval_tnode(t, &[a[j].clone(), b[j].clone()], args).unwrap())
                                            .collect(),
                                    );
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
            by_size[k] = out;
        }
        by_size.into_iter().flatten().collect()
    }

    #[test]
    fn yield_count_matches_distinct_functions_up_to_three() {
        let g = grammar(PLUS);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), domain());
        let yielded = collect(&mut e, 3);
        assert_eq!(yielded.len(), brute_force_tables(&g, 3, &domain()).len());
    }

    #[test]
    fn signatures_match_brute_force_with_and_without_symmetry() {
        let g = grammar(PLUS);
        let oracle = brute_force_tables(&g, 4, &domain());
        for symmetry in [true, false] {
            let cfg = EnumConfig {
                symmetry,
                ..EnumConfig::default()
            };
            let mut e = Enumerator::new(g.clone(), cfg, domain());
            let tables: BTreeSet<Vec<Value>> = collect(&mut e, 4)
                .iter()
                .map(|t| domain().iter().map(|a| g.eval_embedded(t, a).unwrap()).collect())
                .collect();
            assert_eq!(tables, oracle);
        }
    }

    #[test]
    fn no_two_yields_share_key_and_signature() {
        let g = grammar(PLUS);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), domain());
        let mut seen = HashSet::new();
        for t in collect(&mut e, 7) {
            let key = rewrite(&g.unembed(&t).unwrap());
            let sig: Vec<Value> = domain().iter().map(|a| g.eval_embedded(&t, a).unwrap()).collect();
            assert!(seen.insert((key, sig)));
        }
    }

    #[test]
    fn sizes_are_monotone_and_runs_deterministic() {
        let g = grammar("(synth-fun f ((x Int) (y Int)) Int ((S Int) (B Bool)) ((S Int (x y 0 1 (+ S S) (- S S) (ite B S S))) (B Bool ((<= S S) (and B B) (not B)))))");
        let run = || {
            let mut e = Enumerator::new(g.clone(), EnumConfig::default(), vec![]);
            let mut v = Vec::new();
            for _ in 0..400 {
                v.push(e.next_candidate().unwrap());
            }
            v
        };
        let a = run();
        assert!(a.windows(2).all(|w| w[0].size() <= w[1].size()));
        assert_eq!(a, run());
    }

    #[test]
    fn commuted_sum_is_redundant() {
        let g = grammar(PLUS);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), vec![]);
        let terms: Vec<String> = collect(&mut e, 3).iter().map(|t| g.unembed(t).unwrap().to_string()).collect();
        assert!(terms.contains(&"(+ x1 1)".to_string()));
        assert!(!terms.contains(&"(+ 1 x1)".to_string()));
    }

    #[test]
    fn finite_grammar_is_exhausted() {
        let g = grammar("(synth-fun f ((x Int)) Int ((S Int)) ((S Int (0 1))))");
        let mut e = Enumerator::new(g, EnumConfig::default(), vec![]);
        assert!(e.next_candidate().is_ok());
        assert!(e.next_candidate().is_ok());
        assert_eq!(e.next_candidate(), Err(EnumEnd::Complete));
        // Finite but deeper: B := true | false | (not B) over two sorts.
        let g = grammar("(synth-fun f ((x Int)) Int ((S Int) (B Bool)) ((S Int (0 (ite B S S))) (B Bool (true (not B)))))");
        let mut e = Enumerator::new(g, EnumConfig::default(), vec![]);
        let mut n = 0;
        let end = loop {
            match e.next_candidate() {
                Ok(_) => n += 1,
                Err(end) => break end,
            }
        };
        assert_eq!(end, EnumEnd::Complete);
        assert!(n >= 1);
    }

    #[test]
    fn size_cap_is_reported() {
        let g = grammar(PLUS);
        let cfg = EnumConfig {
            max_size: 3,
            ..EnumConfig::default()
        };
        let mut e = Enumerator::new(g, cfg, vec![]);
        let end = loop {
            if let Err(end) = e.next_candidate() {
                break end;
            }
        };
        assert_eq!(end, EnumEnd::SizeLimit);
    }

    #[test]
    fn holes_are_templates_enumerated_once_per_shape() {
        let g = grammar("(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int (x (+ S C))) (C Int ((Constant Int)))))");
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), vec![]);
        let terms = collect(&mut e, 5);
        let shown: Vec<String> = terms.iter().map(|t| g.unembed_template(t).0.to_string()).collect();
        assert_eq!(shown, vec!["x", "(+ x #c0)", "(+ (+ x #c0) #c1)"]);
    }

    #[test]
    fn observational_mode_merges_equal_tables() {
        let g = grammar(PLUS);
        let pts = vec![vec![Value::int(0)]];
        let cfg = EnumConfig {
            dedup: Dedup::Observational,
            ..EnumConfig::default()
        };
        let mut e = Enumerator::new(g.clone(), cfg, pts.clone());
        // On x1 = 0 the terms x1 and 0 coincide.
        let terms = collect(&mut e, 1);
        assert_eq!(terms.len(), 2);
        let admitted: Vec<Value> = e.pool(0).filter(|a| a.term.size() == 1).map(|a| a.sig.as_ref().unwrap()[0].clone()).collect();
        assert_eq!(admitted, vec![Value::int(0), Value::int(1)]);
    }

    #[test]
    fn signatures_agree_with_evaluation() {
        let g = grammar("(synth-fun f ((x Int) (y Int)) Int ((S Int) (B Bool)) ((S Int (x y 0 (- S S) (ite B S S))) (B Bool ((<= S S) (not B)))))");
        let pts = sample_points(&[Sort::Int, Sort::Int], 7, &[], 5);
        let mut e = Enumerator::new(g.clone(), EnumConfig::default(), pts.clone());
        for _ in 0..300 {
            let a = e.next_term().unwrap();
            let t = g.unembed(&a.term).unwrap();
            for (j, p) in pts.iter().enumerate() {
                let env = Env::new().with("x", p[0].clone()).with("y", p[1].clone());
                assert_eq!(a.sig.as_ref().unwrap()[j], evaluate(&t, &env).unwrap());
            }
        }
    }

    #[test]
    fn sample_points_are_deterministic() {
        let s = [Sort::Int, Sort::String, Sort::BitVec(4)];
        let a = sample_points(&s, 3, &['x'], 5);
        assert_eq!(a, sample_points(&s, 3, &['x'], 5));
        assert!(a.len() >= 3);
        assert_eq!(a[0], vec![Value::int(0), Value::str(""), Value::bv(4, 0)]);
    }
}
