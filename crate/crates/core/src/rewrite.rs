//! Theory rewriter producing normal forms used for redundancy elimination.
//!
//! Rules are applied bottom-up: children are normalized first, then a
//! single node-level rule is tried; a changed node is normalized again. The
//! number of rule applications per call is bounded, and running out of fuel
//! returns the current (still equivalent) term.
//!
//! Normal-form conventions:
//! - Int arithmetic is a canonical sum `(+ a (* c b) ... k)` with atoms in
//!   term order and the constant last.
//! - Int comparisons become `(<= lhs rhs)` or `(= lhs rhs)` with every
//!   coefficient positive on its side, coefficients divided by their gcd,
//!   and the constant placed on the side where it is positive.
//! - `and`/`or` are flattened, sorted and deduplicated.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linear::{build_sum, linearize, split_signs, LinExpr};
use crate::term::{apply_op, bv_mask, Kind, Op, Sort, Term, Value};

/// Default number of rule applications allowed per `rewrite` call.
pub const DEFAULT_REWRITE_BUDGET: usize = 10_000;

/// Rewrites `t` to normal form with a fresh memo table.
pub fn rewrite(t: &Term) -> Term {
    Rewriter::new().rewrite(t)
}

/// A rewriter with a memo table, reusable across many calls.
#[derive(Debug)]
pub struct Rewriter {
    memo: HashMap<Term, Term>,
    budget: usize,
    fuel: usize,
}

impl Default for Rewriter {
    fn default() -> Self {
        Rewriter::new()
    }
}

impl Rewriter {
    pub fn new() -> Rewriter {
        Rewriter::with_budget(DEFAULT_REWRITE_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Rewriter {
        Rewriter {
            memo: HashMap::new(),
            budget,
            fuel: budget,
        }
    }

    pub fn rewrite(&mut self, t: &Term) -> Term {
        self.fuel = self.budget;
        self.rw(t)
    }

    /// Drops memoized results; useful to bound memory in long runs.
    pub fn clear(&mut self) {
        self.memo.clear();
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn rw(&mut self, t: &Term) -> Term {
        if let Some(r) = self.memo.get(t) {
            return r.clone();
        }
        let Kind::App(op, ch) = t.kind() else {
            return t.clone();
        };
        let new_ch: Vec<Term> = ch.iter().map(|c| self.rw(c)).collect();
        let node = if new_ch.iter().zip(ch.iter()).all(|(a, b)| a == b) {
            t.clone()
        } else {
            Term::build(op.clone(), new_ch.clone())
        };
        let (result, complete) = match simplify_node(op, &new_ch) {
            Some(next) if next != node => {
                if self.fuel == 0 {
                    (next, false)
                } else {
                    self.fuel -= 1;
                    let r = self.rw(&next);
                    (r, self.fuel > 0)
                }
            }
            _ => (node, true),
        };
        if complete {
            self.memo.insert(t.clone(), result.clone());
            self.memo.insert(result.clone(), result.clone());
        }
        result
    }
}

/// One node-level rewrite step for `op(children)` with normalized children.
/// Returns `None` when no rule applies.
fn simplify_node(op: &Op, ch: &[Term]) -> Option<Term> {
    if !matches!(op, Op::Call(_) | Op::Ite) && ch.iter().all(|c| c.as_value().is_some()) {
        let vals: Vec<Value> = ch.iter().map(|c| c.as_value().cloned().unwrap()).collect();
        if let Ok(v) = apply_op(op, &vals) {
            return Some(Term::constant(v));
        }
    }
    match op {
        Op::Add | Op::Sub | Op::Neg | Op::Mul => {
            Some(build_sum(&linearize(&Term::build(op.clone(), ch.to_vec()))))
        }
        Op::Le | Op::Lt | Op::Ge | Op::Gt => {
            let d = linearize(&ch[0]).sub(&linearize(&ch[1]));
            // Everything becomes `p <= 0`.
            let p = match op {
                Op::Le => d,
                Op::Lt => {
                    let mut d = d;
                    d.constant += 1;
                    d
                }
                Op::Ge => d.scaled(&-BigInt::one()),
                _ => {
                    let mut d = d.scaled(&-BigInt::one());
                    d.constant += 1;
                    d
                }
            };
            Some(normalize_le(p))
        }
        Op::Eq => simplify_eq(ch),
        Op::Not => simplify_not(&ch[0]),
        Op::And | Op::Or => Some(simplify_junction(op, ch)),
        Op::Implies => Some(Term::build(
            Op::Or,
            vec![Term::build(Op::Not, vec![ch[0].clone()]), ch[1].clone()],
        )),
        Op::Ite => simplify_ite(ch),
        Op::StrConcat => Some(simplify_concat(ch)),
        Op::StrLen => match ch[0].op() {
            Some(Op::StrConcat) => Some(Term::build(
                Op::Add,
                ch[0]
                    .children()
                    .iter()
                    .map(|p| Term::build(Op::StrLen, vec![p.clone()]))
                    .collect(),
            )),
            _ => None,
        },
        Op::StrContains => {
            if ch[1].as_value() == Some(&Value::str("")) || ch[0] == ch[1] {
                Some(Term::bool(true))
            } else {
                None
            }
        }
        Op::StrReplace => (ch[1] == ch[2]).then(|| ch[0].clone()),
        Op::BvAdd
        | Op::BvSub
        | Op::BvMul
        | Op::BvAnd
        | Op::BvOr
        | Op::BvXor
        | Op::BvNot
        | Op::BvNeg
        | Op::BvShl
        | Op::BvLshr
        | Op::BvUlt
        | Op::BvUle => simplify_bv(op, ch),
        _ => None,
    }
}

/// Normal form of `p <= 0` over the integers.
fn normalize_le(p: LinExpr) -> Term {
    if p.is_constant() {
        return Term::bool(!p.constant.is_positive());
    }
    let g = p.coeff_gcd();
    let mut q = LinExpr::default();
    for (a, c) in &p.coeffs {
        q.coeffs.insert(a.clone(), c / &g);
    }
    // Σ q·a ≤ -k/g, tightened to the floor.
    let bound = (-&p.constant).div_floor(&g);
    q.constant = -bound;
    let (lhs, rhs) = split_signs(&q);
    Term::build(Op::Le, vec![build_sum(&lhs), build_sum(&rhs)])
}

/// Normal form of `p = 0` over the integers.
fn normalize_int_eq(p: LinExpr) -> Term {
    if p.is_constant() {
        return Term::bool(p.constant.is_zero());
    }
    let g = p.coeff_gcd();
    if !(&p.constant % &g).is_zero() {
        return Term::bool(false);
    }
    let mut q = p.div_exact(&g).expect("gcd divides every coefficient");
    if q.coeffs.values().next().is_some_and(|c| c.is_negative()) {
        q = q.scaled(&-BigInt::one());
    }
    let (lhs, rhs) = split_signs(&q);
    Term::build(Op::Eq, vec![build_sum(&lhs), build_sum(&rhs)])
}

fn simplify_eq(ch: &[Term]) -> Option<Term> {
    let (a, b) = (&ch[0], &ch[1]);
    if a == b {
        return Some(Term::bool(true));
    }
    match a.sort() {
        Sort::Int => Some(normalize_int_eq(linearize(a).sub(&linearize(b)))),
        Sort::Bool => {
            for (x, y) in [(a, b), (b, a)] {
                if x.is_true() {
                    return Some(y.clone());
                }
                if x.is_false() {
                    return Some(Term::build(Op::Not, vec![y.clone()]));
                }
                if x.op() == Some(&Op::Not) && &x.children()[0] == y {
                    return Some(Term::bool(false));
                }
            }
            (a > b).then(|| Term::build(Op::Eq, vec![b.clone(), a.clone()]))
        }
        _ => (a > b).then(|| Term::build(Op::Eq, vec![b.clone(), a.clone()])),
    }
}

fn simplify_not(c: &Term) -> Option<Term> {
    match c.kind() {
        Kind::App(Op::Not, inner) => Some(inner[0].clone()),
        Kind::App(Op::Le, sides) => Some(Term::build(
            Op::Lt,
            vec![sides[1].clone(), sides[0].clone()],
        )),
        _ => None,
    }
}

fn simplify_junction(op: &Op, ch: &[Term]) -> Term {
    let is_and = *op == Op::And;
    let mut flat: Vec<Term> = Vec::new();
    for c in ch {
        if c.op() == Some(op) {
            flat.extend(c.children().iter().cloned());
        } else {
            flat.push(c.clone());
        }
    }
    let identity = Term::bool(is_and);
    let annihilator = Term::bool(!is_and);
    if flat.contains(&annihilator) {
        return annihilator;
    }
    flat.retain(|c| *c != identity);
    flat.sort();
    flat.dedup();
    let present: HashSet<&Term> = flat.iter().collect();
    for c in &flat {
        if c.op() == Some(&Op::Not) && present.contains(&c.children()[0]) {
            return annihilator;
        }
    }
    // Absorption: a ∧ (a ∨ b) = a and a ∨ (a ∧ b) = a.
    let dual = if is_and { Op::Or } else { Op::And };
    let absorbed: Vec<bool> = flat
        .iter()
        .map(|c| c.op() == Some(&dual) && c.children().iter().any(|d| present.contains(d)))
        .collect();
    let mut kept: Vec<Term> = flat
        .iter()
        .zip(absorbed)
        .filter(|(_, gone)| !gone)
        .map(|(c, _)| c.clone())
        .collect();
    match kept.len() {
        0 => identity,
        1 => kept.pop().expect("one element"),
        _ => Term::build(op.clone(), kept),
    }
}

fn simplify_ite(ch: &[Term]) -> Option<Term> {
    let (c, a, b) = (&ch[0], &ch[1], &ch[2]);
    if c.is_true() {
        return Some(a.clone());
    }
    if c.is_false() {
        return Some(b.clone());
    }
    if a == b {
        return Some(a.clone());
    }
    if c.op() == Some(&Op::Not) {
        return Some(Term::build(
            Op::Ite,
            vec![c.children()[0].clone(), b.clone(), a.clone()],
        ));
    }
    if a.sort() == Sort::Bool {
        let not = |t: &Term| Term::build(Op::Not, vec![t.clone()]);
        let or = |x: Term, y: Term| Term::build(Op::Or, vec![x, y]);
        let and = |x: Term, y: Term| Term::build(Op::And, vec![x, y]);
        if a.is_true() {
            return Some(or(c.clone(), b.clone()));
        }
        if a.is_false() {
            return Some(and(not(c), b.clone()));
        }
        if b.is_true() {
            return Some(or(not(c), a.clone()));
        }
        if b.is_false() {
            return Some(and(c.clone(), a.clone()));
        }
    }
    None
}

fn simplify_concat(ch: &[Term]) -> Term {
    let mut parts: Vec<Term> = Vec::new();
    let mut pending: Option<String> = None;
    let flush = |parts: &mut Vec<Term>, pending: &mut Option<String>| {
        if let Some(s) = pending.take() {
            if !s.is_empty() {
                parts.push(Term::string(s));
            }
        }
    };
    let mut flat: Vec<Term> = Vec::new();
    for c in ch {
        if c.op() == Some(&Op::StrConcat) {
            flat.extend(c.children().iter().cloned());
        } else {
            flat.push(c.clone());
        }
    }
    for c in flat {
        match c.as_value() {
            Some(Value::Str(s)) => pending.get_or_insert_with(String::new).push_str(s),
            _ => {
                flush(&mut parts, &mut pending);
                parts.push(c);
            }
        }
    }
    flush(&mut parts, &mut pending);
    match parts.len() {
        0 => Term::string(""),
        1 => parts.pop().expect("one part"),
        _ => Term::build(Op::StrConcat, parts),
    }
}

fn bv_lit(t: &Term) -> Option<(u32, u64)> {
    match t.as_value() {
        Some(Value::BitVec { width, bits }) => Some((*width, *bits)),
        _ => None,
    }
}

fn simplify_bv(op: &Op, ch: &[Term]) -> Option<Term> {
    let width = match ch[0].sort() {
        Sort::BitVec(w) => w,
        _ => return None,
    };
    let zero = |t: &Term| bv_lit(t).is_some_and(|(_, b)| b == 0);
    let ones = |t: &Term| bv_lit(t).is_some_and(|(w, b)| b == bv_mask(w));
    let zero_term = || Term::constant(Value::bv(width, 0));
    if op.is_commutative() && ch[0] > ch[1] {
        return Some(Term::build(op.clone(), vec![ch[1].clone(), ch[0].clone()]));
    }
    match op {
        Op::BvAdd | Op::BvOr | Op::BvXor if zero(&ch[0]) => Some(ch[1].clone()),
        Op::BvAdd | Op::BvOr | Op::BvXor | Op::BvSub | Op::BvShl | Op::BvLshr if zero(&ch[1]) => {
            Some(ch[0].clone())
        }
        Op::BvAnd | Op::BvMul if zero(&ch[0]) => Some(zero_term()),
        Op::BvMul if bv_lit(&ch[0]).is_some_and(|(_, b)| b == 1) => Some(ch[1].clone()),
        Op::BvAnd if ones(&ch[0]) => Some(ch[1].clone()),
        Op::BvOr if ones(&ch[0]) => Some(ch[0].clone()),
        Op::BvAnd | Op::BvOr if ch[0] == ch[1] => Some(ch[0].clone()),
        Op::BvXor | Op::BvSub if ch[0] == ch[1] => Some(zero_term()),
        Op::BvShl | Op::BvLshr if zero(&ch[0]) => Some(zero_term()),
        Op::BvNot | Op::BvNeg if ch[0].op() == Some(op) => Some(ch[0].children()[0].clone()),
        Op::BvUlt if ch[0] == ch[1] || zero(&ch[1]) => Some(Term::bool(false)),
        Op::BvUle if ch[0] == ch[1] || zero(&ch[0]) => Some(Term::bool(true)),
        _ => None,
    }
}
