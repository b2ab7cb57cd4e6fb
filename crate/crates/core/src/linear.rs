//! Linear integer expressions over opaque atoms.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::term::{Kind, Op, Sort, Term, Value};

/// `Σ coeffs[atom] · atom + constant`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Term, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn constant(c: BigInt) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn atom(t: Term) -> LinExpr {
        let mut l = LinExpr::default();
        l.coeffs.insert(t, BigInt::one());
        l
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, atom: &Term) -> BigInt {
        self.coeffs.get(atom).cloned().unwrap_or_default()
    }

    /// `self += k · other`
    pub fn add_scaled(&mut self, other: &LinExpr, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for (a, c) in &other.coeffs {
            let entry = self.coeffs.entry(a.clone()).or_default();
            *entry += c * k;
            if entry.is_zero() {
                self.coeffs.remove(a);
            }
        }
        self.constant += &other.constant * k;
    }

    pub fn scaled(&self, k: &BigInt) -> LinExpr {
        let mut out = LinExpr::default();
        out.add_scaled(self, k);
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(other, &-BigInt::one());
        out
    }

    /// Removes `atom` and returns its coefficient.
    pub fn take(&mut self, atom: &Term) -> BigInt {
        self.coeffs.remove(atom).unwrap_or_default()
    }

    /// Gcd of the atom coefficients (zero when there are none).
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Exact division of every coefficient and the constant by `k`.
    pub fn div_exact(&self, k: &BigInt) -> Option<LinExpr> {
        if k.is_zero() {
            return None;
        }
        let mut out = LinExpr::default();
        for (a, c) in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.coeffs.insert(a.clone(), q);
        }
        let (q, r) = self.constant.div_rem(k);
        if !r.is_zero() {
            return None;
        }
        out.constant = q;
        Some(out)
    }
}

fn is_arith(op: &Op) -> bool {
    matches!(op, Op::Add | Op::Sub | Op::Neg | Op::Mul)
}

/// Decomposes an Int-sorted term into a linear form. Sub-terms that are not
/// `+`, `-`, or multiplication by a constant become atoms; a product of two
/// non-constant factors is kept as a single (sorted) product atom.
pub fn linearize(t: &Term) -> LinExpr {
    debug_assert_eq!(t.sort(), Sort::Int);
    match t.kind() {
        Kind::Const(Value::Int(i)) => LinExpr::constant(i.clone()),
        Kind::App(op, ch) if is_arith(op) => match op {
            Op::Add => {
                let mut l = LinExpr::default();
                for c in ch.iter() {
                    l.add_scaled(&linearize(c), &BigInt::one());
                }
                l
            }
            Op::Sub => {
                let mut l = linearize(&ch[0]);
                for c in ch[1..].iter() {
                    l.add_scaled(&linearize(c), &-BigInt::one());
                }
                l
            }
            Op::Neg => linearize(&ch[0]).scaled(&-BigInt::one()),
            _ => {
                let parts: Vec<LinExpr> = ch.iter().map(linearize).collect();
                let mut scale = BigInt::one();
                let mut nonconst: Vec<(usize, &LinExpr)> = Vec::new();
                for (i, p) in parts.iter().enumerate() {
                    if p.is_constant() {
                        scale *= &p.constant;
                    } else {
                        nonconst.push((i, p));
                    }
                }
                match nonconst.len() {
                    0 => LinExpr::constant(scale),
                    1 => nonconst[0].1.scaled(&scale),
                    _ => {
                        let mut factors: Vec<Term> =
                            nonconst.iter().map(|(i, _)| ch[*i].clone()).collect();
                        factors.sort();
                        LinExpr::atom(Term::build(Op::Mul, factors)).scaled(&scale)
                    }
                }
            }
        },
        _ => LinExpr::atom(t.clone()),
    }
}

/// Canonical term for a linear form: atoms in term order, each as `a` or
/// `(* c a)`, followed by a nonzero constant.
pub fn build_sum(l: &LinExpr) -> Term {
    let mut summands: Vec<Term> = Vec::new();
    for (a, c) in &l.coeffs {
        if c.is_one() {
            summands.push(a.clone());
        } else {
            summands.push(Term::build(Op::Mul, vec![Term::bigint(c.clone()), a.clone()]));
        }
    }
    if !l.constant.is_zero() || summands.is_empty() {
        summands.push(Term::bigint(l.constant.clone()));
    }
    if summands.len() == 1 {
        summands.pop().expect("one summand")
    } else {
        Term::build(Op::Add, summands)
    }
}

/// Splits `p` into (positive part, negated negative part) so `p = pos - neg`.
pub fn split_signs(p: &LinExpr) -> (LinExpr, LinExpr) {
    let mut pos = LinExpr::default();
    let mut neg = LinExpr::default();
    for (a, c) in &p.coeffs {
        if c.is_positive() {
            pos.coeffs.insert(a.clone(), c.clone());
        } else {
            neg.coeffs.insert(a.clone(), -c);
        }
    }
    if p.constant.is_positive() {
        pos.constant = p.constant.clone();
    } else {
        neg.constant = -&p.constant;
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linearize_collects_like_atoms() {
        let x = Term::var("x", Sort::Int);
        let t = Term::app(
            Op::Sub,
            vec![
                Term::app(Op::Add, vec![x.clone(), x.clone(), Term::int(3)]).unwrap(),
                Term::app(Op::Mul, vec![Term::int(2), x.clone()]).unwrap(),
            ],
        )
        .unwrap();
        let l = linearize(&t);
        assert!(l.coeffs.is_empty());
        assert_eq!(l.constant, BigInt::from(3));
    }

    #[test]
    fn build_sum_round_trips() {
        let x = Term::var("x", Sort::Int);
        let y = Term::var("y", Sort::Int);
        let mut l = LinExpr::atom(y.clone());
        l.add_scaled(&LinExpr::atom(x.clone()), &BigInt::from(-2));
        l.constant = BigInt::from(5);
        let t = build_sum(&l);
        assert_eq!(t.to_string(), "(+ (* (- 2) x) y 5)");
        assert_eq!(linearize(&t), l);
    }
}
