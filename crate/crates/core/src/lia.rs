//! Satisfiability of quantifier-free linear integer arithmetic.
//!
//! Boolean structure is explored by depth-first search over atom truth
//! assignments with three-valued evaluation; each partial assignment is
//! pruned by a rational simplex check and full candidates are decided by
//! branch and bound.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linear::linearize;
use crate::term::{evaluate, Env, Kind, Op, Sort, Symbol, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiaError {
    #[error("not a linear integer arithmetic formula: `{0}`")]
    NotLia(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiaResult {
    /// A model binding every free variable of the formula.
    Sat(Env),
    Unsat,
    Unknown(String),
}

#[derive(Clone, Debug)]
pub struct LiaConfig {
    /// Cap on search nodes over atom assignments.
    pub max_assignments: u64,
    /// Maximum branch-and-bound depth.
    pub bb_depth: usize,
    /// Maximum branch-and-bound nodes per integer check.
    pub bb_nodes: usize,
}

impl Default for LiaConfig {
    fn default() -> Self {
        LiaConfig {
            max_assignments: 1 << 22,
            bb_depth: 200,
            bb_nodes: 20_000,
        }
    }
}

/// True if `t` is built from Int/Bool variables and literals with linear
/// arithmetic, comparisons, equality, ite and boolean connectives.
pub fn is_lia(t: &Term) -> bool {
    match t.kind() {
        Kind::Var(_) | Kind::Const(_) => matches!(t.sort(), Sort::Int | Sort::Bool),
        Kind::App(op, ch) => {
            let ok_op = match op {
                Op::Add | Op::Sub | Op::Neg | Op::Ite | Op::Le | Op::Lt | Op::Ge | Op::Gt | Op::And | Op::Or
                | Op::Not | Op::Implies => true,
                Op::Eq => matches!(ch[0].sort(), Sort::Int | Sort::Bool),
                Op::Mul => ch.iter().filter(|c| c.as_value().is_none()).count() <= 1,
                _ => false,
            };
            ok_op && ch.iter().all(is_lia)
        }
    }
}

// ---------------------------------------------------------------------------
// Rational simplex over rows `Σ a_j x_j ≤ b`.

type Q = BigRational;

/// A linear constraint `Σ coeffs[j] · x_j ≤ bound` over variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    coeffs: Vec<(usize, BigInt)>,
    bound: BigInt,
}

impl Row {
    fn negate(&self) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|(j, a)| (*j, -a)).collect(),
            bound: -&self.bound - 1,
        }
    }
}

/// Bounded simplex in the style of Dutertre and de Moura: each row gets a
/// slack variable with an upper bound; original variables are free.
struct Simplex {
    nvars: usize,
    /// Tableau row r: value of `basic[r]` = Σ rows[r][j] · var_j.
    rows: Vec<Vec<Q>>,
    basic: Vec<usize>,
    row_of: Vec<Option<usize>>,
    upper: Vec<Option<Q>>,
    value: Vec<Q>,
}

impl Simplex {
    fn new(n: usize, cons: &[Row]) -> Simplex {
        let m = cons.len();
        let nvars = n + m;
        let mut rows = Vec::with_capacity(m);
        let mut upper = vec![None; nvars];
        let mut row_of = vec![None; nvars];
        let mut basic = Vec::with_capacity(m);
        for (i, c) in cons.iter().enumerate() {
            let mut r = vec![Q::zero(); nvars];
            for (j, a) in &c.coeffs {
                r[*j] += Q::from_integer(a.clone());
            }
            rows.push(r);
            upper[n + i] = Some(Q::from_integer(c.bound.clone()));
            row_of[n + i] = Some(i);
            basic.push(n + i);
        }
        Simplex {
            nvars,
            rows,
            basic,
            row_of,
            upper,
            value: vec![Q::zero(); nvars],
        }
    }

    /// Returns true if the rows are feasible over the rationals.
    fn check(&mut self) -> bool {
        loop {
            let viol = self
                .basic
                .iter()
                .enumerate()
                .filter(|(_, &b)| self.upper[b].as_ref().is_some_and(|u| self.value[b] > *u))
                .min_by_key(|(_, &b)| b)
                .map(|(r, &b)| (r, b));
            let Some((r, b)) = viol else { return true };
            let entering = (0..self.nvars).find(|&j| {
                if self.row_of[j].is_some() {
                    return false;
                }
                let a = &self.rows[r][j];
                if a.is_zero() {
                    return false;
                }
                // Decreasing b needs j to move against the sign of a.
                a.is_positive() || self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u)
            });
            let Some(j) = entering else { return false };
            let target = self.upper[b].clone().expect("violated bound exists");
            self.pivot_and_update(r, b, j, target);
        }
    }

    fn pivot_and_update(&mut self, r: usize, b: usize, j: usize, target: Q) {
        let a = self.rows[r][j].clone();
        let theta = (&target - &self.value[b]) / &a;
        self.value[j] += &theta;
        for (r2, &b2) in self.basic.iter().enumerate() {
            if r2 != r && !self.rows[r2][j].is_zero() {
                let d = &self.rows[r2][j] * &theta;
                self.value[b2] += d;
            }
        }
        self.value[b] = target;
        // Solve row r for x_j.
        let inv = Q::one() / &a;
        let mut new_row: Vec<Q> = self.rows[r].iter().map(|c| -(c * &inv)).collect();
        new_row[j] = Q::zero();
        new_row[b] = inv;
        for r2 in 0..self.rows.len() {
            if r2 == r {
                continue;
            }
            let c = self.rows[r2][j].clone();
            if c.is_zero() {
                continue;
            }
            self.rows[r2][j] = Q::zero();
            for (k, nr) in new_row.iter().enumerate() {
                if !nr.is_zero() {
                    self.rows[r2][k] += &c * nr;
                }
            }
        }
        self.rows[r] = new_row;
        self.basic[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[b] = None;
    }
}

fn rational_feasible(n: usize, cons: &[Row]) -> Option<Vec<Q>> {
    let mut s = Simplex::new(n, cons);
    if s.check() {
        s.value.truncate(n);
        Some(s.value)
    } else {
        None
    }
}

enum IntOutcome {
    Sat(Vec<BigInt>),
    Unsat,
    Unknown,
}

fn branch_and_bound(n: usize, cons: &mut Vec<Row>, depth: usize, nodes: &mut usize, cfg: &LiaConfig) -> IntOutcome {
    *nodes += 1;
    let Some(vals) = rational_feasible(n, cons) else {
        return IntOutcome::Unsat;
    };
    let Some((j, v)) = vals.iter().enumerate().find(|(_, v)| !v.is_integer()) else {
        return IntOutcome::Sat(vals.iter().map(|v| v.to_integer()).collect());
    };
    if depth >= cfg.bb_depth || *nodes >= cfg.bb_nodes {
        return IntOutcome::Unknown;
    }
    let fl = v.floor().to_integer();
    let mut unknown = false;
    for branch in [
        Row {
            coeffs: vec![(j, BigInt::one())],
            bound: fl.clone(),
        },
        Row {
            coeffs: vec![(j, -BigInt::one())],
            bound: -(fl + BigInt::one()),
        },
    ] {
        cons.push(branch);
        let r = branch_and_bound(n, cons, depth + 1, nodes, cfg);
        cons.pop();
        match r {
            IntOutcome::Sat(m) => return IntOutcome::Sat(m),
            IntOutcome::Unknown => unknown = true,
            IntOutcome::Unsat => {}
        }
    }
    if unknown {
        IntOutcome::Unknown
    } else {
        IntOutcome::Unsat
    }
}

// ---------------------------------------------------------------------------
// Boolean skeleton.

#[derive(Clone, Debug)]
enum F {
    Const(bool),
    Prop(usize),
    Not(Box<F>),
    And(Vec<F>),
    Or(Vec<F>),
    Ite(Box<F>, Box<F>, Box<F>),
    Iff(Box<F>, Box<F>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Prop {
    Arith(Row),
    Bool(Symbol),
}

struct Builder {
    int_vars: Vec<Symbol>,
    int_index: HashMap<Symbol, usize>,
    props: Vec<Prop>,
    prop_index: HashMap<Prop, usize>,
}

impl Builder {
    fn int_var(&mut self, name: &Symbol) -> usize {
        if let Some(&i) = self.int_index.get(name) {
            return i;
        }
        self.int_vars.push(name.clone());
        self.int_index.insert(name.clone(), self.int_vars.len() - 1);
        self.int_vars.len() - 1
    }

    fn prop(&mut self, p: Prop) -> F {
        if let Some(&i) = self.prop_index.get(&p) {
            return F::Prop(i);
        }
        if let Prop::Arith(r) = &p {
            if let Some(&i) = self.prop_index.get(&Prop::Arith(r.negate())) {
                return F::Not(Box::new(F::Prop(i)));
            }
        }
        self.props.push(p.clone());
        self.prop_index.insert(p, self.props.len() - 1);
        F::Prop(self.props.len() - 1)
    }

    /// `d ≤ 0` for an integer linear term `d`.
    fn le_zero(&mut self, d: &Term) -> Result<F, LiaError> {
        let l = linearize(d);
        let mut coeffs = Vec::new();
        for (a, c) in &l.coeffs {
            match a.as_var() {
                Some(v) if a.sort() == Sort::Int => coeffs.push((self.int_var(v), c.clone())),
                _ => return Err(LiaError::NotLia(a.to_string())),
            }
        }
        if coeffs.is_empty() {
            return Ok(F::Const(!l.constant.is_positive()));
        }
        let g = coeffs.iter().fold(BigInt::zero(), |g, (_, c)| g.gcd(c));
        coeffs.sort_by_key(|(j, _)| *j);
        let coeffs = coeffs.into_iter().map(|(j, c)| (j, c / &g)).collect();
        let bound = (-&l.constant).div_floor(&g);
        Ok(self.prop(Prop::Arith(Row { coeffs, bound })))
    }

    fn formula(&mut self, t: &Term) -> Result<F, LiaError> {
        let bad = || LiaError::NotLia(t.to_string());
        match t.kind() {
            Kind::Const(Value::Bool(b)) => Ok(F::Const(*b)),
            Kind::Var(v) if t.sort() == Sort::Bool => Ok(self.prop(Prop::Bool(v.clone()))),
            Kind::App(op, ch) => {
                let sub = |s: &mut Self, i: usize| s.formula(&ch[i]);
                match op {
                    Op::Not => Ok(F::Not(Box::new(sub(self, 0)?))),
                    Op::And => Ok(F::And(ch.iter().map(|c| self.formula(c)).collect::<Result<_, _>>()?)),
                    Op::Or => Ok(F::Or(ch.iter().map(|c| self.formula(c)).collect::<Result<_, _>>()?)),
                    Op::Implies => {
                        let a = sub(self, 0)?;
                        let b = sub(self, 1)?;
                        Ok(F::Or(vec![F::Not(Box::new(a)), b]))
                    }
                    Op::Ite if t.sort() == Sort::Bool => {
                        let c = sub(self, 0)?;
                        let a = sub(self, 1)?;
                        let b = sub(self, 2)?;
                        Ok(F::Ite(Box::new(c), Box::new(a), Box::new(b)))
                    }
                    Op::Eq if ch[0].sort() == Sort::Bool => {
                        let a = sub(self, 0)?;
                        let b = sub(self, 1)?;
                        Ok(F::Iff(Box::new(a), Box::new(b)))
                    }
                    Op::Le | Op::Lt | Op::Ge | Op::Gt | Op::Eq if ch[0].sort() == Sort::Int => {
                        if let Some(lifted) = lift_int_ite(t) {
                            return self.formula(&lifted);
                        }
                        let diff = |a: &Term, b: &Term| Term::build(Op::Sub, vec![a.clone(), b.clone()]);
                        let one = Term::int(1);
                        match op {
                            Op::Le => self.le_zero(&diff(&ch[0], &ch[1])),
                            Op::Ge => self.le_zero(&diff(&ch[1], &ch[0])),
                            Op::Lt => self.le_zero(&Term::build(Op::Add, vec![diff(&ch[0], &ch[1]), one])),
                            Op::Gt => self.le_zero(&Term::build(Op::Add, vec![diff(&ch[1], &ch[0]), one])),
                            _ => {
                                let a = self.le_zero(&diff(&ch[0], &ch[1]))?;
                                let b = self.le_zero(&diff(&ch[1], &ch[0]))?;
                                Ok(F::And(vec![a, b]))
                            }
                        }
                    }
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

/// Outermost Int-sorted `ite` inside an arithmetic term.
fn find_int_ite(t: &Term) -> Option<Term> {
    if t.sort() != Sort::Int {
        return None;
    }
    if t.op() == Some(&Op::Ite) {
        return Some(t.clone());
    }
    t.children().iter().find_map(find_int_ite)
}

fn replace(t: &Term, target: &Term, with: &Term) -> Term {
    if t == target {
        return with.clone();
    }
    match t.kind() {
        Kind::App(op, ch) => {
            let new: Vec<Term> = ch.iter().map(|c| replace(c, target, with)).collect();
            if new.iter().zip(ch.iter()).all(|(a, b)| a == b) {
                t.clone()
            } else {
                Term::build(op.clone(), new)
            }
        }
        _ => t.clone(),
    }
}

/// `atom[ite(c, a, b)]` becomes `ite(c, atom[a], atom[b])`.
pub(crate) fn lift_int_ite(atom: &Term) -> Option<Term> {
    let found = atom.children().iter().find_map(find_int_ite)?;
    let ch = found.children();
    Some(Term::build(
        Op::Ite,
        vec![ch[0].clone(), replace(atom, &found, &ch[1]), replace(atom, &found, &ch[2])],
    ))
}

fn eval3(f: &F, asg: &[Option<bool>]) -> Option<bool> {
    match f {
        F::Const(b) => Some(*b),
        F::Prop(i) => asg[*i],
        F::Not(a) => eval3(a, asg).map(|b| !b),
        F::And(cs) => {
            let mut all = true;
            for c in cs {
                match eval3(c, asg) {
                    Some(false) => return Some(false),
                    None => all = false,
                    Some(true) => {}
                }
            }
            all.then_some(true)
        }
        F::Or(cs) => {
            let mut none = true;
            for c in cs {
                match eval3(c, asg) {
                    Some(true) => return Some(true),
                    None => none = false,
                    Some(false) => {}
                }
            }
            if none {
                Some(false)
            } else {
                None
            }
        }
        F::Ite(c, a, b) => match eval3(c, asg) {
            Some(true) => eval3(a, asg),
            Some(false) => eval3(b, asg),
            None => match (eval3(a, asg), eval3(b, asg)) {
                (Some(x), Some(y)) if x == y => Some(x),
                _ => None,
            },
        },
        F::Iff(a, b) => Some(eval3(a, asg)? == eval3(b, asg)?),
    }
}

/// First unassigned proposition in an undetermined part of `f`.
fn pick(f: &F, asg: &[Option<bool>]) -> Option<usize> {
    if eval3(f, asg).is_some() {
        return None;
    }
    match f {
        F::Const(_) => None,
        F::Prop(i) => asg[*i].is_none().then_some(*i),
        F::Not(a) => pick(a, asg),
        F::And(cs) | F::Or(cs) => cs.iter().find_map(|c| pick(c, asg)),
        F::Ite(c, a, b) => pick(c, asg).or_else(|| pick(a, asg)).or_else(|| pick(b, asg)),
        F::Iff(a, b) => pick(a, asg).or_else(|| pick(b, asg)),
    }
}

struct Search<'a> {
    f: F,
    props: Vec<Prop>,
    n: usize,
    cfg: &'a LiaConfig,
    nodes: u64,
    unknown: Option<String>,
}

impl Search<'_> {
    fn literals(&self, asg: &[Option<bool>]) -> Vec<Row> {
        self.props
            .iter()
            .zip(asg)
            .filter_map(|(p, a)| match (p, a) {
                (Prop::Arith(r), Some(true)) => Some(r.clone()),
                (Prop::Arith(r), Some(false)) => Some(r.negate()),
                _ => None,
            })
            .collect()
    }

    fn dfs(&mut self, asg: &mut Vec<Option<bool>>) -> Option<Vec<BigInt>> {
        self.nodes += 1;
        if self.nodes > self.cfg.max_assignments {
            self.unknown.get_or_insert_with(|| "assignment cap".into());
            return None;
        }
        match eval3(&self.f, asg) {
            Some(false) => return None,
            Some(true) => {
                let mut rows = self.literals(asg);
                let mut bb_nodes = 0;
                return match branch_and_bound(self.n, &mut rows, 0, &mut bb_nodes, self.cfg) {
                    IntOutcome::Sat(m) => Some(m),
                    IntOutcome::Unsat => None,
                    IntOutcome::Unknown => {
                        self.unknown.get_or_insert_with(|| "branch-and-bound limit".into());
                        None
                    }
                };
            }
            None => {}
        }
        rational_feasible(self.n, &self.literals(asg))?;
        let p = pick(&self.f, asg).expect("undetermined formula has an unassigned proposition");
        for value in [true, false] {
            asg[p] = Some(value);
            if let Some(m) = self.dfs(asg) {
                return Some(m);
            }
            if self.nodes > self.cfg.max_assignments {
                break;
            }
        }
        asg[p] = None;
        None
    }
}

/// Decides `phi` with default limits.
pub fn qf_lia_sat(phi: &Term) -> Result<LiaResult, LiaError> {
    qf_lia_sat_with(phi, &LiaConfig::default())
}

pub fn qf_lia_sat_with(phi: &Term, cfg: &LiaConfig) -> Result<LiaResult, LiaError> {
    if phi.sort() != Sort::Bool || !is_lia(phi) {
        return Err(LiaError::NotLia(phi.to_string()));
    }
    let mut b = Builder {
        int_vars: Vec::new(),
        int_index: HashMap::new(),
        props: Vec::new(),
        prop_index: HashMap::new(),
    };
    let f = b.formula(phi)?;
    let mut search = Search {
        f,
        props: b.props,
        n: b.int_vars.len(),
        cfg,
        nodes: 0,
        unknown: None,
    };
    let mut asg = vec![None; search.props.len()];
    let Some(ints) = search.dfs(&mut asg) else {
        return Ok(match search.unknown {
            Some(reason) => LiaResult::Unknown(reason),
            None => LiaResult::Unsat,
        });
    };
    let mut model = Env::new();
    for (v, s) in phi.free_vars() {
        let value = match s {
            Sort::Int => match b.int_index.get(&v) {
                Some(&j) => Value::Int(ints[j].clone()),
                None => Value::int(0),
            },
            _ => {
                let assigned = search
                    .props
                    .iter()
                    .position(|p| *p == Prop::Bool(v.clone()))
                    .and_then(|i| asg[i]);
                Value::Bool(assigned.unwrap_or(false))
            }
        };
        model.insert(v, value);
    }
    match evaluate(phi, &model) {
        Ok(Value::Bool(true)) => Ok(LiaResult::Sat(model)),
        _ => Ok(LiaResult::Unknown("model check failed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_term;
    use proptest::prelude::*;

    fn vars(names: &[&str]) -> Vec<(Symbol, Sort)> {
        names.iter().map(|n| (Symbol::from(*n), Sort::Int)).collect()
    }

    fn sat(text: &str, names: &[&str]) -> LiaResult {
        qf_lia_sat(&parse_term(text, &vars(names)).unwrap()).unwrap()
    }

    #[test]
    fn contradictory_bounds() {
        assert_eq!(sat("(and (>= x 1) (<= x 0))", &["x"]), LiaResult::Unsat);
    }

    #[test]
    fn max2_instance_set_closes() {
        assert_eq!(sat("(and (not (>= k1 k2)) (not (>= k2 k1)))", &["k1", "k2"]), LiaResult::Unsat);
    }

    #[test]
    fn strict_lower_bound_model() {
        let LiaResult::Sat(m) = sat("(> x 2)", &["x"]) else { panic!() };
        assert!(m.get("x").unwrap().as_int().unwrap() > &BigInt::from(2));
    }

    #[test]
    fn integrality_matters() {
        // Rationally satisfiable, integrally not.
        assert_eq!(sat("(and (< 0 (* 2 x)) (< (* 2 x) 2))", &["x"]), LiaResult::Unsat);
        assert_eq!(sat("(= (+ (* 2 x) (* 2 y)) 1)", &["x", "y"]), LiaResult::Unsat);
        let LiaResult::Sat(m) = sat("(and (<= 1 (+ (* 3 x) (* 5 y))) (<= (+ (* 3 x) (* 5 y)) 1) (>= x 0))", &["x", "y"]) else {
            panic!()
        };
        let x = m.get("x").unwrap().as_int().unwrap().clone();
        let y = m.get("y").unwrap().as_int().unwrap().clone();
        assert_eq!(x * 3 + y * 5, BigInt::from(1));
    }

    #[test]
    fn ite_and_booleans() {
        let t = parse_term(
            "(and b (> (ite b x 0) 3) (= (ite (<= x 10) x 10) 10))",
            &[("b".into(), Sort::Bool), ("x".into(), Sort::Int)],
        )
        .unwrap();
        let LiaResult::Sat(m) = qf_lia_sat(&t).unwrap() else { panic!() };
        assert_eq!(m.get("b"), Some(&Value::Bool(true)));
        assert!(m.get("x").unwrap().as_int().unwrap() >= &BigInt::from(10));
    }

    #[test]
    fn validity_of_max_solution() {
        // Negated spec of max2 with the ite solution plugged in.
        let t = parse_term(
            "(not (and (>= (ite (>= y x) y x) x) (>= (ite (>= y x) y x) y) (or (= (ite (>= y x) y x) x) (= (ite (>= y x) y x) y))))",
            &vars(&["x", "y"]),
        )
        .unwrap();
        assert_eq!(qf_lia_sat(&t).unwrap(), LiaResult::Unsat);
    }

    #[test]
    fn rejects_non_lia() {
        let t = parse_term("(= (str.len s) 1)", &[("s".into(), Sort::String)]).unwrap();
        assert!(qf_lia_sat(&t).is_err());
    }

    #[derive(Clone, Debug)]
    enum Shape {
        Atom(i64, i64, i64, u8),
        Not(Box<Shape>),
        And(Box<Shape>, Box<Shape>),
        Or(Box<Shape>, Box<Shape>),
    }

    fn shape() -> impl Strategy<Value = Shape> {
        let leaf = (-3i64..=3, -3i64..=3, -6i64..=6, 0u8..4).prop_map(|(a, b, c, k)| Shape::Atom(a, b, c, k));
        leaf.prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|s| Shape::Not(Box::new(s))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn render(s: &Shape) -> String {
        match s {
            Shape::Atom(a, b, c, k) => {
                let op = ["<=", "<", "=", ">="][*k as usize];
                let lit = |n: i64| if n < 0 { format!("(- {})", -n) } else { n.to_string() };
                format!("({op} (+ (* {} x) (* {} y)) {})", lit(*a), lit(*b), lit(*c))
            }
            Shape::Not(a) => format!("(not {})", render(a)),
            Shape::And(a, b) => format!("(and {} {})", render(a), render(b)),
            Shape::Or(a, b) => format!("(or {} {})", render(a), render(b)),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        /// Sat models satisfy the formula; Unsat answers have no model in
        /// the box [-20, 20]².
        #[test]
        fn agrees_with_box_search(s in shape()) {
            let t = parse_term(&render(&s), &vars(&["x", "y"])).unwrap();
            match qf_lia_sat(&t).unwrap() {
                LiaResult::Sat(m) => {
                    prop_assert_eq!(evaluate(&t, &m).unwrap(), Value::Bool(true));
                }
                LiaResult::Unsat => {
                    for x in -20..=20 {
                        for y in -20..=20 {
                            let env = Env::new().with("x", Value::int(x)).with("y", Value::int(y));
                            prop_assert_eq!(evaluate(&t, &env).unwrap(), Value::Bool(false));
                        }
                    }
                }
                LiaResult::Unknown(r) => prop_assert!(false, "unexpected unknown: {}", r),
            }
        }
    }
}
