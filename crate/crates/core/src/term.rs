//! Sorts, ground values and hash-consed terms.
//!
//! Every [`Term`] is interned in a process-wide table, so two structurally
//! identical terms share one allocation and equality is a pointer compare.
//! The table holds weak references and is swept as it grows.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex, Weak};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Symbol = Arc<str>;

/// Largest supported bitvector width. Values are stored in a `u64`.
pub const MAX_BV_WIDTH: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    String,
    BitVec(u32),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::String => write!(f, "String"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Str(String),
    BitVec { width: u32, bits: u64 },
}

pub(crate) fn bv_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Value {
    pub fn int(i: i64) -> Value {
        Value::Int(BigInt::from(i))
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    /// A bitvector value; `bits` is truncated to `width` bits.
    pub fn bv(width: u32, bits: u64) -> Value {
        Value::BitVec {
            width,
            bits: bits & bv_mask(width),
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::Str(_) => Sort::String,
            Value::BitVec { width, .. } => Sort::BitVec(*width),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// The default inhabitant of a sort.
    pub fn default_of(sort: Sort) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Int => Value::Int(BigInt::zero()),
            Sort::String => Value::Str(String::new()),
            Sort::BitVec(w) => Value::bv(w, 0),
        }
    }
}

pub(crate) fn write_string_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\"\"")?,
            c if c.is_ascii() && !c.is_ascii_control() => f.write_char(c)?,
            c => write!(f, "\\u{{{:x}}}", c as u32)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) if i.is_negative() => write!(f, "(- {})", i.abs()),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write_string_literal(f, s),
            Value::BitVec { width, bits } => {
                f.write_str("#b")?;
                for k in (0..*width).rev() {
                    f.write_str(if bits >> k & 1 == 1 { "1" } else { "0" })?;
                }
                Ok(())
            }
        }
    }
}

/// Signature of an uninterpreted function symbol (a synthesis target).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunSig {
    pub name: Symbol,
    pub params: Vec<Sort>,
    pub ret: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Neg,
    Mul,
    Ite,
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    And,
    Or,
    Not,
    Implies,
    StrConcat,
    StrLen,
    StrSubstr,
    StrIndexOf,
    StrAt,
    StrContains,
    StrReplace,
    StrToInt,
    IntToStr,
    BvAdd,
    BvSub,
    BvMul,
    BvAnd,
    BvOr,
    BvXor,
    BvNot,
    BvNeg,
    BvShl,
    BvLshr,
    BvUlt,
    BvUle,
    Call(Arc<FunSig>),
}

const NAMED_OPS: &[(&str, Op)] = &[
    ("+", Op::Add),
    ("*", Op::Mul),
    ("ite", Op::Ite),
    ("=", Op::Eq),
    ("<=", Op::Le),
    ("<", Op::Lt),
    (">=", Op::Ge),
    (">", Op::Gt),
    ("and", Op::And),
    ("or", Op::Or),
    ("not", Op::Not),
    ("=>", Op::Implies),
    ("str.++", Op::StrConcat),
    ("str.len", Op::StrLen),
    ("str.substr", Op::StrSubstr),
    ("str.indexof", Op::StrIndexOf),
    ("str.at", Op::StrAt),
    ("str.contains", Op::StrContains),
    ("str.replace", Op::StrReplace),
    ("str.to_int", Op::StrToInt),
    ("str.to.int", Op::StrToInt),
    ("int.to_str", Op::IntToStr),
    ("int.to.str", Op::IntToStr),
    ("str.from_int", Op::IntToStr),
    ("bvadd", Op::BvAdd),
    ("bvsub", Op::BvSub),
    ("bvmul", Op::BvMul),
    ("bvand", Op::BvAnd),
    ("bvor", Op::BvOr),
    ("bvxor", Op::BvXor),
    ("bvnot", Op::BvNot),
    ("bvneg", Op::BvNeg),
    ("bvshl", Op::BvShl),
    ("bvlshr", Op::BvLshr),
    ("bvult", Op::BvUlt),
    ("bvule", Op::BvUle),
];

impl Op {
    /// Looks up a theory operator by its SMT-LIB name. `-` is ambiguous
    /// (negation vs. subtraction) and is resolved by the caller.
    pub fn from_name(name: &str) -> Option<Op> {
        NAMED_OPS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, op)| op.clone())
    }

    pub fn name(&self) -> &str {
        match self {
            Op::Sub | Op::Neg => "-",
            Op::Call(sig) => &sig.name,
            op => NAMED_OPS
                .iter()
                .find(|(_, o)| o == op)
                .map(|(n, _)| *n)
                .expect("every theory operator is named"),
        }
    }

    pub fn is_commutative(&self) -> bool {
        matches!(
            self,
            Op::Add
                | Op::Mul
                | Op::Eq
                | Op::And
                | Op::Or
                | Op::BvAdd
                | Op::BvMul
                | Op::BvAnd
                | Op::BvOr
                | Op::BvXor
        )
    }

    /// Checks arity and argument sorts, returning the result sort.
    pub fn result_sort(&self, args: &[Sort]) -> Result<Sort, SortError> {
        use Sort::*;
        let arity = |lo: usize, hi: Option<usize>| -> Result<(), SortError> {
            if args.len() < lo || hi.is_some_and(|h| args.len() > h) {
                Err(SortError::Arity {
                    op: self.name().to_string(),
                    found: args.len(),
                })
            } else {
                Ok(())
            }
        };
        let all = |s: Sort| -> Result<(), SortError> {
            match args.iter().find(|a| **a != s) {
                Some(bad) => Err(SortError::Mismatch {
                    op: self.name().to_string(),
                    expected: s.to_string(),
                    found: bad.to_string(),
                }),
                None => Ok(()),
            }
        };
        let exact = |want: &[Sort]| -> Result<(), SortError> {
            arity(want.len(), Some(want.len()))?;
            for (a, w) in args.iter().zip(want) {
                if a != w {
                    return Err(SortError::Mismatch {
                        op: self.name().to_string(),
                        expected: w.to_string(),
                        found: a.to_string(),
                    });
                }
            }
            Ok(())
        };
        let same_bv = |n: usize| -> Result<u32, SortError> {
            arity(n, Some(n))?;
            match args[0] {
                BitVec(w) => {
                    all(BitVec(w))?;
                    Ok(w)
                }
                other => Err(SortError::Mismatch {
                    op: self.name().to_string(),
                    expected: "(_ BitVec n)".into(),
                    found: other.to_string(),
                }),
            }
        };
        match self {
            Op::Add | Op::Sub | Op::Mul => {
                arity(2, None)?;
                all(Int)?;
                Ok(Int)
            }
            Op::Neg => exact(&[Int]).map(|_| Int),
            Op::Ite => {
                arity(3, Some(3))?;
                if args[0] != Bool {
                    return Err(SortError::Mismatch {
                        op: "ite".into(),
                        expected: "Bool".into(),
                        found: args[0].to_string(),
                    });
                }
                if args[1] != args[2] {
                    return Err(SortError::Mismatch {
                        op: "ite".into(),
                        expected: args[1].to_string(),
                        found: args[2].to_string(),
                    });
                }
                Ok(args[1])
            }
            Op::Eq => {
                arity(2, Some(2))?;
                all(args[0])?;
                Ok(Bool)
            }
            Op::Le | Op::Lt | Op::Ge | Op::Gt => exact(&[Int, Int]).map(|_| Bool),
            Op::And | Op::Or => {
                arity(2, None)?;
                all(Bool)?;
                Ok(Bool)
            }
            Op::Not => exact(&[Bool]).map(|_| Bool),
            Op::Implies => exact(&[Bool, Bool]).map(|_| Bool),
            Op::StrConcat => {
                arity(2, None)?;
                all(String)?;
                Ok(String)
            }
            Op::StrLen => exact(&[String]).map(|_| Int),
            Op::StrSubstr => exact(&[String, Int, Int]).map(|_| String),
            Op::StrIndexOf => exact(&[String, String, Int]).map(|_| Int),
            Op::StrAt => exact(&[String, Int]).map(|_| String),
            Op::StrContains => exact(&[String, String]).map(|_| Bool),
            Op::StrReplace => exact(&[String, String, String]).map(|_| String),
            Op::StrToInt => exact(&[String]).map(|_| Int),
            Op::IntToStr => exact(&[Int]).map(|_| String),
            Op::BvAdd | Op::BvSub | Op::BvMul | Op::BvAnd | Op::BvOr | Op::BvXor | Op::BvShl | Op::BvLshr => {
                same_bv(2).map(BitVec)
            }
            Op::BvNot | Op::BvNeg => same_bv(1).map(BitVec),
            Op::BvUlt | Op::BvUle => same_bv(2).map(|_| Bool),
            Op::Call(sig) => exact(&sig.params).map(|_| sig.ret),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("operator `{op}` applied to {found} argument(s)")]
    Arity { op: String, found: usize },
    #[error("operator `{op}` expects {expected}, found {found}")]
    Mismatch {
        op: String,
        expected: String,
        found: String,
    },
    #[error("substitution for `{var}` changes its sort from {expected} to {found}")]
    Substitution {
        var: String,
        expected: Sort,
        found: Sort,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Symbol),
    #[error("cannot evaluate uninterpreted function `{0}`")]
    Uninterpreted(Symbol),
    #[error("unrepaired constant slot")]
    Hole,
    #[error("ill-sorted value for `{0}`")]
    IllSorted(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Var(Symbol),
    Const(Value),
    App(Op, Box<[Term]>),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    sort: Sort,
    hash: u64,
    size: u32,
}

/// An immutable, interned term.
#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Interner {
    buckets: HashMap<u64, Vec<Weak<Node>>>,
    entries: usize,
    sweep_at: usize,
}

impl Interner {
    fn intern(&mut self, kind: Kind, sort: Sort, hash: u64, size: u32) -> Term {
        let bucket = self.buckets.entry(hash).or_default();
        for weak in bucket.iter() {
            if let Some(node) = weak.upgrade() {
                if node.sort == sort && node.kind == kind {
                    return Term(node);
                }
            }
        }
        let node = Arc::new(Node {
            kind,
            sort,
            hash,
            size,
        });
        bucket.retain(|w| w.strong_count() > 0);
        bucket.push(Arc::downgrade(&node));
        self.entries += 1;
        if self.entries >= self.sweep_at {
            self.sweep();
        }
        Term(node)
    }

    fn sweep(&mut self) {
        self.buckets.retain(|_, b| {
            b.retain(|w| w.strong_count() > 0);
            !b.is_empty()
        });
        self.entries = self.buckets.values().map(Vec::len).sum();
        self.sweep_at = (self.entries * 2).max(1 << 16);
    }
}

static INTERNER: LazyLock<Mutex<Interner>> = LazyLock::new(|| {
    Mutex::new(Interner {
        buckets: HashMap::new(),
        entries: 0,
        sweep_at: 1 << 16,
    })
});

fn make(kind: Kind, sort: Sort) -> Term {
    let mut h = DefaultHasher::new();
    let size = match &kind {
        Kind::Var(name) => {
            0u8.hash(&mut h);
            name.hash(&mut h);
            1
        }
        Kind::Const(v) => {
            1u8.hash(&mut h);
            v.hash(&mut h);
            1
        }
        Kind::App(op, ch) => {
            2u8.hash(&mut h);
            op.hash(&mut h);
            for c in ch.iter() {
                c.0.hash.hash(&mut h);
            }
            1 + ch.iter().map(|c| c.0.size).sum::<u32>()
        }
    };
    sort.hash(&mut h);
    let hash = h.finish();
    INTERNER
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .intern(kind, sort, hash, size)
}

impl Term {
    pub fn var(name: impl Into<Symbol>, sort: Sort) -> Term {
        make(Kind::Var(name.into()), sort)
    }

    pub fn constant(v: Value) -> Term {
        let sort = v.sort();
        make(Kind::Const(v), sort)
    }

    pub fn int(i: i64) -> Term {
        Term::constant(Value::int(i))
    }

    pub fn bigint(i: BigInt) -> Term {
        Term::constant(Value::Int(i))
    }

    pub fn bool(b: bool) -> Term {
        Term::constant(Value::Bool(b))
    }

    pub fn string(s: impl Into<String>) -> Term {
        Term::constant(Value::Str(s.into()))
    }

    /// Applies `op` after checking arity and sorts.
    pub fn app(op: Op, children: Vec<Term>) -> Result<Term, SortError> {
        let sorts: Vec<Sort> = children.iter().map(Term::sort).collect();
        let sort = op.result_sort(&sorts)?;
        Ok(make(Kind::App(op, children.into_boxed_slice()), sort))
    }

    /// Applies `op` to children already known to be well-sorted.
    pub(crate) fn build(op: Op, children: Vec<Term>) -> Term {
        match Term::app(op, children) {
            Ok(t) => t,
            Err(e) => panic!("internal term construction is ill-sorted: {e}"),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn sort(&self) -> Sort {
        self.0.sort
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> usize {
        self.0.size as usize
    }

    pub fn op(&self) -> Option<&Op> {
        match &self.0.kind {
            Kind::App(op, _) => Some(op),
            _ => None,
        }
    }

    pub fn children(&self) -> &[Term] {
        match &self.0.kind {
            Kind::App(_, ch) => ch,
            _ => &[],
        }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match &self.0.kind {
            Kind::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match &self.0.kind {
            Kind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self.as_value(), Some(Value::Bool(true)))
    }

    pub fn is_false(&self) -> bool {
        matches!(self.as_value(), Some(Value::Bool(false)))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<(Symbol, Sort)> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut visited = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen, &mut visited);
        out
    }

    fn collect_vars(
        &self,
        out: &mut Vec<(Symbol, Sort)>,
        seen: &mut std::collections::HashSet<Symbol>,
        visited: &mut std::collections::HashSet<Term>,
    ) {
        if !visited.insert(self.clone()) {
            return;
        }
        match self.kind() {
            Kind::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push((v.clone(), self.sort()));
                }
            }
            Kind::Const(_) => {}
            Kind::App(_, ch) => ch.iter().for_each(|c| c.collect_vars(out, seen, visited)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self.kind() {
            Kind::Var(v) => &**v == name,
            Kind::Const(_) => false,
            Kind::App(_, ch) => ch.iter().any(|c| c.contains_var(name)),
        }
    }

    /// True if any subterm is an application of an uninterpreted function.
    pub fn has_calls(&self) -> bool {
        match self.kind() {
            Kind::App(Op::Call(_), _) => true,
            Kind::App(_, ch) => ch.iter().any(Term::has_calls),
            _ => false,
        }
    }

    /// All distinct subterms, children before parents.
    pub fn subterms(&self) -> Vec<Term> {
        fn go(t: &Term, seen: &mut std::collections::HashSet<Term>, out: &mut Vec<Term>) {
            if seen.contains(t) {
                return;
            }
            for c in t.children() {
                go(c, seen, out);
            }
            seen.insert(t.clone());
            out.push(t.clone());
        }
        let mut out = Vec::new();
        go(self, &mut std::collections::HashSet::new(), &mut out);
        out
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    /// Structural order: constants, then variables, then applications.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let tag = |k: &Kind| match k {
            Kind::Const(_) => 0,
            Kind::Var(_) => 1,
            Kind::App(..) => 2,
        };
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => a.cmp(b),
            (Kind::Var(a), Kind::Var(b)) => a.cmp(b).then(self.sort().cmp(&other.sort())),
            (Kind::App(oa, ca), Kind::App(ob, cb)) => oa.cmp(ob).then_with(|| ca.cmp(cb)),
            (a, b) => tag(a).cmp(&tag(b)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Var(v) => f.write_str(v),
            Kind::Const(v) => write!(f, "{v}"),
            Kind::App(op, ch) => {
                write!(f, "({op}")?;
                for c in ch.iter() {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A valuation of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Env(BTreeMap<Symbol, Value>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn insert(&mut self, name: impl Into<Symbol>, v: Value) {
        self.0.insert(name.into(), v);
    }

    pub fn with(mut self, name: impl Into<Symbol>, v: Value) -> Env {
        self.insert(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Symbol, Value)> for Env {
    fn from_iter<I: IntoIterator<Item = (Symbol, Value)>>(iter: I) -> Self {
        Env(iter.into_iter().collect())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

pub type Subst = BTreeMap<Symbol, Term>;

/// Evaluates a term that contains no uninterpreted function applications.
pub fn evaluate(t: &Term, env: &Env) -> Result<Value, EvalError> {
    evaluate_with(t, env, &|sig, _| Err(EvalError::Uninterpreted(sig.name.clone())))
}

/// Interpretation of function applications during evaluation.
pub type CallEval<'a> = dyn Fn(&FunSig, &[Value]) -> Result<Value, EvalError> + 'a;

/// Evaluates a term, interpreting function applications through `funs`.
pub fn evaluate_with(t: &Term, env: &Env, funs: &CallEval<'_>) -> Result<Value, EvalError> {
    match t.kind() {
        Kind::Var(v) => env.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone())),
        Kind::Const(v) => Ok(v.clone()),
        Kind::App(Op::Ite, ch) => {
            let c = evaluate_with(&ch[0], env, funs)?;
            if c.as_bool().ok_or_else(|| EvalError::IllSorted("ite".into()))? {
                evaluate_with(&ch[1], env, funs)
            } else {
                evaluate_with(&ch[2], env, funs)
            }
        }
        Kind::App(Op::Call(sig), ch) => {
            let args = ch
                .iter()
                .map(|c| evaluate_with(c, env, funs))
                .collect::<Result<Vec<_>, _>>()?;
            funs(sig, &args)
        }
        Kind::App(op, ch) => {
            let args = ch
                .iter()
                .map(|c| evaluate_with(c, env, funs))
                .collect::<Result<Vec<_>, _>>()?;
            apply_op(op, &args)
        }
    }
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// `str.substr` with out-of-range arguments yielding the empty string.
pub(crate) fn str_substr(s: &str, start: &BigInt, len: &BigInt) -> String {
    let cs = chars(s);
    let n = cs.len();
    let Some(i) = start.to_usize() else {
        return String::new();
    };
    if i >= n || !len.is_positive() {
        return String::new();
    }
    let take = len.to_usize().unwrap_or(usize::MAX).min(n - i);
    cs[i..i + take].iter().collect()
}

/// `str.indexof`: first occurrence of `pat` at or after `start`, else -1.
pub(crate) fn str_indexof(s: &str, pat: &str, start: &BigInt) -> BigInt {
    let cs = chars(s);
    let ps = chars(pat);
    let Some(i) = start.to_usize() else {
        return BigInt::from(-1);
    };
    if i > cs.len() {
        return BigInt::from(-1);
    }
    if ps.is_empty() {
        return BigInt::from(i);
    }
    (i..cs.len())
        .find(|&j| cs[j..].starts_with(&ps))
        .map_or(BigInt::from(-1), BigInt::from)
}

fn str_replace(s: &str, pat: &str, rep: &str) -> String {
    if pat.is_empty() {
        return format!("{rep}{s}");
    }
    s.replacen(pat, rep, 1)
}

fn str_to_int(s: &str) -> BigInt {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return BigInt::from(-1);
    }
    s.parse().expect("digits parse")
}

/// Applies an interpreted operator to ground arguments.
pub fn apply_op(op: &Op, args: &[Value]) -> Result<Value, EvalError> {
    let bad = || EvalError::IllSorted(op.name().to_string());
    let int = |i: usize| args.get(i).and_then(Value::as_int).ok_or_else(bad);
    let boolean = |i: usize| args.get(i).and_then(Value::as_bool).ok_or_else(bad);
    let string = |i: usize| args.get(i).and_then(Value::as_str).ok_or_else(bad);
    let bv = |i: usize| match args.get(i) {
        Some(Value::BitVec { width, bits }) => Ok((*width, *bits)),
        _ => Err(bad()),
    };
    Ok(match op {
        Op::Add => Value::Int(args.iter().map(|a| a.as_int().ok_or_else(bad)).sum::<Result<BigInt, _>>()?),
        Op::Sub => {
            let mut acc = int(0)?.clone();
            for i in 1..args.len() {
                acc -= int(i)?;
            }
            Value::Int(acc)
        }
        Op::Neg => {
            let n: &BigInt = int(0)?;
            Value::Int(-n)
        }
        Op::Mul => {
            let mut acc = BigInt::one();
            for i in 0..args.len() {
                acc *= int(i)?;
            }
            Value::Int(acc)
        }
        Op::Ite => {
            if boolean(0)? {
                args[1].clone()
            } else {
                args[2].clone()
            }
        }
        Op::Eq => Value::Bool(args.first().ok_or_else(bad)? == args.get(1).ok_or_else(bad)?),
        Op::Le => Value::Bool(int(0)? <= int(1)?),
        Op::Lt => Value::Bool(int(0)? < int(1)?),
        Op::Ge => Value::Bool(int(0)? >= int(1)?),
        Op::Gt => Value::Bool(int(0)? > int(1)?),
        Op::And => Value::Bool((0..args.len()).map(boolean).collect::<Result<Vec<_>, _>>()?.into_iter().all(|b| b)),
        Op::Or => Value::Bool((0..args.len()).map(boolean).collect::<Result<Vec<_>, _>>()?.into_iter().any(|b| b)),
        Op::Not => Value::Bool(!boolean(0)?),
        Op::Implies => Value::Bool(!boolean(0)? || boolean(1)?),
        Op::StrConcat => {
            let mut s = String::new();
            for i in 0..args.len() {
                s.push_str(string(i)?);
            }
            Value::Str(s)
        }
        Op::StrLen => Value::Int(BigInt::from(string(0)?.chars().count())),
        Op::StrSubstr => Value::Str(str_substr(string(0)?, int(1)?, int(2)?)),
        Op::StrAt => Value::Str(str_substr(string(0)?, int(1)?, &BigInt::one())),
        Op::StrIndexOf => Value::Int(str_indexof(string(0)?, string(1)?, int(2)?)),
        Op::StrContains => Value::Bool(string(0)?.contains(string(1)?)),
        Op::StrReplace => Value::Str(str_replace(string(0)?, string(1)?, string(2)?)),
        Op::StrToInt => Value::Int(str_to_int(string(0)?)),
        Op::IntToStr => {
            let n = int(0)?;
            Value::Str(if n.is_negative() { String::new() } else { n.to_string() })
        }
        Op::BvAdd | Op::BvSub | Op::BvMul | Op::BvAnd | Op::BvOr | Op::BvXor | Op::BvShl | Op::BvLshr => {
            let (w, a) = bv(0)?;
            let (_, b) = bv(1)?;
            let r = match op {
                Op::BvAdd => a.wrapping_add(b),
                Op::BvSub => a.wrapping_sub(b),
                Op::BvMul => a.wrapping_mul(b),
                Op::BvAnd => a & b,
                Op::BvOr => a | b,
                Op::BvXor => a ^ b,
                Op::BvShl => {
                    if b >= w as u64 {
                        0
                    } else {
                        a << b
                    }
                }
                _ => {
                    if b >= w as u64 {
                        0
                    } else {
                        a >> b
                    }
                }
            };
            Value::bv(w, r)
        }
        Op::BvNot => {
            let (w, a) = bv(0)?;
            Value::bv(w, !a)
        }
        Op::BvNeg => {
            let (w, a) = bv(0)?;
            Value::bv(w, a.wrapping_neg())
        }
        Op::BvUlt => Value::Bool(bv(0)?.1 < bv(1)?.1),
        Op::BvUle => Value::Bool(bv(0)?.1 <= bv(1)?.1),
        Op::Call(sig) => return Err(EvalError::Uninterpreted(sig.name.clone())),
    })
}

/// Simultaneous substitution of variables by terms.
pub fn substitute(t: &Term, sub: &Subst) -> Result<Term, SortError> {
    for (name, replacement) in sub {
        for (v, s) in t.free_vars() {
            if &v == name && s != replacement.sort() {
                return Err(SortError::Substitution {
                    var: name.to_string(),
                    expected: s,
                    found: replacement.sort(),
                });
            }
        }
    }
    Ok(substitute_unchecked(t, sub))
}

pub(crate) fn substitute_unchecked(t: &Term, sub: &Subst) -> Term {
    if sub.is_empty() {
        return t.clone();
    }
    let mut memo = HashMap::new();
    subst_rec(t, sub, &mut memo)
}

fn subst_rec(t: &Term, sub: &Subst, memo: &mut HashMap<Term, Term>) -> Term {
    if let Some(r) = memo.get(t) {
        return r.clone();
    }
    let r = match t.kind() {
        Kind::Var(v) => sub.get(v).cloned().unwrap_or_else(|| t.clone()),
        Kind::Const(_) => t.clone(),
        Kind::App(op, ch) => {
            let new: Vec<Term> = ch.iter().map(|c| subst_rec(c, sub, memo)).collect();
            if new.iter().zip(ch.iter()).all(|(a, b)| a == b) {
                t.clone()
            } else {
                Term::build(op.clone(), new)
            }
        }
    };
    memo.insert(t.clone(), r.clone());
    r
}

/// Replaces every uninterpreted application bottom-up with `f(sig, args)`
/// when it returns `Some`.
pub fn map_calls(t: &Term, f: &dyn Fn(&FunSig, &[Term]) -> Option<Term>) -> Term {
    fn go(
        t: &Term,
        f: &dyn Fn(&FunSig, &[Term]) -> Option<Term>,
        memo: &mut HashMap<Term, Term>,
    ) -> Term {
        if let Some(r) = memo.get(t) {
            return r.clone();
        }
        let r = match t.kind() {
            Kind::App(op, ch) => {
                let new: Vec<Term> = ch.iter().map(|c| go(c, f, memo)).collect();
                match op {
                    Op::Call(sig) => f(sig, &new).unwrap_or_else(|| Term::build(op.clone(), new)),
                    _ => Term::build(op.clone(), new),
                }
            }
            _ => t.clone(),
        };
        memo.insert(t.clone(), r.clone());
        r
    }
    go(t, f, &mut HashMap::new())
}

pub fn and_all(mut conjuncts: Vec<Term>) -> Term {
    match conjuncts.len() {
        0 => Term::bool(true),
        1 => conjuncts.pop().expect("one element"),
        _ => Term::build(Op::And, conjuncts),
    }
}

pub fn or_all(mut disjuncts: Vec<Term>) -> Term {
    match disjuncts.len() {
        0 => Term::bool(false),
        1 => disjuncts.pop().expect("one element"),
        _ => Term::build(Op::Or, disjuncts),
    }
}

pub fn not(t: Term) -> Term {
    Term::build(Op::Not, vec![t])
}

pub fn implies(a: Term, b: Term) -> Term {
    Term::build(Op::Implies, vec![a, b])
}

pub fn ite(c: Term, a: Term, b: Term) -> Term {
    Term::build(Op::Ite, vec![c, a, b])
}

pub fn eq(a: Term, b: Term) -> Term {
    Term::build(Op::Eq, vec![a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> Term {
        Term::var("x1", Sort::Int)
    }

    #[test]
    fn interning_shares_structure() {
        let a = Term::app(Op::Add, vec![x1(), Term::int(1)]).unwrap();
        let b = Term::app(Op::Add, vec![x1(), Term::int(1)]).unwrap();
        assert_eq!(a, b);
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_eq!(a.size(), 3);
    }

    #[test]
    fn same_name_different_sort_are_distinct() {
        assert_ne!(Term::var("v", Sort::Int), Term::var("v", Sort::Bool));
    }

    #[test]
    fn evaluate_plus_one() {
        let t = Term::app(Op::Add, vec![x1(), Term::int(1)]).unwrap();
        let env = Env::new().with("x1", Value::int(3));
        assert_eq!(evaluate(&t, &env).unwrap(), Value::int(4));
    }

    #[test]
    fn evaluate_ite_true_takes_then_branch() {
        let a = Term::var("a", Sort::Int);
        let b = Term::var("b", Sort::Int);
        let t = ite(Term::bool(true), a, b);
        let env = Env::new().with("a", Value::int(7));
        // `b` is unbound but never evaluated.
        assert_eq!(evaluate(&t, &env).unwrap(), Value::int(7));
    }

    #[test]
    fn concat_and_substr() {
        let t = Term::app(Op::StrConcat, vec![Term::string("Jo"), Term::string("hn")]).unwrap();
        assert_eq!(evaluate(&t, &Env::new()).unwrap(), Value::str("John"));
        let s = Term::app(
            Op::StrSubstr,
            vec![Term::string("abcde"), Term::int(1), Term::int(3)],
        )
        .unwrap();
        assert_eq!(evaluate(&s, &Env::new()).unwrap(), Value::str("bcd"));
    }

    #[test]
    fn string_edge_conventions() {
        let v = |op: Op, args: Vec<Value>| apply_op(&op, &args).unwrap();
        assert_eq!(v(Op::StrSubstr, vec![Value::str("abc"), Value::int(3), Value::int(1)]), Value::str(""));
        assert_eq!(v(Op::StrSubstr, vec![Value::str("abc"), Value::int(-1), Value::int(2)]), Value::str(""));
        assert_eq!(v(Op::StrSubstr, vec![Value::str("abc"), Value::int(1), Value::int(0)]), Value::str(""));
        assert_eq!(v(Op::StrSubstr, vec![Value::str("abc"), Value::int(1), Value::int(99)]), Value::str("bc"));
        assert_eq!(v(Op::StrIndexOf, vec![Value::str("abc"), Value::str("z"), Value::int(0)]), Value::int(-1));
        assert_eq!(v(Op::StrIndexOf, vec![Value::str("abc"), Value::str(""), Value::int(3)]), Value::int(3));
        assert_eq!(v(Op::StrIndexOf, vec![Value::str("abc"), Value::str(""), Value::int(4)]), Value::int(-1));
        assert_eq!(v(Op::StrIndexOf, vec![Value::str("abab"), Value::str("b"), Value::int(2)]), Value::int(3));
        assert_eq!(v(Op::StrReplace, vec![Value::str("aXbX"), Value::str("X"), Value::str("-")]), Value::str("a-bX"));
        assert_eq!(v(Op::StrToInt, vec![Value::str("012")]), Value::int(12));
        assert_eq!(v(Op::StrToInt, vec![Value::str("1a")]), Value::int(-1));
        assert_eq!(v(Op::IntToStr, vec![Value::int(-4)]), Value::str(""));
    }

    #[test]
    fn bitvector_wraps_and_shifts() {
        let v = |op: Op, a: u64, b: u64| apply_op(&op, &[Value::bv(4, a), Value::bv(4, b)]).unwrap();
        assert_eq!(v(Op::BvAdd, 15, 1), Value::bv(4, 0));
        assert_eq!(v(Op::BvSub, 0, 1), Value::bv(4, 15));
        assert_eq!(v(Op::BvShl, 3, 2), Value::bv(4, 12));
        assert_eq!(v(Op::BvShl, 3, 4), Value::bv(4, 0));
        assert_eq!(v(Op::BvLshr, 8, 3), Value::bv(4, 1));
        assert_eq!(v(Op::BvMul, 7, 3), Value::bv(4, 5));
        assert_eq!(apply_op(&Op::BvNeg, &[Value::bv(4, 1)]).unwrap(), Value::bv(4, 15));
    }

    #[test]
    fn unbound_variable_is_reported() {
        let err = evaluate(&x1(), &Env::new()).unwrap_err();
        assert_eq!(err, EvalError::Unbound("x1".into()));
    }

    #[test]
    fn ill_sorted_application_rejected() {
        assert!(Term::app(Op::Add, vec![x1(), Term::bool(true)]).is_err());
        assert!(Term::app(Op::Not, vec![]).is_err());
    }

    #[test]
    fn substitution_cases() {
        let y = Term::var("y", Sort::Int);
        let x2 = Term::var("x2", Sort::Int);
        let ge = Term::app(Op::Ge, vec![y.clone(), x1()]).unwrap();
        let sub: Subst = [("y".into(), x2.clone())].into_iter().collect();
        assert_eq!(
            substitute(&ge, &sub).unwrap(),
            Term::app(Op::Ge, vec![x2, x1()]).unwrap()
        );
        assert_eq!(substitute(&ge, &Subst::new()).unwrap(), ge);

        let yy = Term::app(Op::Add, vec![y.clone(), y]).unwrap();
        let x1p1 = Term::app(Op::Add, vec![x1(), Term::int(1)]).unwrap();
        let sub: Subst = [("y".into(), x1p1.clone())].into_iter().collect();
        assert_eq!(
            substitute(&yy, &sub).unwrap(),
            Term::app(Op::Add, vec![x1p1.clone(), x1p1]).unwrap()
        );

        let bad: Subst = [("y".into(), Term::bool(true))].into_iter().collect();
        assert!(substitute(&ge, &bad).is_err());
    }

    #[test]
    fn printing_uses_smtlib_literals() {
        assert_eq!(Value::int(-3).to_string(), "(- 3)");
        assert_eq!(Value::str("a\"b").to_string(), "\"a\"\"b\"");
        assert_eq!(Value::bv(4, 5).to_string(), "#b0101");
    }
}
