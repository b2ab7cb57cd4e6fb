//! Grammars as datatypes: one constructor per production, each carrying an
//! analog (a term template over its fields), plus the evaluation operator
//! on embedded terms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::problem::{GTerm, GrammarDef, NonterminalDef, Production, SyGuSProblem, SynthFunDecl};
use crate::term::{apply_op, EvalError, Op, Sort, Symbol, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("unsupported operator `{0}` in grammar")]
    UnsupportedOp(String),
    #[error("start symbol `{0}` has no productions")]
    EmptyStart(Symbol),
    #[error("unrepaired constant slot")]
    Hole,
}

/// Body of a constructor's analog. `Field(i)` is the constructor's i-th
/// field; fields appear left to right, each exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TNode {
    Field(usize),
    Param(usize),
    Lit(Value),
    App(Op, Vec<TNode>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Analog {
    Template(TNode),
    /// `(Constant T)`: one value field.
    Constant(Sort),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constructor {
    pub name: String,
    /// Owning nonterminal.
    pub nt: usize,
    /// Nonterminal of each field.
    pub fields: Vec<usize>,
    pub analog: Analog,
}

impl Constructor {
    pub fn arity(&self) -> usize {
        self.fields.len()
    }

    /// The literal this nullary constructor denotes, if any.
    pub fn literal(&self) -> Option<&Value> {
        match &self.analog {
            Analog::Template(TNode::Lit(v)) => Some(v),
            _ => None,
        }
    }

    /// The operator applied directly to the fields, when the template is
    /// exactly `(op F0 .. Fn)`.
    pub fn direct_op(&self) -> Option<&Op> {
        match &self.analog {
            Analog::Template(TNode::App(op, ch))
                if ch.len() == self.fields.len()
                    && ch.iter().enumerate().all(|(i, c)| *c == TNode::Field(i)) =>
            {
                Some(op)
            }
            _ => None,
        }
    }
}

/// A grammar embedded as mutually recursive datatypes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatatypeGrammar {
    pub params: Vec<(Symbol, Sort)>,
    pub nonterminals: Vec<(Symbol, Sort)>,
    pub constructors: Vec<Constructor>,
    /// Constructor indices per nonterminal, in production order.
    pub by_nt: Vec<Vec<usize>>,
}

impl DatatypeGrammar {
    pub fn start(&self) -> usize {
        0
    }

    pub fn sort_of(&self, nt: usize) -> Sort {
        self.nonterminals[nt].1
    }

    pub fn max_arity(&self) -> usize {
        self.constructors.iter().map(Constructor::arity).max().unwrap_or(0)
    }

    /// Nonterminals of sort `s`, in declaration order.
    pub fn nts_of_sort(&self, s: Sort) -> Vec<usize> {
        (0..self.nonterminals.len()).filter(|&i| self.sort_of(i) == s).collect()
    }

    pub fn has_constant_slots(&self) -> bool {
        self.constructors.iter().any(|c| matches!(c.analog, Analog::Constant(_)))
    }

    /// Builds `c(children)`, checking field count and nonterminals.
    pub fn apply(&self, ctor: usize, children: Vec<EmbeddedTerm>) -> EmbeddedTerm {
        let c = &self.constructors[ctor];
        assert_eq!(c.fields.len(), children.len(), "constructor `{}` arity", c.name);
        for (f, ch) in c.fields.iter().zip(&children) {
            assert_eq!(*f, self.constructors[ch.ctor()].nt, "field nonterminal of `{}`", c.name);
        }
        EmbeddedTerm::new(ctor, children, None, false)
    }

    /// A constant-slot term; `None` is the HOLE marker.
    pub fn constant(&self, ctor: usize, value: Option<Value>) -> EmbeddedTerm {
        assert!(matches!(self.constructors[ctor].analog, Analog::Constant(_)));
        let hole = value.is_none();
        EmbeddedTerm::new(ctor, vec![], value, hole)
    }

    /// Replaces each constructor by its analog.
    pub fn unembed(&self, t: &EmbeddedTerm) -> Result<Term, EmbedError> {
        let mut holes = 0usize;
        let r = self.unembed_rec(t, &mut |_| {
            holes += 1;
            None
        });
        if holes > 0 {
            return Err(EmbedError::Hole);
        }
        Ok(r.expect("no holes"))
    }

    /// Unembeds a template, turning its holes (in pre-order) into the
    /// variables `#c0`, `#c1`, ...; returns the term and the hole variables.
    pub fn unembed_template(&self, t: &EmbeddedTerm) -> (Term, Vec<(Symbol, Sort)>) {
        let mut holes: Vec<(Symbol, Sort)> = Vec::new();
        let r = self.unembed_rec(t, &mut |s| {
            let name: Symbol = format!("#c{}", holes.len()).into();
            holes.push((name.clone(), s));
            Some(Term::var(name, s))
        });
        (r.expect("holes are replaced"), holes)
    }

    fn unembed_rec(&self, t: &EmbeddedTerm, hole: &mut dyn FnMut(Sort) -> Option<Term>) -> Option<Term> {
        let c = &self.constructors[t.ctor()];
        match &c.analog {
            Analog::Constant(s) => match t.constant() {
                Some(v) => Some(Term::constant(v.clone())),
                None => hole(*s),
            },
            Analog::Template(n) => {
                let mut fields = Vec::with_capacity(t.children().len());
                let mut ok = true;
                for ch in t.children() {
                    match self.unembed_rec(ch, hole) {
                        Some(f) => fields.push(f),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                Some(self.instantiate(n, &fields))
            }
        }
    }

    /// The template `n` with fields replaced by `fields`.
    pub fn instantiate(&self, n: &TNode, fields: &[Term]) -> Term {
        match n {
            TNode::Field(i) => fields[*i].clone(),
            TNode::Param(i) => {
                let (name, s) = &self.params[*i];
                Term::var(name.clone(), *s)
            }
            TNode::Lit(v) => Term::constant(v.clone()),
            TNode::App(op, ch) => Term::build(op.clone(), ch.iter().map(|c| self.instantiate(c, fields)).collect()),
        }
    }

    /// The evaluation operator: value of `t`'s analog at `args`.
    pub fn eval_embedded(&self, t: &EmbeddedTerm, args: &[Value]) -> Result<Value, EvalError> {
        let c = &self.constructors[t.ctor()];
        match &c.analog {
            Analog::Constant(_) => t.constant().cloned().ok_or(EvalError::Hole),
            Analog::Template(n) => {
                let fields = t
                    .children()
                    .iter()
                    .map(|ch| self.eval_embedded(ch, args))
                    .collect::<Result<Vec<_>, _>>()?;
                eval_tnode(n, &fields, args)
            }
        }
    }

    /// Fills holes in pre-order with `values`.
    pub fn fill_holes(&self, t: &EmbeddedTerm, values: &[Value]) -> EmbeddedTerm {
        fn go(t: &EmbeddedTerm, values: &[Value], next: &mut usize) -> EmbeddedTerm {
            if t.holes() == 0 {
                return t.clone();
            }
            if t.children().is_empty() {
                let v = values[*next].clone();
                *next += 1;
                return EmbeddedTerm::new(t.ctor(), vec![], Some(v), false);
            }
            let ch = t.children().iter().map(|c| go(c, values, next)).collect();
            EmbeddedTerm::new(t.ctor(), ch, None, false)
        }
        let mut next = 0;
        go(t, values, &mut next)
    }

    /// A derivation of `t` from nonterminal `nt`, found by top-down matching
    /// against the production templates.
    pub fn derive(&self, nt: usize, t: &Term) -> Option<EmbeddedTerm> {
        self.derive_rec(nt, t, self.nonterminals.len())
    }

    // `unit_fuel` bounds chains of unit productions (S := T, T := S).
    fn derive_rec(&self, nt: usize, t: &Term, unit_fuel: usize) -> Option<EmbeddedTerm> {
        if t.sort() != self.sort_of(nt) {
            return None;
        }
        for &ci in &self.by_nt[nt] {
            let c = &self.constructors[ci];
            match &c.analog {
                Analog::Constant(s) => {
                    if let Some(v) = t.as_value().filter(|v| v.sort() == *s) {
                        return Some(self.constant(ci, Some(v.clone())));
                    }
                }
                Analog::Template(n) => {
                    let unit = matches!(n, TNode::Field(_));
                    if unit && unit_fuel == 0 {
                        continue;
                    }
                    let mut fields: Vec<Option<&Term>> = vec![None; c.arity()];
                    if !self.bind(n, t, &mut fields) {
                        continue;
                    }
                    let fuel = if unit { unit_fuel - 1 } else { self.nonterminals.len() };
                    let children: Option<Vec<EmbeddedTerm>> = fields
                        .iter()
                        .zip(&c.fields)
                        .map(|(f, &fnt)| self.derive_rec(fnt, f.expect("every field bound"), fuel))
                        .collect();
                    if let Some(ch) = children {
                        return Some(EmbeddedTerm::new(ci, ch, None, false));
                    }
                }
            }
        }
        None
    }

    fn bind<'t>(&self, n: &TNode, t: &'t Term, fields: &mut [Option<&'t Term>]) -> bool {
        match n {
            TNode::Field(i) => {
                fields[*i] = Some(t);
                true
            }
            TNode::Param(i) => t.as_var() == Some(&self.params[*i].0) && t.sort() == self.params[*i].1,
            TNode::Lit(v) => t.as_value() == Some(v),
            TNode::App(op, ch) => {
                t.op() == Some(op)
                    && t.children().len() == ch.len()
                    && ch.iter().zip(t.children()).all(|(c, s)| self.bind(c, s, fields))
            }
        }
    }

    /// Renders `t` in constructor notation, e.g. `(+ S S)(x, 1)`.
    pub fn show(&self, t: &EmbeddedTerm) -> String {
        let c = &self.constructors[t.ctor()];
        if let Analog::Constant(_) = c.analog {
            return match t.constant() {
                Some(v) => format!("const({v})"),
                None => "const(HOLE)".to_string(),
            };
        }
        if t.children().is_empty() {
            return c.name.clone();
        }
        let ch: Vec<String> = t.children().iter().map(|ch| self.show(ch)).collect();
        format!("{}({})", c.name, ch.join(", "))
    }
}

/// Evaluates a template given field values and argument values.
pub fn eval_tnode(n: &TNode, fields: &[Value], args: &[Value]) -> Result<Value, EvalError> {
    match n {
        TNode::Field(i) => Ok(fields[*i].clone()),
        TNode::Param(i) => Ok(args[*i].clone()),
        TNode::Lit(v) => Ok(v.clone()),
        TNode::App(op, ch) => {
            let vals = ch
                .iter()
                .map(|c| eval_tnode(c, fields, args))
                .collect::<Result<Vec<_>, _>>()?;
            apply_op(op, &vals)
        }
    }
}

struct ENode {
    ctor: usize,
    children: Vec<EmbeddedTerm>,
    constant: Option<Value>,
    size: usize,
    holes: usize,
}

/// A datatype value: a constructor applied to embedded children, or a
/// constant slot holding a value or the HOLE marker.
#[derive(Clone)]
pub struct EmbeddedTerm(Arc<ENode>);

impl EmbeddedTerm {
    pub(crate) fn new(ctor: usize, children: Vec<EmbeddedTerm>, constant: Option<Value>, hole: bool) -> EmbeddedTerm {
        let size = 1 + children.iter().map(EmbeddedTerm::size).sum::<usize>();
        let holes = usize::from(hole) + children.iter().map(EmbeddedTerm::holes).sum::<usize>();
        EmbeddedTerm(Arc::new(ENode {
            ctor,
            children,
            constant,
            size,
            holes,
        }))
    }

    pub fn ctor(&self) -> usize {
        self.0.ctor
    }

    pub fn children(&self) -> &[EmbeddedTerm] {
        &self.0.children
    }

    pub fn constant(&self) -> Option<&Value> {
        self.0.constant.as_ref()
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Number of HOLE markers.
    pub fn holes(&self) -> usize {
        self.0.holes
    }
}

impl PartialEq for EmbeddedTerm {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ctor == other.0.ctor
                && self.0.constant == other.0.constant
                && self.0.holes == other.0.holes
                && self.0.children == other.0.children)
    }
}

impl Eq for EmbeddedTerm {}

impl fmt::Debug for EmbeddedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0.ctor)?;
        if let Some(v) = &self.0.constant {
            write!(f, "[{v}]")?;
        } else if self.0.holes == 1 && self.0.children.is_empty() {
            f.write_str("[HOLE]")?;
        }
        if !self.0.children.is_empty() {
            f.debug_list().entries(self.0.children.iter()).finish()?;
        }
        Ok(())
    }
}

fn convert(
    g: &GTerm,
    params: &[(Symbol, Sort)],
    fields: &mut Vec<usize>,
) -> Result<TNode, EmbedError> {
    Ok(match g {
        GTerm::NonTerminal(i) => {
            fields.push(*i);
            TNode::Field(fields.len() - 1)
        }
        GTerm::Var(name, _) => match params.iter().position(|(p, _)| p == name) {
            Some(i) => TNode::Param(i),
            None => return Err(EmbedError::UnsupportedOp(name.to_string())),
        },
        GTerm::Lit(v) => TNode::Lit(v.clone()),
        GTerm::App(Op::Call(sig), _) => return Err(EmbedError::UnsupportedOp(sig.name.to_string())),
        GTerm::App(op, ch) => {
            let mut out = Vec::with_capacity(ch.len());
            for c in ch {
                out.push(convert(c, params, fields)?);
            }
            TNode::App(op.clone(), out)
        }
    })
}

fn gterm_name(g: &GTerm, gd: &GrammarDef) -> String {
    match g {
        GTerm::NonTerminal(i) => gd.nonterminals[*i].name.to_string(),
        GTerm::Var(n, _) => n.to_string(),
        GTerm::Lit(v) => v.to_string(),
        GTerm::App(op, ch) => {
            let parts: Vec<String> = ch.iter().map(|c| gterm_name(c, gd)).collect();
            format!("({} {})", op.name(), parts.join(" "))
        }
    }
}

/// One datatype per nonterminal, one constructor per production.
pub fn embed_grammar(g: &GrammarDef, params: &[(Symbol, Sort)]) -> Result<DatatypeGrammar, EmbedError> {
    let mut constructors = Vec::new();
    let mut by_nt = vec![Vec::new(); g.nonterminals.len()];
    for (nt, def) in g.nonterminals.iter().enumerate() {
        for p in &def.productions {
            let ctor = match p {
                Production::Constant(s) => Constructor {
                    name: format!("(Constant {s})"),
                    nt,
                    fields: vec![],
                    analog: Analog::Constant(*s),
                },
                Production::Expr(e) => {
                    let mut fields = Vec::new();
                    let t = convert(e, params, &mut fields)?;
                    Constructor {
                        name: gterm_name(e, g),
                        nt,
                        fields,
                        analog: Analog::Template(t),
                    }
                }
            };
            by_nt[nt].push(constructors.len());
            constructors.push(ctor);
        }
    }
    if by_nt.first().is_none_or(|v| v.is_empty()) {
        let name = g.nonterminals.first().map(|n| n.name.clone()).unwrap_or_else(|| "Start".into());
        return Err(EmbedError::EmptyStart(name));
    }
    Ok(DatatypeGrammar {
        params: params.to_vec(),
        nonterminals: g.nonterminals.iter().map(|n| (n.name.clone(), n.sort)).collect(),
        constructors,
        by_nt,
    })
}

/// The grammar used when a target declares none: argument variables,
/// small literals plus the problem's own literals, and the core operators
/// of every sort in play.
pub fn default_grammar(problem: &SyGuSProblem, decl: &SynthFunDecl) -> GrammarDef {
    let mut sorts: BTreeSet<Sort> = BTreeSet::new();
    sorts.insert(decl.ret());
    sorts.insert(Sort::Bool);
    for (_, s) in &decl.params {
        sorts.insert(*s);
    }
    if sorts.contains(&Sort::String) {
        sorts.insert(Sort::Int);
    }
    // Start symbol first, then the remaining sorts in a fixed order.
    let mut order: Vec<Sort> = vec![decl.ret()];
    order.extend(sorts.iter().copied().filter(|s| *s != decl.ret()));
    let nt_of = |s: Sort| order.iter().position(|o| *o == s).expect("sort in grammar");
    let name_of = |s: Sort| -> Symbol {
        match s {
            Sort::Int => "IntExpr".into(),
            Sort::Bool => "BoolExpr".into(),
            Sort::String => "StrExpr".into(),
            Sort::BitVec(w) => format!("BV{w}Expr").into(),
        }
    };
    let lits = problem.literals();
    let nt = |s: Sort| GTerm::NonTerminal(nt_of(s));
    let app = |op: Op, ch: Vec<GTerm>| Production::Expr(GTerm::App(op, ch));
    let has_strings = sorts.contains(&Sort::String);
    let bv_widths: Vec<u32> = sorts
        .iter()
        .filter_map(|s| match s {
            Sort::BitVec(w) => Some(*w),
            _ => None,
        })
        .collect();
    let mut nonterminals = Vec::new();
    for &s in &order {
        let mut prods: Vec<Production> = decl
            .params
            .iter()
            .filter(|(_, ps)| *ps == s)
            .map(|(n, ps)| Production::Expr(GTerm::Var(n.clone(), *ps)))
            .collect();
        let push_lit = |prods: &mut Vec<Production>, v: Value| {
            let p = Production::Expr(GTerm::Lit(v));
            if !prods.contains(&p) {
                prods.push(p);
            }
        };
        match s {
            Sort::Int => {
                push_lit(&mut prods, Value::int(0));
                push_lit(&mut prods, Value::int(1));
                for v in lits.iter().filter(|v| v.sort() == Sort::Int) {
                    push_lit(&mut prods, v.clone());
                }
                prods.push(app(Op::Add, vec![nt(s), nt(s)]));
                prods.push(app(Op::Sub, vec![nt(s), nt(s)]));
                if has_strings {
                    prods.push(app(Op::StrLen, vec![nt(Sort::String)]));
                    prods.push(app(Op::StrIndexOf, vec![nt(Sort::String), nt(Sort::String), nt(s)]));
                    prods.push(app(Op::StrToInt, vec![nt(Sort::String)]));
                }
                prods.push(app(Op::Ite, vec![nt(Sort::Bool), nt(s), nt(s)]));
            }
            Sort::Bool => {
                push_lit(&mut prods, Value::Bool(true));
                push_lit(&mut prods, Value::Bool(false));
                prods.push(app(Op::Not, vec![nt(s)]));
                prods.push(app(Op::And, vec![nt(s), nt(s)]));
                prods.push(app(Op::Or, vec![nt(s), nt(s)]));
                if sorts.contains(&Sort::Int) {
                    prods.push(app(Op::Le, vec![nt(Sort::Int), nt(Sort::Int)]));
                    prods.push(app(Op::Eq, vec![nt(Sort::Int), nt(Sort::Int)]));
                }
                if has_strings {
                    prods.push(app(Op::StrContains, vec![nt(Sort::String), nt(Sort::String)]));
                    prods.push(app(Op::Eq, vec![nt(Sort::String), nt(Sort::String)]));
                }
                for &w in &bv_widths {
                    let b = nt(Sort::BitVec(w));
                    prods.push(app(Op::BvUle, vec![b.clone(), b.clone()]));
                    prods.push(app(Op::BvUlt, vec![b.clone(), b.clone()]));
                    prods.push(app(Op::Eq, vec![b.clone(), b]));
                }
            }
            Sort::String => {
                push_lit(&mut prods, Value::str(""));
                for v in lits.iter().filter(|v| v.sort() == Sort::String) {
                    push_lit(&mut prods, v.clone());
                }
                prods.push(app(Op::StrConcat, vec![nt(s), nt(s)]));
                prods.push(app(Op::StrSubstr, vec![nt(s), nt(Sort::Int), nt(Sort::Int)]));
                prods.push(app(Op::StrAt, vec![nt(s), nt(Sort::Int)]));
                prods.push(app(Op::StrReplace, vec![nt(s), nt(s), nt(s)]));
                prods.push(app(Op::IntToStr, vec![nt(Sort::Int)]));
                prods.push(app(Op::Ite, vec![nt(Sort::Bool), nt(s), nt(s)]));
            }
            Sort::BitVec(w) => {
                push_lit(&mut prods, Value::bv(w, 0));
                push_lit(&mut prods, Value::bv(w, 1));
                for v in lits.iter().filter(|v| v.sort() == s) {
                    push_lit(&mut prods, v.clone());
                }
                for op in [Op::BvNot, Op::BvNeg] {
                    prods.push(app(op, vec![nt(s)]));
                }
                for op in [Op::BvAdd, Op::BvSub, Op::BvAnd, Op::BvOr, Op::BvXor, Op::BvShl, Op::BvLshr] {
                    prods.push(app(op, vec![nt(s), nt(s)]));
                }
                prods.push(app(Op::Ite, vec![nt(Sort::Bool), nt(s), nt(s)]));
            }
        }
        nonterminals.push(NonterminalDef {
            name: name_of(s),
            sort: s,
            productions: prods,
        });
    }
    GrammarDef { nonterminals }
}

/// The declared grammar, or the default one, embedded.
pub fn grammar_for(problem: &SyGuSProblem, decl: &SynthFunDecl) -> Result<DatatypeGrammar, EmbedError> {
    match &decl.grammar {
        Some(g) => embed_grammar(g, &decl.params),
        None => embed_grammar(&default_grammar(problem, decl), &decl.params),
    }
}
