//! SyGuS-IF 2.0 reader and SMT-LIB solution printer.

use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::problem::{
    FunDef, GTerm, GrammarDef, InvConstraint, InvariantInfo, NonterminalDef, Production,
    SyGuSProblem, SynthFunDecl, SynthOutcome,
};
use crate::sexpr::{read_all, Pos, SExpr};
use crate::term::{and_all, implies, not, FunSig, Op, Sort, Symbol, Term, Value, MAX_BV_WIDTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: sort error in `{expr}`: {message}")]
    Sort {
        pos: Pos,
        expr: String,
        message: String,
    },
    #[error("{pos}: unsupported theory operator `{op}`")]
    Unsupported { pos: Pos, op: String },
    #[error("{pos}: {message}")]
    Invariant { pos: Pos, message: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Sort { pos, .. }
            | ParseError::Unsupported { pos, .. }
            | ParseError::Invariant { pos, .. } => *pos,
        }
    }
}

fn syntax<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        pos,
        message: message.into(),
    })
}

/// Theory symbols outside the supported signature, reported as unsupported
/// rather than as unknown identifiers.
const KNOWN_UNSUPPORTED: &[&str] = &[
    "div", "mod", "abs", "/", "to_real", "to_int", "is_int", "bvudiv", "bvurem",
    "bvsdiv", "bvsrem", "bvsmod", "bvashr", "bvslt", "bvsle", "bvsgt", "bvsge", "bvcomp", "concat", "extract", "zero_extend", "sign_extend", "rotate_left",
    "rotate_right", "repeat", "str.prefixof", "str.suffixof", "str.in_re", "str.to_re",
    "str.<", "str.<=", "str.replace_all", "str.is_digit", "str.to_code", "str.from_code",
    "re.*", "re.+", "re.++", "re.union", "select", "store",
];

fn is_unsupported_theory_name(name: &str) -> bool {
    KNOWN_UNSUPPORTED.contains(&name) || name.starts_with("re.") || name.starts_with("str.")
}

fn parse_numeral(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_bv_literal(s: &str) -> Option<Value> {
    if let Some(bits) = s.strip_prefix("#b") {
        let w = bits.len() as u32;
        if w == 0 || w > MAX_BV_WIDTH || !bits.chars().all(|c| c == '0' || c == '1') {
            return None;
        }
        return u64::from_str_radix(bits, 2).ok().map(|v| Value::bv(w, v));
    }
    if let Some(hex) = s.strip_prefix("#x") {
        let w = hex.len() as u32 * 4;
        if w == 0 || w > MAX_BV_WIDTH {
            return None;
        }
        return u64::from_str_radix(hex, 16).ok().map(|v| Value::bv(w, v));
    }
    None
}

/// Parses an atom as a literal value, if it is one.
fn literal(e: &SExpr) -> Option<Value> {
    match e {
        SExpr::Str(s, _) => Some(Value::Str(s.clone())),
        SExpr::Atom(a, _) => match a.as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => parse_numeral(a).map(Value::Int).or_else(|| parse_bv_literal(a)),
        },
        SExpr::List(items, _) => {
            // (_ bvN w)
            if items.len() == 3 && items[0].as_atom() == Some("_") {
                let n = items[1].as_atom()?.strip_prefix("bv")?.parse::<u64>().ok()?;
                let w = items[2].as_atom()?.parse::<u32>().ok()?;
                if (1..=MAX_BV_WIDTH).contains(&w) {
                    return Some(Value::bv(w, n));
                }
            }
            // (- n)
            if items.len() == 2 && items[0].as_atom() == Some("-") {
                if let Some(Value::Int(n)) = literal(&items[1]) {
                    return Some(Value::Int(-n));
                }
            }
            None
        }
    }
}

fn parse_sort(e: &SExpr) -> Result<Sort, ParseError> {
    match e {
        SExpr::Atom(a, p) => match a.as_str() {
            "Int" => Ok(Sort::Int),
            "Bool" => Ok(Sort::Bool),
            "String" => Ok(Sort::String),
            "Real" => Err(ParseError::Unsupported {
                pos: *p,
                op: "Real".into(),
            }),
            _ => syntax(*p, format!("unknown sort `{a}`")),
        },
        SExpr::List(items, p) => {
            if items.len() == 3
                && items[0].as_atom() == Some("_")
                && items[1].as_atom() == Some("BitVec")
            {
                match items[2].as_atom().and_then(|w| w.parse::<u32>().ok()) {
                    Some(w) if (1..=MAX_BV_WIDTH).contains(&w) => Ok(Sort::BitVec(w)),
                    _ => syntax(*p, format!("bitvector width must be between 1 and {MAX_BV_WIDTH}")),
                }
            } else {
                syntax(*p, format!("unknown sort `{e}`"))
            }
        }
        SExpr::Str(_, p) => syntax(*p, "expected a sort"),
    }
}

fn symbol(e: &SExpr, what: &str) -> Result<Symbol, ParseError> {
    match e {
        SExpr::Atom(a, _) if !a.is_empty() && literal(e).is_none() => Ok(a.as_str().into()),
        _ => syntax(e.pos(), format!("expected {what}, found `{e}`")),
    }
}

fn sorted_vars(e: &SExpr) -> Result<Vec<(Symbol, Sort)>, ParseError> {
    let Some(items) = e.as_list() else {
        return syntax(e.pos(), "expected a parameter list");
    };
    items
        .iter()
        .map(|it| match it.as_list() {
            Some([name, sort]) => Ok((symbol(name, "a parameter name")?, parse_sort(sort)?)),
            _ => syntax(it.pos(), "expected `(name sort)`"),
        })
        .collect()
}

/// Resolves an operator name applied to `n` arguments.
fn resolve_op(name: &str, n: usize, pos: Pos) -> Result<Op, ParseError> {
    if name == "-" {
        return Ok(if n == 1 { Op::Neg } else { Op::Sub });
    }
    match Op::from_name(name) {
        Some(op) => Ok(op),
        None if is_unsupported_theory_name(name) => Err(ParseError::Unsupported {
            pos,
            op: name.to_string(),
        }),
        None => syntax(pos, format!("unknown function or symbol `{name}`")),
    }
}

struct Ctx<'a> {
    problem: &'a SyGuSProblem,
}

impl Ctx<'_> {
    fn term(&self, e: &SExpr, scope: &[(Symbol, Term)]) -> Result<Term, ParseError> {
        if let Some(v) = literal(e) {
            return Ok(Term::constant(v));
        }
        match e {
            SExpr::Atom(a, p) => {
                if let Some((_, t)) = scope.iter().rev().find(|(n, _)| &**n == a.as_str()) {
                    return Ok(t.clone());
                }
                if let Some((n, s)) = self.problem.universal_vars.iter().find(|(n, _)| &**n == a.as_str()) {
                    return Ok(Term::var(n.clone(), *s));
                }
                if let Some(def) = self.problem.definitions.iter().find(|d| &*d.name == a.as_str()) {
                    if def.params.is_empty() {
                        return Ok(def.body.clone());
                    }
                }
                syntax(*p, format!("unknown symbol `{a}`"))
            }
            SExpr::Str(..) => unreachable!("string literals are handled above"),
            SExpr::List(items, p) => {
                let Some(head) = items.first() else {
                    return syntax(*p, "empty application");
                };
                let Some(name) = head.as_atom() else {
                    return syntax(head.pos(), "expected an operator");
                };
                let args = &items[1..];
                if name == "let" {
                    return self.let_term(args, scope, *p);
                }
                if name == "exists" || name == "forall" {
                    return Err(ParseError::Unsupported {
                        pos: *p,
                        op: name.to_string(),
                    });
                }
                let ch = args
                    .iter()
                    .map(|a| self.term(a, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                let sort_err = |message: String| ParseError::Sort {
                    pos: *p,
                    expr: e.to_string(),
                    message,
                };
                if let Some(f) = self.problem.synth_fun(name) {
                    return Term::app(Op::Call(f.sig.clone()), ch).map_err(|er| sort_err(er.to_string()));
                }
                if let Some(def) = self.problem.definitions.iter().find(|d| &*d.name == name) {
                    if def.params.len() != ch.len()
                        || def.params.iter().zip(&ch).any(|((_, s), c)| *s != c.sort())
                    {
                        return Err(sort_err(format!("arguments do not match `{}`", def.name)));
                    }
                    return Ok(def.instantiate(&ch));
                }
                match name {
                    "distinct" if ch.len() == 2 => {
                        let eq = Term::app(Op::Eq, ch).map_err(|er| sort_err(er.to_string()))?;
                        return Ok(not(eq));
                    }
                    "bvuge" | "bvugt" if ch.len() == 2 => {
                        let op = if name == "bvuge" { Op::BvUle } else { Op::BvUlt };
                        let swapped = vec![ch[1].clone(), ch[0].clone()];
                        return Term::app(op, swapped).map_err(|er| sort_err(er.to_string()));
                    }
                    "xor" if ch.len() == 2 => {
                        let eq = Term::app(Op::Eq, ch).map_err(|er| sort_err(er.to_string()))?;
                        if eq.children()[0].sort() != Sort::Bool {
                            return Err(sort_err("xor expects Bool".into()));
                        }
                        return Ok(not(eq));
                    }
                    "=" if ch.len() > 2 => {
                        let pairs = ch
                            .windows(2)
                            .map(|w| Term::app(Op::Eq, w.to_vec()))
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|er| sort_err(er.to_string()))?;
                        return Ok(and_all(pairs));
                    }
                    "=>" if ch.len() > 2 => {
                        let mut it = ch.into_iter().rev();
                        let mut acc = it.next().expect("non-empty");
                        for a in it {
                            if a.sort() != Sort::Bool || acc.sort() != Sort::Bool {
                                return Err(sort_err("=> expects Bool".into()));
                            }
                            acc = implies(a, acc);
                        }
                        return Ok(acc);
                    }
                    _ => {}
                }
                let op = resolve_op(name, ch.len(), head.pos())?;
                if op == Op::Mul && ch.iter().filter(|c| c.as_value().is_none()).count() > 1 {
                    return Err(sort_err("multiplication must have a literal factor".into()));
                }
                Term::app(op, ch).map_err(|er| sort_err(er.to_string()))
            }
        }
    }

    fn let_term(&self, args: &[SExpr], scope: &[(Symbol, Term)], pos: Pos) -> Result<Term, ParseError> {
        let [bindings, body] = args else {
            return syntax(pos, "expected `(let (bindings) body)`");
        };
        let Some(bs) = bindings.as_list() else {
            return syntax(bindings.pos(), "expected a binding list");
        };
        let mut inner = scope.to_vec();
        for b in bs {
            match b.as_list() {
                Some([name, value]) => {
                    let v = self.term(value, scope)?;
                    inner.push((symbol(name, "a binding name")?, v));
                }
                _ => return syntax(b.pos(), "expected `(name term)`"),
            }
        }
        self.term(body, &inner)
    }

    fn gterm(
        &self,
        e: &SExpr,
        nts: &[(Symbol, Sort)],
        params: &[(Symbol, Sort)],
    ) -> Result<GTerm, ParseError> {
        if let Some(v) = literal(e) {
            return Ok(GTerm::Lit(v));
        }
        let g = GrammarDef {
            nonterminals: nts
                .iter()
                .map(|(n, s)| NonterminalDef {
                    name: n.clone(),
                    sort: *s,
                    productions: vec![],
                })
                .collect(),
        };
        match e {
            SExpr::Atom(a, p) => {
                if let Some(i) = nts.iter().position(|(n, _)| &**n == a.as_str()) {
                    return Ok(GTerm::NonTerminal(i));
                }
                if let Some((n, s)) = params.iter().find(|(n, _)| &**n == a.as_str()) {
                    return Ok(GTerm::Var(n.clone(), *s));
                }
                if let Some(def) = self.problem.definitions.iter().find(|d| &*d.name == a.as_str()) {
                    if def.params.is_empty() {
                        return Ok(term_to_gterm(&def.body, &[]));
                    }
                }
                syntax(*p, format!("unknown symbol `{a}` in grammar"))
            }
            SExpr::Str(..) => unreachable!("string literals are handled above"),
            SExpr::List(items, p) => {
                let Some(name) = items.first().and_then(SExpr::as_atom) else {
                    return syntax(*p, "expected an operator");
                };
                if name == "Constant" || name == "Variable" {
                    return syntax(*p, format!("`({name} T)` is only allowed as a whole production"));
                }
                let ch = items[1..]
                    .iter()
                    .map(|a| self.gterm(a, nts, params))
                    .collect::<Result<Vec<_>, _>>()?;
                let sorts: Vec<Sort> = ch.iter().map(|c| c.sort(&g)).collect();
                let sort_err = |message: String| ParseError::Sort {
                    pos: *p,
                    expr: e.to_string(),
                    message,
                };
                if let Some(def) = self.problem.definitions.iter().find(|d| &*d.name == name) {
                    if def.params.len() != ch.len() || def.params.iter().zip(&sorts).any(|((_, s), c)| s != c) {
                        return Err(sort_err(format!("arguments do not match `{}`", def.name)));
                    }
                    let bindings: Vec<(Symbol, GTerm)> =
                        def.params.iter().map(|(n, _)| n.clone()).zip(ch).collect();
                    return Ok(term_to_gterm(&def.body, &bindings));
                }
                let op = resolve_op(name, ch.len(), items[0].pos())?;
                op.result_sort(&sorts).map_err(|er| sort_err(er.to_string()))?;
                if op == Op::Mul && ch.iter().filter(|c| !matches!(c, GTerm::Lit(_))).count() > 1 {
                    return Err(sort_err("multiplication must have a literal factor".into()));
                }
                Ok(GTerm::App(op, ch))
            }
        }
    }
}

/// Converts a macro body into a grammar term, binding parameters.
fn term_to_gterm(t: &Term, bindings: &[(Symbol, GTerm)]) -> GTerm {
    use crate::term::Kind;
    match t.kind() {
        Kind::Var(v) => bindings
            .iter()
            .find(|(n, _)| n == v)
            .map(|(_, g)| g.clone())
            .unwrap_or_else(|| GTerm::Var(v.clone(), t.sort())),
        Kind::Const(v) => GTerm::Lit(v.clone()),
        Kind::App(op, ch) => GTerm::App(op.clone(), ch.iter().map(|c| term_to_gterm(c, bindings)).collect()),
    }
}

type Group<'e> = (Symbol, Sort, &'e SExpr, Pos);

fn collect_group<'e>(
    it: &'e SExpr,
    groups: &mut Vec<Group<'e>>,
    decls: &mut Vec<(Symbol, Sort)>,
) -> Result<(), ParseError> {
    match it.as_list() {
        Some([name, sort, rules]) if name.as_atom().is_some() => {
            groups.push((symbol(name, "a nonterminal")?, parse_sort(sort)?, rules, it.pos()));
            Ok(())
        }
        Some([head, rules]) if head.as_list().is_some_and(|h| h.len() == 2) => {
            let h = head.as_list().expect("checked");
            groups.push((symbol(&h[0], "a nonterminal")?, parse_sort(&h[1])?, rules, it.pos()));
            Ok(())
        }
        Some([name, sort]) if name.as_atom().is_some() => {
            decls.push((symbol(name, "a nonterminal")?, parse_sort(sort)?));
            Ok(())
        }
        _ => syntax(it.pos(), "malformed grammar rule"),
    }
}

struct Builder {
    problem: SyGuSProblem,
}

impl Builder {
    fn ctx(&self) -> Ctx<'_> {
        Ctx {
            problem: &self.problem,
        }
    }

    fn ensure_fresh(&self, name: &Symbol, pos: Pos) -> Result<(), ParseError> {
        let p = &self.problem;
        if p.synth_fun(name).is_some()
            || p.definitions.iter().any(|d| &d.name == name)
            || p.universal_vars.iter().any(|(n, _)| n == name)
        {
            return syntax(pos, format!("`{name}` is already declared"));
        }
        Ok(())
    }

    fn command(&mut self, e: &SExpr) -> Result<(), ParseError> {
        let Some(items) = e.as_list() else {
            return syntax(e.pos(), format!("expected command, found `{e}`"));
        };
        let Some(head) = items.first().and_then(SExpr::as_atom) else {
            return syntax(e.pos(), "expected command");
        };
        let args = &items[1..];
        let pos = e.pos();
        match head {
            "set-logic" => match args {
                [l] => {
                    self.problem.logic = symbol(l, "a logic name")?.to_string();
                    Ok(())
                }
                _ => syntax(pos, "expected `(set-logic L)`"),
            },
            "set-option" => {
                let what = args.first().map(|a| a.to_string()).unwrap_or_default();
                self.problem.warnings.push(format!("{pos}: ignoring option {what}"));
                Ok(())
            }
            "set-feature" => {
                let what = args.first().map(|a| a.to_string()).unwrap_or_default();
                self.problem.warnings.push(format!("{pos}: ignoring feature {what}"));
                Ok(())
            }
            "set-info" => Ok(()),
            "check-synth" => Ok(()),
            "declare-var" => match args {
                [name, sort] => {
                    let name = symbol(name, "a variable name")?;
                    self.ensure_fresh(&name, pos)?;
                    let sort = parse_sort(sort)?;
                    self.problem.universal_vars.push((name, sort));
                    Ok(())
                }
                _ => syntax(pos, "expected `(declare-var name sort)`"),
            },
            "declare-primed-var" => syntax(
                pos,
                "`declare-primed-var` is SyGuS-IF 1.0 syntax; in 2.0 declare both `x` and `x!` with `declare-var`",
            ),
            "declare-fun" => syntax(
                pos,
                "`declare-fun` is not a SyGuS-IF 2.0 command; use `declare-var` for universal variables",
            ),
            "define-fun" => match args {
                [name, params, ret, body] => {
                    let name = symbol(name, "a function name")?;
                    self.ensure_fresh(&name, pos)?;
                    let params = sorted_vars(params)?;
                    let ret = parse_sort(ret)?;
                    let scope: Vec<(Symbol, Term)> =
                        params.iter().map(|(n, s)| (n.clone(), Term::var(n.clone(), *s))).collect();
                    let body = self.ctx().term(body, &scope)?;
                    if body.sort() != ret {
                        return Err(ParseError::Sort {
                            pos,
                            expr: name.to_string(),
                            message: format!("body has sort {}, declared {ret}", body.sort()),
                        });
                    }
                    self.problem.definitions.push(FunDef {
                        name,
                        params,
                        ret,
                        body,
                    });
                    Ok(())
                }
                _ => syntax(pos, "expected `(define-fun name (params) sort body)`"),
            },
            "synth-fun" | "synth-inv" => {
                let is_inv = head == "synth-inv";
                let (name, params, ret, rest) = if is_inv {
                    match args {
                        [name, params, rest @ ..] => (name, params, Sort::Bool, rest),
                        _ => return syntax(pos, "expected `(synth-inv name (params) [grammar])`"),
                    }
                } else {
                    match args {
                        [name, params, ret, rest @ ..] => (name, params, parse_sort(ret)?, rest),
                        _ => return syntax(pos, "expected `(synth-fun name (params) sort [grammar])`"),
                    }
                };
                let name = symbol(name, "a function name")?;
                self.ensure_fresh(&name, pos)?;
                let params = sorted_vars(params)?;
                let grammar = if rest.is_empty() {
                    None
                } else {
                    Some(self.grammar(rest, &params, ret, pos)?)
                };
                let sig = Arc::new(FunSig {
                    name,
                    params: params.iter().map(|(_, s)| *s).collect(),
                    ret,
                });
                self.problem.synth_funs.push(SynthFunDecl {
                    sig,
                    params,
                    grammar,
                    is_inv,
                });
                Ok(())
            }
            "constraint" => match args {
                [body] => {
                    let t = self.ctx().term(body, &[])?;
                    if t.sort() != Sort::Bool {
                        return Err(ParseError::Sort {
                            pos,
                            expr: body.to_string(),
                            message: format!("constraint has sort {}", t.sort()),
                        });
                    }
                    self.problem.constraints.push(t);
                    Ok(())
                }
                _ => syntax(pos, "expected `(constraint term)`"),
            },
            "inv-constraint" => match args {
                [inv, pre, trans, post] => {
                    self.problem.inv_constraints.push(InvConstraint {
                        inv: symbol(inv, "an invariant name")?,
                        pre: symbol(pre, "a function name")?,
                        trans: symbol(trans, "a function name")?,
                        post: symbol(post, "a function name")?,
                        pos,
                    });
                    Ok(())
                }
                _ => syntax(pos, "expected `(inv-constraint inv pre trans post)`"),
            },
            other => syntax(pos, format!("unsupported command `{other}`")),
        }
    }

    fn grammar(
        &self,
        rest: &[SExpr],
        params: &[(Symbol, Sort)],
        ret: Sort,
        pos: Pos,
    ) -> Result<GrammarDef, ParseError> {
        // Accepted layouts:
        //   ((S T) ...) ((S T (rules)) ...)     SyGuS-IF 2.0
        //   ((S T (rules)) ...)                 single list of groups
        //   ((S T) ((S T) (rules)) ...)         mixed declarations and groups
        let mut decls: Vec<(Symbol, Sort)> = Vec::new();
        let mut groups: Vec<Group<'_>> = Vec::new();
        let lists: Vec<&[SExpr]> = rest
            .iter()
            .map(|r| r.as_list().ok_or(()).or_else(|_| syntax(r.pos(), "expected a grammar list")))
            .collect::<Result<_, _>>()?;
        match lists.as_slice() {
            [predecl, rules] => {
                for d in predecl.iter() {
                    match d.as_list() {
                        Some([n, s]) => decls.push((symbol(n, "a nonterminal")?, parse_sort(s)?)),
                        _ => return syntax(d.pos(), "expected `(nonterminal sort)`"),
                    }
                }
                for it in rules.iter() {
                    collect_group(it, &mut groups, &mut decls)?;
                }
            }
            [single] => {
                for it in single.iter() {
                    collect_group(it, &mut groups, &mut decls)?;
                }
            }
            _ => return syntax(pos, "malformed grammar"),
        }
        if decls.is_empty() {
            decls = groups.iter().map(|(n, s, _, _)| (n.clone(), *s)).collect();
        }
        for (n, s, _, p) in &groups {
            match decls.iter().find(|(d, _)| d == n) {
                Some((_, ds)) if ds == s => {}
                Some(_) => return syntax(*p, format!("nonterminal `{n}` declared with a different sort")),
                None => return syntax(*p, format!("undeclared nonterminal `{n}`")),
            }
        }
        if decls.is_empty() {
            return syntax(pos, "empty grammar");
        }
        if decls[0].1 != ret {
            return Err(ParseError::Sort {
                pos,
                expr: decls[0].0.to_string(),
                message: format!("start symbol has sort {}, function returns {ret}", decls[0].1),
            });
        }
        let mut nts: Vec<NonterminalDef> = decls
            .iter()
            .map(|(n, s)| NonterminalDef {
                name: n.clone(),
                sort: *s,
                productions: vec![],
            })
            .collect();
        let ctx = self.ctx();
        for (n, s, rules, _) in groups {
            let idx = decls.iter().position(|(d, _)| *d == n).expect("declared");
            let Some(rules) = rules.as_list() else {
                return syntax(rules.pos(), "expected a production list");
            };
            let mut prods = Vec::new();
            for r in rules {
                if let Some([head, sort]) = r.as_list() {
                    match head.as_atom() {
                        Some("Constant") => {
                            let cs = parse_sort(sort)?;
                            if cs != s {
                                return Err(ParseError::Sort {
                                    pos: r.pos(),
                                    expr: r.to_string(),
                                    message: format!("expected sort {s}"),
                                });
                            }
                            prods.push(Production::Constant(cs));
                            continue;
                        }
                        Some("Variable") => {
                            let vs = parse_sort(sort)?;
                            for (pn, ps) in params.iter().filter(|(_, ps)| *ps == vs) {
                                if vs == s {
                                    prods.push(Production::Expr(GTerm::Var(pn.clone(), *ps)));
                                }
                            }
                            continue;
                        }
                        _ => {}
                    }
                }
                let g = ctx.gterm(r, &decls, params)?;
                let gdef = GrammarDef {
                    nonterminals: decls
                        .iter()
                        .map(|(n, s)| NonterminalDef {
                            name: n.clone(),
                            sort: *s,
                            productions: vec![],
                        })
                        .collect(),
                };
                if g.sort(&gdef) != s {
                    return Err(ParseError::Sort {
                        pos: r.pos(),
                        expr: r.to_string(),
                        message: format!("production has sort {}, nonterminal `{n}` has {s}", g.sort(&gdef)),
                    });
                }
                prods.push(Production::Expr(g));
            }
            nts[idx].productions.extend(prods);
        }
        Ok(GrammarDef { nonterminals: nts })
    }
}

/// Parses SyGuS-IF 2.0 text. `inv-constraint` commands are recorded but
/// not expanded; see [`expand_inv_constraint`].
pub fn parse_sygus(text: &str) -> Result<SyGuSProblem, ParseError> {
    let exprs = read_all(text).map_err(|e| ParseError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    if exprs.is_empty() {
        return syntax(Pos { line: 1, col: 1 }, "expected command");
    }
    let mut b = Builder {
        problem: SyGuSProblem::default(),
    };
    for e in &exprs {
        b.command(e)?;
    }
    Ok(b.problem)
}

/// Parses and expands invariant constraints in one step.
pub fn load_problem(text: &str) -> Result<SyGuSProblem, ParseError> {
    expand_inv_constraint(parse_sygus(text)?)
}

fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> Symbol {
    if !taken(base) {
        return base.into();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("some suffix is free")
        .into()
}

/// Replaces `(inv-constraint inv pre trans post)` by its three implications
/// over fresh universal variables `x̄` and primed copies `x̄!`.
pub fn expand_inv_constraint(mut problem: SyGuSProblem) -> Result<SyGuSProblem, ParseError> {
    if problem.inv_constraints.is_empty() {
        return Ok(problem);
    }
    if problem.inv_constraints.len() > 1 {
        return Err(ParseError::Invariant {
            pos: problem.inv_constraints[1].pos,
            message: "only one inv-constraint per problem is supported".into(),
        });
    }
    let ic = problem.inv_constraints.remove(0);
    let err = |message: String| ParseError::Invariant { pos: ic.pos, message };
    let inv = problem
        .synth_fun(&ic.inv)
        .cloned()
        .ok_or_else(|| err(format!("`{}` is not a synthesis target", ic.inv)))?;
    if inv.ret() != Sort::Bool {
        return Err(err(format!("invariant `{}` must return Bool", ic.inv)));
    }
    let find = |name: &Symbol| {
        problem
            .definitions
            .iter()
            .find(|d| &d.name == name)
            .cloned()
            .ok_or_else(|| err(format!("undefined function `{name}`")))
    };
    let (pre, trans, post) = (find(&ic.pre)?, find(&ic.trans)?, find(&ic.post)?);
    let state: Vec<Sort> = inv.params.iter().map(|(_, s)| *s).collect();
    let sorts = |d: &FunDef| d.params.iter().map(|(_, s)| *s).collect::<Vec<_>>();
    for d in [&pre, &post] {
        if sorts(d) != state || d.ret != Sort::Bool {
            return Err(err(format!("`{}` does not match the invariant's signature", d.name)));
        }
    }
    let doubled: Vec<Sort> = state.iter().chain(state.iter()).copied().collect();
    if sorts(&trans) != doubled || trans.ret != Sort::Bool {
        return Err(err(format!(
            "`{}` must take the state twice (current, next) and return Bool",
            trans.name
        )));
    }
    let mut vars: Vec<(Symbol, Sort)> = Vec::new();
    let mut primed: Vec<(Symbol, Sort)> = Vec::new();
    for (n, s) in &inv.params {
        let taken = |c: &str| {
            problem.universal_vars.iter().any(|(u, _)| &**u == c)
                || vars.iter().chain(primed.iter()).any(|(u, _)| &**u == c)
                || problem.synth_fun(c).is_some()
        };
        let v = fresh_name(n, &taken);
        vars.push((v, *s));
        let taken = |c: &str| {
            problem.universal_vars.iter().any(|(u, _)| &**u == c)
                || vars.iter().chain(primed.iter()).any(|(u, _)| &**u == c)
                || problem.synth_fun(c).is_some()
        };
        let p = fresh_name(&format!("{}!", vars.last().expect("pushed").0), &taken);
        primed.push((p, *s));
    }
    let xs: Vec<Term> = vars.iter().map(|(n, s)| Term::var(n.clone(), *s)).collect();
    let xps: Vec<Term> = primed.iter().map(|(n, s)| Term::var(n.clone(), *s)).collect();
    let call = |args: &[Term]| Term::build(Op::Call(inv.sig.clone()), args.to_vec());
    let pre_t = pre.instantiate(&xs);
    let post_t = post.instantiate(&xs);
    let both: Vec<Term> = xs.iter().chain(xps.iter()).cloned().collect();
    let trans_t = trans.instantiate(&both);
    problem.constraints.push(implies(pre_t.clone(), call(&xs)));
    problem.constraints.push(implies(
        and_all(vec![call(&xs), trans_t.clone()]),
        call(&xps),
    ));
    problem.constraints.push(implies(call(&xs), post_t.clone()));
    problem.universal_vars.extend(vars.iter().cloned());
    problem.universal_vars.extend(primed.iter().cloned());
    problem.invariant = Some(InvariantInfo {
        inv: inv.name().clone(),
        vars,
        primed,
        pre: pre_t,
        trans: trans_t,
        post: post_t,
    });
    Ok(problem)
}

/// `(define-fun name ((x T) ...) R body)`
pub fn format_define_fun(decl: &SynthFunDecl, body: &Term) -> String {
    let params: Vec<String> = decl.params.iter().map(|(n, s)| format!("({n} {s})")).collect();
    format!("(define-fun {} ({}) {} {})", decl.name(), params.join(" "), decl.ret(), body)
}

/// Renders a verdict: one `define-fun` line per target, or `infeasible` /
/// `unknown`.
pub fn print_solution(problem: &SyGuSProblem, outcome: &SynthOutcome) -> String {
    match outcome {
        SynthOutcome::Solved(sol) => {
            let mut out = String::new();
            for decl in &problem.synth_funs {
                if let Some(body) = sol.body(decl.name()) {
                    out.push_str(&format_define_fun(decl, body));
                    out.push('\n');
                }
            }
            out
        }
        SynthOutcome::Infeasible => "infeasible\n".into(),
        SynthOutcome::Unknown(_) => "unknown\n".into(),
    }
}

/// Parses printed `define-fun` solutions back, checking each against the
/// problem's target signatures.
pub fn parse_solutions(text: &str, problem: &SyGuSProblem) -> Result<Vec<(Symbol, Term)>, ParseError> {
    let exprs = read_all(text).map_err(|e| ParseError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    let empty = SyGuSProblem::default();
    let ctx = Ctx { problem: &empty };
    let mut out = Vec::new();
    for e in &exprs {
        let Some([head, name, params, ret, body]) = e.as_list() else {
            return syntax(e.pos(), "expected `(define-fun name (params) sort body)`");
        };
        if head.as_atom() != Some("define-fun") {
            return syntax(head.pos(), "expected define-fun");
        }
        let name = symbol(name, "a function name")?;
        let params = sorted_vars(params)?;
        let ret = parse_sort(ret)?;
        let Some(decl) = problem.synth_fun(&name) else {
            return syntax(e.pos(), format!("`{name}` is not a synthesis target"));
        };
        if ret != decl.ret() || params.iter().map(|(_, s)| *s).ne(decl.params.iter().map(|(_, s)| *s)) {
            return Err(ParseError::Sort {
                pos: e.pos(),
                expr: name.to_string(),
                message: "signature differs from the synthesis target".into(),
            });
        }
        // Rename to the declared parameter names.
        let scope: Vec<(Symbol, Term)> = params
            .iter()
            .zip(decl.params.iter())
            .map(|((n, _), (dn, ds))| (n.clone(), Term::var(dn.clone(), *ds)))
            .collect();
        let body = ctx.term(body, &scope)?;
        if body.sort() != ret {
            return Err(ParseError::Sort {
                pos: e.pos(),
                expr: body.to_string(),
                message: format!("body has sort {}", body.sort()),
            });
        }
        out.push((name, body));
    }
    Ok(out)
}

/// Parses a standalone term over the given variables.
pub fn parse_term(text: &str, vars: &[(Symbol, Sort)]) -> Result<Term, ParseError> {
    let exprs = read_all(text).map_err(|e| ParseError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    let [e] = exprs.as_slice() else {
        return syntax(Pos { line: 1, col: 1 }, "expected exactly one term");
    };
    let empty = SyGuSProblem::default();
    let scope: Vec<(Symbol, Term)> = vars.iter().map(|(n, s)| (n.clone(), Term::var(n.clone(), *s))).collect();
    Ctx { problem: &empty }.term(e, &scope)
}
