//! The parsed synthesis conjecture and its solutions.

use std::fmt;
use std::sync::Arc;

use crate::term::{map_calls, substitute_unchecked, FunSig, Op, Sort, Subst, Symbol, Term, Value};

/// A grammar production body. Nonterminal references index into
/// [`GrammarDef::nonterminals`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GTerm {
    NonTerminal(usize),
    Var(Symbol, Sort),
    Lit(Value),
    App(Op, Vec<GTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Production {
    Expr(GTerm),
    /// `(Constant T)`: any literal of sort `T`.
    Constant(Sort),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonterminalDef {
    pub name: Symbol,
    pub sort: Sort,
    pub productions: Vec<Production>,
}

/// A context-free grammar; the first nonterminal is the start symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarDef {
    pub nonterminals: Vec<NonterminalDef>,
}

impl GTerm {
    pub fn sort(&self, g: &GrammarDef) -> Sort {
        match self {
            GTerm::NonTerminal(i) => g.nonterminals[*i].sort,
            GTerm::Var(_, s) => *s,
            GTerm::Lit(v) => v.sort(),
            GTerm::App(op, ch) => {
                let sorts: Vec<Sort> = ch.iter().map(|c| c.sort(g)).collect();
                op.result_sort(&sorts).expect("grammar terms are checked when parsed")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthFunDecl {
    pub sig: Arc<FunSig>,
    pub params: Vec<(Symbol, Sort)>,
    pub grammar: Option<GrammarDef>,
    /// Declared with `synth-inv`.
    pub is_inv: bool,
}

impl SynthFunDecl {
    pub fn name(&self) -> &Symbol {
        &self.sig.name
    }

    pub fn ret(&self) -> Sort {
        self.sig.ret
    }

    pub fn param_vars(&self) -> Vec<Term> {
        self.params.iter().map(|(n, s)| Term::var(n.clone(), *s)).collect()
    }

    /// `body` instantiated at `args`.
    pub fn instantiate(&self, body: &Term, args: &[Term]) -> Term {
        let sub: Subst = self
            .params
            .iter()
            .map(|(n, _)| n.clone())
            .zip(args.iter().cloned())
            .collect();
        substitute_unchecked(body, &sub)
    }
}

/// A `define-fun` macro.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub name: Symbol,
    pub params: Vec<(Symbol, Sort)>,
    pub ret: Sort,
    pub body: Term,
}

impl FunDef {
    pub fn instantiate(&self, args: &[Term]) -> Term {
        let sub: Subst = self
            .params
            .iter()
            .map(|(n, _)| n.clone())
            .zip(args.iter().cloned())
            .collect();
        substitute_unchecked(&self.body, &sub)
    }
}

/// An unexpanded `(inv-constraint inv pre trans post)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvConstraint {
    pub inv: Symbol,
    pub pre: Symbol,
    pub trans: Symbol,
    pub post: Symbol,
    pub pos: crate::sexpr::Pos,
}

/// Invariant-track structure recorded by inv-constraint expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantInfo {
    pub inv: Symbol,
    pub vars: Vec<(Symbol, Sort)>,
    pub primed: Vec<(Symbol, Sort)>,
    /// Over `vars`.
    pub pre: Term,
    /// Over `vars` and `primed`.
    pub trans: Term,
    /// Over `vars`.
    pub post: Term,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyGuSProblem {
    pub logic: String,
    pub synth_funs: Vec<SynthFunDecl>,
    pub universal_vars: Vec<(Symbol, Sort)>,
    /// Boolean constraints; synthesis targets appear as `Op::Call` applications.
    pub constraints: Vec<Term>,
    pub definitions: Vec<FunDef>,
    pub inv_constraints: Vec<InvConstraint>,
    pub invariant: Option<InvariantInfo>,
    pub warnings: Vec<String>,
}

impl SyGuSProblem {
    pub fn is_invariant_problem(&self) -> bool {
        self.invariant.is_some()
    }

    pub fn synth_fun(&self, name: &str) -> Option<&SynthFunDecl> {
        self.synth_funs.iter().find(|f| &**f.name() == name)
    }

    /// All literals appearing in the constraints, in first-occurrence order.
    pub fn literals(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        for c in &self.constraints {
            for t in c.subterms() {
                if let Some(v) = t.as_value() {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    /// Constraints with every synthesis target replaced by its body.
    pub fn substitute_solution(&self, sol: &Solution) -> Vec<Term> {
        self.constraints
            .iter()
            .map(|c| {
                map_calls(c, &|sig, args| {
                    let body = sol.body(&sig.name)?;
                    let decl = self.synth_fun(&sig.name)?;
                    Some(decl.instantiate(body, args))
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Enumerative,
    ConstantRepair,
    SingleInvocation,
    DecisionTree,
    Concat,
    UnifPi,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Enumerative => "enumerative",
            Engine::ConstantRepair => "constant-repair",
            Engine::SingleInvocation => "single-invocation",
            Engine::DecisionTree => "decision-tree",
            Engine::Concat => "concat",
            Engine::UnifPi => "unif-pi",
        })
    }
}

/// A body per synthesis target, each a term over that target's parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub bodies: Vec<(Symbol, Term)>,
    pub engine: Engine,
}

impl Solution {
    pub fn single(name: Symbol, body: Term, engine: Engine) -> Solution {
        Solution {
            bodies: vec![(name, body)],
            engine,
        }
    }

    pub fn body(&self, name: &str) -> Option<&Term> {
        self.bodies.iter().find(|(n, _)| &**n == name).map(|(_, b)| b)
    }
}

/// Final verdict of a solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthOutcome {
    Solved(Solution),
    Infeasible,
    Unknown(String),
}

/// Counters reported by `--stats`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Candidates drawn from enumerators.
    pub candidates: u64,
    /// Terms discarded by symmetry breaking or redundancy elimination.
    pub pruned: u64,
    /// Candidates rejected by a stored counterexample without a verifier call.
    pub rejected: u64,
    pub verifier_calls: u64,
    pub cegqi_iterations: u64,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "candidates={}", self.candidates)?;
        writeln!(f, "pruned={}", self.pruned)?;
        writeln!(f, "rejected={}", self.rejected)?;
        writeln!(f, "verifier_calls={}", self.verifier_calls)?;
        writeln!(f, "cegqi_iterations={}", self.cegqi_iterations)
    }
}
