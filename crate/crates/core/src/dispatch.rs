//! Strategy selection and the end-to-end solve pipeline.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::cegis::{solve_cegis, CegisConfig};
use crate::enumerator::{EnumConfig, DEFAULT_MAX_SIZE};
use crate::frontend::{load_problem, ParseError};
use crate::grammar::{grammar_for, DatatypeGrammar, EmbedError};
use crate::invariant::{solve_invariant, InvariantMethod};
use crate::lia::is_lia;
use crate::pbe::{is_pbe, solve_pbe, PbeCheck};
use crate::problem::{Stats, SyGuSProblem, SynthOutcome};
use crate::single_invocation::{detect_single_invocation, solve_single_invocation};
use crate::term::{Op, Sort};
use crate::verifier::VerifyConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Single-invocation when applicable, fast enumeration otherwise.
    #[default]
    Auto,
    /// Enumerative CEGIS only.
    Fast,
    /// Single-invocation only.
    Si,
    /// Divide-and-conquer for examples and invariants.
    Unif,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Auto => "auto",
            Strategy::Fast => "fast",
            Strategy::Si => "si",
            Strategy::Unif => "unif",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown strategy `{0}` (expected auto, fast, si or unif)")]
pub struct StrategyError(String);

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "fast" => Ok(Strategy::Fast),
            "si" => Ok(Strategy::Si),
            "unif" => Ok(Strategy::Unif),
            other => Err(StrategyError(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub strategy: Strategy,
    /// `None` runs without a deadline.
    pub timeout: Option<Duration>,
    pub max_size: usize,
    /// Int range of the bounded verifier.
    pub verify_bound: i64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            strategy: Strategy::Auto,
            timeout: Some(Duration::from_millis(60_000)),
            max_size: DEFAULT_MAX_SIZE,
            verify_bound: VerifyConfig::default().int_bound,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn engine_config(&self) -> CegisConfig {
        CegisConfig {
            enumeration: EnumConfig {
                max_size: self.max_size,
                ..EnumConfig::default()
            },
            verify: VerifyConfig {
                int_bound: self.verify_bound,
                seed: self.seed,
                ..VerifyConfig::default()
            },
            deadline: self.timeout.map(|t| Instant::now() + t),
            ..CegisConfig::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("grammar: {0}")]
    Grammar(#[from] EmbedError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SynthOutcome,
    pub stats: Stats,
}

/// Single-invocation with an LIA body: the condition for taking the
/// quantifier-instantiation path automatically.
pub fn is_amenable(problem: &SyGuSProblem) -> bool {
    detect_single_invocation(problem).is_some_and(|si| si.y.sort() == Sort::Int && is_lia(&si.q_body))
}

fn has_ite_over_bool(g: &DatatypeGrammar) -> bool {
    g.nonterminals.iter().any(|(_, s)| *s == Sort::Bool)
        && g.constructors.iter().any(|c| c.direct_op() == Some(&Op::Ite))
}

/// Solves a parsed problem with the configured strategy.
pub fn solve(problem: &SyGuSProblem, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    let mut stats = Stats::default();
    if problem.synth_funs.len() != 1 {
        let why = if problem.synth_funs.is_empty() {
            "no synthesis target"
        } else {
            "several synthesis targets"
        };
        return Ok(SolveReport {
            outcome: SynthOutcome::Unknown(why.into()),
            stats,
        });
    }
    let g = Arc::new(grammar_for(problem, &problem.synth_funs[0])?);
    let cfg = config.engine_config();
    let fast = |stats: &mut Stats| {
        if problem.is_invariant_problem() {
            solve_invariant(problem, &g, &cfg, InvariantMethod::Enumerative, stats)
        } else {
            solve_cegis(problem, g.clone(), &cfg, stats)
        }
    };
    let outcome = match config.strategy {
        Strategy::Fast => fast(&mut stats),
        Strategy::Si => solve_single_invocation(problem, &g, &cfg, &mut stats),
        Strategy::Unif => {
            if problem.is_invariant_problem() {
                solve_invariant(problem, &g, &cfg, InvariantMethod::UnifPi, &mut stats)
            } else if !matches!(is_pbe(problem), PbeCheck::NotPbe) {
                solve_pbe(problem, &g, &cfg, &mut stats)
            } else {
                fast(&mut stats)
            }
        }
        Strategy::Auto => {
            let pbe = !matches!(is_pbe(problem), PbeCheck::NotPbe);
            if pbe || !has_ite_over_bool(&g) || !is_amenable(problem) {
                fast(&mut stats)
            } else {
                match solve_single_invocation(problem, &g, &cfg, &mut stats) {
                    SynthOutcome::Unknown(_) => fast(&mut stats),
                    done => done,
                }
            }
        }
    };
    Ok(SolveReport { outcome, stats })
}

/// Parses and solves SyGuS text.
pub fn solve_text(text: &str, config: &SolverConfig) -> Result<(SyGuSProblem, SolveReport), SolveError> {
    let problem = load_problem(text)?;
    let report = solve(&problem, config)?;
    Ok((problem, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Engine;

    const MAX2: &str = "(set-logic LIA)(synth-fun max2 ((x Int) (y Int)) Int)
        (declare-var a Int)(declare-var b Int)
        (constraint (>= (max2 a b) a))(constraint (>= (max2 a b) b))
        (constraint (or (= a (max2 a b)) (= b (max2 a b))))";

    fn run(src: &str, strategy: Strategy) -> SolveReport {
        let cfg = SolverConfig {
            strategy,
            ..SolverConfig::default()
        };
        solve_text(src, &cfg).unwrap().1
    }

    #[test]
    fn strategies_parse() {
        for s in ["auto", "fast", "si", "unif"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
        assert!("quick".parse::<Strategy>().is_err());
    }

    #[test]
    fn auto_takes_single_invocation_for_max2() {
        let r = run(MAX2, Strategy::Auto);
        let SynthOutcome::Solved(s) = &r.outcome else { panic!("{r:?}") };
        assert_eq!(s.engine, Engine::SingleInvocation);
        assert!(r.stats.cegqi_iterations > 0);
    }

    #[test]
    fn fast_solves_max2_by_enumeration() {
        let r = run(MAX2, Strategy::Fast);
        let SynthOutcome::Solved(s) = &r.outcome else { panic!("{r:?}") };
        assert_eq!(s.engine, Engine::Enumerative);
        assert_eq!(r.stats.cegqi_iterations, 0);
    }

    #[test]
    fn grammar_without_ite_goes_fast() {
        let src = "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S)))))
                   (declare-var a Int)(constraint (> (f a) a))";
        let r = run(src, Strategy::Auto);
        let SynthOutcome::Solved(s) = &r.outcome else { panic!("{r:?}") };
        assert_eq!(s.engine, Engine::Enumerative);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run(MAX2, Strategy::Fast);
        let b = run(MAX2, Strategy::Fast);
        assert_eq!(a, b);
    }

    #[test]
    fn undeclared_grammar_symbol_is_an_error() {
        assert!(solve_text("(synth-fun f ((x Int)) Int ((S Int)) ((S Int (zz))))", &SolverConfig::default()).is_err());
    }
}
