//! Loop invariants for a bounded counter, found both by enumeration and by
//! labelling states from counterexamples.

use sygus::dispatch::{solve_text, SolverConfig, Strategy};
use sygus::problem::SynthOutcome;

pub const PROBLEM: &str = "(set-logic LIA)
(synth-inv inv ((x Int)))
(define-fun pre ((x Int)) Bool (= x 0))
(define-fun trans ((x Int) (x! Int)) Bool (and (< x 10) (= x! (+ x 1))))
(define-fun post ((x Int)) Bool (<= x 10))
(inv-constraint inv pre trans post)
(check-synth)";

pub const UNSAFE: &str = "(set-logic LIA)
(synth-inv inv ((x Int)))
(define-fun pre ((x Int)) Bool (= x 0))
(define-fun trans ((x Int) (x! Int)) Bool (= x! (+ x 1)))
(define-fun post ((x Int)) Bool (<= x 3))
(inv-constraint inv pre trans post)
(check-synth)";

pub fn run() -> Vec<(Strategy, &'static str, SynthOutcome)> {
    let mut out = Vec::new();
    for (name, src) in [("counter", PROBLEM), ("unsafe", UNSAFE)] {
        for strategy in [Strategy::Fast, Strategy::Unif] {
            let cfg = SolverConfig {
                strategy,
                ..SolverConfig::default()
            };
            let (_, report) = solve_text(src, &cfg).expect("problem parses");
            out.push((strategy, name, report.outcome));
        }
    }
    out
}

#[allow(dead_code)]
fn main() {
    for (strategy, name, outcome) in run() {
        let shown = match outcome {
            SynthOutcome::Solved(s) => s.bodies[0].1.to_string(),
            SynthOutcome::Infeasible => "infeasible".into(),
            SynthOutcome::Unknown(r) => format!("unknown: {r}"),
        };
        println!("{name:8} {strategy:5} {shown}");
    }
}
