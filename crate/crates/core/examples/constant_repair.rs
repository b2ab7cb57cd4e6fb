//! A template with a constant slot: the enumerator proposes `(+ x c)` once
//! and the constant is solved for instead of enumerated.

use std::sync::Arc;

use sygus::cegis::{solve_cegis, CegisConfig};
use sygus::frontend::{load_problem, print_solution};
use sygus::grammar::grammar_for;
use sygus::problem::{Stats, SynthOutcome};

pub const PROBLEM: &str = "(set-logic LIA)
(synth-fun f ((x Int)) Int ((S Int) (C Int)) ((S Int (x (+ S C))) (C Int ((Constant Int)))))
(declare-var x Int)
(constraint (> (f x) (+ x 100)))
(check-synth)";

pub fn run() -> (SynthOutcome, Stats, String) {
    let problem = load_problem(PROBLEM).unwrap();
    let g = Arc::new(grammar_for(&problem, &problem.synth_funs[0]).unwrap());
    let mut stats = Stats::default();
    let outcome = solve_cegis(&problem, g, &CegisConfig::default(), &mut stats);
    let text = print_solution(&problem, &outcome);
    (outcome, stats, text)
}

#[allow(dead_code)]
fn main() {
    let (_, stats, text) = run();
    print!("{text}{stats}");
}
