//! Programming by example over strings: the answer only has to agree with
//! the given input/output pairs.

use sygus::dispatch::{solve_text, SolverConfig, Strategy};
use sygus::frontend::print_solution;
use sygus::problem::SynthOutcome;

pub const PROBLEM: &str = r#"(set-logic SLIA)
(synth-fun f ((x String)) String
  ((S String) (I Int))
  ((S String (x " " (str.++ S S) (str.substr S I I)))
   (I Int (0 1 (str.indexof S S I)))))
(constraint (= (f "hello world") "hello"))
(constraint (= (f "a b") "a"))
(constraint (= (f "foo bar baz") "foo"))
(constraint (= (f "xy z") "xy"))
(check-synth)"#;

pub fn run() -> (SynthOutcome, String) {
    let cfg = SolverConfig {
        strategy: Strategy::Unif,
        ..SolverConfig::default()
    };
    let (problem, report) = solve_text(PROBLEM, &cfg).expect("problem parses");
    let text = print_solution(&problem, &report.outcome);
    (report.outcome, text)
}

#[allow(dead_code)]
fn main() {
    print!("{}", run().1);
}
