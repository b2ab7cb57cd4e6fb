//! Quantifier instantiation on a single-invocation specification: each
//! model of the negated conjecture contributes one branch of the answer.

use sygus::frontend::load_problem;
use sygus::lia::LiaConfig;
use sygus::problem::Stats;
use sygus::single_invocation::{build_ite_solution, cegqi_solve, detect_single_invocation, Cegqi, CegqiBudget};

pub const PROBLEM: &str = "(set-logic LIA)
(synth-fun max2 ((x Int) (y Int)) Int)
(declare-var a Int)
(declare-var b Int)
(constraint (>= (max2 a b) a))
(constraint (>= (max2 a b) b))
(constraint (or (= a (max2 a b)) (= b (max2 a b))))
(check-synth)";

pub fn run() -> (Vec<String>, String) {
    let problem = load_problem(PROBLEM).unwrap();
    let si = detect_single_invocation(&problem).expect("max2 is single-invocation");
    let mut stats = Stats::default();
    let budget = CegqiBudget::default();
    let gamma = match cegqi_solve(&si, &budget, &LiaConfig::default(), &mut stats) {
        Cegqi::Closed(gamma) => gamma,
        other => panic!("instantiation did not close: {other:?}"),
    };
    let body = build_ite_solution(&si, &gamma);
    (gamma.iter().map(|t| t.to_string()).collect(), body.to_string())
}

#[allow(dead_code)]
fn main() {
    let (gamma, body) = run();
    println!("instances: {}", gamma.join(", "));
    println!("solution:  {body}");
}
