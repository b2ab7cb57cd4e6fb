//! Satisfiability of quantifier-free linear integer formulas.

use sygus::frontend::parse_term;
use sygus::lia::{qf_lia_sat, LiaResult};
use sygus::term::{Sort, Symbol};

pub fn run() -> Vec<(String, String)> {
    let vars: Vec<(Symbol, Sort)> = vec![("x".into(), Sort::Int), ("y".into(), Sort::Int)];
    [
        "(and (< 0 x) (< x 1))",
        "(and (<= 1 (* 2 x)) (<= (* 2 x) 1))",
        "(and (<= (+ x y) 10) (>= (- x y) 4) (> y 2))",
        "(or (= x 3) (and (> x 7) (< x 9)))",
        "(and (= (* 3 x) (+ (* 5 y) 1)) (<= 0 y) (<= y 4))",
    ]
    .iter()
    .map(|src| {
        let phi = parse_term(src, &vars).expect("formula parses");
        let verdict = match qf_lia_sat(&phi).expect("formula is linear") {
            LiaResult::Sat(model) => format!("sat {model}"),
            LiaResult::Unsat => "unsat".to_string(),
            LiaResult::Unknown(why) => format!("unknown ({why})"),
        };
        (src.to_string(), verdict)
    })
    .collect()
}

#[allow(dead_code)]
fn main() {
    for (phi, verdict) in run() {
        println!("{phi}\n  {verdict}");
    }
}
