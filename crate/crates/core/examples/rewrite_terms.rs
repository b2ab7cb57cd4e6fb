//! Normal forms produced by the rewriter. Equivalent terms that differ only
//! in argument order or trivial identities share one rewritten form.

use sygus::frontend::parse_term;
use sygus::rewrite::rewrite;
use sygus::term::{Sort, Symbol};

pub fn run() -> Vec<(String, String)> {
    let vars: Vec<(Symbol, Sort)> = vec![("x".into(), Sort::Int), ("y".into(), Sort::Int), ("s".into(), Sort::String)];
    [
        "(+ x 0)",
        "(+ y x)",
        "(+ x y)",
        "(- x (- x y))",
        "(not (not (<= x y)))",
        "(< x (+ x 1))",
        "(ite true x y)",
        "(str.++ \"ab\" \"cd\")",
        "(and (<= 0 x) (>= x 0))",
        "(bvadd #x0f #x01)",
    ]
    .iter()
    .map(|src| {
        let t = parse_term(src, &vars).expect("term parses");
        (src.to_string(), rewrite(&t).to_string())
    })
    .collect()
}

#[allow(dead_code)]
fn main() {
    for (from, to) in run() {
        println!("{from:28} => {to}");
    }
}
