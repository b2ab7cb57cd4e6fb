//! Reads a SyGuS problem, reports what was declared and prints a solution
//! back in SMT-LIB form.

use sygus::frontend::{format_define_fun, load_problem, parse_term};

const PROBLEM: &str = r#"
(set-logic LIA)
(synth-fun max2 ((x Int) (y Int)) Int
  ((Start Int) (B Bool))
  ((Start Int (x y 0 1 (+ Start Start) (ite B Start Start)))
   (B Bool ((<= Start Start) (and B B) (not B)))))
(declare-var a Int)
(declare-var b Int)
(constraint (>= (max2 a b) a))
(constraint (>= (max2 a b) b))
(constraint (or (= a (max2 a b)) (= b (max2 a b))))
(check-synth)
"#;

pub fn run() -> String {
    let problem = load_problem(PROBLEM).expect("problem parses");
    let decl = &problem.synth_funs[0];
    let mut out = format!(
        "logic {}: {} params, {} universals, {} constraints\n",
        problem.logic,
        decl.params.len(),
        problem.universal_vars.len(),
        problem.constraints.len()
    );
    for c in &problem.constraints {
        out += &format!("  {c}\n");
    }
    let body = parse_term("(ite (<= x y) y x)", &decl.params).expect("body parses");
    out += &format_define_fun(decl, &body);
    out.push('\n');
    out
}

#[allow(dead_code)]
fn main() {
    print!("{}", run());
}
