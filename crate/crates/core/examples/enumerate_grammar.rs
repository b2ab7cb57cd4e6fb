//! Enumerates a grammar in size order with redundancy pruning and shows how
//! many terms were dropped along the way.

use std::sync::Arc;

use sygus::enumerator::{EnumConfig, Enumerator};
use sygus::frontend::parse_sygus;
use sygus::grammar::embed_grammar;
use sygus::term::Value;

pub fn run(count: usize) -> (Vec<String>, String) {
    let p = parse_sygus("(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x 0 1 (+ S S) (- S S)))))").unwrap();
    let decl = &p.synth_funs[0];
    let g = Arc::new(embed_grammar(decl.grammar.as_ref().unwrap(), &decl.params).unwrap());
    let points = (-2..=2).map(|i| vec![Value::int(i)]).collect();
    let mut e = Enumerator::new(g.clone(), EnumConfig::default(), points);
    let mut terms = Vec::new();
    while terms.len() < count {
        match e.next_candidate() {
            Ok(t) => terms.push(format!("[{}] {}", t.size(), g.unembed(&t).unwrap())),
            Err(end) => {
                terms.push(format!("({end})"));
                break;
            }
        }
    }
    let s = e.stats();
    let summary = format!(
        "generated={} admitted={} symmetry={} redundant={}",
        s.generated, s.admitted, s.pruned_symmetry, s.pruned_redundant
    );
    (terms, summary)
}

#[allow(dead_code)]
fn main() {
    let (terms, summary) = run(25);
    for t in terms {
        println!("{t}");
    }
    println!("{summary}");
}
