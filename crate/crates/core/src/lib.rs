//! Syntax-guided synthesis over linear integer arithmetic, strings and
//! small bitvectors.

pub mod cegis;
pub mod dispatch;
pub mod enumerator;
pub mod frontend;
pub mod grammar;
pub mod invariant;
pub mod lia;
pub mod linear;
pub mod pbe;
pub mod problem;
pub mod rewrite;
pub mod sexpr;
pub mod single_invocation;
pub mod term;
pub mod verifier;
