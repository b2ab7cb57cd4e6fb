use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bench(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("benchmarks")
        .join(name)
        .display()
        .to_string()
}

fn sygus(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sygus"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solves_a_file() {
    let o = sygus(&[&bench("lia_max2.sl")], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(define-fun max2 ((x Int) (y Int)) Int (ite (<= x y) y x))\n");
}

#[test]
fn reads_standard_input() {
    let o = sygus(&[], Some("(synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (= (f a) (+ a 1)))"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(define-fun f ((x Int)) Int (+ x 1))\n");
}

#[test]
fn infeasible_exits_zero() {
    let o = sygus(&[&bench("lia_finite_infeasible.sl")], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "infeasible\n");
}

#[test]
fn parse_errors_exit_two_with_position() {
    let o = sygus(&[], Some("(synth-fun f ((x Int)) Int)\n(constraint (= (f 1) (div 4 2)))"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("div"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn missing_file_exits_two() {
    let o = sygus(&["/nonexistent/problem.sl"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_strategy_is_rejected() {
    let o = sygus(&["--strategy", "quick", &bench("lia_max2.sl")], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("quick"));
}

#[test]
fn unknown_exits_one() {
    // Without a constant `x + 1` is out of reach, and the size cap stops the
    // search before anything is proven.
    let src = "(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x (+ S S)))))
               (declare-var a Int)(constraint (= (f a) (+ a 1)))";
    let o = sygus(&["--max-size", "5"], Some(src));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "unknown\n");
    assert!(stderr(&o).contains("unknown:"));
}

#[test]
fn stats_go_to_stderr() {
    let o = sygus(&["--stats", "--strategy", "fast", &bench("lia_successor.sl")], None);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    for key in ["candidates=", "pruned=", "rejected=", "verifier_calls=", "cegqi_iterations="] {
        assert!(err.contains(key), "{err}");
    }
    assert!(!stdout(&o).contains('='));
}

#[test]
fn every_strategy_handles_max2() {
    for s in ["auto", "fast", "si", "unif"] {
        let o = sygus(&["--strategy", s, &bench("lia_max2.sl")], None);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("(define-fun max2"));
    }
}
