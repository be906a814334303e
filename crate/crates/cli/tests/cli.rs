use std::process::Command;

use vecnorm::term::{ac_equal, AcSet};
use vecnorm::{parse_program, vector_system, Rewriter, ScalarSystem};
use vecnorm_cli::{run, EXIT_FAIL, EXIT_OK, EXIT_USAGE};

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn vecnorm(args: &[&str], stdin: &str) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("vecnorm").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn rules(name: &str) -> String {
    format!("file:{}/../core/tests/data/{name}.rules", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn normalizes_a_term() {
    let o = vecnorm(&["normalize", "vars x y:E; (3.x + 4.y) + 2.x"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.trim(), "5.x + 4.y");
}

#[test]
fn reads_the_term_from_stdin() {
    let o = vecnorm(&["normalize", "--scalars", "f2"], "vars x:E; x + x\n");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.trim(), "0E");
}

#[test]
fn normalizes_tensors() {
    let o = vecnorm(&["normalize", "--system", "rprime", "vars x:E y:F; (2.x) @ (3.y)"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.trim(), "6.(x @ y)");
}

#[test]
fn printed_normal_form_reparses_to_the_library_result() {
    let src = "vars x y:E; 2.(x + 1/2.y) + (y + 0E) + 1.(3.x)";
    let o = vecnorm(&["normalize", src], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let r = vector_system("r").unwrap();
    let q = ScalarSystem::builtin("q").unwrap();
    let prog = parse_program(src, &r.signature).unwrap();
    let expected = Rewriter::new(&r, &q).normal_form(&prog.term).unwrap();
    let decl = "vars x y:E; ";
    let printed = parse_program(&format!("{decl}{}", o.out.trim()), &r.signature).unwrap();
    assert!(ac_equal(&printed.term, &expected, &AcSet::standard()).unwrap());
}

#[test]
fn random_strategy_is_deterministic_per_seed() {
    let args = ["trace", "--strategy", "random", "--seed", "9", "vars x y:E; 2.(x + y) + 3.(y + x)"];
    let a = vecnorm(&args, "");
    let b = vecnorm(&args, "");
    assert_eq!(a.code, EXIT_OK, "{}", a.err);
    assert_eq!(a.out, b.out);
}

#[test]
fn lists_one_step_reducts() {
    let o = vecnorm(&["reducts", "vars x:E; 1.x"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.lines().count(), 1);
}

#[test]
fn evaluates_and_decomposes() {
    let o = vecnorm(&["eval", "--order", "x,y", "vars x y:E; 2.x + y"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let d = vecnorm(&["decompose", "--order", "x,y", "vars x y:E; x + (x + y)"], "");
    assert_eq!(d.code, EXIT_OK, "{}", d.err);
    assert_eq!(d.out.trim(), "2, 1");
}

#[test]
fn generated_terms_are_reproducible_and_parse() {
    let a = vecnorm(&["gen", "--seed", "5", "--size", "15"], "");
    let b = vecnorm(&["gen", "--seed", "5", "--size", "15"], "");
    assert_eq!(a.code, EXIT_OK, "{}", a.err);
    assert_eq!(a.out, b.out);
    let n = vecnorm(&["normalize", a.out.trim()], "");
    assert_eq!(n.code, EXIT_OK, "{}", n.err);
}

#[test]
fn key_lemma_suite_passes() {
    let o = vecnorm(&["check", "--suite", "keylemma", "--samples", "20", "--format", "summary"], "");
    assert_eq!(o.code, EXIT_OK, "{}", o.out);
    assert!(o.out.lines().all(|l| l.split('\t').nth(1) == Some("pass")), "{}", o.out);
}

#[test]
fn user_scalar_files_are_gated() {
    let ok = vecnorm(&["normalize", "--scalars", &rules("f2"), "vars x:E; x + x"], "");
    assert_eq!(ok.code, EXIT_OK, "{}", ok.err);
    assert_eq!(ok.out.trim(), "0E");
    let broken = vecnorm(&["normalize", "--scalars", &rules("broken"), "vars x:E; x"], "");
    assert_eq!(broken.code, EXIT_FAIL);
    assert!(!broken.err.is_empty());
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(vecnorm(&["normalize", "vars x:E; x +"], "").code, EXIT_USAGE);
    assert_eq!(vecnorm(&["normalize", "--scalars", "z7", "vars x:E; x"], "").code, EXIT_USAGE);
    assert_eq!(vecnorm(&["check", "--suite", "nope"], "").code, EXIT_USAGE);
    assert_eq!(vecnorm(&["frobnicate"], "").code, EXIT_USAGE);
    assert_eq!(vecnorm(&["--help"], "").code, EXIT_OK);
}

#[test]
fn exhausted_fuel_fails() {
    let o = vecnorm(&["normalize", "--fuel", "1", "vars x:E; 1.(1.x)"], "");
    assert_eq!(o.code, EXIT_FAIL);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_vecnorm");
    let ok = Command::new(bin).args(["normalize", "vars x:E; 1.x"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "x");
    let bad = Command::new(bin).args(["normalize", "vars x:E; ("]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
