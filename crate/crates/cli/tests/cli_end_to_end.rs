//! Drives the `fbb` binary end to end through temporary directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fbb_cli::problem_file;
use tempfile::TempDir;

fn fbb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbb")).args(args).output().expect("spawn fbb")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of `key=` in a space-separated summary line.
fn field<'a>(line: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}=");
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no `{key}` in {line}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn gen(dir: &TempDir, kind: &str, dim: usize, seed: u64) -> PathBuf {
    let p = dir.path().join(format!("{kind}-{dim}-{seed}.json"));
    let o = fbb(&["--seed", &seed.to_string(), "gen", "--kind", kind, "-d", &dim.to_string(), "--out", path_str(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    p
}

const ZERO_3: &str = r#"{
  "dim": 3,
  "A": { "kind": "zero" },
  "B": { "kind": "zero" },
  "C": { "kind": "zero" }
}"#;

/// B = 0 with a box for A and an l1 term for C.
const NO_FORWARD: &str = r#"{
  "dim": 2,
  "A": { "kind": "normal-cone-box", "params": { "lo": [-1, -1], "hi": [1, 1] } },
  "B": { "kind": "zero" },
  "C": { "kind": "affine-monotone", "params": { "matrix": [[1, 0.5], [-0.5, 2]], "offset": [-3, 1] } }
}"#;

/// A = 0 with a quadratic forward term and an l1 term for C.
const NO_A: &str = r#"{
  "dim": 2,
  "A": { "kind": "zero" },
  "B": { "kind": "quadratic-gradient", "params": { "matrix": [[2, 0], [0, 1]], "offset": [-1, 0.5] } },
  "C": { "kind": "l1-subdifferential", "params": { "weight": 0.25 } }
}"#;

/// B = Id, so beta = 1.
const IDENTITY_B: &str = r#"{
  "dim": 2,
  "A": { "kind": "normal-cone-box", "params": { "lo": [0, 0], "hi": [1, 1] } },
  "B": { "kind": "scaled-identity", "params": { "scale": 1 } },
  "C": { "kind": "l1-subdifferential", "params": { "weight": 0.1 } }
}"#;

#[test]
fn gen_round_trip_is_stable() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 1, 7);
    let text = fs::read_to_string(&p).unwrap();
    let once = problem_file::parse(&text, 7).unwrap();
    let emitted = problem_file::emit(&once);
    let twice = problem_file::parse(&emitted, 7).unwrap();
    assert_eq!(emitted, problem_file::emit(&twice));
    assert_eq!(text, emitted);
    assert_eq!(once.dim(), 1);
}

#[test]
fn gen_affine_feasibility_stores_a_certificate() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "affine-feasibility", 2, 1);
    let problem = problem_file::load(&p, 1).unwrap();
    assert!(problem.solution_hint().is_some());
}

#[test]
fn gen_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = fs::read(gen(&dir, "monotone-affine", 5, 11)).unwrap();
    let b_dir = TempDir::new().unwrap();
    let b = fs::read(gen(&b_dir, "monotone-affine", 5, 11)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_gen_kind_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = fbb(&["gen", "--kind", "sudoku", "-d", "3", "--out", path_str(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn unknown_operator_kind_in_file_is_named() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", &ZERO_3.replace(r#""C": { "kind": "zero" }"#, r#""C": { "kind": "hexagon" }"#));
    let o = fbb(&["solve", "--problem", path_str(&p)]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("hexagon") && err.contains("C"), "{err}");
    match problem_file::load(&p, 0) {
        Err(fbb_cli::CliError::UnknownKind { slot, kind, .. }) => {
            assert_eq!(slot, "C");
            assert_eq!(kind, "hexagon");
        }
        other => panic!("expected UnknownKind, got {other:?}"),
    }
}

#[test]
fn unknown_top_level_field_is_rejected() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "extra.json", &ZERO_3.replace(r#""dim": 3,"#, r#""dim": 3, "D": 1,"#));
    assert_eq!(code(&fbb(&["solve", "--problem", path_str(&p)])), 3);
}

#[test]
fn declared_beta_is_revalidated() {
    let dir = TempDir::new().unwrap();
    let good = IDENTITY_B.replace(r#""params": { "scale": 1 } }"#, r#""params": { "scale": 1 }, "beta": 1 }"#);
    let p = write(&dir, "good.json", &good);
    assert_eq!(problem_file::load(&p, 0).unwrap().beta().finite(), Some(1.0));

    let bad = IDENTITY_B.replace(r#""params": { "scale": 1 } }"#, r#""params": { "scale": 1 }, "beta": 5 }"#);
    let p = write(&dir, "bad.json", &bad);
    assert!(matches!(problem_file::load(&p, 0), Err(fbb_cli::CliError::BetaRejected { .. })));
    let o = fbb(&["solve", "--problem", path_str(&p)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("beta"), "{}", stderr(&o));
}

#[test]
fn zero_problem_converges_on_the_first_step() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "zero.json", ZERO_3);
    let o = fbb(&["solve", "--problem", path_str(&p), "--gamma", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert_eq!(field(&line, "converged"), "true");
    assert_eq!(field(&line, "iterations"), "1");
}

#[test]
fn box_lasso_solve_reaches_the_certificate() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 20, 3);
    let trace = dir.path().join("trace.csv");
    let o = fbb(&["solve", "--problem", path_str(&p), "--trace", path_str(&trace)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert_eq!(field(&line, "converged"), "true");
    let dist: f64 = field(&line, "dist_to_certificate").parse().unwrap();
    assert!(dist <= 1e-6, "{dist}");

    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("k,res_xy,res_dx,paper_error,phi,wall_ns"));
    let iterations: usize = field(&line, "iterations").parse().unwrap();
    assert_eq!(text.lines().count(), iterations + 1);
}

#[test]
fn unsafe_gamma_needs_the_override() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id.json", IDENTITY_B);
    assert_eq!(code(&fbb(&["solve", "--problem", path_str(&p), "--gamma", "4"])), 2);
    let o = fbb(&["solve", "--problem", path_str(&p), "--gamma", "4", "--allow-unsafe-gamma", "--max-iter", "200"]);
    assert!([0, 1].contains(&code(&o)), "{}", stderr(&o));
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "zero.json", ZERO_3);
    assert_eq!(code(&fbb(&["solve", "--problem", path_str(&p), "--method", "newton"])), 2);
}

fn compare_rows(args: &[&str]) -> Vec<Vec<String>> {
    let o = fbb(args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,gamma,converged,iterations,forward_evals,resolvent_evals,final_res_xy,wall_ns")
    );
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn compare_without_forward_term_matches_dr() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "nob.json", NO_FORWARD);
    let rows = compare_rows(&["compare", "--problem", path_str(&p), "--method", "fbb,dr", "--gamma", "0.5"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][3], rows[1][3], "{rows:?}");
    assert_eq!(rows[0][2], "true");
}

#[test]
fn compare_without_a_matches_rfb() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "noa.json", NO_A);
    let rows = compare_rows(&["compare", "--problem", path_str(&p), "--method", "fbb,rfb", "--gamma", "0.1"]);
    assert_eq!(rows[0][3], rows[1][3], "{rows:?}");
    assert_eq!(rows[0][2], "true");
}

#[test]
fn compare_marks_inapplicable_methods() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 6, 2);
    let rows = compare_rows(&["compare", "--problem", path_str(&p)]);
    let by_name = |m: &str| rows.iter().find(|r| r[0] == m).unwrap().clone();
    for m in ["dr", "rfb", "frb"] {
        assert!(by_name(m)[1..].iter().all(|f| f == "n/a"), "{m}: {:?}", by_name(m));
    }
    for m in ["fbb", "dy"] {
        assert_eq!(by_name(m)[2], "true");
    }
}

#[test]
fn certify_passes_on_zero_problem() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "zero.json", ZERO_3);
    let out = dir.path().join("cert.csv");
    let o = fbb(&["certify", "--problem", path_str(&p), "--gamma", "1", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "verdict"), "pass");
    assert!(fs::read_to_string(&out).unwrap().starts_with("k,phi,rhs_bound,violation\n"));
}

#[test]
fn certify_passes_on_generated_problem() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 8, 4);
    let o = fbb(&["certify", "--problem", path_str(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stderr(&o);
    assert_eq!(field(&line, "verdict"), "pass");
    assert_eq!(field(&line, "in_theory"), "true");
    assert_ne!(field(&line, "bound_xy"), "bound-inapplicable");
}

#[test]
fn certify_beyond_bound_is_out_of_theory() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id.json", IDENTITY_B);
    let o = fbb(&[
        "certify",
        "--problem",
        path_str(&p),
        "--gamma",
        "0.5",
        "--allow-unsafe-gamma",
        "--max-iter",
        "500",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stderr(&o);
    assert_eq!(field(&line, "in_theory"), "false");
    assert_eq!(field(&line, "verdict"), "out-of-theory");
    assert_eq!(field(&line, "bound_xy"), "bound-inapplicable");
}

#[test]
fn frontier_flags_the_bound() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id.json", IDENTITY_B);
    let o = fbb(&["frontier", "--problem", path_str(&p), "--fractions", "0.5,1,10", "--max-iter", "500"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let flags: Vec<&str> = rows.iter().map(|r| r[5]).collect();
    assert_eq!(flags, ["below-bound", "at-bound", "above-bound"]);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 0.4);
    assert_eq!(rows[0][2], "true");
}

#[test]
fn frontier_handles_four_times_beta() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id.json", IDENTITY_B);
    let out = dir.path().join("f.csv");
    let o = fbb(&["frontier", "--problem", path_str(&p), "--gammas", "4", "--max-iter", "300", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4");
    assert_eq!(row[5], "above-bound");
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "monotone-affine", 6, 9);
    let run = |name: &str| {
        let t = dir.path().join(name);
        let o = fbb(&["solve", "--problem", path_str(&p), "--method", "dy", "--trace", path_str(&t)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (fs::read(&t).unwrap(), stdout(&o))
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let cmp = |_: ()| stdout(&fbb(&["compare", "--problem", path_str(&p)]));
    assert_eq!(cmp(()), cmp(()));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = fbb(&["solve", "--problem", "/nonexistent/problem.json"]);
    assert_eq!(code(&o), 3);
    let o = fbb(&["plot", "--trace", "/nonexistent/t.csv", "--out", "/tmp/never.svg"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "broken.json", "{ \"dim\": 2, ");
    assert_eq!(code(&fbb(&["solve", "--problem", path_str(&p)])), 3);
}

#[test]
fn plot_writes_svg() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 5, 0);
    let trace = dir.path().join("t.csv");
    assert_eq!(code(&fbb(&["solve", "--problem", path_str(&p), "--trace", path_str(&trace)])), 0);
    let svg = dir.path().join("t.svg");
    let o = fbb(&["plot", "--trace", path_str(&trace), "--out", path_str(&svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<polyline").count(), 2);
}

#[test]
fn non_convergence_exits_one() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "box-lasso", 10, 5);
    let o = fbb(&["solve", "--problem", path_str(&p), "--max-iter", "2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(field(&stdout(&o), "converged"), "false");
}
