//! End-to-end runs of the command-line tool.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subrank")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn estimate_writes_grid_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "a,b\n1,3\n2,1\n3,4\n4,2\n");
    let grid = dir.path().join("g.csv");
    let out = run(&["estimate", "-i", &input, "-m", "3", "--output", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&grid).unwrap();
    assert!(text.starts_with("r_1,r_2,weight\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(meta["m"], 3);
    assert_eq!(meta["b"], 4);
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let nan = write(dir.path(), "nan.csv", "1,2\n3,NaN\n");
    assert_eq!(run(&["estimate", "-i", &nan, "-m", "2"]).status.code(), Some(2));
    let small = write(dir.path(), "small.csv", "1,2\n3,4\n");
    assert_eq!(run(&["estimate", "-i", &small, "-m", "5"]).status.code(), Some(2));
    assert_eq!(run(&["generate", "--model", "no_such_model", "-n", "5", "-d", "2"]).status.code(), Some(2));
}

#[test]
fn generate_is_reproducible_from_seed() {
    let args = ["generate", "--model", "polynomial:p=2,coef=0.5", "-n", "20", "-d", "2", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 21);
}

#[test]
fn theory_identities_pass() {
    let out = run(&["theory", "-m", "12", "-d", "3", "--identities"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
