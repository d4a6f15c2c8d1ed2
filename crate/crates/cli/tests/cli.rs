use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cheapgame");

fn example_spec() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/pursuit_evasion.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_spec(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("game.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_example_spec() {
    let spec = example_spec();
    let o = run(&["validate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("A2 satisfied; all invariants pass"));
}

#[test]
fn missing_spec_is_rejected() {
    let o = run(&["sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--spec"));
}

#[test]
fn zero_epsilon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = example_spec();
    let o = run(&[
        "solve-exact",
        "--spec",
        spec.to_str().unwrap(),
        "--eps",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epsilon must be positive"), "{}", stderr(&o));
}

#[test]
fn parse_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example_spec()).unwrap().replace("m1 = 1", "m1 = [");
    let p = write_spec(dir.path(), &text);
    let o = run(&["validate", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn a2_violation_refuses_asymptotics() {
    let dir = tempfile::tempdir().unwrap();
    // a nonzero last column of A2 couples x to the singular channel
    let text = std::fs::read_to_string(example_spec())
        .unwrap()
        .replace("A2 = [[1.0, 0.0]]", "A2 = [[1.0, 1.0]]");
    let p = write_spec(dir.path(), &text);
    let o = run(&["solve-asymptotic", "--spec", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("A2"), "{}", stderr(&o));
}

#[test]
fn escaping_outer_problem_reports_a4() {
    let dir = tempfile::tempdir().unwrap();
    // a strong maximizer on the slow state drives K1o to a finite escape
    let text = std::fs::read_to_string(example_spec())
        .unwrap()
        .replace("G = [[5.0, 0.0], [0.0, 4.0]]", "G = [[0.05, 0.0], [0.0, 4.0]]");
    let p = write_spec(dir.path(), &text);
    let o = run(&["solve-asymptotic", "--spec", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("A4"), "{}", stderr(&o));
}

#[test]
fn sweep_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = example_spec();
    let o = run(&["sweep", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["table_value.csv", "table_minimizer.csv", "table_maximizer.csv", "block_errors.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 4, "{name}");
    }
    let table = std::fs::read_to_string(dir.path().join("table_value.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().starts_with("0.1,1.418"), "{table}");
}

#[test]
fn simulate_writes_both_laws() {
    let dir = tempfile::tempdir().unwrap();
    let spec = example_spec();
    let o = run(&[
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--eps",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("trajectory_exact_eps0.1.csv").exists());
    assert!(dir.path().join("trajectory_asymptotic_eps0.1.csv").exists());
    let header = std::fs::read_to_string(dir.path().join("trajectory_exact_eps0.1.csv")).unwrap();
    assert!(header.starts_with("t,z_1,z_2,z_3,u_1,u_2,v_1,v_2,running_cost"));
}

#[test]
fn rk4_solve_exact_matches_value() {
    let dir = tempfile::tempdir().unwrap();
    let spec = example_spec();
    let o = run(&[
        "solve-exact",
        "--spec",
        spec.to_str().unwrap(),
        "--eps",
        "0.1",
        "--method",
        "rk4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("J* = 1.418"), "{}", stdout(&o));
}

/// The example reproduces every reference value except the first table's
/// approximate-value column, so it exits with the golden-check status.
#[test]
fn example_is_reproducible_and_names_failing_check() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run(&["example", "--out", a.path().to_str().unwrap()]);
    let ob = run(&["example", "--out", b.path().to_str().unwrap()]);
    assert_eq!(oa.status.code(), Some(3), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(3));
    assert!(stderr(&oa).contains("golden check failed: table1 eps=0.2 J_approx"), "{}", stderr(&oa));

    let checks = std::fs::read_to_string(a.path().join("checks.csv")).unwrap();
    for line in checks.lines().skip(1) {
        let failing = line.ends_with("FAIL");
        let table1_value = line.starts_with("table1") && !line.contains("J_star");
        assert!(!failing || table1_value, "{line}");
    }
    assert!(checks.contains("K6o(1.5) = 0,0.000000e0,0.000000e0"));

    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for expected in [
        "table1.csv",
        "table2.csv",
        "table3.csv",
        "outer_comparison.csv",
        "fig1_u1.svg",
        "fig2_v2.svg",
        "trajectory_exact_eps0.05.csv",
        "trajectory_asymptotic_eps0.2.csv",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    for n in &names {
        let x = std::fs::read(a.path().join(n)).unwrap();
        let y = std::fs::read(b.path().join(n)).unwrap();
        assert!(x == y, "{n} differs between runs");
    }
}

#[test]
fn example_rejects_spec_flag() {
    let spec = example_spec();
    let o = run(&["example", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
