use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sib::io::{BodySpec, InstanceFile, ResultFile};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sib")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const PAIR: &str = r#"{"dimension": 2, "epsilon": 0.05, "bodies": [
    {"type": "polytope", "points": [[0, 0]]},
    {"type": "polytope", "points": [[2, 0]]}]}"#;

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("Exit codes"));
    assert_eq!(run(&["solve", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_flags_exit_one() {
    let o = run(&["solve", "--nope", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
    assert_eq!(run(&["gen", "cube"]).status.code(), Some(1));
}

#[test]
fn missing_file_exits_one() {
    let o = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn non_pd_sigma_is_rejected_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "e.json",
        r#"{"dimension": 2, "epsilon": 0.1, "bodies": [{"type": "ellipsoid", "center": [0, 0], "sigma": [[1, 2], [2, 1]]}]}"#,
    );
    let o = run(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bodies[0].sigma"), "{}", stderr(&o));
}

#[test]
fn generated_singletons_and_reduced_weights_are_valid() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("p.json");
    assert_eq!(
        run(&["gen", "polytope", "--n", "4", "--d", "2", "--m", "1", "--out", single.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_eq!(run(&["validate", single.to_str().unwrap()]).status.code(), Some(0));
    let file = InstanceFile::parse(&std::fs::read_to_string(&single).unwrap()).unwrap();
    assert!(file.bodies.iter().all(|b| matches!(b, BodySpec::Polytope { points } if points.len() == 1)));

    let reduced = dir.path().join("r.json");
    assert_eq!(
        run(&["gen", "reduced_polytope", "--n", "20", "--m", "5", "--seed", "3", "--out", reduced.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let file = InstanceFile::parse(&std::fs::read_to_string(&reduced).unwrap()).unwrap();
    for b in &file.bodies {
        let BodySpec::ReducedPolytope { points, nu } = b else { panic!("wrong kind") };
        assert!(*nu >= 1.0 / points.len() as f64 && *nu <= 1.0);
    }
}

#[test]
fn flags_override_file_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.json", PAIR);
    let out = dir.path().join("result.json");
    let o = run(&["solve", p.to_str().unwrap(), "--mode", "soft", "--C", "0.3", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let result = ResultFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(result.converged);
    // C·n < 1: paying slack beats any radius; the optimum is C·2 = 0.6.
    let objective = result.objective.unwrap();
    assert!((0.6..=0.6 * 1.05).contains(&objective), "{objective}");
    assert!(result.bracket_steps.is_some() && result.radius_halvings.is_none());
}

#[test]
fn soft_mode_without_c_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.json", PAIR);
    let o = run(&["solve", p.to_str().unwrap(), "--mode", "soft"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C:"));
}

#[test]
fn hard_result_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.json", PAIR);
    let o = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let result = ResultFile::parse(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(result.witnesses, vec![vec![0.0, 0.0], vec![2.0, 0.0]]);
    assert!(result.nu_x.unwrap() >= result.nu_y.unwrap());
    assert!(result.radius_halvings.is_some() && result.slacks.is_none());
}
