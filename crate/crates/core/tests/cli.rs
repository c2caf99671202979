use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn tclkraus(args: &[&str], out_dir: &Path, scenario: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tclkraus"))
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out_dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn passing_scenarios_exit_zero_and_write_artifacts() {
    for name in ["zero_coupling", "markov_limit"] {
        let dir = tempfile::tempdir().unwrap();
        let o = tclkraus(&[], dir.path(), &scenario(name));
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.contains(name), "{stdout}");
        for file in ["report.json", "report.txt", "tcl2.csv", "unitary.csv"] {
            assert!(dir.path().join(file).exists(), "{name}: missing {file}");
        }
    }
}

#[test]
fn quiet_suppresses_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = tclkraus(&["--quiet"], dir.path(), &scenario("markov_limit"));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn only_writes_selected_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = tclkraus(&["--only", "tcl2,lindblad", "--quiet"], dir.path(), &scenario("markov_limit"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("lindblad.csv").exists());
    assert!(!dir.path().join("kraus.csv").exists());

    let o = tclkraus(&["--only", "bogus"], dir.path(), &scenario("markov_limit"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn failing_gate_exits_one_and_names_metric() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{
            "name": "strict",
            "system": {"hamiltonian": "qubit_sigmaz(1.0)"},
            "generators": ["sigma_z"],
            "bath": {"model": "markovian", "gamma": 0.4},
            "time_grid": {"t_max": 2.0, "n_points": 5},
            "initial_state": "plus",
            "runs": ["lindblad"],
            "gates": [{"metric": "lindblad_vs_unitary", "max": 1e-6}]
        }"#,
    )
    .unwrap();
    let o = tclkraus(&["--quiet"], &dir.path().join("out"), &path);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gate failed: lindblad_vs_unitary"), "{}", stderr(&o));
}

#[test]
fn malformed_scenarios_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.json", r#"{"name": "x", "colour": 1}"#, "colour"),
        ("syntax.json", "{\n  \"name\": \"x\",\n  \"system\": [\n", "line"),
        (
            "type.json",
            r#"{"name": "x", "system": {"hamiltonian": "qubit_sigmaz(1.0)"}, "generators": ["sigma_z"],
                "bath": {"model": "markovian", "gamma": 0.4}, "time_grid": {"t_max": "long", "n_points": 5},
                "initial_state": "plus", "runs": ["tcl2"]}"#,
            "time_grid.t_max",
        ),
    ];
    for (file, text, needle) in cases {
        let path = dir.path().join(file);
        std::fs::write(&path, text).unwrap();
        let o = tclkraus(&[], &dir.path().join("out"), &path);
        assert_eq!(o.status.code(), Some(2), "{file}");
        assert!(stderr(&o).contains(needle), "{file}: {}", stderr(&o));
    }
}
