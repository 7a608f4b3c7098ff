//! End-to-end checks of the `dimseis` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dimseis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimseis"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The plane reflection dump shrunk to a quick run.
fn small_config(dir: &Path) -> toml::Table {
    let o = dimseis(&["scenario", "plane-reflection-1d", "--dump"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut table: toml::Table = stdout(&o).parse().unwrap();
    let cells = toml::Value::Array(vec![20.into(), 2.into()]);
    table["domain"].as_table_mut().unwrap().insert("cells".into(), cells);
    table["time"].as_table_mut().unwrap().insert("t_end".into(), 0.02.into());
    table
}

fn write_config(dir: &Path, name: &str, table: &toml::Table) {
    std::fs::write(dir.join(name), toml::to_string(table).unwrap()).unwrap();
}

#[test]
fn dump_prints_every_section() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["plane-reflection-1d", "cavity-2d", "lamb-tilted-2d", "topo-two-layer-2d"] {
        let o = dimseis(&["scenario", name, "--dump"], dir.path());
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let text = stdout(&o);
        for section in ["[domain]", "[discretization]", "[time]", "[geometry", "[output]"] {
            assert!(text.contains(section), "{name} lacks {section}");
        }
    }
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "small.toml", &small_config(dir.path()));
    let o = dimseis(&["run", "small.toml", "--output-dir", "out", "--threads", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("steps to t = 0.02"));
    let out = dir.path().join("out");
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("seismogram_x0.csv").is_file());
    assert!(out.join("snapshot_000000.vtk").is_file());
}

#[test]
fn solver_override_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "small.toml", &small_config(dir.path()));
    let o = dimseis(&["run", "small.toml", "--solver", "rusanov", "--output-dir", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dimseis(&["run", "small.toml", "--solver", "hllem"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn missing_section_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = small_config(dir.path());
    table.remove("geometry");
    write_config(dir.path(), "bad.toml", &table);
    let o = dimseis(&["run", "bad.toml"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("geometry"), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimseis(&["scenario", "sphere-3d"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sphere-3d"), "{}", stderr(&o));
}

#[test]
fn convergence_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimseis(&["convergence", "2", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("order"));
    assert!(lines[1].trim_start().starts_with("25"));
    let order: f64 = lines[2].split_whitespace().last().unwrap().parse().unwrap();
    assert!(order > 2.5, "order {order}");
}
