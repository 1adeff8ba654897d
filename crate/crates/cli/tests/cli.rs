use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cr-stokes")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn small_study_prints_a_csv_table() {
    let out = run(&["solve", "--levels", "2", "--base-refinements", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# case = disk2d"));
    assert!(text.contains("h,l2_u,eoc_l2_u,h1_u,eoc_h1_u,l2_p,eoc_l2_p"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count(), 3);
}

#[test]
fn invalid_values_exit_with_code_two() {
    for args in [
        &["solve", "--levels", "0"][..],
        &["solve", "--gamma", "-1"],
        &["solve", "--case", "square"],
        &["oracle", "--case", "torus"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn output_directories_receive_table_levels_and_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let mesh_dir = dir.path().join("meshes");
    let out = run(&[
        "solve",
        "--levels",
        "2",
        "--base-refinements",
        "1",
        "--diagnostics",
        "--out",
        out_dir.to_str().unwrap(),
        "--mesh-out",
        mesh_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let table = fs::read_to_string(out_dir.join("disk2d.csv")).unwrap();
    assert!(table.contains("# diagnostics = true"));
    let levels = fs::read_to_string(out_dir.join("disk2d_levels.csv")).unwrap();
    assert_eq!(levels.lines().filter(|l| !l.starts_with('#')).count(), 3);
    for l in 0..2 {
        let mesh = fs::read_to_string(mesh_dir.join(format!("disk2d_level{l}.mesh"))).unwrap();
        assert!(mesh.starts_with("DIM 2"));
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nlevels = 2\nbase_refinements = 1\ngamma = 4\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--gamma", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# gamma = 3\n"));
    assert!(text.contains("# levels = 2\n"));

    fs::write(&cfg, "levels = two\n").unwrap();
    assert_eq!(run(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("absent.cfg");
    assert_eq!(run(&["solve", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn markdown_format_renders_a_table() {
    let out = run(&["solve", "--levels", "2", "--base-refinements", "1", "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<String> = stdout(&out).lines().filter(|l| l.starts_with('|')).map(String::from).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains("Order"));
}

#[test]
fn oracle_subcommand_reports_small_defects() {
    for args in [&["oracle"][..], &["oracle", "--case", "ball3d", "--pressure-variant", "symmetric", "--points", "200"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = stdout(&out);
        let force: f64 = text
            .lines()
            .find(|l| l.starts_with("max force error"))
            .and_then(|l| l.split_whitespace().last())
            .unwrap()
            .parse()
            .unwrap();
        assert!(force < 1e-6, "{force}");
    }
}
