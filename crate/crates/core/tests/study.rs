use cr_stokes::study::*;
use cr_stokes::{Error, SmoothDomain};

fn small(extra: &[(&str, &str)]) -> RunConfig {
    let mut entries = vec![("case", "disk2d"), ("levels", "2"), ("base_refinements", "1")];
    entries.extend_from_slice(extra);
    RunConfig::from_entries(entries).unwrap()
}

#[test]
fn csv_is_byte_reproducible() {
    let cfg = small(&[]);
    let a = run_study(&cfg).unwrap();
    let b = run_study(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.diagnostics_csv(), b.diagnostics_csv());
}

#[test]
fn header_echoes_every_parameter() {
    let cfg = small(&[("gamma", "3.5"), ("seed", "11")]);
    let csv = run_study(&cfg).unwrap().to_csv();
    for key in [
        "case", "levels", "gamma", "eps_coef", "eps_exp", "nu", "base_refinements", "quad_degree", "pressure_variant",
        "format", "diagnostics", "seed",
    ] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("# {key} = "))), "{key} missing");
    }
    assert!(csv.contains("# gamma = 3.5\n") && csv.contains("# seed = 11\n"));
    // the echo alone must rebuild the configuration
    assert_eq!(RunConfig::parse(&csv.lines().filter_map(|l| l.strip_prefix('#')).collect::<Vec<_>>().join("\n")).unwrap(), cfg);
}

#[test]
fn csv_layout_mirrors_the_tables() {
    let csv = run_study(&small(&[])).unwrap().to_csv();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "h,l2_u,eoc_l2_u,h1_u,eoc_h1_u,l2_p,eoc_l2_p");
    assert_eq!(rows.len(), 3);
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(first.len(), 7);
    assert!(first[2].is_empty() && first[4].is_empty() && first[6].is_empty());
    let second: Vec<&str> = rows[2].split(',').collect();
    assert!(second.iter().all(|c| !c.is_empty()));
    let h: Vec<f64> = [first[0], second[0]].iter().map(|s| s.parse().unwrap()).collect();
    assert!(h[1] < h[0]);
}

#[test]
fn single_level_has_empty_order_cells() {
    let study = run_study(&small(&[("levels", "1")])).unwrap();
    let csv = study.to_csv();
    let row = csv.lines().last().unwrap();
    assert_eq!(row.matches(",,").count() + row.ends_with(',') as usize, 3);
    assert!(study.to_markdown().lines().last().unwrap().ends_with("|  |"));
}

#[test]
fn markdown_has_the_table_shape() {
    let md = run_study(&small(&[("format", "markdown")])).unwrap().render();
    let table: Vec<&str> = md.lines().filter(|l| l.starts_with('|')).collect();
    assert_eq!(table.len(), 4);
    assert!(table[0].contains("Order"));
    assert!(table.iter().all(|l| l.matches('|').count() == 8));
}

#[test]
fn diagnostics_are_filled_when_requested() {
    let study = run_study(&small(&[("diagnostics", "true")])).unwrap();
    for l in &study.levels {
        let d = l.diagnostics.unwrap();
        assert!(d.korn > 0.0 && d.inf_sup > 0.0 && d.jump_ratio > 0.0 && d.lift_stability > 0.0);
        assert!(d.lift_exactness <= 1e-12);
        assert_eq!(d.skin_ratio, 0.0);
    }
    let csv = study.diagnostics_csv();
    let last = csv.lines().last().unwrap();
    assert_eq!(last.split(',').count(), 22);
    assert!(!last.ends_with(','));
}

#[test]
fn invalid_configurations_fail_in_the_config_stage() {
    for (k, v) in [("levels", "0"), ("gamma", "-1"), ("eps_coef", "0"), ("nu", "nan"), ("quad_degree", "99")] {
        let mut cfg = RunConfig::defaults(SmoothDomain::Disk2d);
        cfg.set(k, v).unwrap();
        let err = run_study(&cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Config, "{k}");
        assert!(matches!(err.source, Error::Config(_)));
    }
    assert!(RunConfig::from_entries([("colour", "red")]).is_err());
    assert!(RunConfig::from_entries([("case", "square")]).is_err());
}

#[test]
fn eps_follows_the_rule() {
    let cfg = small(&[("eps_coef", "0.5"), ("eps_exp", "1.5")]);
    assert!((cfg.eps(0.04) - 0.5 * 0.008).abs() < 1e-15);
    let study = run_study(&cfg).unwrap();
    for l in &study.levels {
        assert!((l.eps - cfg.eps(l.record.h)).abs() < 1e-15);
    }
}
