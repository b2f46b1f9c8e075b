use sserw::harness::{
    run_diagnostics, run_entropy_experiment, run_experiment, run_importance_sampling, run_lln_experiment,
    ExperimentConfig,
};
use sserw::Error;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

#[test]
fn frozen_model_has_no_lln_error() {
    let cfg = config(
        r#"
kind = "lln"
[model]
n = [8, 16]
t_max = 0.1
rates = { kind = "zero" }
u0 = { kind = "constant", value = 1.0 }
[run]
replicas = 3
frames = 4
"#,
    );
    let report = run_lln_experiment(&cfg).unwrap();
    for row in &report.rows {
        for m in &row.metrics {
            assert!(m.mean.abs() < 1e-9, "{} = {}", m.name, m.mean);
            assert_eq!(m.replicas, 3);
        }
    }
}

#[test]
fn symmetric_density_keeps_walker_path_at_zero() {
    let cfg = config(
        r#"
kind = "lln"
[model]
n = [16, 64]
t_max = 0.1
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[run]
replicas = 40
seed = 11
frames = 10
"#,
    );
    let report = run_lln_experiment(&cfg).unwrap();
    for row in &report.rows {
        assert!(row.value("f_T").unwrap().abs() < 1e-12);
    }
    let sup = report.series("walker_sup");
    assert!(sup[1] < sup[0], "{sup:?}");
}

#[test]
fn lln_rejects_tilted_config() {
    let cfg = config(
        r#"
kind = "lln"
[model]
n = [8]
t_max = 0.1
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[tilt]
a = { kind = "constant", value = 0.3 }
[run]
replicas = 1
"#,
    );
    assert!(matches!(run_lln_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn null_tilt_relative_entropy_is_zero() {
    let cfg = config(
        r#"
kind = "entropy"
[model]
n = [8, 16]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.2 }
[tilt]
[run]
replicas = 5
"#,
    );
    let report = run_entropy_experiment(&cfg).unwrap();
    for row in &report.rows {
        assert_eq!(row.value("limit"), Some(0.0));
        assert_eq!(row.metric("relative_entropy").unwrap().mean, 0.0);
        assert_eq!(row.metric("relative_entropy_compensated").unwrap().mean, 0.0);
    }
}

#[test]
fn whole_space_event_has_probability_one() {
    let cfg = config(
        r#"
kind = "importance-sampling"
[model]
n = [8, 16]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[tilt]
[run]
replicas = 20
[event]
density_radius = "inf"
walker_radius = "inf"
"#,
    );
    let report = run_importance_sampling(&cfg).unwrap();
    for row in &report.rows {
        assert_eq!(row.metric("p_is").unwrap().mean, 1.0);
        assert_eq!(row.metric("p_naive").unwrap().mean, 1.0);
        assert_eq!(row.value("rate_is"), Some(0.0));
        assert!(row.value("rate").unwrap().abs() < 1e-9);
    }
    assert!(report.passed(), "{:?}", report.checks);
}

#[test]
fn event_centered_on_lln_path_is_typical() {
    let cfg = config(
        r#"
kind = "importance-sampling"
[model]
n = [16, 64]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.2 }
[tilt]
[run]
replicas = 100
seed = 5
frames = 5
[event]
density_radius = 0.1
walker_radius = 0.3
center = "null"
naive_max_n = 64
"#,
    );
    let report = run_importance_sampling(&cfg).unwrap();
    let p = report.series("p_naive");
    assert!(p[1] >= p[0] && p[1] > 0.9, "{p:?}");
    for r in &report.rows {
        assert!(r.value("rate").unwrap().abs() < 1e-3, "{:?}", r.reference);
    }
}

#[test]
fn diagnostics_with_null_tilt() {
    let cfg = config(
        r#"
kind = "diagnostics"
[model]
n = [8, 16]
t_max = 0.05
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[run]
replicas = 10
frames = 4
[diagnostics]
eps = [0.25]
ells = [2, 3, 4, 5, 6]
"#,
    );
    let report = run_diagnostics(&cfg).unwrap();
    let mart = report.tables.iter().find(|t| t.name == "martingale").unwrap();
    for row in &mart.rows {
        assert_eq!(row[1], 1.0);
        assert_eq!(row[2], 0.0);
    }
    assert!(report.check("ensembles_bound").unwrap().passed);
    assert!(report.check("ensembles_second_moment_exact").unwrap().passed);
    // f = xi(1) xi(2): the gap at ell = 2 is 1/4, at k = 1
    let ens = report.tables.iter().find(|t| t.name == "ensembles").unwrap();
    assert_eq!(ens.rows[0][..2], [2.0, 0.25]);
}

#[test]
fn reports_do_not_depend_on_threads() {
    let base = r#"
kind = "entropy"
[model]
n = [8, 12]
t_max = 0.2
rates = { kind = "intro" }
u0 = { kind = "cosine", mean = 0.5, amplitude = 0.2 }
[tilt]
h = { kind = "cosine", amplitude = 0.1 }
a = { kind = "constant", value = 0.2 }
[run]
replicas = 16
seed = 99
"#;
    let one = config(&format!("{base}threads = 1\n"));
    let two = config(&format!("{base}threads = 3\n"));
    let a = run_experiment(&one).unwrap();
    let b = run_experiment(&two).unwrap();
    assert_eq!(a.rows, b.rows);
    let again = run_experiment(&one).unwrap();
    assert_eq!(a.to_json().unwrap(), again.to_json().unwrap());
}

#[test]
fn report_files_are_written() {
    let cfg = config(
        r#"
kind = "diagnostics"
[model]
n = [8]
t_max = 0.05
rates = { kind = "intro" }
u0 = { kind = "constant", value = 0.5 }
[run]
replicas = 2
frames = 2
[diagnostics]
eps = [0.25]
ells = [2, 3]
"#,
    );
    let report = run_diagnostics(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = report.write_to_dir(dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"report.json".to_string()));
    assert!(names.contains(&"ensembles.csv".to_string()));
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: sserw::harness::ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.fingerprint.config_hash, cfg.hash());
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("n,quantity,mean,stderr,replicas"));
}
