use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_emf-php");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run emf-php")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn sweep_emits_one_row_per_point() {
    let text = stdout(&["sweep", "--param", "lambda_b", "--from", "1e-6", "--to", "1e-3", "--points", "13", "--metric", "ei-p95"]);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "lambda_b,ei_percentile");
    assert_eq!(lines.len(), 14);
    let xs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(xs[0], 1e-6);
    assert_eq!(xs[12], 1e-3);
}

#[test]
fn metadata_describes_the_run_but_not_the_thread_count() {
    let text = stdout(&["coverage-dl", "--threads", "3", "--seed", "11", "--set", "lambda_b=20/km2"]);
    assert!(text.starts_with("# tool: emf-php "));
    assert!(text.contains("# seed: 11\n"));
    assert!(text.contains("# model: lambda_b = 2e-5\n"));
    assert!(!text.contains("threads"));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "location,tau_dl,coverage");
    assert_eq!(rows.len(), 2);
}

#[test]
fn output_is_independent_of_threads() {
    let args = ["sweep", "--param", "hole_radius", "--from", "0", "--to", "200", "--points", "5", "--metric", "dl-coverage"];
    let one = stdout(&[&args[..], &["--threads", "1"]].concat());
    let four = stdout(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn small_validation_is_byte_identical_across_thread_counts() {
    let base = ["mc-validate", "--realizations", "400", "--ks-points", "8", "--seed", "5"];
    let a = run(&[&base[..], &["--threads", "1"]].concat());
    let b = run(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    assert!(matches!(a.status.code(), Some(0) | Some(2)));
    assert!(String::from_utf8_lossy(&a.stderr).contains("retention"));
}

#[test]
fn figure_two_has_the_radius_grid() {
    let text = stdout(&["figure", "2"]);
    assert!(text.contains("# x_axis: R (m)"));
    let lines = data_lines(&text);
    assert_eq!(lines[0], "R,percentile_in,percentile_out");
    let radii: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(radii, vec![0.0, 50.0, 100.0, 150.0, 200.0, 250.0]);
    // Larger holes keep the serving station further from a user inside one.
    let inside: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(inside.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn config_file_and_overrides_apply_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.cfg");
    std::fs::write(&path, "scenario = typical\nhole_radius = 120 # metres\n").unwrap();
    let p = path.to_str().unwrap();
    let text = stdout(&["coverage-dl", "--config", p, "--set", "hole_radius=80"]);
    assert!(text.contains("# model: hole_radius = 8e1\n"));
    assert!(text.contains("# model: beta = 4e0\n"));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let out = run(&["xcom", "--set", "lambda_b=1e-4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let x: f64 = data_lines(&text)[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((x - 7.5).abs() < 1.0, "{x}");
}

#[test]
fn cdf_query_and_components() {
    let text = stdout(&["ei", "--component", "ul", "--w", "1e-5,1e-3,1"]);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "level,cdf");
    let f: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(f[2], 1.0);
}

#[test]
fn usage_and_numeric_errors_exit_nonzero() {
    assert!(!run(&["coverage-dl", "--bogus"]).status.success());
    assert!(!run(&["frobnicate"]).status.success());
    let bad = run(&["coverage-dl", "--set", "alpha=1.5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
    assert!(!run(&["figure", "15"]).status.success());
    assert!(!run(&["sweep", "--param", "nope", "--from", "1", "--to", "2", "--metric", "xcom"]).status.success());
}
