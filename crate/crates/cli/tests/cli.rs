use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn solidhull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solidhull")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn search_qgevrey(dir: &Path) -> String {
    let cert = dir.join("cert.json");
    let o = solidhull(&[
        "lusky-search",
        "--family",
        "qgevrey:2",
        "--horizon",
        "200",
        "--b",
        "2.72",
        "--K",
        "22026",
        "--a1",
        "1",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    cert.to_str().unwrap().to_string()
}

#[test]
fn qgevrey_search_gives_gap_two() {
    let dir = tempfile::tempdir().unwrap();
    let cert = search_qgevrey(dir.path());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let a: Vec<u64> = v["a"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(a[0], 1);
    assert!(a.len() > 50);
    assert!(a.windows(2).all(|w| w[1] - w[0] == 2));
}

#[test]
fn certificate_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = search_qgevrey(dir.path());
    let o = solidhull(&["verify", "--family", "qgevrey:2", "--horizon", "200", "--cert", &cert]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("ok,first_failure,rows_match,max_gap,gaps_bounded,solid"));
    assert!(lines.next().unwrap().starts_with("true,,true,2,"));
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cert = search_qgevrey(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    // a gap of one has logB = 0 < logb
    v["a"][1] = serde_json::json!(2);
    v["rows"][0] = serde_json::json!([0.0, 0.0]);
    fs::write(&cert, v.to_string()).unwrap();
    let o = solidhull(&["verify", "--family", "qgevrey:2", "--horizon", "200", "--cert", &cert]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("ok,"));
}

#[test]
fn search_failure_prints_trace_and_exits_zero() {
    let o = solidhull(&["lusky-search", "--family", "dyadic:3", "--horizon", "4096", "--b", "2.72", "--K", "22026"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("j,a_j,gap,logA,logB,violation"));
    assert_eq!(out.lines().count(), 1 + 63);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&solidhull(&["ab", "--family", "bogus:1", "--k", "1", "--l", "2"])), 2);
    assert_eq!(code(&solidhull(&["no-such-command"])), 2);
    assert_eq!(code(&solidhull(&["ab", "--family", "gevrey:1", "--seq", "x.json", "--k", "1", "--l", "2"])), 2);
    assert_eq!(code(&solidhull(&["--tol", "0", "family", "--family", "gevrey:1"])), 2);
}

#[test]
fn numerical_errors_exit_one() {
    assert_eq!(code(&solidhull(&["ab", "--family", "gevrey:1", "--horizon", "50", "--k", "5", "--l", "3"])), 1);
    assert_eq!(code(&solidhull(&["ab", "--family", "gevrey:1", "--horizon", "10", "--k", "5", "--l", "10"])), 1);
}

#[test]
fn missing_input_file_exits_one() {
    let o = solidhull(&["family", "--seq", "/nonexistent/seq.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 5] = [
        (&["ab", "--family", "qgevrey:2", "--horizon", "50", "--k", "3", "--l", "5"], "logA,logB"),
        (&["family", "--family", "gevrey:1", "--horizon", "5", "--t", "1,2"], "t,omega,logh,sigma"),
        (
            &["props", "--family", "gevrey:2", "--horizon", "200"],
            "property,statistic,verdict,witness_index,witness_value",
        ),
        (&["disk-geom", "--family", "gevrey:1", "--horizon", "8", "--c", "2"], "p,k_p,r,logv"),
        (
            &["ramify-check", "--family", "gevrey:1", "--horizon", "100", "--r", "2", "--logt", "0,1,2"],
            "logt,omega_m,omega_p,ratio",
        ),
    ];
    for (args, header) in cases {
        let o = solidhull(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).lines().next(), Some(header), "{args:?}");
    }
}

#[test]
fn ab_matches_closed_form() {
    let o = solidhull(&["ab", "--family", "qgevrey:2", "--horizon", "50", "--k", "3", "--l", "5"]);
    let out = stdout(&o);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let ln2 = std::f64::consts::LN_2;
    assert!((row[0] - 6.0 * ln2).abs() < 1e-12);
    assert!((row[1] - 2.0 * ln2).abs() < 1e-12);
}

#[test]
fn sequence_json_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&solidhull(&["family", "--family", "harmonic:1", "--horizon", "300", "--format", "json", "--out", p])),
        0
    );
    let direct = solidhull(&["ab", "--family", "harmonic:1", "--horizon", "300", "--k", "36", "--l", "49"]);
    let loaded = solidhull(&["ab", "--seq", p, "--k", "36", "--l", "49"]);
    assert_eq!(stdout(&direct), stdout(&loaded));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["repro", "hull-core", "--seed", "7"];
    let (a, b) = (solidhull(&args), solidhull(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let json = ["--format", "json", "props", "--family", "steps:2,2", "--horizon", "4096"];
    assert_eq!(solidhull(&json).stdout, solidhull(&json).stdout);
}

#[test]
fn hull_and_core_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cert = search_qgevrey(dir.path());
    let coeffs = dir.path().join("b.json");
    let logabs: Vec<f64> = (0..200).map(|n| -0.5 * n as f64).collect();
    fs::write(&coeffs, serde_json::json!({ "logabs": logabs }).to_string()).unwrap();
    let base = ["--family", "qgevrey:2", "--horizon", "200", "--cert", &cert, "--coeffs", coeffs.to_str().unwrap()];
    for cmd in ["hull", "core"] {
        let mut args = vec![cmd];
        args.extend(base);
        let o = solidhull(&args);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().count() > 10, "{cmd}");
    }
    // the entire-case certificate is not a disc certificate for the same sequence
    let mut args = vec!["disk-hull"];
    args.extend(base);
    let o = solidhull(&args);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not verify"));
}

#[test]
fn prop_ajexample_linear_gaps() {
    let o = solidhull(&["repro", "prop-ajexample", "--gaps", "linear", "--C", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("j,a_j,a_j1,logA,logB"));
    let anchors: Vec<usize> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(&anchors[..4], &[1, 4, 8, 13]);
    assert_eq!(code(&solidhull(&["repro", "prop-ajexample", "--gaps", "linear", "--C", "2"])), 1);
}

#[test]
fn every_repro_scenario_passes() {
    for s in [
        "qgevrey-closed-form",
        "dual-form",
        "harmonic-bounds",
        "qgevrey-search",
        "counterexamples",
        "prop-ajexample",
        "ramification",
        "stretch",
        "conjugate",
        "disk-dual-path",
        "hull-core",
        "necessary",
        "properties",
    ] {
        let o = solidhull(&["repro", s]);
        assert_eq!(code(&o), 0, "{s}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().count() > 1, "{s}");
    }
}

#[test]
fn convert_round_trip_and_range_validation() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let g = grid.to_str().unwrap();
    let o = solidhull(&["convert", "--family", "gevrey:1", "--horizon", "500", "--range", "-1,5,400", "--out", g]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = solidhull(&["convert", "--grid", g, "--horizon", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lambda: Vec<f64> = v["lambda"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (p, l) in lambda.iter().enumerate() {
        assert!((l - ((p + 1) as f64).ln()).abs() < 1e-6, "p = {}: {l}", p + 1);
    }
    let sw = solidhull(&["sandwich", "--grid", g, "--family", "gevrey:1", "--horizon", "500"]);
    assert_eq!(code(&sw), 0);
    for bad in ["-1,5", "5,-1,10", "0,1,2.5"] {
        assert_eq!(code(&solidhull(&["convert", "--family", "gevrey:1", "--range", bad])), 2, "{bad}");
    }
}
