mod common;

use common::{assert_valid, run, stdout};

#[test]
fn exponents_examples() {
    let o = run(&["exponents", "--Q", "4/3", "--p", "2"]);
    assert!(o.status.success());
    let v = assert_valid("exponents", &stdout(&o));
    assert!((v["alpha_bar"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["p1"].as_f64().unwrap() - 3.0).abs() < 1e-12);

    let o = run(&["exponents", "--q", "1", "--p", "2"]);
    let v = assert_valid("exponents", &stdout(&o));
    for key in ["alpha_lower", "alpha_bar", "beta_lower", "beta_bar", "wiener_exponent"] {
        assert_eq!(v[key].as_f64().unwrap(), 1.0, "{key}");
    }
    assert!(v["p1"].is_null());
}

#[test]
fn validation_failures_exit_2() {
    let o = run(&["exponents", "--Q", "0.5", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q >= 1"));

    for args in [
        vec!["exponents", "--Q", "2", "--p", "1"],
        vec!["sharpness", "--Q", "2", "--p", "3", "--n", "3"],
        vec!["verify-power", "--alpha", "0.2", "--p", "2"],
        vec!["capacity", "--p", "2", "--n", "3"],
        vec!["wiener", "--Q", "2", "--p", "2", "--profile", "ball"],
        vec!["exponents", "--Q", "1/0", "--p", "2"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unreadable_profile_exits_4() {
    let o = run(&[
        "wiener",
        "--Q",
        "2",
        "--p",
        "2",
        "--profile",
        "csv",
        "--profile-file",
        "/nonexistent/profile.csv",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn wiener_examples() {
    let verdict = |extra: &[&str]| {
        let mut args = vec!["wiener", "--Q", "4/3", "--p", "2", "--K", "2000"];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_valid("wiener", &stdout(&o))["verdict"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(verdict(&["--profile", "ball", "--eps", "0.3"]), "DIVERGENT");
    assert_eq!(
        verdict(&["--profile", "power-decay", "--a", "1", "--eps", "0"]),
        "CONVERGENT"
    );
    assert_eq!(
        verdict(&["--profile", "power-decay", "--a", "0.25", "--eps", "0"]),
        "DIVERGENT"
    );
}

#[test]
fn wiener_writes_report_and_partial_sums() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let o = run(&[
        "--output",
        path.to_str().unwrap(),
        "wiener",
        "--Q",
        "2",
        "--p",
        "2",
        "--eps",
        "0.1",
        "--K",
        "50",
        "--profile",
        "power-decay",
        "--a",
        "2",
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_valid("wiener", &std::fs::read_to_string(&path).unwrap());
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "K,S_K");
    assert_eq!(lines.len(), 51);
    assert!(!csv.contains('\r'));
}

#[test]
fn profile_csv_feeds_wiener() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let o = run(&[
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
        "capacity",
        "--p",
        "2",
        "--profile",
        "power-decay",
        "--a",
        "0.5",
        "--count",
        "400",
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("j,r_j,kappa_j\n0,1"));
    let o = run(&[
        "wiener",
        "--Q",
        "4/3",
        "--p",
        "2",
        "--profile",
        "csv",
        "--profile-file",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v = assert_valid("wiener", &stdout(&o));
    assert_eq!(v["profile"]["terms"], 400);
    // kappa^2 ~ j^{-1}: right at the boundary of the band
    assert_ne!(v["verdict"], "CONVERGENT");
}

#[test]
fn capacity_condenser_and_profile_json() {
    let o = run(&[
        "capacity", "--n", "3", "--p", "2", "--rho", "1", "--r", "2", "--grid", "10000",
    ]);
    let v = assert_valid("capacity", &stdout(&o));
    let cap = v["capacity"].as_f64().unwrap();
    assert!((cap - 8.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(v["rel_err"].as_f64().unwrap() < 5e-3);

    let o = run(&["capacity", "--p", "2", "--profile", "ball", "--count", "5"]);
    let v = assert_valid("capacity-profile", &stdout(&o));
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn tolerance_flag_warns() {
    let o = run(&[
        "--tolerance",
        "1e-20",
        "capacity",
        "--n",
        "3",
        "--p",
        "2",
        "--rho",
        "0.5",
        "--r",
        "1",
        "--grid",
        "200",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the tolerance"));
    let o = run(&[
        "capacity", "--n", "3", "--p", "2", "--rho", "0.5", "--r", "1", "--grid", "200",
    ]);
    assert!(o.stderr.is_empty());
}

#[test]
fn verify_power_table() {
    let o = run(&["--format", "csv", "verify-power", "--alpha", "1,2,0.8", "--p", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,p,Q_formula,Q_bruteforce,abs_err"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r[4] < 1e-3);
    }
    assert!((rows[1][2] - 4.0 / 3.0).abs() < 1e-12);

    let o = run(&["verify-power", "--alpha", "0.75,3", "--p", "3", "--grid", "100"]);
    assert_valid("verify-power", &stdout(&o));
}

#[test]
fn sharpness_canonical_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sharp.csv");
    let o = run(&[
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
        "sharpness",
        "--Q",
        "4/3",
        "--p",
        "2",
        "--n",
        "3",
        "--delta",
        "1",
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("eps,rho_eps,inf_u,cap_term\n"));
    assert_eq!(csv.lines().count(), 41);
    let v = assert_valid(
        "sharpness",
        &std::fs::read_to_string(dir.path().join("sharp.json")).unwrap(),
    );
    assert!(v["rel_err"].as_f64().unwrap() < 0.02);
    assert_eq!(v["iterated"]["verdict"], "FALSIFIED");

    let o = run(&["sharpness", "--Q", "2", "--p", "2.5", "--n", "4"]);
    let v = assert_valid("sharpness", &stdout(&o));
    assert!(v["iterated"].is_null());
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .flat_map(|i| {
            let base = dir.path().join(format!("s{i}.json"));
            let w = dir.path().join(format!("w{i}.json"));
            let a = run(&[
                "--output",
                base.to_str().unwrap(),
                "sharpness",
                "--Q",
                "16/7",
                "--p",
                "2",
                "--n",
                "4",
            ]);
            let b = run(&[
                "--output",
                w.to_str().unwrap(),
                "wiener",
                "--Q",
                "2",
                "--p",
                "1.5",
                "--K",
                "30000",
                "--profile",
                "power-decay",
                "--a",
                "0.3",
            ]);
            assert!(a.status.success() && b.status.success());
            [
                base.clone(),
                base.with_extension("csv"),
                w.clone(),
                w.with_extension("csv"),
            ]
            .into_iter()
            .map(|p| std::fs::read(p).unwrap())
            .collect::<Vec<_>>()
        })
        .collect();
    let (first, second) = runs.split_at(4);
    assert_eq!(first, second);
}

#[test]
fn selftest_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("selftest.json");
    let o = run(&["--output", path.to_str().unwrap(), "selftest"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(lines.len(), 10);
    let v = assert_valid("selftest", &std::fs::read_to_string(&path).unwrap());
    let passed = v["passed"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }));
    assert_eq!(passed, lines.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn schemas_are_valid_json_with_version_tags() {
    for name in [
        "exponents",
        "wiener",
        "capacity",
        "capacity-profile",
        "verify-power",
        "sharpness",
        "selftest",
    ] {
        let s = common::load_schema(name);
        assert_eq!(s["properties"]["schema"]["const"], format!("qwiener/{name}/v1"));
    }
}
