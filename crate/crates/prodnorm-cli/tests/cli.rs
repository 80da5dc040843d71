use std::process::{Command, Output};

fn prodnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodnorm"))
        .args(args)
        .env_remove("PRODNORM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct CsvRow {
    x: f64,
    density: f64,
    method: String,
    status: String,
}

fn rows(o: &Output) -> Vec<CsvRow> {
    assert!(o.status.success(), "{}", stderr(o));
    let text = stdout(o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,density,err,method,status"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5, "{l}");
            CsvRow {
                x: f[0].parse().unwrap(),
                density: f[1].parse().unwrap(),
                method: f[3].to_string(),
                status: f[4].to_string(),
            }
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

const GENERIC: [&str; 10] = [
    "--mu-x", "1", "--mu-y", "-0.5", "--sigma-x", "2", "--sigma-y", "0.7", "--rho", "0.3",
];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn standard_product_at_one_is_k0_over_pi() {
    let r = rows(&prodnorm(&[
        "pdf", "--mu-x", "0", "--mu-y", "0", "--sigma-x", "1", "--sigma-y", "1", "--rho", "0", "--n", "1", "--grid",
        "-3:3:7",
    ]));
    assert_eq!(r.len(), 7);
    let at1 = r.iter().find(|r| r.x == 1.0).unwrap();
    assert!(rel(at1.density, 0.134_016_241_016_994_27) < 1e-14);
    let at0 = r.iter().find(|r| r.x == 0.0).unwrap();
    assert_eq!(at0.status, "singular");
    assert!(at0.density.is_infinite());
    assert!(r.iter().filter(|r| r.x != 0.0).all(|r| r.status == "ok"));
}

#[test]
fn singular_marker_is_literal_inf() {
    let o = prodnorm(&["pdf", "--mu-x", "1", "--mu-y", "0.4", "--rho", "0.2", "--grid", "-1:1:3"]);
    let text = stdout(&o);
    let zero = text.lines().nth(2).unwrap();
    assert!(zero.starts_with("0.0000000000000000e0,inf,"), "{zero}");
    assert!(zero.ends_with(",singular"));
}

#[test]
fn series_and_integral_agree_on_grid() {
    let grid = ["--n", "2", "--grid", "-6.05:5.95:25"];
    let s = rows(&prodnorm(&with(&with(&["pdf"], &GENERIC), &with(&grid, &["--method", "series"]))));
    let i = rows(&prodnorm(&with(&with(&["pdf"], &GENERIC), &with(&grid, &["--method", "integral"]))));
    assert_eq!(s.len(), i.len());
    let worst = s.iter().zip(&i).map(|(a, b)| rel(a.density, b.density)).fold(0.0, f64::max);
    assert!(worst < 1e-7, "{worst}");
    assert!(s.iter().all(|r| r.method == "series_general"));
    assert!(i.iter().all(|r| r.method == "integral"));
}

#[test]
fn mean_of_one_copy_is_the_density() {
    let args = ["--n", "1", "--grid", "-4:4:17"];
    let a = prodnorm(&with(&with(&["pdf"], &GENERIC), &args));
    let b = prodnorm(&with(&with(&["mean"], &GENERIC), &args));
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn mean_with_zero_means() {
    // two copies: S₂ is Laplace with density e^{−|s|}/2, so the mean has e^{−2|x|}
    let r = rows(&prodnorm(&["mean", "--n", "2", "--grid", "-2:2:9"]));
    for row in &r {
        assert!(rel(row.density, (-2.0 * row.x.abs()).exp()) < 1e-12, "{}", row.x);
    }
    // three copies: S₃ has density |s| K₁(|s|)/π
    let r = rows(&prodnorm(&["mean", "--n", "3", "--grid", "0.25:2:8"]));
    let expected = [
        (0.25, 0.680_086_913_312_406_7),
        (0.5, 0.397_328_756_364_854_97),
        (1.0, 0.115_039_701_197_664_48),
        (2.0, 0.007_700_092_783_065_755),
    ];
    for (x, v) in expected {
        let row = r.iter().find(|r| r.x == x).unwrap();
        assert!(rel(row.density, v) < 1e-10, "{x}: {}", row.density);
    }
}

#[test]
fn mean_density_integrates_to_one() {
    let r = rows(&prodnorm(&with(&with(&["mean"], &GENERIC), &["--n", "3", "--grid", "-12:10:2201"])));
    let h = r[1].x - r[0].x;
    let inner: f64 = r[1..r.len() - 1].iter().map(|r| r.density).sum();
    let total = h * (inner + 0.5 * (r[0].density + r[r.len() - 1].density));
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn fractional_order_gives_divisor_density() {
    let r = rows(&prodnorm(&with(&with(&["pdf"], &GENERIC), &["--order", "0.5", "--grid", "0.5:3:6"])));
    assert!(r.iter().all(|r| r.status == "ok" && r.density > 0.0));
}

#[test]
fn sampling() {
    let args = with(&with(&["sample"], &GENERIC), &["--n", "3", "--samples", "20000", "--seed", "11"]);
    let a = prodnorm(&args);
    let b = prodnorm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample"));
    let v: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(v.len(), 20000);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let target = 3.0 * (1.0 * -0.5 + 0.3 * 2.0 * 0.7);
    assert!((mean - target).abs() < 4.0 * (var / n).sqrt(), "{mean} vs {target}");

    let other = prodnorm(&with(&with(&["sample"], &GENERIC), &["--n", "3", "--samples", "20000", "--seed", "12"]));
    assert_ne!(a.stdout, other.stdout);

    let empty = prodnorm(&["sample", "--samples", "0"]);
    assert!(empty.status.success());
    assert!(empty.stdout.is_empty());
}

#[test]
fn threads_do_not_change_output() {
    let args = with(&with(&["pdf"], &GENERIC), &["--n", "2", "--grid", "-3:3:31"]);
    let one = prodnorm(&with(&args, &["--threads", "1"]));
    let four = prodnorm(&with(&args, &["--threads", "4"]));
    assert_eq!(one.stdout, four.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_prodnorm"))
        .args(&args)
        .env("PRODNORM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(one.stdout, env.stdout);
    let bad_env = Command::new(env!("CARGO_BIN_EXE_prodnorm"))
        .args(&args)
        .env("PRODNORM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(1));
    let overridden = Command::new(env!("CARGO_BIN_EXE_prodnorm"))
        .args(with(&args, &["--threads", "2"]))
        .env("PRODNORM_THREADS", "many")
        .output()
        .unwrap();
    assert!(overridden.status.success());
}

#[test]
fn json_rows_and_metadata() {
    let o = prodnorm(&with(&with(&["pdf"], &GENERIC), &["--n", "1", "--grid", "-1:1:3", "--output", "json"]));
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cfg = &doc["metadata"]["config"];
    assert_eq!(cfg["params"]["mu_y"], -0.5);
    assert_eq!(cfg["params"]["rho"], 0.3);
    assert_eq!(cfg["order"], 1.0);
    assert_eq!(cfg["method"], "auto");
    assert_eq!(cfg["grid"]["points"], 3);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        for k in ["x", "density", "err", "method", "status"] {
            assert!(r.get(k).is_some(), "{k}");
        }
    }
    assert_eq!(rows[1]["status"], "singular");
    assert!(rows[1]["density"].is_null());
    assert!(rows[0]["density"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "mu_x = 1.0\nmu_y = -0.5\nsigma_x = 2.0\nsigma_y = 0.7\nrho = 0.9\nn = 2\ngrid = \"-3:3:13\"\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = prodnorm(&["pdf", "--config", p, "--rho", "0.3"]);
    let from_flags = prodnorm(&with(&with(&["pdf"], &GENERIC), &["--n", "2", "--grid", "-3:3:13"]));
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, from_flags.stdout);

    std::fs::write(&path, "mu_x = 1.0\nwidth = 3\n").unwrap();
    let bad = prodnorm(&["pdf", "--config", p]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stderr(&bad).lines().count(), 1);
}

#[test]
fn exit_codes() {
    let cases: [(&[&str], i32); 7] = [
        (&["pdf", "--rho", "1.5"], 1),
        (&["pdf", "--sigma-x", "-1"], 1),
        (&["pdf", "--grid", "3:1:5"], 1),
        (&["pdf", "--method", "nope"], 1),
        (&["pdf", "--frobnicate"], 1),
        (&["mean", "--order", "0.5"], 1),
        (&["pdf", "--mu-x", "1", "--method", "closed", "--grid", "1:2:3"], 2),
    ];
    for (args, code) in cases {
        let o = prodnorm(args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().filter(|l| l.starts_with("error")).count(), 1, "{args:?}");
    }
    // failed rows stay in the table
    let o = prodnorm(&["pdf", "--mu-x", "1", "--method", "closed", "--grid", "1:2:3"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",error")));
}

#[test]
fn verify_default_passes() {
    let o = prodnorm(&["verify", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("check,value,tolerance,passed,detail\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(3) == Some("true")));
}

#[test]
fn verify_with_impossible_tolerance_fails() {
    let o = prodnorm(&with(&with(&["verify"], &GENERIC), &["--n", "2", "--samples", "5000", "--tolerance", "1e-30"]));
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("verification failed") && err.contains("series_vs_integral"), "{err}");
}

#[test]
fn verify_divisibility_three() {
    let o = prodnorm(&with(
        &with(&["verify"], &GENERIC),
        &["--n", "2", "--samples", "5000", "--divisibility-m", "3", "--output", "json"],
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["metadata"]["config"]["divisibility_m"], 3);
    let c = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "divisibility_cf")
        .unwrap();
    assert!(c["value"].as_f64().unwrap() < 1e-12);
    assert!(c["detail"].as_str().unwrap().contains("^3"));
}

#[test]
fn methods_listing() {
    let o = prodnorm(&["methods"]);
    let text = stdout(&o);
    for name in ["auto", "series", "integral", "cf", "closed"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}
