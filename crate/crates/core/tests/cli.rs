use std::process::{Command, Output};

use serde_json::Value;

fn winkler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winkler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn rays_include_the_first_double_point() {
    let out = winkler(&["rays", "--r", "3.141592653589793", "--m-max", "2", "--alpha-max", "1", "--output", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("kind,m1,m2,alpha,beta\n"));
    let double: Vec<&str> = text.lines().filter(|l| l.starts_with("double")).collect();
    assert_eq!(double.len(), 1);
    let fields: Vec<f64> = double[0].split(',').skip(3).map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields, vec![0.625, 0.03515625]);
}

#[test]
fn ray_rows_lie_on_their_lines() {
    let out = winkler(&["rays", "--r", "1", "--m-max", "1", "--alpha-max", "2", "--output", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "ray");
        let (alpha, beta): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        assert!(beta > 0.0);
        assert!((beta - (0.6168503 * alpha - 0.3805042)).abs() < 1e-6);
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn rays_reject_zero_modes() {
    assert_eq!(code(&winkler(&["rays", "--m-max", "0"])), 2);
}

#[test]
fn kernel_reports_dimension() {
    let out = winkler(&["kernel", "--alpha", "1", "--beta", "0.2", "--r", "3.141592653589793", "--n", "201"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dim"], 0);

    let out = winkler(&["kernel", "--alpha", "0.625", "--beta", "0.03515625", "--n", "101"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dim"], 2);
    assert_eq!(v["matched_modes"], serde_json::json!([1, 2]));
}

#[test]
fn kernel_requires_beta() {
    let out = winkler(&["kernel", "--alpha", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--beta"));
}

#[test]
fn invalid_grid_names_the_field() {
    let out = winkler(&["kernel", "--alpha", "1", "--beta", "0.2", "--n", "100"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));
}

#[test]
fn reduce_windings_flip() {
    let out = winkler(&["reduce", "--offsets", "0.1", "--slopes", "0.3,1.0", "--n", "101", "--samples", "64"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let windings: Vec<i64> = v.as_array().unwrap().iter().map(|p| p["winding"].as_i64().unwrap()).collect();
    assert_eq!(windings, vec![-1, 1]);
    for key in ["alpha", "beta", "slope", "det_closed_form", "det_numeric", "winding", "status"] {
        assert!(v[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn reduce_boundary_slope_skips_winding() {
    let out = winkler(&["reduce", "--offsets", "0.1", "--slopes", "0.0625", "--n", "51", "--samples", "64"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["status"], "boundary");
    assert!(v[0]["winding"].is_null());
}

#[test]
fn reduce_solver_failure_exits_three() {
    // One Newton step is not enough away from xi = 0.
    let out = winkler(&["reduce", "--offsets", "0.1", "--slopes", "0.3", "--n", "51", "--samples", "64", "--config", "/dev/null"]);
    assert_eq!(code(&out), 0);
    let cfg = std::env::temp_dir().join("winkler_cli_tol.cfg");
    std::fs::write(&cfg, "tol = 1e-30\n").unwrap();
    let out = winkler(&["reduce", "--offsets", "0.1", "--slopes", "0.3", "--n", "51", "--samples", "64", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["status"], "solver_failure");
}

fn branch_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn branch_emits_json_lines() {
    let out = winkler(&["branch", "--m", "1", "--free", "alpha", "--fixed-beta", "0.05859375", "--steps", "20", "--dt", "5e-3", "--n", "101"]);
    assert_eq!(code(&out), 0);
    let records = branch_lines(&stdout(&out));
    assert_eq!(records.len(), 22);
    assert_eq!(records[0]["t"].as_f64(), Some(0.0));
    assert_eq!(records[1]["param_name"], "alpha");
    assert_eq!(records[1]["x"].as_array().unwrap().len(), 101);
    let p0 = records[0]["param_value"].as_f64().unwrap();
    let (t, dp): (Vec<f64>, Vec<f64>) = records[1..]
        .iter()
        .map(|r| {
            let t = r["t"].as_f64().unwrap();
            (t.ln(), (r["param_value"].as_f64().unwrap() - p0).abs().ln())
        })
        .unzip();
    let n = t.len() as f64;
    let (mt, md) = (t.iter().sum::<f64>() / n, dp.iter().sum::<f64>() / n);
    let slope = t.iter().zip(&dp).map(|(a, b)| (a - mt) * (b - md)).sum::<f64>()
        / t.iter().map(|a| (a - mt).powi(2)).sum::<f64>();
    assert!(slope >= 1.9, "{slope}");
}

#[test]
fn branch_stopped_early_exits_four() {
    let out = winkler(&["branch", "--free", "beta", "--fixed-alpha", "1", "--steps", "10", "--dt", "0.05", "--n", "31"]);
    assert_eq!(code(&out), 4);
    assert!(branch_lines(&stdout(&out)).len() >= 2);
}

#[test]
fn branch_rejects_malformed_free() {
    assert_eq!(code(&winkler(&["branch", "--free", "gamma", "--fixed-beta", "0.05"])), 2);
    assert_eq!(code(&winkler(&["branch", "--free", "alpha", "--fixed-alpha", "1"])), 2);
}

#[test]
fn scan_writes_csv() {
    let out = winkler(&["scan", "--resolution", "16", "--n", "31", "--output", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("alpha,beta,sigma_min,sigma_2,dim\n"));
    assert_eq!(text.lines().count(), 1 + 16 * 16);
    assert_eq!(code(&winkler(&["scan", "--resolution", "8"])), 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = std::env::temp_dir().join("winkler_cli_kernel.cfg");
    std::fs::write(&cfg, "# kernel at the double point\nalpha = 0.625\nbeta = 0.03515625\nn = 101\n").unwrap();
    let out = winkler(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dim"], 2);

    let out = winkler(&["kernel", "--config", cfg.to_str().unwrap(), "--beta", "0.2", "--alpha", "1"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["dim"], 0);

    std::fs::write(&cfg, "alpha 1\n").unwrap();
    assert_eq!(code(&winkler(&["kernel", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn output_file_and_determinism() {
    let dir = std::env::temp_dir();
    let a = dir.join("winkler_cli_a.json");
    let b = dir.join("winkler_cli_b.json");
    for path in [&a, &b] {
        let out = winkler(&["kernel", "--alpha", "1", "--beta", "0.05859375", "--n", "101", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_quick_passes() {
    let out = winkler(&["verify", "--level", "quick"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(code(&out), 0, "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn verify_rejects_unknown_level() {
    assert_eq!(code(&winkler(&["verify", "--level", "slow"])), 2);
}
