use std::process::{Command, Output};

fn painleve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_painleve")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = painleve(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Parses a CSV body into its header and rows.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn num(field: &str) -> f64 {
    field.parse().unwrap()
}

#[test]
fn exact_route_at_s_zero() {
    let (header, rows) = csv(&stdout(&["v", "--s", "0", "--z-min", "1", "--z-max", "1", "--points", "1", "--route", "exact"]));
    assert_eq!(header, ["z", "v", "dv", "d2v", "residual", "route"]);
    let r = &rows[0];
    assert_eq!((num(&r[0]), num(&r[1]), num(&r[2]), num(&r[3])), (1.0, -0.5, -0.5, 0.0));
    assert!(num(&r[4]).abs() < 1e-12);
    assert_eq!(r[5], "exact");
}

#[test]
fn bessel_and_ode_routes_agree() {
    let args = |route| ["v", "--s", "2", "--z-min", "0.5", "--z-max", "6", "--points", "12", "--route", route];
    let (_, b) = csv(&stdout(&args("bessel")));
    let (_, o) = csv(&stdout(&args("ode")));
    for (rb, ro) in b.iter().zip(&o) {
        for c in 1..4 {
            assert!((num(&rb[c]) - num(&ro[c])).abs() <= 1e-8, "{rb:?} vs {ro:?}");
        }
    }
}

#[test]
fn invalid_s_is_a_usage_error() {
    let out = painleve(&["v", "--s", "-0.6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s must exceed"));
}

#[test]
fn moment_values() {
    let (header, rows) = csv(&stdout(&["moment", "--s", "0", "--h-re", "0.25"]));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert!((num(&rows[0][col("value_re")]) - 1.0).abs() < 1e-6);

    let (_, rows) = csv(&stdout(&["moment", "--s", "1", "--h-re", "0"]));
    assert!((num(&rows[0][col("value_re")]) - 1.0).abs() < 1e-12);

    let v = |branch| {
        let (_, rows) = csv(&stdout(&["moment", "--s", "1", "--h-re", "0.7", "--branch", branch]));
        num(&rows[0][col("value_re")])
    };
    assert!((v("kernel-eps") - v("auto")).abs() < 1e-4);
}

#[test]
fn convergence_is_first_order() {
    let (_, rows) = csv(&stdout(&["convergence", "--s", "0.5", "--z", "2", "--n", "10,20,40"]));
    for r in &rows[1..] {
        let ratio = num(&r[4]);
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }
}

#[test]
fn density_at_s_zero_is_cauchy() {
    let (_, rows) = csv(&stdout(&["density", "--s", "0", "--x-min", "-5", "--x-max", "5", "--points", "11"]));
    for r in rows {
        let x = num(&r[0]);
        let cauchy = 1.0 / (std::f64::consts::PI * (1.0 + x * x));
        assert!((num(&r[1]) - cauchy).abs() < 1e-8);
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["v", "--s", "0.3", "--z-min", "0.1", "--z-max", "8", "--points", "40"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn json_echoes_the_configuration() {
    let text = stdout(&["--format", "json", "moment", "--s", "1", "--h-re", "1"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "moment");
    assert_eq!(v["config"]["s"], 1.0);
    assert_eq!(v["config"]["prime_cutoff"], 10_000);
    assert!((v["rows"][0]["value_re"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
}

#[test]
fn selected_acceptance_criteria_pass() {
    let out = painleve(&["accept", "--only", "1,14"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let path = std::env::temp_dir().join(format!("painleve-bad-{}.cfg", std::process::id()));
    std::fs::write(&path, "speed = 11\n").unwrap();
    let out = painleve(&["--config", path.to_str().unwrap(), "moment", "--s", "1", "--h-re", "1"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
}
