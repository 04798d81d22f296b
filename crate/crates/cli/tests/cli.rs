use std::process::{Command, Output};

fn mongelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mongelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn default_evolve_overhangs_only_after_zero() {
    let o = mongelab(&["evolve"]);
    assert!(o.status.success());
    let (h, body) = rows(&stdout(&o));
    let (ti, bi) = (col(&h, "t"), col(&h, "branch"));
    let lower: Vec<f64> = body.iter().filter(|r| r[bi] == "W-1").map(|r| r[ti].parse().unwrap()).collect();
    assert!(!lower.is_empty());
    assert!(lower.iter().all(|&t| t > 0.0));
    assert!(body.iter().any(|r| r[bi] == "W0" && r[ti].parse::<f64>().unwrap() < 0.0));
}

#[test]
fn zero_profile_with_constant_gradient_is_kt() {
    for solver in ["series", "characteristics", "extradim"] {
        let o = mongelab(&["evolve", "--profile", "zero", "--pressure", "const:0.75", "--times", "-0.4,0.2,0.9", "--n", "5", "--solver", solver]);
        assert!(o.status.success(), "{solver}");
        let (h, body) = rows(&stdout(&o));
        assert_eq!(body.len(), 15, "{solver}");
        for r in body {
            let t: f64 = r[col(&h, "t")].parse().unwrap();
            let u: f64 = r[col(&h, "u")].parse().unwrap();
            assert!((u - 0.75 * t).abs() < 1e-12, "{solver}: u = {u} at t = {t}");
        }
    }
}

#[test]
fn all_solvers_agree_on_a_segment() {
    let o = mongelab(&["evolve", "--profile", "segment:0.3,1.2", "--pressure", "linear:0.8", "--times", "0,0.1,0.3", "--n", "11", "--solver", "all"]);
    assert!(o.status.success());
    let (h, body) = rows(&stdout(&o));
    let (di, si) = (col(&h, "discrepancy"), col(&h, "solver"));
    for s in ["series", "implicit", "characteristics", "extradim"] {
        assert!(body.iter().any(|r| r[si] == s), "missing {s}");
    }
    for r in &body {
        let d: f64 = r[di].parse().unwrap();
        assert!(d <= 1e-6, "discrepancy {d}");
    }
}

#[test]
fn breaktime_columns() {
    let o = mongelab(&["breaktime", "--profile", "segment:0.1,2", "--x-min", "0", "--x-max", "1", "--n", "3"]);
    assert!(o.status.success());
    let (h, body) = rows(&stdout(&o));
    assert_eq!(h, ["x", "t_break_closed", "t_break_ratio", "rel_diff"]);
    for r in body {
        assert!((r[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
        assert!((r[2].parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
    }

    let o = mongelab(&["breaktime", "--profile", "exp:1,1", "--x-min", "-1", "--x-max", "0", "--n", "2", "--order", "40"]);
    let (h, body) = rows(&stdout(&o));
    let last = body.last().unwrap();
    let closed: f64 = last[col(&h, "t_break_closed")].parse().unwrap();
    assert!((closed - (-1.0f64).exp()).abs() < 1e-14);
    assert!(last[col(&h, "rel_diff")].parse::<f64>().unwrap() < 0.02);

    let o = mongelab(&["breaktime", "--profile", "segment:0,-1", "--n", "2"]);
    let (h, body) = rows(&stdout(&o));
    assert!(body.iter().all(|r| r[col(&h, "t_break_closed")] == "NoBreak"));
}

#[test]
fn verify_passes_and_flip_fails_criterion_5() {
    let json = |o: &Output| -> Vec<serde_json::Value> { serde_json::from_slice(&o.stdout).unwrap() };
    let o = mongelab(&["verify", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = json(&o);
    let crits: std::collections::BTreeSet<u64> = rows.iter().map(|r| r["criterion"].as_u64().unwrap()).collect();
    assert_eq!(crits, (1..=12).collect());
    assert!(rows.iter().all(|r| r["status"] == "PASS"));

    let o = mongelab(&["verify", "--inject-g-flip", "--format", "json"]);
    assert_eq!(o.status.code(), Some(4));
    let rows = json(&o);
    let failed: Vec<&serde_json::Value> = rows.iter().filter(|r| r["status"] == "FAIL").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r["criterion"] == 5));

    let o = mongelab(&["verify"]);
    let text = stdout(&o);
    assert!(text.starts_with("criterion,check,measured,bound,status\n1,\""));
}

#[test]
fn verify_tol_scales_bounds() {
    let o = mongelab(&["verify", "--tol", "1e-30", "--format", "json"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &v[0];
    for key in ["criterion", "check", "measured", "bound", "status"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let bounds: Vec<f64> = v.as_array().unwrap().iter().filter_map(|r| r["bound"].as_f64()).collect();
    assert!(bounds.iter().all(|&b| b <= 1e-25));
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mongelab"))
            .args(["evolve", "--solver", "all", "--profile", "segment:0.2,0.9", "--pressure", "const:0.3", "--n", "21"])
            .env("MONGELAB_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert_eq!(a, run("4"));
    assert_eq!(a, run("1"));
}

#[test]
fn config_file_with_flag_override_and_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"profile":{"type":"LinearSegment","alpha":0.0,"beta":1.0},
            "pressure":{"type":"Constant","k":0.5},
            "times":[0.25],"x_range":[0.0,1.0],"n_samples":3,"solver":"series","format":"json"}"#,
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let svg = dir.path().join("plot.svg");
    let o = mongelab(&[
        "evolve", "--config", cfg.to_str().unwrap(), "--n", "5", "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 5);
    let keys: Vec<&String> = arr[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["t", "x", "u", "branch", "solver"]);
    for r in arr {
        let (x, t, u) = (r["x"].as_f64().unwrap(), r["t"].as_f64().unwrap(), r["u"].as_f64().unwrap());
        // u = (x + ½kt²)/(1 − t) + kt for α = 0, β = 1
        let exact = (x + 0.5 * 0.5 * t * t) / (1.0 - t) + 0.5 * t;
        assert!((u - exact).abs() < 1e-12, "x = {x}: {u} vs {exact}");
        assert_eq!(r["solver"], "series");
    }
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn front_face_and_shock() {
    let o = mongelab(&["front-face", "--profile", "exp:1,1", "--times", "-0.2,0.2,0.36787944117144233,1"]);
    assert!(o.status.success());
    let (h, body) = rows(&stdout(&o));
    assert_eq!(h, ["t", "x_face"]);
    assert_eq!(body[0][1], "");
    // face at x = −ln t − 1 for A = L = 1
    for r in &body[1..] {
        let t: f64 = r[0].parse().unwrap();
        assert!((r[1].parse::<f64>().unwrap() - (-t.ln() - 1.0)).abs() < 1e-12, "t = {t}");
    }

    let o = mongelab(&["front-face", "--profile", "segment:0,1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = mongelab(&["shock", "--profile", "triangle:-1,0,1,1", "--times", "2,3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, body) = rows(&stdout(&o));
    assert_eq!(h, ["t", "position", "u_left", "u_right", "u_middle", "speed_rh", "speed_fitted", "area_residual"]);
    for r in &body {
        assert!(r[col(&h, "area_residual")].parse::<f64>().unwrap().abs() < 1e-6);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(mongelab(&["evolve", "--n", "1"]).status.code(), Some(2));
    assert_eq!(mongelab(&["evolve", "--profile", "bogus"]).status.code(), Some(2));
    assert_eq!(mongelab(&["evolve", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(mongelab(&["evolve", "--profile", "triangle:-1,0,1,1", "--solver", "implicit"]).status.code(), Some(3));
}
