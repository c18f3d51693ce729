use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = r#"{
  "seed": 7,
  "covariance": {"radii": [50, 100], "budget": 20000},
  "clt": {"r_list": [20], "n_samples": 2000},
  "volterra": {"steps": 64, "replicas": 50, "series_budget": 20000, "gronwall_paths": 20000, "picard_cells": 32},
  "check": {"inequality_cases": 40, "identity_cases": 20, "moment_samples": 4000},
  "rate": {"tightness_radii": [20], "times": [0.5, 1.0]}
}"#;

fn hamf(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hamf"));
    c.args(args).env_remove("HAMF_WORKERS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_small(cmd: &str, extra: &[&str]) -> (TempDir, PathBuf, Output) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "small.json", SMALL);
    let out = tmp.path().join("out");
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = hamf(&args, &[]);
    (tmp, out, o)
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn header(p: &Path) -> String {
    read(p).lines().next().unwrap().to_string()
}

fn summary(dir: &Path, cmd: &str) -> Value {
    serde_json::from_str(&read(&dir.join(format!("{cmd}_summary.json")))).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn covariance_tables_and_theta_zero_row() {
    let (_t, out, o) = run_small("covariance", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let terms = read(&out.join("covariance_terms.csv"));
    let ns: Vec<&str> = terms.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["1", "2", "3"]);
    let total = read(&out.join("covariance_total.csv"));
    let zero = total.lines().nth(1).unwrap();
    assert!(zero.starts_with("0,0,0,0,3,"), "{zero}");
    assert!(out.join("covariance_terms.svg").exists());
    let s = summary(&out, "covariance");
    assert_eq!(s["status"], "pass");
    assert_eq!(s["version"], format!("hamf v{}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn csv_schemas_are_frozen() {
    let expected: &[(&str, &[(&str, &str)])] = &[
        (
            "covariance",
            &[
                ("q1", "R,t,s,q1_R"),
                ("terms", "n,Q_n,stderr,Q_n_largest_R,stderr_largest_R,largest_R,seed"),
                ("total", "theta,K,stderr,tail_bound,truncation,seed"),
            ],
        ),
        (
            "clt",
            &[
                ("diagnostics", "R,variant,samples,ks_stat,hist_l1,bins,mean,variance,skewness,excess_kurtosis,seed"),
                ("slopes", "variant,slope,stderr,ci_low,ci_high,seed"),
            ],
        ),
        (
            "volterra",
            &[
                ("j_functions", "kind,t,J1,J2,J3,J4"),
                ("j_slopes", "kind,functional,slope,expected,abs_error"),
                ("gronwall", "n,P,stderr,bracket_low,bracket_high,a_n,sqrt_partial_sum,seed"),
                ("picard", "n,v_sup,w_sup,norm"),
                (
                    "walsh",
                    "theta,replicas,steps,E_V2,stderr,series,series_stderr,z_score,max_abs_error_vs_G,light_cone_violations,sup_part,increment_part,seed",
                ),
                ("series", "n,norm_sq,stderr,contribution,contribution_stderr,seed"),
                ("field", "time,x,V,seed"),
            ],
        ),
        (
            "check",
            &[
                ("properties", "property,passed,margin,detail"),
                ("inequalities", "inequality,case,t,s,beta,lhs,rhs,slack,passed,seed"),
            ],
        ),
        ("rate", &[("q1", "R,t,s,q1_R"), ("tightness", "R,t,s,norm,ratio,next_order_bound")]),
    ];
    for (cmd, tables) in expected {
        let (_t, out, o) = run_small(cmd, &["--json"]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for (name, h) in *tables {
            assert_eq!(header(&out.join(format!("{cmd}_{name}.csv"))), *h, "{cmd}_{name}");
        }
    }
}

#[test]
fn deterministic_columns_match_golden_values() {
    let (_t, out, o) = run_small("rate", &[]);
    assert_eq!(code(&o), 0);
    // q1_R(1,1,R) at H = 0.3 from the closed-form quadrature
    let q1: Vec<f64> = read(&out.join("rate_q1.csv")).lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    for (got, want) in q1.iter().zip([0.13614, 0.058586, 0.023762]) {
        assert!((got / want - 1.0).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn missing_output_dir_is_created() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL);
    let out = tmp.path().join("a").join("b").join("c");
    let o = hamf(&["rate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    assert!(out.join("rate_q1.csv").exists());
}

#[test]
fn unwritable_output_dir_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let blocker = write_config(tmp.path(), "file", "x");
    let o = hamf(&["rate", "--out-dir", blocker.join("sub").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot create output directory"));
}

#[test]
fn invalid_configs_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    for (i, body) in [
        r#"{"h": 0.2}"#,
        r#"{"h": 0.5}"#,
        r#"{"theta": 0}"#,
        r#"{"theta": -1}"#,
        r#"{"clt": {"r_list": []}}"#,
        r#"{"schema_version": 9}"#,
        r#"{"unknown": 1}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(tmp.path(), &format!("bad{i}.json"), body);
        let o = hamf(&["clt", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().join("o").to_str().unwrap()], &[]);
        assert_eq!(code(&o), 2, "{body}");
    }
    let o = hamf(&["clt", "--config", tmp.path().join("absent.json").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&hamf(&["nonsense"], &[])), 2);
}

#[test]
fn single_radius_has_no_slope() {
    let (_t, out, o) = run_small("clt", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out.join("clt_slopes.csv")).lines().count(), 1);
    let s = summary(&out, "clt");
    assert!(s["results"]["slope_all_orders"].is_null());
    assert!(s["results"]["slope_higher_orders"].is_null());
}

#[test]
fn bundle_regenerates_from_its_echoed_config() {
    let (tmp, out, o) = run_small("clt", &[]);
    assert_eq!(code(&o), 0);
    let echoed = summary(&out, "clt")["config"].clone();
    let cfg = write_config(tmp.path(), "echo.json", &echoed.to_string());
    let again = tmp.path().join("again");
    let o = hamf(&["clt", "--config", cfg.to_str().unwrap(), "--out-dir", again.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    for name in ["clt_diagnostics.csv", "clt_slopes.csv", "clt_ks.svg", "clt_hist_l1.svg"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
    // the summaries differ only in the echoed output directory
    let mut a = summary(&out, "clt");
    let mut b = summary(&again, "clt");
    a["config"]["out_dir"] = Value::Null;
    b["config"]["out_dir"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn worker_count_does_not_change_results() {
    let (_a, one, o1) = run_small("clt", &["--workers", "1"]);
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL);
    let three = tmp.path().join("o");
    let o3 = hamf(&["clt", "--config", cfg.to_str().unwrap(), "--out-dir", three.to_str().unwrap()], &[("HAMF_WORKERS", "3")]);
    assert_eq!((code(&o1), code(&o3)), (0, 0));
    assert_eq!(read(&one.join("clt_diagnostics.csv")), read(&three.join("clt_diagnostics.csv")));
    let o = hamf(&["rate", "--out-dir", tmp.path().join("z").to_str().unwrap()], &[("HAMF_WORKERS", "0")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_the_config() {
    let (_t, out, o) = run_small("rate", &["--seed", "99"]);
    assert_eq!(code(&o), 0);
    let s = summary(&out, "rate");
    assert_eq!(s["config"]["seed"], 99);
    assert_eq!(s["config"]["out_dir"], out.to_str().unwrap());
}

#[test]
fn json_flag_skips_svg() {
    let (_t, out, o) = run_small("rate", &["--json"]);
    assert_eq!(code(&o), 0);
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["command"], "rate");
    assert!(fs::read_dir(&out).unwrap().all(|e| e.unwrap().path().extension().unwrap() != "svg"));
}

#[test]
fn resource_guard_exits_with_four() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"clt": {"r_list": [20], "entry_budget": 10}}"#);
    let o = hamf(&["clt", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_suite_passes_and_lists_every_property() {
    let (_t, out, o) = run_small("check", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out, "check");
    let props = s["properties"].as_array().unwrap();
    let names: Vec<&str> = props.iter().map(|p| p["name"].as_str().unwrap()).collect();
    for want in [
        "weighted_step_inequality",
        "sin_product_inequality",
        "card_a_n",
        "multiindex_identity",
        "ou_rescaling",
        "chaos_orthogonality",
        "fbm_covariance",
        "hypercontractivity",
    ] {
        assert!(names.contains(&want), "{want}");
    }
    assert!(props.iter().all(|p| p["passed"] == true && p["margin"].is_number()));
}

#[test]
fn injected_fault_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"check": {"inject_fault": true, "inequality_cases": 20, "identity_cases": 5, "moment_samples": 2000}}"#);
    let out = tmp.path().join("o");
    let o = hamf(&["check", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 3);
    let s = summary(&out, "check");
    assert_eq!(s["status"], "fail");
    let failed: Vec<&str> =
        s["properties"].as_array().unwrap().iter().filter(|p| p["passed"] == false).map(|p| p["name"].as_str().unwrap()).collect();
    assert_eq!(failed, ["weighted_step_inequality"]);
}

#[test]
fn volterra_reports_exactness_and_light_cone() {
    let (_t, out, o) = run_small("volterra", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let walsh = read(&out.join("volterra_walsh.csv"));
    let zero: Vec<&str> = walsh.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(zero[0], "0");
    assert_eq!(zero[8], "0");
    assert_eq!(zero[9], "0");
    let noisy: Vec<&str> = walsh.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(noisy[9], "0");
    for name in ["gronwall", "picard", "field"] {
        assert!(out.join(format!("volterra_{name}.svg")).exists());
    }
}

#[test]
fn csv_output_is_plain() {
    let (_t, out, o) = run_small("covariance", &[]);
    assert_eq!(code(&o), 0);
    for e in fs::read_dir(&out).unwrap() {
        let p = e.unwrap().path();
        if p.extension().unwrap() == "csv" {
            let s = read(&p);
            assert!(!s.contains('\r') && s.ends_with('\n'), "{}", p.display());
            let width = s.lines().next().unwrap().split(',').count();
            assert!(s.lines().all(|l| l.split(',').count() == width));
        }
    }
}
