use std::process::Command;

use qcord_cli::builtin::{lookup, BUILTINS};
use qcord_cli::syntax::parse_program;
use qcord_cli::{build_scenario, run_scenario, Overrides, Status};

const NON_FLAT: &str = "\
scenario non-flat
chart x periodic, y real
cord B = dy + t*y^2*dx
task verify B
";

fn qcord(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qcord")).args(args).output().expect("binary runs")
}

#[test]
fn every_builtin_passes() {
    for (name, text) in BUILTINS {
        let s = build_scenario(text, &Overrides::default()).unwrap_or_else(|d| panic!("{name}: {d}"));
        let r = run_scenario(&s, None, false);
        assert!(!r.tasks.is_empty(), "{name}");
        assert!(r.passed(), "{name}:\n{}", r.to_text());
    }
}

#[test]
fn non_flat_cord_reports_its_curvature() {
    let s = build_scenario(NON_FLAT, &Overrides::default()).unwrap();
    let r = run_scenario(&s, None, false);
    let t = &r.tasks[0];
    assert_eq!(t.status, Status::Fail);
    assert!(t.errors.iter().any(|e| e.contains("order 0: (-y^2)*dx^dy")), "{:?}", t.errors);
}

#[test]
fn printing_is_a_fixed_point_of_parsing() {
    for (name, text) in BUILTINS {
        let once = parse_program(text).unwrap().to_string();
        let again = parse_program(&once).unwrap_or_else(|d| panic!("{name}: {d}\n{once}"));
        assert_eq!(again.to_string(), once, "{name}");
    }
}

#[test]
fn json_is_deterministic_without_timing() {
    let args = ["verify", "builtin:circle-cech", "--format", "json", "--no-timing", "--seed", "7"];
    let a = qcord(&args);
    let b = qcord(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gv_json_shape() {
    let out = qcord(&["gv", "builtin:torus-gv", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"], "torus-gv");
    let task = &v["tasks"][0];
    for key in ["name", "status", "values", "errors", "flags", "seconds"] {
        assert!(task.get(key).is_some(), "{key}");
    }
    assert_eq!(
        task["values"]["gv_integral"],
        serde_json::json!({ "rational": { "num": -1, "den": 1 }, "two_pi_power": 3 })
    );
    assert!(task["values"]["gv_integral_float"]["abs_err"].is_number());
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("qcord-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.qc");
    std::fs::write(&bad, "chart x periodic, y real\nform a = sin(y)*dx\n").unwrap();
    let out = qcord(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column"), "{err}");
    assert!(out.stdout.is_empty());

    let failing = dir.join("non-flat.qc");
    std::fs::write(&failing, NON_FLAT).unwrap();
    assert_eq!(qcord(&["verify", failing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(qcord(&["verify", "builtin:torus-bott"]).status.code(), Some(0));
    assert_eq!(qcord(&["verify", "builtin:missing"]).status.code(), Some(2));
    assert_eq!(qcord(&["verify", dir.join("absent.qc").to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn resource_limits_abort_single_tasks() {
    let text = lookup("cylinder-gv").unwrap();
    let s = build_scenario(text, &Overrides { order: Some(40), ..Default::default() });
    match s {
        Err(d) => assert!(d.to_string().contains("order"), "{d}"),
        Ok(s) => {
            let r = run_scenario(&s, Some("gv"), false);
            assert!(r.tasks.iter().all(|t| t.status == Status::Aborted));
        }
    }
}

#[test]
fn subcommands_filter_tasks() {
    let out = qcord(&["cohomology", "builtin:cylinder-gv", "--format", "json", "--no-timing"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v["tasks"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["cohomology A gauge Y"]);
    let text = qcord(&["gv", "builtin:torus-gv"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("gv_integral = -1*(2pi)^3"));
}

#[test]
fn worker_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcord"))
        .args(["verify", "builtin:torus-bott"])
        .env("QCORD_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_qcord"))
        .args(["verify", "builtin:circle-cech"])
        .env("QCORD_WORKERS", "2")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
