use std::path::PathBuf;
use std::process::Command;

use walras::cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["walras"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("walras-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

#[test]
fn validate_fixtures_and_broken_files() {
    for name in ["ql_ud.json", "ql_nowe.json", "nql_2.json"] {
        let (code, out, _) = call(&["validate", &fixture(name)]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(json(&out)["ok"], true);
    }
    let increasing = std::fs::read_to_string(fixture("nql_2.json"))
        .unwrap()
        .replace(r#"[["0", "4"], ["4", "0"]"#, r#"[["0", "4"], ["4", "5"]"#);
    let (code, out, _) = call(&["validate", &scratch("increasing.json", &increasing)]);
    assert_eq!(code, 2);
    let report = json(&out);
    assert_eq!(report["ok"], false);
    assert!(report["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["kind"] == "not strictly decreasing"));

    let zero_den = std::fs::read_to_string(fixture("ql_ud.json")).unwrap().replace("\"4\"", "\"1/0\"");
    let (code, _, err) = call(&["validate", &scratch("zero_den.json", &zero_den)]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"), "{err}");

    let (code, _, _) = call(&["validate", "/nonexistent/instance.json"]);
    assert_eq!(code, 2);
}

#[test]
fn demand_command() {
    let (code, out, _) = call(&["demand", &fixture("ql_ud.json"), "--prices", "1,1"]);
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["demand"][0]["bundles"], json(r#"[["a"]]"#));
    assert_eq!(report["demand"][0]["max_utility"], "1");

    let (code, out, _) = call(&["demand", &fixture("nql_2.json"), "--prices", "3,3"]);
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["demand"][0]["bundles"], json(r#"[["a"],["b"]]"#));
    assert_eq!(report["demand"][0]["max_utility"], "1");

    assert_eq!(call(&["demand", &fixture("ql_ud.json"), "--prices", "5,1"]).0, 2);
    assert_eq!(call(&["demand", &fixture("ql_ud.json"), "--prices", "-1,1"]).0, 2);
    assert_eq!(call(&["demand", &fixture("ql_ud.json")]).0, 2);
}

#[test]
fn solve_command() {
    let (code, out, _) = call(&["solve", &fixture("ql_ud.json"), "--mode", "we"]);
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["status"], "we_found");
    assert_eq!(report["verdict"]["ok"], true);
    assert!(report["allocation"].is_object());
    assert!(report["instance_digest"].as_str().unwrap().len() == 64);
    assert_eq!(report["tool_version"], env!("CARGO_PKG_VERSION"));

    let (code, out, _) = call(&["solve", &fixture("ql_nowe.json"), "--mode", "we"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["status"], "no_we_conclusive");

    let (code, out, _) = call(&["solve", &fixture("ql_nowe.json"), "--mode", "frac"]);
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["gap"], "0");
    assert_eq!(report["verdict"]["ok"], true);
    assert_eq!(
        report["fractional"],
        json(
            r#"{"1": [{"bundle": [], "weight": "1/2"}, {"bundle": ["a","b"], "weight": "1/2"}],
                "2": [{"bundle": ["a"], "weight": "1/2"}, {"bundle": ["b"], "weight": "1/2"}]}"#
        )
    );

    let target = scratch("report.json", "");
    let (code, out, _) = call(&["solve", &fixture("nql_2.json"), "--grid", "3", "--refine", "1", "--out", &target]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(json(&std::fs::read_to_string(&target).unwrap())["status"], "we_found");

    assert_eq!(call(&["solve", &fixture("ql_ud.json"), "--grid", "1"]).0, 2);
    assert_eq!(call(&["solve", &fixture("ql_ud.json"), "--eps", "x"]).0, 2);
    assert_eq!(call(&["solve", &fixture("ql_ud.json"), "--mode", "both"]).0, 2);
}

#[test]
fn configlp_command() {
    let (code, out, _) = call(&["configlp", &fixture("ql_ud.json"), "--prices", "1,1", "--solve"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("maximize: "));
    assert!(out.contains("bidder[1]: "));
    assert!(out.contains("item[a]: "));
    assert!(out.contains("status: optimal\n"));
    assert!(out.contains("objective_value: 4\n"));

    let (_, out, _) = call(&["configlp", &fixture("ql_nowe.json"), "--prices", "3/2,3/2", "--solve"]);
    assert!(out.contains("objective_value: 7/2\n"));

    let (code, out, _) = call(&["configlp", &fixture("ql_ud.json"), "--prices", "1,1", "--dual"]);
    assert_eq!(code, 0);
    let first = out.lines().next().unwrap();
    assert_eq!(first, "minimize: 1 u[1] + 1 u[2] + 1 p[a] + 1 p[b]");
    assert_eq!(out.lines().count(), 1 + 8);
}

#[test]
fn reduce_verify_brute_commands() {
    let (code, out, _) = call(&["reduce", &fixture("ql_ud.json")]);
    assert_eq!(code, 0);
    let report = json(&out);
    assert_eq!(report["z"], "5");
    assert_eq!(report["endowments"][2]["endowment"], json(r#"["1","1","0"]"#));

    let (code, out, _) = call(&["verify", &fixture("ql_ud.json"), "--prices", "1,1", "--alloc", "1:a,2:b"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["verdict"]["ok"], true);
    let (code, out, _) = call(&["verify", &fixture("ql_ud.json"), "--prices", "3,0", "--alloc", "1:a,2:b"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["verdict"]["violations"][0]["condition"], "satisfaction");
    let (code, _, _) = call(&[
        "verify",
        &fixture("ql_nowe.json"),
        "--prices",
        "3/2,3/2",
        "--frac",
        "1:a+b@1/2,1:-@1/2,2:a@1/2,2:b@1/2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(call(&["verify", &fixture("ql_ud.json"), "--prices", "1,1", "--alloc", "9:a"]).0, 2);
    assert_eq!(call(&["verify", &fixture("ql_ud.json"), "--prices", "1,1"]).0, 2);

    let (code, out, _) = call(&["brute", &fixture("ql_nowe.json"), "--step", "1/4"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["equilibria"], json("[]"));
    let (code, out, _) = call(&["brute", &fixture("ql_ud.json"), "--step", "1/2"]);
    assert_eq!(code, 0);
    assert!(json(&out)["count"].as_u64().unwrap() > 0);
    assert_eq!(call(&["brute", &fixture("ql_ud.json"), "--step", "3"]).0, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_walras");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["solve", &fixture("ql_ud.json")]), Some(0));
    assert_eq!(status(&["solve", &fixture("ql_nowe.json")]), Some(1));
    assert_eq!(status(&["frobnicate"]), Some(2));
    assert_eq!(status(&["--version"]), Some(0));
}

#[test]
fn reports_are_byte_stable() {
    let a = call(&["solve", &fixture("nql_2.json"), "--mode", "frac"]);
    let b = call(&["solve", &fixture("nql_2.json"), "--mode", "frac"]);
    assert_eq!(a, b);
}
