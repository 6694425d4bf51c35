use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn aknf(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_aknf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn aknf");
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().expect("wait for aknf")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn normalform_of_xi_squared() {
    let out = aknf(
        &["normalform", data("quartic_xi2.json").to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(
        r["residual"]["terms"],
        serde_json::json!([[0, "1"], [4, "2"]])
    );
    assert_eq!(r["certificate"]["verified"], true);
    assert_eq!(
        r["ch_form"]["components"][0],
        serde_json::json!([[0, "1"], [1, "2/3"]])
    );
    assert!(r["fibration_form"]["invariant_error"].as_f64().unwrap() < 1e-60);
    assert!(String::from_utf8_lossy(&out.stderr).contains("certificate ok"));
}

#[test]
fn unit_density_from_stdin() {
    let text = std::fs::read_to_string(data("quartic_one.json")).unwrap();
    let out = aknf(&["normalform", "-"], Some(&text));
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(
        r["f_form"]["components"],
        serde_json::json!([[[0, "1"]], [], []])
    );
    assert_eq!(r["ch_form"]["components"][0], serde_json::json!([[0, "1"]]));
    // Trivial fibration: h(H) = H.
    assert_eq!(
        r["fibration_form"]["h"]["terms"],
        serde_json::json!([[1, "1"]])
    );
}

#[test]
fn exit_codes() {
    let degenerate = aknf(
        &["normalform", data("degenerate.json").to_str().unwrap()],
        None,
    );
    assert_eq!(degenerate.status.code(), Some(3));
    let without_fibration = scratch(
        "nofib.json",
        r#"{"k": 4, "sigma": 1, "order": 12, "g": {"terms": [[0, 2, 1]]}, "options": {"fibration": false}}"#,
    );
    assert_eq!(
        aknf(&["normalform", without_fibration.to_str().unwrap()], None)
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        aknf(&["normalform", "-"], Some("{not json")).status.code(),
        Some(2)
    );
    let low = aknf(
        &[
            "normalform",
            "--order",
            "3",
            data("quartic_one.json").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(low.status.code(), Some(2));
}

#[test]
fn emitted_forms_revalidate() {
    let problem = data("cubic_minus.json");
    let r = json(&aknf(&["normalform", problem.to_str().unwrap()], None));
    for (name, form) in [
        ("f", &r["f_form"]),
        ("ch", &r["ch_form"]),
        ("fib", &r["fibration_form"]["form"]),
    ] {
        let path = scratch(&format!("{name}.json"), &form.to_string());
        let out = aknf(
            &["compare", problem.to_str().unwrap(), path.to_str().unwrap()],
            None,
        );
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(json(&out)["equal"], true, "{name}");
    }
}

#[test]
fn compare_detects_involution() {
    let plus = scratch(
        "plus.json",
        r#"{"k": 4, "sigma": 1, "order": 12, "g": {"terms": [[0, 0, 1], [1, 0, 1]]}}"#,
    );
    let minus = scratch(
        "minus.json",
        r#"{"k": 4, "sigma": 1, "order": 12, "g": {"terms": [[0, 0, 1], [1, 0, -1]]}}"#,
    );
    let high = scratch(
        "high.json",
        r#"{"k": 4, "sigma": 1, "order": 12, "g": {"terms": [[0, 0, 1], [1, 0, 1], [9, 0, 1]]}}"#,
    );
    let same = json(&aknf(
        &["compare", plus.to_str().unwrap(), plus.to_str().unwrap()],
        None,
    ));
    assert_eq!(
        (same["equal"].as_bool(), same["flipped"].as_bool()),
        (Some(true), Some(false))
    );
    let flipped = json(&aknf(
        &["compare", plus.to_str().unwrap(), minus.to_str().unwrap()],
        None,
    ));
    assert_eq!(
        (flipped["equal"].as_bool(), flipped["flipped"].as_bool()),
        (Some(true), Some(true))
    );
    let other = json(&aknf(
        &["compare", plus.to_str().unwrap(), high.to_str().unwrap()],
        None,
    ));
    assert_eq!(other["equal"], false);
}

#[test]
fn roundtrip_is_deterministic() {
    let input = data("quartic_xi2.json");
    let args = [
        "roundtrip",
        "--trials",
        "4",
        "--seed",
        "11",
        input.to_str().unwrap(),
    ];
    let a = aknf(&args, None);
    let b = aknf(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["all_equal"], true);
    assert_eq!(r["trials"].as_array().unwrap().len(), 4);
    assert_eq!(r["involution"]["flip_consistent"], true);
}

#[test]
fn action_levels() {
    let out = aknf(
        &[
            "action",
            "--h",
            "0.02,0.05",
            data("quartic_xi2.json").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["cross_check"]["passed"], true);
    assert_eq!(r["samples"][0]["region"], "compact");
    let strip = aknf(
        &["action", data("cubic_minus.json").to_str().unwrap()],
        None,
    );
    assert_eq!(json(&strip)["samples"][1]["region"], "noncompact");
    let wrong = aknf(
        &[
            "action",
            "--h",
            "-0.01",
            data("quartic_xi2.json").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn abel_from_csv() {
    let out = aknf(
        &[
            "abel",
            "--k",
            "4",
            "--i",
            "0",
            data("g_one_plus_h.csv").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["max_rel_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["c"].as_array().unwrap().len(), 41);
    let bad = aknf(
        &[
            "abel",
            "--k",
            "4",
            "--i",
            "3",
            data("g_one_plus_h.csv").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn growth_sweep() {
    let out = aknf(
        &[
            "check-growth",
            "--k",
            "2,4",
            "--i-max",
            "12",
            "--j-max",
            "12",
            "--sigma",
            "-1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["reports"].as_array().unwrap().len(), 2);
}
