use std::process::Command;

fn lfk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lfk"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, err) = lfk(&all);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn describe_constants() {
    let q2 = json(&["describe", "Qp p=2 f=1"]);
    assert_eq!(
        (
            q2["e"].as_i64(),
            q2["c"].as_i64(),
            q2["pc"].as_i64(),
            q2["d"].as_i64()
        ),
        (Some(1), Some(1), Some(2), Some(3))
    );
    assert_eq!(q2["mu_p"], true);
    let f2 = json(&["describe", "--field", "Fq((t)) p=2 f=1"]);
    assert!(f2["e"].is_null());
    let (_, table, _) = lfk(&["describe", "Fq((t)) p=2 f=1"]);
    assert!(table.contains("e=∞"));
    let q3 = json(&["describe", "Qp p=3 f=1 eis=3,3,1"]);
    assert_eq!(
        (q3["e"].as_i64(), q3["pc"].as_i64(), q3["d"].as_i64()),
        (Some(2), Some(3), Some(4))
    );
}

#[test]
fn compute_examples() {
    let (code, out, _) = lfk(&["compute", "level", "--field", "Qp p=2 f=1", "--elt", "-1"]);
    assert_eq!((code, out.trim()), (0, "delta=1"));
    let (code, out, _) = lfk(&["compute", "break", "--field", "Qp p=2 f=1", "--line", "2"]);
    assert_eq!((code, out.trim()), (0, "epsilon=2"));
    let (code, out, _) = lfk(&[
        "compute",
        "pair",
        "--field",
        "Fq((t)) p=2 f=1",
        "--mult",
        "1+t",
        "--add",
        "t^-1",
    ]);
    assert_eq!((code, out.trim()), (0, "nontrivial"));
    let pair = json(&[
        "compute",
        "pair",
        "--field",
        "Qp p=2 f=1",
        "--line",
        "5",
        "--elt",
        "-1",
    ]);
    assert_eq!(pair["pairing"], "trivial");
    assert_eq!(pair["hilbert_symbol"], 1);
    let norms = json(&[
        "compute",
        "norm-group",
        "--field",
        "Qp p=2 f=1",
        "--line",
        "-1",
    ]);
    assert_eq!(norms["norm_group"]["codim"], 1);
    let class = json(&[
        "compute",
        "class",
        "--field",
        "Fq((t)) p=3 f=1",
        "--elt",
        "t^-3",
    ]);
    assert_eq!(class["status"], "nontrivial");
    assert_eq!(class["level"], 1);
}

#[test]
fn verify_examples_and_exit_codes() {
    let (code, out, _) = lfk(&["verify", "--field", "Qp p=2 f=1", "all"]);
    assert_eq!(code, 0);
    assert!(out.contains("6 of 6 claims pass"));
    let (code, _, _) = lfk(&[
        "verify",
        "--field",
        "Fq((t)) p=2 f=1",
        "S8.34",
        "--window",
        "9",
    ]);
    assert_eq!(code, 0);
    let (code, _, err) = lfk(&["verify", "--field", "Qp p=2 f=1", "S2.10", "--prec", "4"]);
    assert_eq!(code, 3);
    assert!(err.contains("precision"));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_lfk"))
        .args(["verify", "--field", "Qp p=2 f=1", "S2.12"])
        .env("LFK_PREC", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn error_exit_codes() {
    // Parse errors carry a position.
    let (code, _, err) = lfk(&["describe", "Qp p=2 f=x"]);
    assert_eq!(code, 2);
    assert!(err.contains("at 9"), "{err}");
    let (code, _, _) = lfk(&[
        "compute",
        "level",
        "--field",
        "Qp p=2 f=1",
        "--elt",
        "1 + y",
    ]);
    assert_eq!(code, 2);
    // Trivial class spans no line.
    let (code, _, _) = lfk(&["compute", "break", "--field", "Qp p=2 f=1", "--line", "9"]);
    assert_eq!(code, 2);
    // Out of window.
    let (code, _, err) = lfk(&[
        "compute",
        "class",
        "--field",
        "Fq((t)) p=2 f=1",
        "--elt",
        "t^-11",
        "--window",
        "9",
    ]);
    assert_eq!(code, 2, "{err}");
    // Claim not applicable to the field.
    let (code, _, _) = lfk(&["verify", "--field", "Qp p=3 f=1", "S8.33"]);
    assert_eq!(code, 2);
}

#[test]
fn out_directory_receives_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = lfk(&[
        "verify",
        "--field",
        "Qp p=2 f=1",
        "S5.27",
        "S8.33",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("S5.27.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "pass");
    assert!(dir.path().join("S8.33.json").exists());
}
