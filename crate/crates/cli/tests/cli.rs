use std::path::{Path, PathBuf};
use std::process::Command;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_dlplab"))
        .arg(command)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

#[test]
fn every_fixture_runs_with_expected_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let expected = [
        ("branch_points_lemniscate", "branch-points", 0),
        ("dirichlet_ellipse", "dirichlet", 0),
        ("gauss_ellipse", "gauss-check", 0),
        ("match_melnikov", "match-melnikov", 0),
        ("match_melnikov_two_ovals", "match-melnikov", 3),
        ("match_powers", "match-powers", 0),
        ("match_verify_ellipse", "match-verify", 1),
        ("reciprocity_ellipse", "reciprocity", 0),
        ("reflect_ellipse_focus", "reflect", 0),
        ("spectrum_ellipse", "spectrum", 0),
        ("spectrum_lemniscate", "spectrum", 0),
        ("sphere_check", "sphere-check", 0),
        ("trap_check_ellipse", "trap-check", 0),
        ("trap_check_limacon", "trap-check", 0),
    ];
    for (file, cmd, code) in expected {
        let out = dir.path().join(file);
        let (got, stdout) = run(cmd, &configs().join(format!("{file}.json")), &out, &[]);
        assert_eq!(got, code, "{file}: {stdout}");
        if code <= 1 {
            let line = stdout.lines().next().unwrap_or_default();
            assert!(line.starts_with(if code == 0 { "PASS " } else { "FAIL " }), "{line}");
            let report: serde_json::Value =
                serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
            assert_eq!(report["command"], cmd);
            assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
            assert_eq!(report["passed"], code == 0);
            for a in report["artifacts"].as_array().unwrap() {
                assert!(out.join(a["name"].as_str().unwrap()).exists());
            }
        }
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "command": "gauss-check", "curve": { "type": "circle", "center": [0, 0], "radius": 1 }, "N": 100 }"#).unwrap();
    assert_eq!(run("gauss-check", &bad, dir.path(), &[]).0, 2);
    assert_eq!(run("spectrum", &configs().join("gauss_ellipse.json"), dir.path(), &[]).0, 2);
    assert_eq!(run("gauss-check", &dir.path().join("missing.json"), dir.path(), &[]).0, 2);
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run("gauss-check", &bad, dir.path(), &[]).0, 2);
}

#[test]
fn flag_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run("gauss-check", &configs().join("gauss_ellipse.json"), dir.path(), &["--N", "128"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["N"], 128);
    assert_eq!(report["config"]["N"], 128);
}
