use std::path::Path;
use std::process::{Command, Output};

fn desitter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_desitter"))
        .current_dir(dir)
        .env_remove("DESITTER_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

const VECTOR_SEEDED: &str = r#"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 8
[sampling]
decades = 2.0
samples = 41
[[first_order.modes]]
family = "vector"
k = [1, 0, 0]
amplitude = 1e-3
[[first_order.modes]]
family = "scalar"
k = [0, 1, 0]
amplitude = 1e-3
"#;

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("syntax.toml", "[background\nlambda = 0.001\n"),
        ("missing.toml", "[background]\nlambda = 0.001\n"),
        ("unknown.toml", "[background]\nlambda = 0.001\nrho0 = 0.01\nextra = 1\n"),
        (
            "range.toml",
            "[background]\nlambda = 0.001\nrho0 = 0.01\n[grid]\nn = 10\n",
        ),
    ] {
        std::fs::write(dir.path().join(name), text).unwrap();
        let out = desitter(dir.path(), &["--config", name, "--out", "run", "second-order"]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!dir.path().join("run").exists(), "{name} left output behind");
    }
    let out = desitter(dir.path(), &["--config", "absent.toml", "--out", "run", "background"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figure_presets_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (preset, file) in [("figure1", "fig1.csv"), ("figure2", "fig2.csv")] {
        let mut copies = Vec::new();
        for run in ["a", "b"] {
            let out = desitter(dir.path(), &["--out", run, "figures", preset]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            copies.push(std::fs::read(dir.path().join(run).join("figures").join(preset).join(file)).unwrap());
        }
        assert!(!copies[0].is_empty());
        assert_eq!(copies[0], copies[1], "{preset}");
    }
}

#[test]
fn env_var_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_desitter"))
        .current_dir(dir.path())
        .env("DESITTER_OUT", &root)
        .arg("background")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest = std::fs::read_to_string(root.join("background").join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    let file = &m["files"][0];
    let bytes = std::fs::read(root.join("background").join(file["path"].as_str().unwrap())).unwrap();
    assert_eq!(file["bytes"].as_u64().unwrap() as usize, bytes.len());
    assert_eq!(file["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn failed_verdict_with_check_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("v.toml"), VECTOR_SEEDED).unwrap();
    let plain = desitter(dir.path(), &["--config", "v.toml", "--out", "a", "second-order"]);
    assert_eq!(plain.status.code(), Some(0));
    let strict = desitter(
        dir.path(),
        &["--config", "v.toml", "--out", "b", "--check", "second-order"],
    );
    assert_eq!(
        strict.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&strict.stdout)
    );
}

#[test]
fn constraint_blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{VECTOR_SEEDED}[second_order]\nabort_residual = 1e-3\n");
    std::fs::write(dir.path().join("v.toml"), text).unwrap();
    let out = desitter(dir.path(), &["--config", "v.toml", "--out", "a", "second-order"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn emit_rejects_unknown_selector_and_empty_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = desitter(dir.path(), &["--out", "o", "figures", "theta2", "--from", "empty"]);
    assert_eq!(out.status.code(), Some(2));
    let out = desitter(dir.path(), &["--out", "o", "figures", "shear", "--from", "empty"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi2_asymptote"));
}
