use std::fs;
use std::path::Path;
use std::process::Command;

fn scns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scns"))
}

fn smoke_config() -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml");
    fs::read_to_string(root).unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn selftest_passes() {
    let out = scns().arg("selftest").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn oracle_prints_reference_values() {
    let out = scns().args(["oracle", "mollified-bounds"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("1.584893"));
    let bad = scns().args(["oracle", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[model]\ndim = 3\nm = 16\ngamma = 1.2\n").unwrap();
    let out = scns().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("3/2"), "{err}");
}

#[test]
fn sweep_requires_sweep_section() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("smoke.toml");
    fs::write(&cfg, smoke_config()).unwrap();
    let out = scns().arg("sweep").arg(&cfg).env("SCNS_OUTPUT_DIR", tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn smoke_run_is_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("smoke.toml");
    fs::write(&cfg, smoke_config()).unwrap();
    let mut trees = Vec::new();
    for workers in ["1", "8"] {
        let dir = tmp.path().join(format!("w{workers}"));
        let out = scns()
            .args(["run", cfg.to_str().unwrap(), "--workers", workers])
            .env("SCNS_OUTPUT_DIR", &dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        trees.push(files(&dir.join("smoke")));
    }
    assert!(trees[0].len() > 5);
    assert_eq!(trees[0], trees[1]);
}
