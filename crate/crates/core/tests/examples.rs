//! Every shipped example must run to completion. `cargo test` builds them
//! next to this binary.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|deps| deps.parent()).unwrap();
    profile_dir.join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn check(name: &str, expect: &str) {
    let path = example(name);
    assert!(path.exists(), "{} not built", path.display());
    let o = Command::new(&path).output().unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout.contains(expect), "{name} printed:\n{stdout}");
}

#[test]
fn normalize() {
    check("normalize", "28 countries × 27 indicators");
}

#[test]
fn choquet_indices() {
    check("choquet_indices", "μ(all) = 1.000000");
}

#[test]
fn compatibility() {
    check("compatibility", "(compatible)");
}

#[test]
fn diagnose() {
    check("diagnose", "injected");
}

#[test]
fn sampling() {
    check("sampling", "smallest constraint slack");
}

#[test]
fn smaa() {
    check("smaa", "1. SE");
}

#[test]
fn pipeline() {
    check("pipeline", "top five SE");
}
