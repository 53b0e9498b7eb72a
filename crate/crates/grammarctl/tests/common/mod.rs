#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

pub fn grammarctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grammarctl"))
        .args(args)
        .current_dir(root())
        .env("GRAMMARCTL_PROFILE_LOCK_TIMEOUT", "2")
        .output()
        .unwrap()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Copies a shipped profile so tests can write to it.
pub fn copy_profile(name: &str, to: &Path) -> PathBuf {
    let src = root().join("profiles").join(name);
    let dst = to.join(name);
    std::fs::create_dir_all(&dst).unwrap();
    for e in std::fs::read_dir(src).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dst.join(e.file_name())).unwrap();
    }
    dst
}

/// A decision row without the fields that legitimately differ.
pub fn strip_volatile(line: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
    let o = v.as_object_mut().unwrap();
    o.remove("timestamp");
    o.remove("annotator");
    v
}
