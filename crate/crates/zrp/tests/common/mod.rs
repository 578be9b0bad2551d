#![allow(dead_code)]

use std::path::{Path, PathBuf};

use zrp::{replay, Workers};

pub const GOLDEN: [&str; 5] = [
    "oracle_small",
    "cutoff_small",
    "dissolution_small",
    "fluid_small",
    "chaos_small",
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn golden_result(name: &str) -> PathBuf {
    golden_dir().join(name).join("result.json")
}

/// Replays one golden run and returns the files that differ.
pub fn replay_golden(name: &str, threads: usize) -> Vec<String> {
    let tmp = tempfile::tempdir().unwrap();
    let workers = Workers::new(threads).unwrap();
    let r = replay(&golden_result(name), tmp.path(), &workers).unwrap();
    assert!(!r.files.is_empty(), "{name} recorded no files");
    r.files
        .into_iter()
        .filter(|f| !f.identical)
        .map(|f| f.file)
        .collect()
}
