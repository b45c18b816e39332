#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use carbon_pulse::pipeline::RunConfig;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(rel: &str) -> PathBuf {
    crate_dir().join("tests/data").join(rel)
}

/// The bundled snapshot config with outputs redirected to `out`.
pub fn snapshot_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&crate_dir().join("fixtures/run.toml")).expect("snapshot config");
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// All files in `dir` except the manifest, keyed by name.
pub fn read_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).expect("output dir") {
        let e = e.expect("entry");
        let name = e.file_name().to_string_lossy().into_owned();
        if name != "manifest.json" {
            out.insert(name, std::fs::read(e.path()).expect("read"));
        }
    }
    out
}

/// One line per criterion, collected so a criterion can report several checks.
pub struct Criterion {
    name: &'static str,
    failures: Vec<String>,
    known: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    pub fn new(name: &'static str) -> Self {
        Criterion {
            name,
            failures: Vec::new(),
            known: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// A check documented as unattainable; reported but not fatal.
    pub fn check_known(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.known.push(what.into());
        }
    }

    pub fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    /// Prints the verdict and panics on unexpected failures.
    pub fn finish(self) {
        let status = if self.failures.is_empty() && self.known.is_empty() { "PASS" } else { "FAIL" };
        let mut detail: Vec<String> = self.notes.clone();
        detail.extend(self.known.iter().map(|k| format!("known: {k}")));
        detail.extend(self.failures.iter().cloned());
        println!("[{status}] {}{}", self.name, if detail.is_empty() { String::new() } else { format!(": {}", detail.join("; ")) });
        assert!(self.failures.is_empty(), "{}: {}", self.name, self.failures.join("; "));
    }
}
