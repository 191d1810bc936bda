#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub fn abc_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/abc")
}

pub fn malformed_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed")
}

pub fn copy_abc(dest: &Path) {
    for entry in fs::read_dir(abc_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dest.join(entry.file_name())).unwrap();
    }
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> CliRun {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["reshoreval"];
    argv.extend_from_slice(args);
    let code = reshoreval::cli::cli_main(argv, &mut out, &mut err);
    CliRun {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// A malformed case: `<case>.<file name>` in the fixture directory.
pub struct MalformedCase {
    pub name: String,
    pub target: String,
    pub path: PathBuf,
}

pub fn malformed_cases() -> Vec<MalformedCase> {
    let mut cases: Vec<_> = fs::read_dir(malformed_dir())
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let file = path.file_name().unwrap().to_str().unwrap().to_owned();
            let (name, target) = file.split_once('.').unwrap();
            MalformedCase { name: name.to_owned(), target: target.to_owned(), path }
        })
        .collect();
    cases.sort_by(|a, b| a.name.cmp(&b.name).then(a.target.cmp(&b.target)));
    cases
}

/// Every subcommand that reads the given file.
pub fn subcommands_for(target: &str) -> &'static [&'static str] {
    match target {
        "indicators.csv" | "factors.csv" | "profiles.csv" | "weights.csv" => &["ri"],
        "screening.csv" => &["screen", "decide"],
        "scenarios.csv" | "cogs_items.csv" => &["tco", "decide"],
        "legs.csv" | "emission_factors.csv" => &["ghg", "decide"],
        _ => &["ri", "screen", "tco", "ghg", "decide"],
    }
}

/// Runs one case against every subcommand; returns a failure description or None.
pub fn check_malformed(case: &MalformedCase) -> Option<String> {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::copy(&case.path, dir.path().join(&case.target)).unwrap();
    let data = dir.path().to_str().unwrap().to_owned();
    for sub in subcommands_for(&case.target) {
        let run = std::panic::catch_unwind(|| run_cli(&[sub, "--data", &data]));
        let run = match run {
            Ok(r) => r,
            Err(_) => return Some(format!("{sub}: panicked")),
        };
        if run.code != 1 {
            return Some(format!("{sub}: exit {} (stderr: {})", run.code, run.stderr.trim()));
        }
        // Cross-reference failures may be reported against the referencing file.
        if !run.stderr.contains(&case.target) && !run.stderr.contains(": row ") {
            return Some(format!("{sub}: no located diagnostic: {}", run.stderr.trim()));
        }
    }
    None
}
