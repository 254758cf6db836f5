//! The report bundle for a fixed data set is pinned byte for byte. After an
//! intended change, regenerate with `COBRA_BLESS=1 cargo test --test golden`.

use std::path::{Path, PathBuf};

use cobra::io::{load_model, load_projects, render_summary, report_to_json};
use cobra::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("COBRA_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert!(expected == actual, "{name} differs from the pinned output");
}

#[test]
fn iteration_report_matches_pinned_output() {
    let model = load_model(&fixture("model.json")).unwrap();
    let projects = load_projects(&fixture("projects.csv")).unwrap();
    let config = IterationConfig {
        plan: SamplePlan::latin_hypercube(2_000).unwrap(),
        seed: RandomSeed(7),
        permutations: 2_000,
        ..IterationConfig::default()
    };
    let report = run_iteration(&model, &projects, &config).unwrap();
    check("expected_report.json", &report_to_json(&report));
    check("expected_summary.txt", &render_summary(&report));
}
