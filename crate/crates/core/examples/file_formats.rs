//! Model documents (JSON) and project tables (CSV): write, read back, and
//! produce a report bundle.
//!
//! ```bash
//! cargo run -p cobra --example file_formats
//! ```

use cobra::io;
use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let dir = tempfile::tempdir().map_err(|source| cobra::Error::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let spec = SyntheticSpec::new(reference_model(), 0.1, 8).with_seed(RandomSeed(9)).with_decoys(1);
    let data = generate_synthetic_dataset(&spec)?;

    let model_path = dir.path().join("model.json");
    let data_path = dir.path().join("projects.csv");
    io::save_model(&spec.model, &model_path)?;
    io::save_projects(&data.projects, &data_path)?;

    let model = io::load_model(&model_path)?;
    let projects = io::load_projects(&data_path)?;
    assert_eq!(model, spec.model);
    assert_eq!(projects, data.projects);
    println!("{}", io::model_to_string(&model).lines().take(12).collect::<Vec<_>>().join("\n"));
    println!("{}", io::projects_to_string(&projects).lines().take(3).collect::<Vec<_>>().join("\n"));

    let config = IterationConfig {
        plan: SamplePlan::latin_hypercube(1_000)?,
        ..IterationConfig::default()
    };
    let report = run_iteration(&model, &projects, &config)?;
    let bundle = io::emit_report(&report, &dir.path().join("report"))?;
    println!("wrote {} and {}", bundle.report.display(), bundle.summary.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("file formats example");
}
