//! Pre-modeling analysis of a dataset with planted problems: data validation,
//! effort-scope harmonization, expert disagreement, driver ranking and
//! productivity outliers.
//!
//! ```bash
//! cargo run -p cobra --example pre_modeling
//! ```

use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let spec = SyntheticSpec::new(reference_model(), 0.1, 16)
        .with_seed(RandomSeed(8))
        .with_noise(0.05)
        .with_decoys(2)
        .with_defect(PlantedDefect::MissingPhases {
            projects: vec![3, 9],
            phases: vec!["test".into()],
        })
        .with_defect(PlantedDefect::DisagreeingExpert {
            projects: vec![5],
            shift: 2,
        })
        .with_defect(PlantedDefect::Outlier {
            project: 12,
            factor: 3.0,
        });
    let data = generate_synthetic_dataset(&spec)?;

    let quality = validate_data(&data.projects, Some(&spec.model), &QualityConfig::default());
    for finding in &quality.findings {
        println!("[{}] {}: {}", finding.category, finding.project_id, finding.message);
    }

    let config = IterationConfig {
        plan: SamplePlan::latin_hypercube(2_000)?,
        ..IterationConfig::default()
    };
    let report = run_iteration(&spec.model, &data.projects, &config)?;
    if let Some(ranking) = &report.ranking {
        for entry in &ranking.entries {
            println!(
                "{} {:<14} rho {:+.3}",
                if entry.selected { "*" } else { " " },
                entry.id,
                entry.rho.unwrap_or(f64::NAN)
            );
        }
    }
    println!("outliers: {:?}", report.outliers.outliers.flagged_ids());
    println!("planted:  {:?}", data.truth.outliers);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("pre-modeling example");
}
