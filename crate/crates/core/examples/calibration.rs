//! Calibrate the nominal productivity from past projects.
//!
//! ```bash
//! cargo run -p cobra --example calibration
//! ```

use cobra::prelude::*;
use cobra::synthetic::PRIMARY_EXPERT;

pub fn run_example() -> cobra::Result<()> {
    let spec = SyntheticSpec::new(reference_model(), 0.12, 12)
        .with_seed(RandomSeed(3))
        .with_noise(0.05);
    let data = generate_synthetic_dataset(&spec)?;
    let plan = SamplePlan::latin_hypercube(2_000)?;

    let mut points = Vec::new();
    for project in &data.projects {
        let ratings = &project.ratings[PRIMARY_EXPERT];
        let dist = simulate_overhead(&spec.model, ratings, &plan, RandomSeed(0).derive(&project.id))?;
        points.push(CalibrationPoint::new(
            &project.id,
            project.size.unwrap_or_default(),
            project.raw_effort(),
            mean_overhead(&dist)?,
        ));
    }
    let fit = fit_nominal_productivity(&points)?;
    println!(
        "true nominal productivity {:.4}, calibrated {:.4}",
        spec.nominal_productivity, fit.nominal_productivity
    );
    for (id, p) in &fit.per_project_nominal {
        println!("  {id}: {p:.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("calibration example");
}
