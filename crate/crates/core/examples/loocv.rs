//! Leave-one-out evaluation of a model on past projects.
//!
//! ```bash
//! cargo run -p cobra --example loocv
//! ```

use cobra::prelude::*;
use cobra::synthetic::PRIMARY_EXPERT;

pub fn run_example() -> cobra::Result<()> {
    let spec = SyntheticSpec::new(reference_model(), 0.1, 16)
        .with_seed(RandomSeed(4))
        .with_noise(0.05);
    let data = generate_synthetic_dataset(&spec)?;
    let projects: Vec<EvaluationProject> = data
        .projects
        .iter()
        .map(|p| EvaluationProject {
            id: p.id.clone(),
            size: p.size.unwrap_or_default(),
            effort: p.raw_effort(),
            ratings: p.ratings[PRIMARY_EXPERT].clone(),
        })
        .collect();

    let plan = SamplePlan::latin_hypercube(2_000)?;
    let report = loocv_evaluate(
        &spec.model,
        &projects,
        &plan,
        RandomSeed(0),
        EstimateConvention::Median,
    )?;
    for fold in &report.folds {
        println!(
            "{}: actual {:>8.1}  estimate {:>8.1}  MRE {:.3}",
            fold.project_id, fold.actual, fold.estimate, fold.mre
        );
    }
    let m = &report.metrics;
    println!(
        "MMRE {:.3}  MdMRE {:.3}  Pred(0.25) {:.2}  calibrations {}",
        m.mmre, m.mdmre, m.pred25, report.calibrations
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("loocv example");
}
