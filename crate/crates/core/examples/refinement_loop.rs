//! The refinement loop: run an iteration, let a person pick which
//! suggestions to accept, apply them to get a new dataset revision, and
//! repeat until the stop criterion is met.
//!
//! ```bash
//! cargo run -p cobra --example refinement_loop
//! ```

use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let spec = SyntheticSpec::new(reference_model(), 0.1, 16)
        .with_seed(RandomSeed(1))
        .with_noise(0.05)
        .with_decoys(5)
        .with_defect(PlantedDefect::Outlier { project: 5, factor: 4.0 })
        .with_defect(PlantedDefect::MissingPhases {
            projects: vec![1, 7, 10, 13],
            phases: vec!["requirements".into(), "test".into()],
        });
    let mut projects = generate_synthetic_dataset(&spec)?.projects;
    let config = IterationConfig {
        plan: SamplePlan::latin_hypercube(2_000)?,
        target_mmre: 0.10,
        ..IterationConfig::default()
    };

    // one kind of change per iteration, as a reviewer might decide
    let decisions = [SuggestionKind::FixEffortScope, SuggestionKind::RemoveOutlier];
    for iteration in 1.. {
        let report = run_iteration(&spec.model, &projects, &config)?;
        println!("iteration {iteration}: {}", report.stop.rationale);
        for s in &report.suggestions {
            println!("  suggests {} {} ({})", s.kind, s.subject, s.evidence);
        }
        if report.stop.stop || iteration > decisions.len() {
            break;
        }
        let accepted = decisions[iteration - 1];
        let outcome = apply_suggestions(&projects, &report, &[accepted]);
        println!("  applied {} change(s) of kind {accepted}", outcome.applied.len());
        projects = outcome.projects;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("refinement loop example");
}
